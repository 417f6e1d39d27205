// Copyright 2026 The vrb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Random-hyperplane LSH: one sign bit per Gaussian hyperplane, candidates
//! ranked by Hamming distance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::store::{top_k, Candidate, VectorStore};
use super::{ScoreOrder, SearchResult};
use crate::vectorize::Vector;

/// `n_bits` Gaussian hyperplanes through the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomHyperplanes {
    dim: usize,
    n_bits: usize,
    planes: Vec<f32>,
}

impl RandomHyperplanes {
    pub fn new(dim: usize, n_bits: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let planes = (0..dim * n_bits)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Self { dim, n_bits, planes }
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn words(&self) -> usize {
        self.n_bits.div_ceil(64)
    }

    /// Bit `b` is set when the projection on plane `b` is positive.
    pub fn code(&self, v: &Vector) -> Vec<u64> {
        assert_eq!(v.dim(), self.dim, "hyperplane dimension mismatch");
        let mut code = vec![0u64; self.words()];
        for b in 0..self.n_bits {
            let plane = &self.planes[b * self.dim..(b + 1) * self.dim];
            let proj: f32 = match v {
                Vector::Dense(d) => super::dot(d.as_slice(), plane),
                Vector::Sparse(s) => s.entries().iter().map(|&(i, w)| w * plane[i as usize]).sum(),
            };
            if proj > 0.0 {
                code[b / 64] |= 1 << (b % 64);
            }
        }
        code
    }
}

pub fn hamming(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct LshIndex {
    hasher: RandomHyperplanes,
    codes: Vec<u64>,
}

impl LshIndex {
    pub fn build(store: &VectorStore, n_bits: usize, seed: u64) -> Self {
        let hasher = RandomHyperplanes::new(store.dim(), n_bits, seed);
        let codes = match store {
            VectorStore::Dense { .. } => (0..store.len())
                .flat_map(|i| hasher.code(&Vector::from(store.row(i).to_vec())))
                .collect(),
            VectorStore::Sparse { rows, .. } => rows
                .iter()
                .flat_map(|r| hasher.code(&Vector::Sparse(r.clone())))
                .collect(),
        };
        Self { hasher, codes }
    }

    pub fn search(&self, query: &Vector, k: usize) -> SearchResult {
        let q = self.hasher.code(query);
        let w = self.hasher.words();
        let found = top_k(
            self.codes
                .chunks(w)
                .enumerate()
                .map(|(id, c)| Candidate::new(hamming(&q, c) as f32, id)),
            k,
        );
        SearchResult {
            ids: found.iter().map(|c| c.id as usize).collect(),
            scores: found.iter().map(|c| c.cost).collect(),
            order: ScoreOrder::Ascending,
        }
    }
}
