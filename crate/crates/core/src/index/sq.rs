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

//! 8-bit scalar quantization with per-dimension min/max.
//!
//! `code = round(255 * (x - min) / (max - min))`, decoded as
//! `min + code * (max - min) / 255`. Reconstruction error per dimension is at
//! most `(max - min) / 510` for values inside the trained range.

use serde::{Deserialize, Serialize};

use super::store::{top_k, Candidate, VectorStore};
use super::{Metric, Result};
use crate::vectorize::Vector;

const LEVELS: f64 = 255.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarQuantizer {
    mins: Vec<f32>,
    maxs: Vec<f32>,
    steps: Vec<f32>,
}

impl ScalarQuantizer {
    /// Per-dimension range over `rows`. Panics on empty input.
    pub fn train<R: AsRef<[f32]>>(rows: &[R]) -> Self {
        let dim = rows[0].as_ref().len();
        let mut mins = vec![f32::INFINITY; dim];
        let mut maxs = vec![f32::NEG_INFINITY; dim];
        for row in rows {
            for (j, &x) in row.as_ref().iter().enumerate() {
                mins[j] = mins[j].min(x);
                maxs[j] = maxs[j].max(x);
            }
        }
        let steps = mins
            .iter()
            .zip(&maxs)
            .map(|(&lo, &hi)| ((f64::from(hi) - f64::from(lo)) / LEVELS) as f32)
            .collect();
        Self { mins, maxs, steps }
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    pub fn mins(&self) -> &[f32] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f32] {
        &self.maxs
    }

    pub fn encode(&self, x: &[f32]) -> Vec<u8> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                let (lo, hi) = (f64::from(self.mins[j]), f64::from(self.maxs[j]));
                if hi <= lo {
                    return 0;
                }
                (LEVELS * (f64::from(v) - lo) / (hi - lo)).round().clamp(0.0, LEVELS) as u8
            })
            .collect()
    }

    pub fn decode(&self, codes: &[u8]) -> Vec<f32> {
        codes
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let (lo, hi) = (f64::from(self.mins[j]), f64::from(self.maxs[j]));
                (lo + f64::from(c) * (hi - lo) / LEVELS) as f32
            })
            .collect()
    }

    #[inline]
    fn value(&self, j: usize, code: u8) -> f32 {
        self.mins[j] + f32::from(code) * self.steps[j]
    }
}

/// Codes for a set of vectors sharing one quantizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct SqCodes {
    quantizer: ScalarQuantizer,
    codes: Vec<u8>,
}

impl SqCodes {
    pub fn encode_store(store: &VectorStore) -> Self {
        let rows = store.dense_rows();
        let quantizer = ScalarQuantizer::train(&rows);
        let codes = rows.iter().flat_map(|r| quantizer.encode(r)).collect();
        Self { quantizer, codes }
    }

    pub fn quantizer(&self) -> &ScalarQuantizer {
        &self.quantizer
    }

    pub fn len(&self) -> usize {
        self.codes.len() / self.quantizer.dim().max(1)
    }

    fn code_row(&self, id: usize) -> &[u8] {
        let d = self.quantizer.dim();
        &self.codes[id * d..(id + 1) * d]
    }

    /// Cost between a dense query and decoded vector `id`.
    pub fn cost(&self, metric: Metric, q: &[f32], id: usize) -> f32 {
        let codes = self.code_row(id);
        let values = codes.iter().enumerate().map(|(j, &c)| self.quantizer.value(j, c));
        match metric {
            Metric::L2 => q.iter().zip(values).map(|(a, b)| (a - b) * (a - b)).sum(),
            Metric::L1 => q.iter().zip(values).map(|(a, b)| (a - b).abs()).sum(),
            Metric::Ip => -q.iter().zip(values).map(|(a, b)| a * b).sum::<f32>(),
        }
    }

    pub fn decode_row(&self, id: usize) -> Vec<f32> {
        self.code_row(id)
            .iter()
            .enumerate()
            .map(|(j, &c)| self.quantizer.value(j, c))
            .collect()
    }
}

/// Exhaustive scan over 8-bit codes with a float query.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct SqIndex {
    dim: usize,
    codes: SqCodes,
}

impl SqIndex {
    pub fn build(store: &VectorStore) -> Self {
        Self {
            dim: store.dim(),
            codes: SqCodes::encode_store(store),
        }
    }

    pub fn codes(&self) -> &SqCodes {
        &self.codes
    }

    pub fn search(&self, metric: Metric, query: &Vector, k: usize) -> Result<Vec<Candidate>> {
        let q = query.to_dense().0;
        debug_assert_eq!(q.len(), self.dim);
        Ok(top_k(
            (0..self.codes.len()).map(|id| Candidate::new(self.codes.cost(metric, &q, id), id)),
            k,
        ))
    }
}
