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

//! Seeded Lloyd k-means used as the IVF coarse quantizer.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metric::l2_squared;
use super::store::{PreparedQuery, VectorStore};
use super::Metric;
use crate::vectorize::SparseVector;

/// Dense centroids with cached norms so that sparse vectors can be compared
/// against them without densifying.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct Centroids {
    dim: usize,
    data: Vec<f32>,
    sq_norms: Vec<f32>,
    abs_sums: Vec<f32>,
}

impl Centroids {
    fn from_rows(dim: usize, data: Vec<f32>) -> Self {
        let rows = data.chunks(dim.max(1));
        let sq_norms = rows.clone().map(|r| r.iter().map(|x| x * x).sum()).collect();
        let abs_sums = rows.map(|r| r.iter().map(|x| x.abs()).sum()).collect();
        Self {
            dim,
            data,
            sq_norms,
            abs_sums,
        }
    }

    pub fn len(&self) -> usize {
        self.sq_norms.len()
    }

    pub fn row(&self, c: usize) -> &[f32] {
        &self.data[c * self.dim..(c + 1) * self.dim]
    }

    fn sparse_cost(&self, metric: Metric, q: &SparseVector, c: usize) -> f32 {
        let row = self.row(c);
        match metric {
            Metric::L2 => {
                let mut acc = self.sq_norms[c];
                for &(i, w) in q.entries() {
                    let y = row[i as usize];
                    acc += w * w - 2.0 * w * y;
                }
                acc.max(0.0)
            }
            Metric::L1 => {
                let mut acc = self.abs_sums[c];
                for &(i, w) in q.entries() {
                    let y = row[i as usize];
                    acc += (w - y).abs() - y.abs();
                }
                acc.max(0.0)
            }
            Metric::Ip => -q.entries().iter().map(|&(i, w)| w * row[i as usize]).sum::<f32>(),
        }
    }

    pub fn cost(&self, metric: Metric, q: &PreparedQuery, c: usize) -> f32 {
        match q {
            PreparedQuery::Dense(v) => metric.dense_cost(v, self.row(c)),
            PreparedQuery::Sparse(s) => self.sparse_cost(metric, s, c),
        }
    }

    fn store_row_l2(&self, store: &VectorStore, i: usize, c: usize) -> f32 {
        match store {
            VectorStore::Dense { .. } => l2_squared(store.row(i), self.row(c)),
            VectorStore::Sparse { rows, .. } => self.sparse_cost(Metric::L2, &rows[i], c),
        }
    }

    /// Nearest centroid under squared L2, ties to the lowest index.
    pub fn nearest_l2(&self, store: &VectorStore, i: usize) -> (usize, f32) {
        let mut best = (0, f32::INFINITY);
        for c in 0..self.len() {
            let d = self.store_row_l2(store, i, c);
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    }
}

/// Runs `iters` Lloyd iterations from `k` distinct random points. Empty
/// clusters are reseeded with the point farthest from its own centroid.
pub(crate) fn kmeans(store: &VectorStore, k: usize, iters: usize, seed: u64) -> Centroids {
    let n = store.len();
    let dim = store.dim();
    assert!(k >= 1 && k <= n, "k-means needs 1 <= k <= n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut init: Vec<usize> = sample(&mut rng, n, k).into_vec();
    init.sort_unstable();

    let row_dense = |i: usize| -> Vec<f32> {
        match store {
            VectorStore::Dense { .. } => store.row(i).to_vec(),
            VectorStore::Sparse { rows, .. } => rows[i].to_dense().0,
        }
    };
    let mut data: Vec<f32> = init.iter().flat_map(|&i| row_dense(i)).collect();
    let mut centroids = Centroids::from_rows(dim, data.clone());
    let mut assignment: Vec<usize> = Vec::new();

    for _ in 0..iters {
        let assigned: Vec<(usize, f32)> = (0..n)
            .into_par_iter()
            .map(|i| centroids.nearest_l2(store, i))
            .collect();
        let next: Vec<usize> = assigned.iter().map(|a| a.0).collect();
        if next == assignment {
            break;
        }
        assignment = next;

        let mut sums = vec![0.0f64; k * dim];
        let mut counts = vec![0usize; k];
        for (i, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            let acc = &mut sums[c * dim..(c + 1) * dim];
            match store {
                VectorStore::Dense { .. } => {
                    for (a, &x) in acc.iter_mut().zip(store.row(i)) {
                        *a += f64::from(x);
                    }
                }
                VectorStore::Sparse { rows, .. } => {
                    for &(j, w) in rows[i].entries() {
                        acc[j as usize] += f64::from(w);
                    }
                }
            }
        }

        // farthest points first, ties to lower id
        let mut by_distance: Vec<usize> = (0..n).collect();
        by_distance.sort_by(|&a, &b| assigned[b].1.total_cmp(&assigned[a].1).then(a.cmp(&b)));
        let mut donors = by_distance.into_iter();

        data.clear();
        for c in 0..k {
            if counts[c] == 0 {
                let donor = donors.next().expect("more points than clusters");
                data.extend(row_dense(donor));
            } else {
                let inv = 1.0 / counts[c] as f64;
                data.extend(sums[c * dim..(c + 1) * dim].iter().map(|s| (s * inv) as f32));
            }
        }
        centroids = Centroids::from_rows(dim, data.clone());
    }
    centroids
}
