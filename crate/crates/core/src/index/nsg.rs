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

//! Navigating spreading-out graph.
//!
//! Built from an exact `knn_k`-nearest-neighbor graph whose edges are pruned
//! with the monotonic relative neighborhood rule down to `out_degree`. Reverse
//! edges are added under the same rule, then any node unreachable from the
//! navigating node (the point nearest the data mean) is attached to its
//! nearest reachable node. Search is a beam search from the navigating node.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hnsw::{beam_search, select_diverse, HnswSpace, Space};
use super::metric::l2_squared;
use super::store::{top_k, Candidate, VectorStore};
use super::{Metric, NsgParams, Result};
use crate::vectorize::Vector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct NsgIndex {
    params: NsgParams,
    space: HnswSpace,
    graph: Vec<Vec<u32>>,
    entry: u32,
}

impl NsgIndex {
    pub fn build(store: VectorStore, metric: Metric, params: NsgParams) -> Self {
        let n = store.len();
        let space = HnswSpace::Raw { metric, store };
        let k = params.knn_k.min(n.saturating_sub(1));

        let knn: Vec<Vec<Candidate>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let v = space.target(i);
                top_k(
                    (0..n)
                        .filter(|&j| j != i)
                        .map(|j| Candidate::new(space.query_cost(&v, j), j)),
                    k,
                )
            })
            .collect();

        let pruned: Vec<Vec<u32>> = knn
            .par_iter()
            .map(|cands| select_diverse(&space, cands, params.out_degree))
            .collect();

        let mut graph = pruned.clone();
        for (p, edges) in pruned.iter().enumerate() {
            for &q in edges {
                let list = &mut graph[q as usize];
                if list.contains(&(p as u32)) {
                    continue;
                }
                list.push(p as u32);
                if list.len() > params.out_degree {
                    let base = space.target(q as usize);
                    let mut cands: Vec<Candidate> = list
                        .iter()
                        .map(|&x| Candidate::new(space.query_cost(&base, x as usize), x as usize))
                        .collect();
                    cands.sort_unstable();
                    graph[q as usize] = select_diverse(&space, &cands, params.out_degree);
                }
            }
        }

        let entry = medoid(&space);
        let mut index = Self {
            params,
            space,
            graph,
            entry,
        };
        index.connect();
        index
    }

    /// Attaches every unreachable node to its nearest reachable node.
    fn connect(&mut self) {
        let n = self.graph.len();
        let mut reached = vec![false; n];
        self.flood(self.entry, &mut reached);
        for u in 0..n {
            if reached[u] {
                continue;
            }
            let v = self.space.target(u);
            let nearest = (0..n)
                .filter(|&r| reached[r])
                .map(|r| Candidate::new(self.space.query_cost(&v, r), r))
                .min()
                .expect("entry is always reached");
            self.graph[nearest.id as usize].push(u as u32);
            self.flood(u as u32, &mut reached);
        }
    }

    fn flood(&self, start: u32, reached: &mut [bool]) {
        let mut queue = VecDeque::from([start]);
        reached[start as usize] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &self.graph[x as usize] {
                if !reached[y as usize] {
                    reached[y as usize] = true;
                    queue.push_back(y);
                }
            }
        }
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.graph.iter().map(Vec::len).collect()
    }

    pub fn is_connected(&self) -> bool {
        let mut reached = vec![false; self.graph.len()];
        self.flood(self.entry, &mut reached);
        reached.into_iter().all(|r| r)
    }

    pub fn search(&self, query: &Vector, k: usize) -> Result<Vec<Candidate>> {
        let q = query.to_dense().0;
        let entry = self.entry as usize;
        let start = Candidate::new(self.space.query_cost(&q, entry), entry);
        let mut found = beam_search(
            &self.space,
            |id| &self.graph[id as usize],
            &q,
            &[start],
            self.params.search_l.max(k),
        );
        found.truncate(k);
        Ok(found)
    }
}

/// Node nearest (L2) to the mean of all nodes.
fn medoid(space: &HnswSpace) -> u32 {
    let n = space.len();
    let dim = space.target(0).len();
    let mut mean = vec![0.0f64; dim];
    for i in 0..n {
        for (m, &x) in mean.iter_mut().zip(space.target(i).iter()) {
            *m += f64::from(x);
        }
    }
    let mean: Vec<f32> = mean.iter().map(|m| (m / n as f64) as f32).collect();
    (0..n)
        .map(|i| Candidate::new(l2_squared(&mean, &space.target(i)), i))
        .min()
        .map_or(0, |c| c.id)
}
