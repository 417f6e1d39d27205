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

//! Hierarchical navigable small-world graph.
//!
//! Node levels are drawn geometrically with `mL = 1 / ln(M)`. Each insertion
//! descends greedily through the upper layers, then runs a beam search of
//! width `ef_construction` on every layer at or below the node's level and
//! keeps up to the layer's capacity of neighbors chosen by the diversity
//! heuristic (a candidate is kept only if it is closer to the new node than
//! to every neighbor already kept). Layer 0 holds at most `2 * M` links per
//! node, upper layers `M`; overflowing lists are re-pruned with the same
//! heuristic.

use std::borrow::Cow;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sq::{ScalarQuantizer, SqCodes};
use super::store::{Candidate, VectorStore};
use super::{HnswParams, Metric, Result};
use crate::vectorize::Vector;

/// Distance oracle the graph is built over.
pub(crate) trait Space {
    fn len(&self) -> usize;
    /// Vector of node `id` as a query.
    fn target(&self, id: usize) -> Cow<'_, [f32]>;
    fn query_cost(&self, q: &[f32], id: usize) -> f32;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) enum HnswSpace {
    Raw { metric: Metric, store: VectorStore },
    Sq { metric: Metric, codes: SqCodes },
}

impl Space for HnswSpace {
    fn len(&self) -> usize {
        match self {
            Self::Raw { store, .. } => store.len(),
            Self::Sq { codes, .. } => codes.len(),
        }
    }

    fn target(&self, id: usize) -> Cow<'_, [f32]> {
        match self {
            Self::Raw { store, .. } => Cow::Borrowed(store.row(id)),
            Self::Sq { codes, .. } => Cow::Owned(codes.decode_row(id)),
        }
    }

    #[inline]
    fn query_cost(&self, q: &[f32], id: usize) -> f32 {
        match self {
            Self::Raw { metric, store } => metric.dense_cost(q, store.row(id)),
            Self::Sq { metric, codes } => codes.cost(*metric, q, id),
        }
    }
}

struct Visited(Vec<u64>);

impl Visited {
    fn new(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    /// Marks `id`, returning whether it was unmarked.
    #[inline]
    fn insert(&mut self, id: u32) -> bool {
        let (w, b) = ((id / 64) as usize, id % 64);
        let fresh = self.0[w] & (1 << b) == 0;
        self.0[w] |= 1 << b;
        fresh
    }
}

/// Best-first beam search over an adjacency function; returns up to `ef`
/// candidates in ascending cost.
pub(crate) fn beam_search<'a, S: Space>(
    space: &S,
    neighbors: impl Fn(u32) -> &'a [u32],
    q: &[f32],
    entries: &[Candidate],
    ef: usize,
) -> Vec<Candidate> {
    let mut visited = Visited::new(space.len());
    let mut frontier: BinaryHeap<Reverse<Candidate>> = BinaryHeap::new();
    let mut best: BinaryHeap<Candidate> = BinaryHeap::new();
    for &e in entries {
        if visited.insert(e.id) {
            frontier.push(Reverse(e));
            best.push(e);
        }
    }
    while best.len() > ef {
        best.pop();
    }
    while let Some(Reverse(c)) = frontier.pop() {
        if best.len() >= ef && c > *best.peek().unwrap() {
            break;
        }
        for &nb in neighbors(c.id) {
            if !visited.insert(nb) {
                continue;
            }
            let cand = Candidate::new(space.query_cost(q, nb as usize), nb as usize);
            if best.len() < ef || cand < *best.peek().unwrap() {
                frontier.push(Reverse(cand));
                best.push(cand);
                if best.len() > ef {
                    best.pop();
                }
            }
        }
    }
    best.into_sorted_vec()
}

/// Keeps a candidate only when no already-kept neighbor is closer to it than
/// the base node is. `candidates` must be ascending by cost to the base node.
pub(crate) fn select_diverse<S: Space>(space: &S, candidates: &[Candidate], m: usize) -> Vec<u32> {
    if candidates.len() <= m {
        return candidates.iter().map(|c| c.id).collect();
    }
    let mut kept: Vec<u32> = Vec::with_capacity(m);
    for c in candidates {
        if kept.len() >= m {
            break;
        }
        let v = space.target(c.id as usize);
        if kept.iter().all(|&r| space.query_cost(&v, r as usize) >= c.cost) {
            kept.push(c.id);
        }
    }
    kept
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct HnswGraph {
    /// `links[node][layer]`.
    links: Vec<Vec<Vec<u32>>>,
    entry: u32,
    max_level: usize,
    m: usize,
}

impl HnswGraph {
    fn capacity(&self, layer: usize) -> usize {
        if layer == 0 {
            2 * self.m
        } else {
            self.m
        }
    }

    pub fn degrees(&self, layer: usize) -> Vec<usize> {
        self.links
            .iter()
            .map(|l| l.get(layer).map_or(0, Vec::len))
            .collect()
    }

    pub fn layer_max_degrees(&self) -> Vec<usize> {
        (0..=self.max_level)
            .map(|l| self.degrees(l).into_iter().max().unwrap_or(0))
            .collect()
    }

    fn greedy<S: Space>(&self, space: &S, q: &[f32], mut cur: Candidate, layer: usize) -> Candidate {
        loop {
            let mut best = cur;
            for &nb in &self.links[cur.id as usize][layer] {
                let c = Candidate::new(space.query_cost(q, nb as usize), nb as usize);
                if c < best {
                    best = c;
                }
            }
            if best == cur {
                return cur;
            }
            cur = best;
        }
    }

    fn search_layer<S: Space>(
        &self,
        space: &S,
        q: &[f32],
        entries: &[Candidate],
        ef: usize,
        layer: usize,
    ) -> Vec<Candidate> {
        beam_search(space, |id| &self.links[id as usize][layer], q, entries, ef)
    }

    fn build<S: Space>(space: &S, params: HnswParams, seed: u64) -> Self {
        let n = space.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ml = 1.0 / (params.m as f64).ln();
        let mut graph = Self {
            links: Vec::with_capacity(n),
            entry: 0,
            max_level: 0,
            m: params.m,
        };
        for id in 0..n {
            let u: f64 = rng.random();
            let level = (-(1.0 - u).ln() * ml).floor() as usize;
            graph.links.push(vec![Vec::new(); level + 1]);
            if id == 0 {
                graph.max_level = level;
                continue;
            }
            let q = space.target(id);
            let entry = graph.entry as usize;
            let mut ep = Candidate::new(space.query_cost(&q, entry), entry);
            for layer in (level + 1..=graph.max_level).rev() {
                ep = graph.greedy(space, &q, ep, layer);
            }
            let mut entries = vec![ep];
            for layer in (0..=level.min(graph.max_level)).rev() {
                let found = graph.search_layer(space, &q, &entries, params.ef_construction, layer);
                let chosen = select_diverse(space, &found, graph.capacity(layer));
                for &nb in &chosen {
                    graph.link(space, nb as usize, id as u32, layer);
                }
                graph.links[id][layer] = chosen;
                entries = found;
            }
            if level > graph.max_level {
                graph.max_level = level;
                graph.entry = id as u32;
            }
        }
        graph
    }

    /// Adds `from -> to`, re-pruning `from` when over capacity.
    fn link<S: Space>(&mut self, space: &S, from: usize, to: u32, layer: usize) {
        let cap = self.capacity(layer);
        let list = &mut self.links[from][layer];
        list.push(to);
        if list.len() <= cap {
            return;
        }
        let base = space.target(from);
        let mut cands: Vec<Candidate> = list
            .iter()
            .map(|&x| Candidate::new(space.query_cost(&base, x as usize), x as usize))
            .collect();
        cands.sort_unstable();
        let pruned = select_diverse(space, &cands, cap);
        self.links[from][layer] = pruned;
    }

    fn search<S: Space>(&self, space: &S, q: &[f32], k: usize, ef: usize) -> Vec<Candidate> {
        let entry = self.entry as usize;
        let mut ep = Candidate::new(space.query_cost(q, entry), entry);
        for layer in (1..=self.max_level).rev() {
            ep = self.greedy(space, q, ep, layer);
        }
        let mut found = self.search_layer(space, q, &[ep], ef.max(k), 0);
        found.truncate(k);
        found
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct HnswIndex {
    params: HnswParams,
    space: HnswSpace,
    graph: HnswGraph,
}

impl HnswIndex {
    pub fn build_raw(store: VectorStore, metric: Metric, params: HnswParams, seed: u64) -> Self {
        let space = HnswSpace::Raw { metric, store };
        let graph = HnswGraph::build(&space, params, seed);
        Self { params, space, graph }
    }

    pub fn build_sq(store: VectorStore, metric: Metric, params: HnswParams, seed: u64) -> Self {
        let space = HnswSpace::Sq {
            metric,
            codes: SqCodes::encode_store(&store),
        };
        let graph = HnswGraph::build(&space, params, seed);
        Self { params, space, graph }
    }

    pub fn graph(&self) -> &HnswGraph {
        &self.graph
    }

    pub fn quantizer(&self) -> Option<&ScalarQuantizer> {
        match &self.space {
            HnswSpace::Sq { codes, .. } => Some(codes.quantizer()),
            HnswSpace::Raw { .. } => None,
        }
    }

    pub fn search(&self, query: &Vector, k: usize) -> Result<Vec<Candidate>> {
        let q = query.to_dense().0;
        Ok(self.graph.search(&self.space, &q, k, self.params.ef_search))
    }
}
