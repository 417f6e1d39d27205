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

use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans, Centroids};
use super::sq::{ScalarQuantizer, SqCodes};
use super::store::{top_k, Candidate, PreparedQuery, VectorStore};
use super::{IvfParams, Metric, Result};
use crate::vectorize::Vector;

#[derive(Debug, Clone, Serialize, Deserialize)]
enum ListStorage {
    Raw(VectorStore),
    /// Codes quantize the raw vectors, not residuals.
    Sq { dim: usize, codes: SqCodes },
}

/// Inverted-file index: k-means partition, `nprobe` nearest lists scanned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct IvfIndex {
    metric: Metric,
    nprobe: usize,
    centroids: Centroids,
    lists: Vec<Vec<u32>>,
    storage: ListStorage,
}

impl IvfIndex {
    pub fn build(store: VectorStore, metric: Metric, params: IvfParams, sq: bool, seed: u64) -> Self {
        let (nlist, nprobe) = params.resolve(store.len());
        let centroids = kmeans(&store, nlist, params.kmeans_iters, seed);
        let mut lists = vec![Vec::new(); nlist];
        for i in 0..store.len() {
            lists[centroids.nearest_l2(&store, i).0].push(i as u32);
        }
        let storage = if sq {
            ListStorage::Sq {
                dim: store.dim(),
                codes: SqCodes::encode_store(&store),
            }
        } else {
            ListStorage::Raw(store)
        };
        Self {
            metric,
            nprobe,
            centroids,
            lists,
            storage,
        }
    }

    pub fn list_sizes(&self) -> Vec<usize> {
        self.lists.iter().map(Vec::len).collect()
    }

    pub fn quantizer(&self) -> Option<&ScalarQuantizer> {
        match &self.storage {
            ListStorage::Sq { codes, .. } => Some(codes.quantizer()),
            ListStorage::Raw(_) => None,
        }
    }

    pub fn search(&self, query: &Vector, k: usize) -> Result<Vec<Candidate>> {
        self.search_with_nprobe(query, k, self.nprobe)
    }

    pub fn search_with_nprobe(&self, query: &Vector, k: usize, nprobe: usize) -> Result<Vec<Candidate>> {
        let metric = self.metric;
        let q = match &self.storage {
            ListStorage::Raw(store) => store.prepare(query)?,
            ListStorage::Sq { .. } => PreparedQuery::Dense(query.to_dense().0),
        };
        let probes = top_k(
            (0..self.centroids.len()).map(|c| Candidate::new(self.centroids.cost(metric, &q, c), c)),
            nprobe.min(self.centroids.len()),
        );
        let members = probes
            .iter()
            .flat_map(|p| self.lists[p.id as usize].iter().map(|&id| id as usize));
        let found = match &self.storage {
            ListStorage::Raw(store) => top_k(
                members.map(|id| Candidate::new(store.cost(metric, &q, id), id)),
                k,
            ),
            ListStorage::Sq { codes, .. } => {
                let PreparedQuery::Dense(dq) = &q else {
                    unreachable!()
                };
                top_k(members.map(|id| Candidate::new(codes.cost(metric, dq, id), id)), k)
            }
        };
        Ok(found)
    }
}
