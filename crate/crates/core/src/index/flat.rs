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

use super::store::{top_k, Candidate, VectorStore};
use super::{Metric, Result};
use crate::vectorize::Vector;

/// Exhaustive scan over raw vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct FlatIndex {
    store: VectorStore,
}

impl FlatIndex {
    pub fn new(store: VectorStore) -> Self {
        Self { store }
    }

    pub fn search(&self, metric: Metric, query: &Vector, k: usize) -> Result<Vec<Candidate>> {
        let q = self.store.prepare(query)?;
        Ok(top_k(
            (0..self.store.len()).map(|id| Candidate::new(self.store.cost(metric, &q, id), id)),
            k,
        ))
    }
}
