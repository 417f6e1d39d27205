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

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{IndexError, Metric};
use crate::vectorize::{SparseVector, Vector};

/// (cost, id) pair ordered by cost, then id. Lower is better.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Candidate {
    pub cost: f32,
    pub id: u32,
}

impl Candidate {
    pub fn new(cost: f32, id: usize) -> Self {
        Self { cost, id: id as u32 }
    }
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.id.cmp(&other.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `k` smallest candidates in ascending order.
pub(crate) fn top_k(candidates: impl IntoIterator<Item = Candidate>, k: usize) -> Vec<Candidate> {
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
    for c in candidates {
        if heap.len() < k {
            heap.push(c);
        } else if let Some(worst) = heap.peek() {
            if c < *worst {
                heap.pop();
                heap.push(c);
            }
        }
    }
    heap.into_sorted_vec()
}

/// A query in the representation of the store it is searched against.
#[derive(Debug, Clone)]
pub(crate) enum PreparedQuery {
    Dense(Vec<f32>),
    Sparse(SparseVector),
}

/// Raw vectors, row-major when dense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) enum VectorStore {
    Dense { dim: usize, data: Vec<f32> },
    Sparse { dim: usize, rows: Vec<SparseVector> },
}

impl VectorStore {
    /// Sparse input is kept sparse unless `densify` is set. Mixed
    /// representations and dimensions are rejected.
    pub fn from_vectors(vectors: &[Vector], densify: bool) -> Result<Self, IndexError> {
        let first = vectors.first().ok_or(IndexError::EmptyInput)?;
        let dim = first.dim();
        let sparse = first.is_sparse();
        for v in vectors {
            if v.dim() != dim {
                return Err(IndexError::DimensionMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
            if v.is_sparse() != sparse {
                return Err(IndexError::MixedRepresentation);
            }
        }
        if sparse && !densify {
            let rows = vectors
                .iter()
                .map(|v| match v {
                    Vector::Sparse(s) => s.clone(),
                    Vector::Dense(_) => unreachable!(),
                })
                .collect();
            return Ok(Self::Sparse { dim, rows });
        }
        let mut data = Vec::with_capacity(dim * vectors.len());
        for v in vectors {
            match v {
                Vector::Dense(d) => data.extend_from_slice(d.as_slice()),
                Vector::Sparse(s) => data.extend(s.to_dense().0),
            }
        }
        Ok(Self::Dense { dim, data })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense { dim, .. } | Self::Sparse { dim, .. } => *dim,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Dense { dim, data } => data.len() / dim.max(&1),
            Self::Sparse { rows, .. } => rows.len(),
        }
    }

    /// Row `id` of a dense store.
    pub fn row(&self, id: usize) -> &[f32] {
        match self {
            Self::Dense { dim, data } => &data[id * dim..(id + 1) * dim],
            Self::Sparse { .. } => panic!("row() on a sparse store"),
        }
    }

    pub fn prepare(&self, query: &Vector) -> Result<PreparedQuery, IndexError> {
        if query.dim() != self.dim() {
            return Err(IndexError::DimensionMismatch {
                expected: self.dim(),
                got: query.dim(),
            });
        }
        match (self, query) {
            (Self::Dense { .. }, Vector::Dense(d)) => Ok(PreparedQuery::Dense(d.0.clone())),
            (Self::Dense { .. }, Vector::Sparse(s)) => Ok(PreparedQuery::Dense(s.to_dense().0)),
            (Self::Sparse { .. }, Vector::Sparse(s)) => Ok(PreparedQuery::Sparse(s.clone())),
            (Self::Sparse { .. }, Vector::Dense(_)) => Err(IndexError::MixedRepresentation),
        }
    }

    pub fn cost(&self, metric: Metric, query: &PreparedQuery, id: usize) -> f32 {
        match (self, query) {
            (Self::Dense { .. }, PreparedQuery::Dense(q)) => metric.dense_cost(q, self.row(id)),
            (Self::Sparse { rows, .. }, PreparedQuery::Sparse(q)) => metric.sparse_cost(q, &rows[id]),
            _ => unreachable!("query prepared for a different store"),
        }
    }

    /// Rows as dense vectors, for stages that need dense arithmetic.
    pub fn dense_rows(&self) -> Vec<Vec<f32>> {
        match self {
            Self::Dense { .. } => (0..self.len()).map(|i| self.row(i).to_vec()).collect(),
            Self::Sparse { rows, .. } => rows.iter().map(|r| r.to_dense().0).collect(),
        }
    }
}
