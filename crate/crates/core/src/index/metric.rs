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

//! Distance kernels.
//!
//! Every index ranks by a *cost* where lower is better: squared L2, L1, or the
//! negated dot product. [`Metric::score`] converts a cost back into the value
//! reported to callers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IndexError;
use crate::vectorize::{SparseVector, Vector};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    L2,
    L1,
    Ip,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::L2, Metric::L1, Metric::Ip];

    pub fn name(self) -> &'static str {
        match self {
            Self::L2 => "l2",
            Self::L1 => "l1",
            Self::Ip => "ip",
        }
    }

    /// Scores are similarities (descending) for IP, distances otherwise.
    pub fn higher_is_better(self) -> bool {
        self == Self::Ip
    }

    pub fn score(self, cost: f32) -> f32 {
        match self {
            Self::Ip => -cost,
            _ => cost,
        }
    }

    pub fn dense_cost(self, a: &[f32], b: &[f32]) -> f32 {
        match self {
            Self::L2 => l2_squared(a, b),
            Self::L1 => l1(a, b),
            Self::Ip => -dot(a, b),
        }
    }

    pub fn sparse_cost(self, a: &SparseVector, b: &SparseVector) -> f32 {
        match self {
            Self::L2 => sparse_l2_squared(a, b),
            Self::L1 => sparse_l1(a, b),
            Self::Ip => -sparse_dot(a, b),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(Self::L2),
            "l1" => Ok(Self::L1),
            "ip" | "inner_product" | "dot" => Ok(Self::Ip),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

#[inline]
pub fn l2_squared(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn l1(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Merge walk over the union of non-zero positions.
fn sparse_merge(a: &SparseVector, b: &SparseVector, f: impl Fn(f32, f32) -> f32) -> f32 {
    let (a, b) = (a.entries(), b.entries());
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0f32;
    while i < a.len() || j < b.len() {
        let (x, y) = match (a.get(i), b.get(j)) {
            (Some(&(ia, wa)), Some(&(ib, wb))) if ia == ib => {
                i += 1;
                j += 1;
                (wa, wb)
            }
            (Some(&(ia, wa)), Some(&(ib, _))) if ia < ib => {
                i += 1;
                (wa, 0.0)
            }
            (Some(&(_, wa)), None) => {
                i += 1;
                (wa, 0.0)
            }
            (_, Some(&(_, wb))) => {
                j += 1;
                (0.0, wb)
            }
            (None, None) => unreachable!(),
        };
        acc += f(x, y);
    }
    acc
}

pub fn sparse_l2_squared(a: &SparseVector, b: &SparseVector) -> f32 {
    sparse_merge(a, b, |x, y| (x - y) * (x - y))
}

pub fn sparse_l1(a: &SparseVector, b: &SparseVector) -> f32 {
    sparse_merge(a, b, |x, y| (x - y).abs())
}

pub fn sparse_dot(a: &SparseVector, b: &SparseVector) -> f32 {
    let (a, b) = (a.entries(), b.entries());
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0f32;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Distance between two vectors of the same representation. L2 is squared.
pub fn distance(metric: Metric, a: &Vector, b: &Vector) -> Result<f32, IndexError> {
    if a.dim() != b.dim() {
        return Err(IndexError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let cost = match (a, b) {
        (Vector::Dense(x), Vector::Dense(y)) => metric.dense_cost(x.as_slice(), y.as_slice()),
        (Vector::Sparse(x), Vector::Sparse(y)) => metric.sparse_cost(x, y),
        _ => return Err(IndexError::MixedRepresentation),
    };
    Ok(metric.score(cost))
}
