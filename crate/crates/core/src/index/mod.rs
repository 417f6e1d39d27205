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

//! Vector indexes over sparse or dense vectors.
//!
//! Families:
//!
//! | family   | storage                         | search                              |
//! |----------|---------------------------------|-------------------------------------|
//! | Flat     | raw vectors (sparse kept sparse) | exhaustive scan                    |
//! | HNSW     | dense vectors + layered graph   | greedy descent, beam at layer 0     |
//! | IVFFlat  | k-means lists of raw vectors    | scan the `nprobe` nearest lists     |
//! | SQ       | 8-bit per-dimension codes       | exhaustive scan over decoded codes  |
//! | HNSWSQ   | 8-bit codes + layered graph     | as HNSW, distances on decoded codes |
//! | IVFSQ    | k-means lists of 8-bit codes    | as IVFFlat over decoded codes       |
//! | NSG      | dense vectors + pruned kNN graph | beam search from the medoid        |
//! | LSH      | sign bits of random hyperplanes | Hamming-distance ranking            |
//!
//! All results are ordered by metric direction with ties broken by ascending
//! id. Every randomized stage draws from [`IndexSpec::seed`], so a spec and
//! its input fully determine the built index.

mod flat;
mod hnsw;
mod ivf;
mod kmeans;
mod lsh;
mod metric;
mod nsg;
mod persist;
mod sq;
mod store;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use metric::{distance, dot, l1, l2_squared, Metric};
pub use persist::{load_index, save_index, FORMAT_VERSION, MAGIC};
pub use lsh::{hamming, RandomHyperplanes};
pub use sq::ScalarQuantizer;

use crate::vectorize::Vector;
use flat::FlatIndex;
use hnsw::HnswIndex;
use ivf::IvfIndex;
use lsh::LshIndex;
use nsg::NsgIndex;
use sq::SqIndex;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sparse and dense vectors cannot be mixed")]
    MixedRepresentation,
    #[error("bad index parameters: {0}")]
    BadParams(String),
    #[error("no vectors to index")]
    EmptyInput,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("unsupported index format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("index file corrupt: {0}")]
    Corrupt(String),
}

pub type Result<T> = std::result::Result<T, IndexError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Flat,
    Hnsw,
    IvfFlat,
    Sq,
    HnswSq,
    IvfSq,
    Nsg,
    Lsh,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Flat,
        Family::Hnsw,
        Family::IvfFlat,
        Family::Sq,
        Family::HnswSq,
        Family::IvfSq,
        Family::Nsg,
        Family::Lsh,
    ];

    /// Lower-case identifier used in file names and configuration.
    pub fn name(self) -> &'static str {
        match self {
            Self::Flat => "flat",
            Self::Hnsw => "hnsw",
            Self::IvfFlat => "ivfflat",
            Self::Sq => "sq",
            Self::HnswSq => "hnswsq",
            Self::IvfSq => "ivfsq",
            Self::Nsg => "nsg",
            Self::Lsh => "lsh",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Self::Flat => "Flat",
            Self::Hnsw => "HNSW",
            Self::IvfFlat => "IVFFlat",
            Self::Sq => "SQ",
            Self::HnswSq => "HNSWSQ",
            Self::IvfSq => "IVFSQ",
            Self::Nsg => "NSG",
            Self::Lsh => "LSH",
        }
    }

    fn tag(self) -> u8 {
        Self::ALL.iter().position(|&f| f == self).unwrap() as u8
    }

    fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(tag as usize).copied()
    }

    /// Families that keep TF-IDF vectors sparse rather than densifying them.
    fn searches_sparse(self) -> bool {
        matches!(self, Self::Flat | Self::IvfFlat | Self::Lsh)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|f| f.name() == lower)
            .ok_or_else(|| format!("unknown index family {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HnswParams {
    /// Max neighbors per node above layer 0; layer 0 allows `2 * m`.
    pub m: usize,
    pub ef_construction: usize,
    pub ef_search: usize,
}

impl Default for HnswParams {
    fn default() -> Self {
        Self {
            m: 16,
            ef_construction: 200,
            ef_search: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IvfParams {
    /// Defaults to `round(sqrt(n))`, at least 1.
    pub nlist: Option<usize>,
    /// Defaults to `min(8, nlist)`.
    pub nprobe: Option<usize>,
    pub kmeans_iters: usize,
}

impl Default for IvfParams {
    fn default() -> Self {
        Self {
            nlist: None,
            nprobe: None,
            kmeans_iters: 20,
        }
    }
}

impl IvfParams {
    pub fn resolve(&self, n: usize) -> (usize, usize) {
        let nlist = self
            .nlist
            .unwrap_or_else(|| ((n as f64).sqrt().round() as usize).max(1));
        let nprobe = self.nprobe.unwrap_or_else(|| nlist.min(8));
        (nlist, nprobe)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SqParams {
    pub bits: u8,
}

impl Default for SqParams {
    fn default() -> Self {
        Self { bits: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NsgParams {
    pub knn_k: usize,
    pub out_degree: usize,
    /// Beam width at search time (raised to `k` when smaller).
    pub search_l: usize,
}

impl Default for NsgParams {
    fn default() -> Self {
        Self {
            knn_k: 32,
            out_degree: 16,
            search_l: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LshParams {
    pub n_bits: usize,
}

impl Default for LshParams {
    fn default() -> Self {
        Self { n_bits: 64 }
    }
}

/// Build parameters for every family; only the sections relevant to the
/// chosen family are read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexParams {
    pub hnsw: HnswParams,
    pub ivf: IvfParams,
    pub sq: SqParams,
    pub nsg: NsgParams,
    pub lsh: LshParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSpec {
    pub family: Family,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default)]
    pub params: IndexParams,
    #[serde(default)]
    pub seed: u64,
}

impl IndexSpec {
    pub fn new(family: Family, metric: Metric) -> Self {
        Self {
            family,
            metric,
            params: IndexParams::default(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_params(mut self, params: IndexParams) -> Self {
        self.params = params;
        self
    }

    /// `{family}_{metric}`, e.g. `hnsw_ip`.
    pub fn config_name(&self) -> String {
        format!("{}_{}", self.family, self.metric)
    }

    /// Row label in summary tables: `HNSW_L2`, `IVFFlat`, `SQ_IP`.
    pub fn label(&self) -> String {
        if matches!(self.family, Family::Hnsw | Family::HnswSq) || self.metric != Metric::L2 {
            format!(
                "{}_{}",
                self.family.display_name(),
                self.metric.name().to_ascii_uppercase()
            )
        } else {
            self.family.display_name().to_string()
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(IndexError::BadParams(msg));
        let p = &self.params;
        match self.family {
            Family::Flat => {}
            Family::Hnsw | Family::HnswSq => {
                if p.hnsw.m < 2 {
                    return bad(format!("hnsw.m must be >= 2, got {}", p.hnsw.m));
                }
                if p.hnsw.ef_construction < 1 || p.hnsw.ef_search < 1 {
                    return bad("hnsw ef values must be >= 1".into());
                }
            }
            Family::IvfFlat | Family::IvfSq => {
                let (nlist, nprobe) = p.ivf.resolve(n);
                if nlist < 1 || nlist > n {
                    return bad(format!("ivf.nlist must be in 1..={n}, got {nlist}"));
                }
                if nprobe < 1 || nprobe > nlist {
                    return bad(format!("ivf.nprobe must be in 1..={nlist}, got {nprobe}"));
                }
            }
            Family::Nsg => {
                if p.nsg.knn_k < 1 || p.nsg.out_degree < 1 || p.nsg.search_l < 1 {
                    return bad("nsg knn_k, out_degree and search_l must be >= 1".into());
                }
            }
            Family::Lsh => {
                if p.lsh.n_bits < 1 {
                    return bad("lsh.n_bits must be >= 1".into());
                }
            }
            Family::Sq => {}
        }
        if matches!(self.family, Family::Sq | Family::HnswSq | Family::IvfSq) && p.sq.bits != 8 {
            return bad(format!("sq.bits must be 8, got {}", p.sq.bits));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreOrder {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub ids: Vec<usize>,
    /// Squared L2, L1 or dot product; Hamming distance for LSH.
    pub scores: Vec<f32>,
    pub order: ScoreOrder,
}

impl SearchResult {
    fn from_candidates(candidates: Vec<store::Candidate>, metric: Metric) -> Self {
        Self {
            ids: candidates.iter().map(|c| c.id as usize).collect(),
            scores: candidates.iter().map(|c| metric.score(c.cost)).collect(),
            order: if metric.higher_is_better() {
                ScoreOrder::Descending
            } else {
                ScoreOrder::Ascending
            },
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Inner {
    Flat(FlatIndex),
    Hnsw(HnswIndex),
    Ivf(IvfIndex),
    Sq(SqIndex),
    Nsg(NsgIndex),
    Lsh(LshIndex),
}

/// A built, immutable index. Safe to search from many threads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorIndex {
    spec: IndexSpec,
    len: usize,
    dim: usize,
    inner: Inner,
}

pub fn build_index(spec: &IndexSpec, vectors: &[Vector]) -> Result<VectorIndex> {
    VectorIndex::build(spec, vectors)
}

impl VectorIndex {
    pub fn build(spec: &IndexSpec, vectors: &[Vector]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(IndexError::EmptyInput);
        }
        spec.validate(vectors.len())?;
        let densify = !spec.family.searches_sparse();
        let store = store::VectorStore::from_vectors(vectors, densify)?;
        let (len, dim) = (store.len(), store.dim());
        let p = &spec.params;
        let inner = match spec.family {
            Family::Flat => Inner::Flat(FlatIndex::new(store)),
            Family::Hnsw => Inner::Hnsw(HnswIndex::build_raw(store, spec.metric, p.hnsw, spec.seed)),
            Family::HnswSq => Inner::Hnsw(HnswIndex::build_sq(store, spec.metric, p.hnsw, spec.seed)),
            Family::IvfFlat => Inner::Ivf(IvfIndex::build(store, spec.metric, p.ivf, false, spec.seed)),
            Family::IvfSq => Inner::Ivf(IvfIndex::build(store, spec.metric, p.ivf, true, spec.seed)),
            Family::Sq => Inner::Sq(SqIndex::build(&store)),
            Family::Nsg => Inner::Nsg(NsgIndex::build(store, spec.metric, p.nsg)),
            Family::Lsh => Inner::Lsh(LshIndex::build(&store, p.lsh.n_bits, spec.seed)),
        };
        Ok(Self {
            spec: *spec,
            len,
            dim,
            inner,
        })
    }

    pub fn spec(&self) -> &IndexSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Up to `k` nearest ids. Sparse queries against densified families are
    /// densified; dense queries against sparse storage are rejected.
    pub fn search(&self, query: &Vector, k: usize) -> Result<SearchResult> {
        if k == 0 {
            return Err(IndexError::BadParams("k must be >= 1".into()));
        }
        if query.dim() != self.dim {
            return Err(IndexError::DimensionMismatch {
                expected: self.dim,
                got: query.dim(),
            });
        }
        let metric = self.spec.metric;
        let found = match &self.inner {
            Inner::Flat(i) => i.search(metric, query, k)?,
            Inner::Hnsw(i) => i.search(query, k)?,
            Inner::Ivf(i) => i.search(query, k)?,
            Inner::Sq(i) => i.search(metric, query, k)?,
            Inner::Nsg(i) => i.search(query, k)?,
            Inner::Lsh(i) => {
                return Ok(i.search(query, k));
            }
        };
        Ok(SearchResult::from_candidates(found, metric))
    }

    /// IVF search with an explicit probe count; other families ignore it.
    pub fn search_with_nprobe(&self, query: &Vector, k: usize, nprobe: usize) -> Result<SearchResult> {
        match &self.inner {
            Inner::Ivf(i) => {
                if k == 0 || nprobe == 0 {
                    return Err(IndexError::BadParams("k and nprobe must be >= 1".into()));
                }
                if query.dim() != self.dim {
                    return Err(IndexError::DimensionMismatch {
                        expected: self.dim,
                        got: query.dim(),
                    });
                }
                let found = i.search_with_nprobe(query, k, nprobe)?;
                Ok(SearchResult::from_candidates(found, self.spec.metric))
            }
            _ => self.search(query, k),
        }
    }

    /// Level-0 neighbor counts of a graph index (HNSW, HNSWSQ, NSG).
    pub fn base_layer_degrees(&self) -> Option<Vec<usize>> {
        match &self.inner {
            Inner::Hnsw(i) => Some(i.graph().degrees(0)),
            Inner::Nsg(i) => Some(i.degrees()),
            _ => None,
        }
    }

    /// Per-layer max degree observed in an HNSW graph, from layer 0 upward.
    pub fn hnsw_layer_max_degrees(&self) -> Option<Vec<usize>> {
        match &self.inner {
            Inner::Hnsw(i) => Some(i.graph().layer_max_degrees()),
            _ => None,
        }
    }

    /// Whether every node of a graph index is reachable from its entry point.
    pub fn graph_is_connected(&self) -> Option<bool> {
        match &self.inner {
            Inner::Nsg(i) => Some(i.is_connected()),
            _ => None,
        }
    }

    /// Sizes of the inverted lists of an IVF index.
    pub fn ivf_list_sizes(&self) -> Option<Vec<usize>> {
        match &self.inner {
            Inner::Ivf(i) => Some(i.list_sizes()),
            _ => None,
        }
    }

    /// The per-dimension quantizer of SQ-bearing families.
    pub fn quantizer(&self) -> Option<&ScalarQuantizer> {
        match &self.inner {
            Inner::Sq(i) => Some(i.codes().quantizer()),
            Inner::Hnsw(i) => i.quantizer(),
            Inner::Ivf(i) => i.quantizer(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::SparseVector;

    fn grid(n: usize) -> Vec<Vector> {
        (0..n)
            .map(|i| Vector::from(vec![(i % 7) as f32, (i / 7) as f32, ((i * 3) % 5) as f32]))
            .collect()
    }

    #[test]
    fn every_family_finds_exact_match() {
        let data = grid(60);
        for family in Family::ALL {
            if family == Family::Lsh {
                continue;
            }
            let spec = IndexSpec::new(family, Metric::L2).with_seed(3);
            let index = VectorIndex::build(&spec, &data).unwrap();
            assert_eq!(index.len(), 60);
            let r = index.search(&data[7], 3).unwrap();
            assert_eq!(r.ids[0], 7, "{family}");
            if matches!(family, Family::Sq | Family::IvfSq | Family::HnswSq) {
                assert!(r.scores[0] < 1e-3, "{family}: {}", r.scores[0]);
            } else {
                assert_eq!(r.scores[0], 0.0, "{family}");
            }
        }
    }

    #[test]
    fn lsh_self_match_has_zero_hamming() {
        let data = grid(60);
        let index = VectorIndex::build(&IndexSpec::new(Family::Lsh, Metric::L2), &data).unwrap();
        let r = index.search(&data[7], 3).unwrap();
        assert_eq!(r.scores[0], 0.0);
        assert_eq!(r.order, ScoreOrder::Ascending);
    }

    #[test]
    fn param_validation() {
        let data = grid(10);
        let mut spec = IndexSpec::new(Family::IvfFlat, Metric::L2);
        spec.params.ivf.nlist = Some(2);
        spec.params.ivf.nprobe = Some(3);
        assert!(matches!(VectorIndex::build(&spec, &data), Err(IndexError::BadParams(_))));
        spec.params.ivf.nlist = Some(11);
        spec.params.ivf.nprobe = Some(1);
        assert!(matches!(VectorIndex::build(&spec, &data), Err(IndexError::BadParams(_))));

        let mut spec = IndexSpec::new(Family::Hnsw, Metric::L2);
        spec.params.hnsw.m = 1;
        assert!(matches!(VectorIndex::build(&spec, &data), Err(IndexError::BadParams(_))));

        let mut spec = IndexSpec::new(Family::Sq, Metric::L2);
        spec.params.sq.bits = 4;
        assert!(matches!(VectorIndex::build(&spec, &data), Err(IndexError::BadParams(_))));

        let mut spec = IndexSpec::new(Family::Lsh, Metric::L2);
        spec.params.lsh.n_bits = 0;
        assert!(matches!(VectorIndex::build(&spec, &data), Err(IndexError::BadParams(_))));

        assert!(matches!(
            VectorIndex::build(&IndexSpec::new(Family::Flat, Metric::L2), &[]),
            Err(IndexError::EmptyInput)
        ));
    }

    #[test]
    fn default_ivf_sizes() {
        assert_eq!(IvfParams::default().resolve(563), (24, 8));
        assert_eq!(IvfParams::default().resolve(1), (1, 1));
        assert_eq!(IvfParams::default().resolve(5), (2, 2));
    }

    #[test]
    fn search_errors() {
        let index = VectorIndex::build(&IndexSpec::new(Family::Flat, Metric::L2), &grid(5)).unwrap();
        assert!(matches!(
            index.search(&Vector::from(vec![1.0]), 1),
            Err(IndexError::DimensionMismatch { expected: 3, got: 1 })
        ));
        assert!(index.search(&grid(1)[0], 0).is_err());
        assert_eq!(index.search(&grid(1)[0], 10).unwrap().len(), 5);
    }

    #[test]
    fn sparse_input_for_every_family() {
        let data: Vec<Vector> = (0..40u32)
            .map(|i| {
                Vector::Sparse(SparseVector::new(
                    50,
                    vec![(i % 50, 1.0 + i as f32), ((i * 7) % 50, 0.5)],
                ))
            })
            .collect();
        for family in Family::ALL {
            for metric in Metric::ALL {
                let index = VectorIndex::build(&IndexSpec::new(family, metric), &data).unwrap();
                let r = index.search(&data[3], 3).unwrap();
                assert_eq!(r.len(), 3, "{family} {metric}");
            }
        }
        let flat = VectorIndex::build(&IndexSpec::new(Family::Flat, Metric::L2), &data).unwrap();
        assert!(matches!(
            flat.search(&Vector::from(vec![0.0; 50]), 1),
            Err(IndexError::MixedRepresentation)
        ));
    }

    #[test]
    fn labels() {
        assert_eq!(IndexSpec::new(Family::Flat, Metric::L2).label(), "Flat");
        assert_eq!(IndexSpec::new(Family::Hnsw, Metric::Ip).label(), "HNSW_IP");
        assert_eq!(IndexSpec::new(Family::Hnsw, Metric::L2).label(), "HNSW_L2");
        assert_eq!(IndexSpec::new(Family::IvfSq, Metric::L1).config_name(), "ivfsq_l1");
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
            assert_eq!(Family::from_tag(f.tag()), Some(f));
        }
    }
}
