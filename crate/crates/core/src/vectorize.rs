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

//! TF-IDF vectorization and precomputed dense embeddings.
//!
//! TF-IDF weights are the bare product `tf * ln(N / df)` with raw term counts
//! and no row normalization unless [`TfIdfOptions::normalize`] is set.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Attraction;
use crate::textproc::TokenizerSpec;

#[derive(Debug, Error)]
pub enum VectorizeError {
    #[error("tf-idf domain error: tf={tf} df={df} n_docs={n_docs}")]
    Domain { tf: u32, df: u32, n_docs: u32 },
    #[error("no document produced any token")]
    EmptyVocabulary,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("embedding file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("embedding row at line {0} has the wrong dimension")]
    DimensionMismatch(usize),
    #[error("embedding row at line {0} has a non-finite value")]
    NonFinite(usize),
    #[error("duplicate embedding id {0}")]
    DuplicateId(usize),
    #[error("missing document embedding for id {0}")]
    MissingDoc(usize),
    #[error("missing query embedding for id {0}")]
    MissingQuery(usize),
    #[error("query and document embeddings differ in dimension ({docs} vs {queries})")]
    TableDimensionMismatch { docs: usize, queries: usize },
}

pub type Result<T> = std::result::Result<T, VectorizeError>;

/// Sparse vector with strictly increasing indices and no explicit zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(u32, f32)>,
}

impl SparseVector {
    /// Sorts entries, sums duplicates and drops zeros.
    pub fn new(dim: usize, mut entries: Vec<(u32, f32)>) -> Self {
        entries.sort_by_key(|&(i, _)| i);
        let mut out: Vec<(u32, f32)> = Vec::with_capacity(entries.len());
        for (i, w) in entries {
            assert!((i as usize) < dim, "sparse index {i} out of range for dim {dim}");
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc += w,
                _ => out.push((i, w)),
            }
        }
        out.retain(|&(_, w)| w != 0.0);
        Self { dim, entries: out }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, f32)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> DenseVector {
        let mut v = vec![0.0; self.dim];
        for &(i, w) in &self.entries {
            v[i as usize] = w;
        }
        DenseVector(v)
    }

    pub fn norm_squared(&self) -> f32 {
        self.entries.iter().map(|&(_, w)| w * w).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(pub Vec<f32>);

impl DenseVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }
}

impl From<Vec<f32>> for DenseVector {
    fn from(v: Vec<f32>) -> Self {
        Self(v)
    }
}

/// A vector in either representation. Distances are defined only between
/// vectors of the same representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Vector {
    Dense(DenseVector),
    Sparse(SparseVector),
}

impl Vector {
    pub fn dim(&self) -> usize {
        match self {
            Self::Dense(v) => v.dim(),
            Self::Sparse(v) => v.dim(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Self::Sparse(_))
    }

    pub fn to_dense(&self) -> DenseVector {
        match self {
            Self::Dense(v) => v.clone(),
            Self::Sparse(v) => v.to_dense(),
        }
    }
}

impl From<DenseVector> for Vector {
    fn from(v: DenseVector) -> Self {
        Self::Dense(v)
    }
}

impl From<SparseVector> for Vector {
    fn from(v: SparseVector) -> Self {
        Self::Sparse(v)
    }
}

impl From<Vec<f32>> for Vector {
    fn from(v: Vec<f32>) -> Self {
        Self::Dense(DenseVector(v))
    }
}

/// Maps text into the vector space of an index.
pub trait TextEncoder: Send + Sync {
    fn encode(&self, text: &str) -> Vector;
    fn dim(&self) -> usize;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
    Ten,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            Self::Natural => x.ln(),
            Self::Two => x.log2(),
            Self::Ten => x.log10(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TfIdfOptions {
    #[serde(default)]
    pub log_base: LogBase,
    /// Scale each transformed row to unit L2 norm.
    #[serde(default)]
    pub normalize: bool,
}

/// `tf * ln(n_docs / df)`.
pub fn tfidf_weight(tf: u32, df: u32, n_docs: u32) -> Result<f64> {
    tfidf_weight_with_base(tf, df, n_docs, LogBase::Natural)
}

pub fn tfidf_weight_with_base(tf: u32, df: u32, n_docs: u32, base: LogBase) -> Result<f64> {
    if df == 0 || df > n_docs {
        return Err(VectorizeError::Domain { tf, df, n_docs });
    }
    if tf == 0 {
        return Ok(0.0);
    }
    Ok(f64::from(tf) * base.log(f64::from(n_docs) / f64::from(df)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdfModel {
    /// Term to column; columns follow lexicographic term order.
    vocabulary: BTreeMap<String, usize>,
    /// Document frequency per column.
    doc_freq: Vec<u32>,
    n_docs: u32,
    tokenizer: TokenizerSpec,
    options: TfIdfOptions,
}

impl TfIdfModel {
    pub fn fit(texts: &[String], tokenizer: TokenizerSpec, options: TfIdfOptions) -> Result<Self> {
        if texts.is_empty() {
            return Err(VectorizeError::EmptyCorpus);
        }
        let mut df: BTreeMap<String, u32> = BTreeMap::new();
        for text in texts {
            let mut terms = tokenizer.tokenize(text);
            terms.sort_unstable();
            terms.dedup();
            for t in terms {
                *df.entry(t).or_default() += 1;
            }
        }
        if df.is_empty() {
            return Err(VectorizeError::EmptyVocabulary);
        }
        let vocabulary = df.keys().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Ok(Self {
            vocabulary,
            doc_freq: df.into_values().collect(),
            n_docs: texts.len() as u32,
            tokenizer,
            options,
        })
    }

    pub fn vocabulary(&self) -> &BTreeMap<String, usize> {
        &self.vocabulary
    }

    pub fn vocab_size(&self) -> usize {
        self.doc_freq.len()
    }

    pub fn n_docs(&self) -> u32 {
        self.n_docs
    }

    pub fn tokenizer(&self) -> &TokenizerSpec {
        &self.tokenizer
    }

    pub fn options(&self) -> TfIdfOptions {
        self.options
    }

    pub fn doc_freq(&self, term: &str) -> Option<u32> {
        self.vocabulary.get(term).map(|&i| self.doc_freq[i])
    }

    pub fn transform(&self, text: &str) -> SparseVector {
        let mut counts: HashMap<usize, u32> = HashMap::new();
        for token in self.tokenizer.tokenize(text) {
            if let Some(&col) = self.vocabulary.get(&token) {
                *counts.entry(col).or_default() += 1;
            }
        }
        let mut entries: Vec<(u32, f32)> = counts
            .into_iter()
            .map(|(col, tf)| {
                let w = tfidf_weight_with_base(tf, self.doc_freq[col], self.n_docs, self.options.log_base)
                    .expect("fitted document frequencies are within 1..=n_docs");
                (col as u32, w as f32)
            })
            .collect();
        if self.options.normalize {
            let norm = entries.iter().map(|&(_, w)| f64::from(w).powi(2)).sum::<f64>().sqrt();
            if norm > 0.0 {
                for e in &mut entries {
                    e.1 = (f64::from(e.1) / norm) as f32;
                }
            }
        }
        SparseVector::new(self.vocab_size(), entries)
    }

    pub fn transform_all(&self, texts: &[String]) -> Vec<SparseVector> {
        texts.iter().map(|t| self.transform(t)).collect()
    }
}

impl TextEncoder for TfIdfModel {
    fn encode(&self, text: &str) -> Vector {
        Vector::Sparse(self.transform(text))
    }

    fn dim(&self) -> usize {
        self.vocab_size()
    }
}

/// Fits over `name + " " + description` of every attraction.
pub fn fit_tfidf(corpus: &[Attraction], tokenizer: TokenizerSpec) -> Result<TfIdfModel> {
    let texts: Vec<String> = corpus.iter().map(Attraction::document_text).collect();
    TfIdfModel::fit(&texts, tokenizer, TfIdfOptions::default())
}

/// Precomputed document and query embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    /// Indexed by attraction id.
    pub doc_vectors: Vec<DenseVector>,
    /// Keyed by prompt index.
    pub query_vectors: BTreeMap<usize, DenseVector>,
}

impl EmbeddingTable {
    pub fn query(&self, prompt_id: usize) -> Option<&DenseVector> {
        self.query_vectors.get(&prompt_id)
    }
}

/// Parses the `n d` header format. Ids must cover `0..n` exactly.
fn parse_embedding_file(text: &str) -> Result<(usize, Vec<(usize, DenseVector)>, Option<usize>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(VectorizeError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let mut head = header.split_whitespace();
    let parse_usize = |s: Option<&str>, what: &str| -> Result<usize> {
        s.and_then(|x| x.parse().ok()).ok_or_else(|| VectorizeError::Parse {
            line: 1,
            msg: format!("bad {what} in header"),
        })
    };
    let n = parse_usize(head.next(), "row count")?;
    let dim = parse_usize(head.next(), "dimension")?;

    let mut rows: BTreeMap<usize, DenseVector> = BTreeMap::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let mut fields = line.split_whitespace();
        let id: usize = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| VectorizeError::Parse {
                line: line_no,
                msg: "bad id".into(),
            })?;
        let values = fields
            .map(|s| s.parse::<f32>())
            .collect::<std::result::Result<Vec<f32>, _>>()
            .map_err(|e| VectorizeError::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
        if values.len() != dim {
            return Err(VectorizeError::DimensionMismatch(line_no));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(VectorizeError::NonFinite(line_no));
        }
        if rows.insert(id, DenseVector(values)).is_some() {
            return Err(VectorizeError::DuplicateId(id));
        }
    }
    let missing = (0..n).find(|id| !rows.contains_key(id));
    Ok((dim, rows.into_iter().collect(), missing))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| VectorizeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_embeddings(doc_path: impl AsRef<Path>, query_path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let docs = read(doc_path.as_ref())?;
    let queries = read(query_path.as_ref())?;
    parse_embeddings(&docs, &queries)
}

pub fn parse_embeddings(docs: &str, queries: &str) -> Result<EmbeddingTable> {
    let (dim, doc_rows, missing) = parse_embedding_file(docs)?;
    if let Some(id) = missing {
        return Err(VectorizeError::MissingDoc(id));
    }
    let (qdim, query_rows, missing) = parse_embedding_file(queries)?;
    if let Some(id) = missing {
        return Err(VectorizeError::MissingQuery(id));
    }
    if !query_rows.is_empty() && qdim != dim {
        return Err(VectorizeError::TableDimensionMismatch { docs: dim, queries: qdim });
    }
    Ok(EmbeddingTable {
        dim,
        doc_vectors: doc_rows.into_iter().map(|(_, v)| v).collect(),
        query_vectors: query_rows.into_iter().collect(),
    })
}

/// Serializes rows in the `n d` header format with ids `0..rows.len()`.
pub fn format_embeddings(dim: usize, rows: &[DenseVector]) -> String {
    let mut out = format!("{} {}\n", rows.len(), dim);
    for (id, v) in rows.iter().enumerate() {
        let _ = write!(out, "{id}");
        for x in &v.0 {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
    }
    out
}

pub fn save_embeddings(path: impl AsRef<Path>, dim: usize, rows: &[DenseVector]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_embeddings(dim, rows)).map_err(|source| VectorizeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Seeded hash-projection pseudo-embedder. NOT semantic: each token hashes to
/// a fixed random sign pattern in `dim` dimensions; patterns are summed and
/// the result scaled to unit length. Used to exercise the dense arm offline.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dim: usize,
    seed: u64,
    tokenizer: TokenizerSpec,
}

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64, tokenizer: TokenizerSpec) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim, seed, tokenizer }
    }

    pub fn embed(&self, text: &str) -> DenseVector {
        let mut acc = vec![0.0f64; self.dim];
        for token in self.tokenizer.tokenize(text) {
            let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(self.seed, token.as_bytes()));
            for a in acc.iter_mut() {
                *a += if rng.random::<bool>() { 1.0 } else { -1.0 };
            }
        }
        let norm = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            acc.iter_mut().for_each(|x| *x /= norm);
        }
        DenseVector(acc.into_iter().map(|x| x as f32).collect())
    }
}

impl TextEncoder for HashEmbedder {
    fn encode(&self, text: &str) -> Vector {
        Vector::Dense(self.embed(text))
    }

    fn dim(&self) -> usize {
        self.dim
    }
}

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(bytes) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}
