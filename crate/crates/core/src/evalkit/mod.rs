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

//! Keyword-hit evaluation of retrieval results and composite scoring of
//! generated answers.
//!
//! Hit counting: for every query, the query's keywords are intersected with
//! the keywords of each retrieved result (`description` immediately followed
//! by `name`), and the intersection sizes are averaged over all results. The
//! hit rate divides that average by [`FEATURES_PER_PROMPT`].
//!
//! The composite score of one response is
//! `d1 * fluency + d2 * log2(accuracy + 1) + d3 * exp(relevance)`,
//! with default weights 0.3, 0.2 and 0.4 (full marks 1.5873).

mod tables;

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textproc::TokenizerSpec;

pub use tables::{
    load_components, parse_components, score_table, ArmStats, ComponentRow, ScoredRow, TableOne,
    TableOneRow, TableTwo,
};

/// Mean number of declared features per benchmark prompt.
pub const FEATURES_PER_PROMPT: f64 = 3.0;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("malformed results: {0}")]
    MalformedResults(String),
    #[error("relative gap needs a positive base, got {0}")]
    NonPositiveBase(f64),
    #[error("{name} = {value} is outside [0, 1]")]
    ComponentOutOfRange { name: &'static str, value: f64 },
    #[error("weights must be positive: {0:?}")]
    BadWeights([f64; 3]),
    #[error("components file: {0}")]
    Components(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EvalError>;

/// One retrieved record as written by the retrieval sweep.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultItem {
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryEntry {
    pub query: String,
    pub results: Vec<ResultItem>,
}

/// Query text to its retrieved results, in insertion order.
pub type ResultsFile = IndexMap<String, QueryEntry>;

pub fn parse_results(text: &str) -> Result<ResultsFile> {
    serde_json::from_str(text).map_err(|e| EvalError::MalformedResults(e.to_string()))
}

pub fn load_results(path: impl AsRef<Path>) -> Result<ResultsFile> {
    parse_results(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryHits {
    pub query: String,
    pub per_result_hits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config_name: String,
    pub avg_hit_count: f64,
    /// Fraction, `avg_hit_count / 3`.
    pub avg_hit_rate: f64,
    pub total_hits: usize,
    pub total_results: usize,
    pub per_query: Vec<QueryHits>,
}

pub fn hit_score(query_keywords: &BTreeSet<String>, result_keywords: &BTreeSet<String>) -> usize {
    query_keywords.intersection(result_keywords).count()
}

pub fn hit_rate(avg_hit_count: f64) -> f64 {
    avg_hit_count / FEATURES_PER_PROMPT
}

/// `(a - b) / b`.
pub fn relative_gap(a: f64, b: f64) -> Result<f64> {
    if b <= 0.0 || b.is_nan() {
        return Err(EvalError::NonPositiveBase(b));
    }
    Ok((a - b) / b)
}

/// The integer hit total behind a printed average over `n_results`
/// results, when one exists at the given number of decimals.
pub fn recover_hit_total(printed_avg: f64, n_results: usize, decimals: i32) -> Option<u64> {
    if n_results == 0 || printed_avg < 0.0 {
        return None;
    }
    let total = (printed_avg * n_results as f64).round();
    let scale = 10f64.powi(decimals);
    let reprinted = (total / n_results as f64 * scale).round() / scale;
    ((reprinted - printed_avg).abs() < 0.5 / scale * 1e-6).then_some(total as u64)
}

fn result_text(item: &ResultItem) -> String {
    format!("{}{}", item.description, item.name)
}

fn assess(
    config_name: &str,
    results: &ResultsFile,
    query_keywords: impl Fn(&QueryEntry) -> BTreeSet<String>,
    tokenizer: &TokenizerSpec,
) -> EvalReport {
    let mut per_query = Vec::with_capacity(results.len());
    let (mut total_hits, mut total_results) = (0usize, 0usize);
    for entry in results.values() {
        let qk = query_keywords(entry);
        let hits: Vec<usize> = entry
            .results
            .iter()
            .map(|r| hit_score(&qk, &tokenizer.keywords(&result_text(r))))
            .collect();
        total_hits += hits.iter().sum::<usize>();
        total_results += hits.len();
        per_query.push(QueryHits {
            query: entry.query.clone(),
            per_result_hits: hits,
        });
    }
    let avg_hit_count = if total_results > 0 {
        total_hits as f64 / total_results as f64
    } else {
        0.0
    };
    EvalReport {
        config_name: config_name.to_string(),
        avg_hit_count,
        avg_hit_rate: hit_rate(avg_hit_count),
        total_hits,
        total_results,
        per_query,
    }
}

/// Query keywords come from tokenizing the query text.
pub fn assess_all_queries(config_name: &str, results: &ResultsFile, tokenizer: &TokenizerSpec) -> EvalReport {
    assess(config_name, results, |e| tokenizer.keywords(&e.query), tokenizer)
}

/// Like [`assess_all_queries`], but a query whose text appears in `features`
/// is scored against its declared feature list instead of its keywords.
pub fn assess_with_features(
    config_name: &str,
    results: &ResultsFile,
    tokenizer: &TokenizerSpec,
    features: &HashMap<String, Vec<String>>,
) -> EvalReport {
    assess(
        config_name,
        results,
        |e| match features.get(&e.query) {
            Some(f) => f.iter().cloned().collect(),
            None => tokenizer.keywords(&e.query),
        },
        tokenizer,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentScores {
    pub fluency: f64,
    pub accuracy: f64,
    pub relevance: f64,
}

impl ComponentScores {
    pub fn new(fluency: f64, accuracy: f64, relevance: f64) -> Result<Self> {
        let s = Self {
            fluency,
            accuracy,
            relevance,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("fluency", self.fluency),
            ("accuracy", self.accuracy),
            ("relevance", self.relevance),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(EvalError::ComponentOutOfRange { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeWeights {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Default for CompositeWeights {
    fn default() -> Self {
        Self {
            d1: 0.3,
            d2: 0.2,
            d3: 0.4,
        }
    }
}

impl CompositeWeights {
    pub fn new(d1: f64, d2: f64, d3: f64) -> Result<Self> {
        if [d1, d2, d3].iter().all(|&d| d > 0.0 && d.is_finite()) {
            Ok(Self { d1, d2, d3 })
        } else {
            Err(EvalError::BadWeights([d1, d2, d3]))
        }
    }

    /// Composite score of a perfect response.
    pub fn full_score(&self) -> f64 {
        self.raw(1.0, 1.0, 1.0)
    }

    fn raw(&self, fluency: f64, accuracy: f64, relevance: f64) -> f64 {
        self.d1 * fluency + self.d2 * (accuracy + 1.0).log2() + self.d3 * relevance.exp()
    }
}

pub fn composite_score(s: &ComponentScores, w: &CompositeWeights) -> Result<f64> {
    s.validate()?;
    Ok(w.raw(s.fluency, s.accuracy, s.relevance))
}

/// Score as a fraction of the full score.
pub fn percentize(score: f64, w: &CompositeWeights) -> f64 {
    score / w.full_score()
}
