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

//! The retrieval sweep: every vectorization arm crossed with every index
//! configuration, one results file per configuration, then hit evaluation
//! and a summary table.
//!
//! Outputs in `out_dir`:
//! - `{arm}_{family}_{metric}.json`: query text to its top-k records.
//! - `reports.json`: per-configuration evaluation reports and failures.
//! - `summary.csv`, `summary.txt`: the two arms side by side with gaps.
//!
//! Files contain no timestamps, so the same config and seed reproduce them
//! byte for byte.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{load_attractions, load_prompts, load_stopwords, Attraction, CorpusError, PromptSet};
use crate::evalkit::{assess_all_queries, assess_with_features, EvalReport, QueryEntry, ResultItem, ResultsFile, TableOne};
use crate::index::{Family, IndexSpec, Metric, VectorIndex};
use crate::textproc::{TokenizerMode, TokenizerSpec};
use crate::vectorize::{load_embeddings, TfIdfModel, TfIdfOptions, Vector, VectorizeError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Vectorize(#[from] VectorizeError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Tfidf,
    Embedding,
}

impl Arm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Tfidf => "tfidf",
            Self::Embedding => "embedding",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tfidf" | "tf-idf" => Ok(Self::Tfidf),
            "embedding" | "embeddings" => Ok(Self::Embedding),
            other => Err(format!("unknown arm {other:?}")),
        }
    }
}

/// Flat, HNSW under each metric, IVFFlat, SQ, HNSWSQ, IVFSQ, NSG and LSH.
pub fn default_grid() -> Vec<IndexSpec> {
    let mut grid = vec![IndexSpec::new(Family::Flat, Metric::L2)];
    grid.extend(Metric::ALL.map(|m| IndexSpec::new(Family::Hnsw, m)));
    grid.extend(
        [Family::IvfFlat, Family::Sq, Family::HnswSq, Family::IvfSq, Family::Nsg, Family::Lsh]
            .map(|f| IndexSpec::new(f, Metric::L2)),
    );
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub attractions: PathBuf,
    pub prompts: PathBuf,
    pub stopwords: Option<PathBuf>,
    pub doc_embeddings: Option<PathBuf>,
    pub query_embeddings: Option<PathBuf>,
    pub tokenizer: TokenizerMode,
    pub lowercase: bool,
    pub tfidf: TfIdfOptions,
    pub arms: Vec<Arm>,
    pub grid: Vec<IndexSpec>,
    pub k: usize,
    /// Seeds every index build; overrides per-spec seeds.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Configurations run concurrently; `None` uses all cores.
    pub jobs: Option<usize>,
    /// Score a prompt against its declared features rather than its text.
    pub use_declared_features: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            attractions: PathBuf::from("attractions.csv"),
            prompts: PathBuf::from("prompts.json"),
            stopwords: None,
            doc_embeddings: None,
            query_embeddings: None,
            tokenizer: TokenizerMode::default(),
            lowercase: true,
            tfidf: TfIdfOptions::default(),
            arms: vec![Arm::Tfidf, Arm::Embedding],
            grid: default_grid(),
            k: 3,
            seed: 0,
            out_dir: PathBuf::from("bench_out"),
            jobs: None,
            use_declared_features: true,
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Resolves relative input paths against `base`.
    pub fn rebase(&mut self, base: &Path) {
        for p in [&mut self.attractions, &mut self.prompts, &mut self.out_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        for p in [&mut self.stopwords, &mut self.doc_embeddings, &mut self.query_embeddings]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    fn validate(&self) -> Result<(), BenchError> {
        if self.k == 0 {
            return Err(BenchError::Config("k must be >= 1".into()));
        }
        if self.arms.is_empty() || self.grid.is_empty() {
            return Err(BenchError::Config("arms and grid must be non-empty".into()));
        }
        if self.jobs == Some(0) {
            return Err(BenchError::Config("jobs must be >= 1".into()));
        }
        Ok(())
    }

    pub fn tokenizer_spec(&self) -> Result<TokenizerSpec, BenchError> {
        let mut spec = TokenizerSpec::new(self.tokenizer).with_lowercase(self.lowercase);
        if let Some(path) = &self.stopwords {
            spec = spec.with_stopwords(load_stopwords(path)?);
        }
        Ok(spec)
    }
}

/// Results file name for one configuration.
pub fn results_file_name(arm: Arm, spec: &IndexSpec) -> String {
    format!("{arm}_{}.json", spec.config_name())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFailure {
    pub config_name: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutcome {
    pub reports: Vec<EvalReport>,
    pub failures: Vec<ConfigFailure>,
    #[serde(skip)]
    pub table: Option<TableOne>,
}

impl BenchOutcome {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

struct ArmData {
    docs: Vec<Vector>,
    queries: Vec<Vector>,
}

fn arm_data(
    arm: Arm,
    config: &BenchConfig,
    corpus: &[Attraction],
    prompts: &PromptSet,
    tokenizer: &TokenizerSpec,
) -> Result<ArmData, BenchError> {
    match arm {
        Arm::Tfidf => {
            let texts: Vec<String> = corpus.iter().map(Attraction::document_text).collect();
            let model = TfIdfModel::fit(&texts, tokenizer.clone(), config.tfidf)?;
            Ok(ArmData {
                docs: model.transform_all(&texts).into_iter().map(Vector::Sparse).collect(),
                queries: prompts.iter().map(|p| Vector::Sparse(model.transform(&p.text))).collect(),
            })
        }
        Arm::Embedding => {
            let (Some(d), Some(q)) = (&config.doc_embeddings, &config.query_embeddings) else {
                return Err(BenchError::Config(
                    "embedding arm needs doc_embeddings and query_embeddings".into(),
                ));
            };
            let table = load_embeddings(d, q)?;
            if table.doc_vectors.len() != corpus.len() {
                return Err(BenchError::Config(format!(
                    "{} document embeddings for {} attractions",
                    table.doc_vectors.len(),
                    corpus.len()
                )));
            }
            let queries = (0..prompts.len())
                .map(|i| {
                    table
                        .query(i)
                        .cloned()
                        .map(Vector::Dense)
                        .ok_or(VectorizeError::MissingQuery(i))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ArmData {
                docs: table.doc_vectors.into_iter().map(Vector::Dense).collect(),
                queries,
            })
        }
    }
}

/// Top-k records per prompt, keyed by prompt text.
pub fn query_all(
    index: &VectorIndex,
    queries: &[Vector],
    prompts: &PromptSet,
    corpus: &[Attraction],
    k: usize,
) -> Result<ResultsFile, crate::index::IndexError> {
    let mut out = IndexMap::with_capacity(prompts.len());
    for (prompt, q) in prompts.iter().zip(queries) {
        let hits = index.search(q, k)?;
        let results = hits
            .ids
            .iter()
            .map(|&id| ResultItem {
                description: corpus[id].description.clone(),
                name: corpus[id].name.clone(),
            })
            .collect();
        out.insert(
            prompt.text.clone(),
            QueryEntry {
                query: prompt.text.clone(),
                results,
            },
        );
    }
    Ok(out)
}

fn write(path: &Path, contents: &str) -> Result<(), BenchError> {
    fs::write(path, contents).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct Job<'a> {
    arm: Arm,
    spec: IndexSpec,
    data: &'a ArmData,
}

fn run_job(
    job: &Job<'_>,
    config: &BenchConfig,
    corpus: &[Attraction],
    prompts: &PromptSet,
    tokenizer: &TokenizerSpec,
    features: &HashMap<String, Vec<String>>,
) -> Result<EvalReport, String> {
    let name = results_file_name(job.arm, &job.spec);
    let index = VectorIndex::build(&job.spec, &job.data.docs).map_err(|e| e.to_string())?;
    let results = query_all(&index, &job.data.queries, prompts, corpus, config.k).map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&results).map_err(|e| e.to_string())?;
    write(&config.out_dir.join(&name), &json).map_err(|e| e.to_string())?;
    let config_name = name.trim_end_matches(".json");
    Ok(if config.use_declared_features {
        assess_with_features(config_name, &results, tokenizer, features)
    } else {
        assess_all_queries(config_name, &results, tokenizer)
    })
}

/// Runs the sweep. Startup problems (inputs, config) are errors; a failing
/// configuration is recorded in the outcome and the sweep continues.
pub fn run_bench(config: &BenchConfig) -> Result<BenchOutcome, BenchError> {
    config.validate()?;
    let tokenizer = config.tokenizer_spec()?;
    let corpus = load_attractions(&config.attractions)?;
    let prompts = load_prompts(&config.prompts)?;
    let features = prompts.feature_map();
    let mut arms = config.arms.clone();
    arms.dedup();
    let data: Vec<(Arm, ArmData)> = arms
        .iter()
        .map(|&arm| Ok((arm, arm_data(arm, config, &corpus, &prompts, &tokenizer)?)))
        .collect::<Result<_, BenchError>>()?;
    fs::create_dir_all(&config.out_dir).map_err(|source| BenchError::Io {
        path: config.out_dir.clone(),
        source,
    })?;

    let jobs: Vec<Job<'_>> = data
        .iter()
        .flat_map(|(arm, d)| {
            config.grid.iter().map(move |spec| Job {
                arm: *arm,
                spec: spec.with_seed(config.seed),
                data: d,
            })
        })
        .collect();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.jobs {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| BenchError::Config(e.to_string()))?;
    let results: Vec<Result<EvalReport, String>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| run_job(job, config, &corpus, &prompts, &tokenizer, &features))
            .collect()
    });

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut by_key: HashMap<(Arm, String), usize> = HashMap::new();
    for (job, result) in jobs.iter().zip(results) {
        match result {
            Ok(report) => {
                log::info!("{}: avg hit count {:.4}", report.config_name, report.avg_hit_count);
                by_key.insert((job.arm, job.spec.config_name()), reports.len());
                reports.push(report);
            }
            Err(error) => {
                let config_name = results_file_name(job.arm, &job.spec).trim_end_matches(".json").to_string();
                log::error!("{config_name}: {error}");
                failures.push(ConfigFailure { config_name, error });
            }
        }
    }

    let rows: Vec<(String, Option<&EvalReport>, Option<&EvalReport>)> = config
        .grid
        .iter()
        .map(|spec| {
            let get = |arm| by_key.get(&(arm, spec.config_name())).map(|&i| &reports[i]);
            (spec.label(), get(Arm::Tfidf), get(Arm::Embedding))
        })
        .collect();
    let table = TableOne::from_reports(&rows);

    let mut outcome = BenchOutcome {
        reports,
        failures,
        table: None,
    };
    let json = serde_json::to_string_pretty(&outcome).map_err(|e| BenchError::Config(e.to_string()))?;
    write(&config.out_dir.join("reports.json"), &json)?;
    write(&config.out_dir.join("summary.csv"), &table.to_csv())?;
    write(&config.out_dir.join("summary.txt"), &table.to_text())?;
    outcome.table = Some(table);
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::*;

    fn fixture(dir: &Path) -> BenchConfig {
        let data = generate(&SyntheticConfig {
            n_attractions: 80,
            n_prompts: 20,
            seed: 3,
        });
        write_fixture(dir, &data, &TokenizerSpec::default(), 16, 3).unwrap();
        BenchConfig {
            attractions: dir.join(ATTRACTIONS_FILE),
            prompts: dir.join(PROMPTS_FILE),
            doc_embeddings: Some(dir.join(DOC_EMBEDDINGS_FILE)),
            query_embeddings: Some(dir.join(QUERY_EMBEDDINGS_FILE)),
            out_dir: dir.join("out"),
            jobs: Some(2),
            ..BenchConfig::default()
        }
    }

    #[test]
    fn default_grid_has_ten_entries() {
        let g = default_grid();
        assert_eq!(g.len(), 10);
        let names: Vec<String> = g.iter().map(IndexSpec::config_name).collect();
        assert!(names.contains(&"hnsw_ip".to_string()));
        assert_eq!(names.iter().collect::<std::collections::HashSet<_>>().len(), 10);
    }

    #[test]
    fn both_arms_write_twenty_files() {
        let dir = tempfile::tempdir().unwrap();
        let config = fixture(dir.path());
        let outcome = run_bench(&config).unwrap();
        assert!(outcome.is_complete(), "{:?}", outcome.failures);
        assert_eq!(outcome.reports.len(), 20);
        let json_files = fs::read_dir(&config.out_dir)
            .unwrap()
            .filter(|e| {
                let n = e.as_ref().unwrap().file_name().into_string().unwrap();
                n.ends_with(".json") && n != "reports.json"
            })
            .count();
        assert_eq!(json_files, 20);
        let results = crate::evalkit::load_results(config.out_dir.join("tfidf_flat_l2.json")).unwrap();
        assert_eq!(results.len(), 20);
        assert!(results.values().all(|e| e.results.len() == 3));
        let table = outcome.table.unwrap();
        assert_eq!(table.rows.len(), 10);
        assert!(table.rows.iter().all(|r| r.tfidf.is_some() && r.embedding.is_some()));
    }

    #[test]
    fn single_arm_leaves_gaps_empty() {
        let dir = tempfile::tempdir().unwrap();
        let config = BenchConfig {
            arms: vec![Arm::Tfidf],
            ..fixture(dir.path())
        };
        let outcome = run_bench(&config).unwrap();
        assert_eq!(outcome.reports.len(), 10);
        assert!(outcome.table.unwrap().rows.iter().all(|r| r.gap.is_none()));
        let csv = fs::read_to_string(config.out_dir.join("summary.csv")).unwrap();
        assert!(csv.lines().nth(1).unwrap().ends_with(",,,"));
    }

    #[test]
    fn failing_configuration_is_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let mut bad = IndexSpec::new(Family::IvfFlat, Metric::L2);
        bad.params.ivf.nlist = Some(1000);
        let config = BenchConfig {
            arms: vec![Arm::Tfidf],
            grid: vec![IndexSpec::new(Family::Flat, Metric::L2), bad],
            ..fixture(dir.path())
        };
        let outcome = run_bench(&config).unwrap();
        assert_eq!(outcome.reports.len(), 1);
        assert_eq!(outcome.failures.len(), 1);
        assert_eq!(outcome.failures[0].config_name, "tfidf_ivfflat_l2");
    }

    #[test]
    fn missing_prompts_is_a_startup_error() {
        let dir = tempfile::tempdir().unwrap();
        let config = BenchConfig {
            prompts: dir.path().join("absent.json"),
            ..fixture(dir.path())
        };
        assert!(matches!(run_bench(&config), Err(BenchError::Corpus(_))));
    }

    #[test]
    fn toml_config() {
        let c = BenchConfig::from_toml(
            r#"
            attractions = "a.csv"
            prompts = "p.json"
            arms = ["tfidf"]
            k = 5
            [[grid]]
            family = "hnsw"
            metric = "ip"
            [grid.params.hnsw]
            ef_search = 128
            "#,
        )
        .unwrap();
        assert_eq!(c.k, 5);
        assert_eq!(c.grid.len(), 1);
        assert_eq!(c.grid[0].params.hnsw.ef_search, 128);
        assert_eq!(c.grid[0].params.hnsw.m, 16);
        assert!(BenchConfig::from_toml("nonsense = 1").is_err());
    }
}
