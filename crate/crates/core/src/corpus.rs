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

//! Attraction database, knowledge store, stop-word list and prompt set.
//!
//! File formats:
//!
//! - attractions: UTF-8 CSV with a header naming the ten [`ATTRACTION_COLUMNS`]
//!   in any order. Extra columns are ignored.
//! - knowledge store: JSON array of `{"attraction_id", "history", "geography"}`.
//! - prompts: JSON array of `{"text", "features": [..]}`.
//! - stop-words: one entry per line, `#` starts a comment line.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Column names of the attraction CSV, in canonical output order.
pub const ATTRACTION_COLUMNS: [&str; 10] = [
    "name",
    "province",
    "city",
    "district",
    "address",
    "distance",
    "popularity",
    "ticket_price",
    "description",
    "promotion",
];

/// Inclusive bounds on the number of features a prompt may declare.
pub const MIN_FEATURES: usize = 1;
pub const MAX_FEATURES: usize = 4;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("corpus has no data rows")]
    EmptyCorpus,
    #[error("malformed row at line {0}")]
    MalformedRow(u64),
    #[error("row {row}: field {field:?} is empty")]
    EmptyField { row: usize, field: &'static str },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("prompt {0}: feature count out of range 1..=4")]
    FeatureCountOutOfRange(usize),
    #[error("prompt {0}: empty feature string")]
    EmptyFeature(usize),
    #[error("knowledge entry refers to unknown attraction {0}")]
    UnknownAttraction(usize),
    #[error("duplicate knowledge entry for attraction {0}")]
    DuplicateKnowledge(usize),
}

pub type Result<T> = std::result::Result<T, CorpusError>;

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One standardized viewpoint record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attraction {
    pub id: usize,
    pub name: String,
    pub province: String,
    pub city: String,
    pub district: String,
    pub address: String,
    /// Free-form as sourced.
    pub distance: String,
    pub popularity: String,
    pub ticket_price: String,
    pub description: String,
    pub promotion: String,
}

impl Attraction {
    /// Text indexed for retrieval: name and description joined by a space.
    pub fn document_text(&self) -> String {
        format!("{} {}", self.name, self.description)
    }

    fn fields(&self) -> [&str; 10] {
        [
            &self.name,
            &self.province,
            &self.city,
            &self.district,
            &self.address,
            &self.distance,
            &self.popularity,
            &self.ticket_price,
            &self.description,
            &self.promotion,
        ]
    }
}

pub fn load_attractions(path: impl AsRef<Path>) -> Result<Vec<Attraction>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_attractions(text.as_bytes())
}

pub fn parse_attractions(input: impl io::Read) -> Result<Vec<Attraction>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(input);

    let headers = reader.headers()?.clone();
    let position: HashMap<&str, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim().trim_start_matches('\u{feff}'), i))
        .collect();
    let mut columns = [0usize; 10];
    for (slot, name) in columns.iter_mut().zip(ATTRACTION_COLUMNS) {
        *slot = *position
            .get(name)
            .ok_or_else(|| CorpusError::MissingColumn(name.to_string()))?;
    }

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != headers.len() {
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            return Err(CorpusError::MalformedRow(line));
        }
        let get = |i: usize| record[columns[i]].to_string();
        let attraction = Attraction {
            id: out.len(),
            name: get(0),
            province: get(1),
            city: get(2),
            district: get(3),
            address: get(4),
            distance: get(5),
            popularity: get(6),
            ticket_price: get(7),
            description: get(8),
            promotion: get(9),
        };
        if attraction.name.trim().is_empty() {
            return Err(CorpusError::EmptyField {
                row: attraction.id,
                field: "name",
            });
        }
        if attraction.description.trim().is_empty() {
            return Err(CorpusError::EmptyField {
                row: attraction.id,
                field: "description",
            });
        }
        out.push(attraction);
    }
    if out.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(out)
}

/// Writes attractions in canonical column order. Ids are implied by row order.
pub fn write_attractions(path: impl AsRef<Path>, attractions: &[Attraction]) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(ATTRACTION_COLUMNS)?;
    for a in attractions {
        writer.write_record(a.fields())?;
    }
    let bytes = writer.into_inner().map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e.into_error(),
    })?;
    fs::write(path, bytes).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Trimmed, non-empty lines; blank and `#` lines skipped.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let text = read_to_string(path.as_ref())?;
    Ok(parse_stopwords(&text))
}

pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnowledgeSource {
    Llm,
    Fallback,
}

/// Per-attraction external knowledge: history and geography text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeEntry {
    pub attraction_id: usize,
    pub history: String,
    pub geography: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<KnowledgeSource>,
}

/// Knowledge entries keyed by attraction id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeStore {
    entries: HashMap<usize, KnowledgeEntry>,
}

impl KnowledgeStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(
        entries: impl IntoIterator<Item = KnowledgeEntry>,
        n_attractions: usize,
    ) -> Result<Self> {
        let mut store = Self::new();
        for entry in entries {
            if entry.attraction_id >= n_attractions {
                return Err(CorpusError::UnknownAttraction(entry.attraction_id));
            }
            if store.entries.contains_key(&entry.attraction_id) {
                return Err(CorpusError::DuplicateKnowledge(entry.attraction_id));
            }
            store.entries.insert(entry.attraction_id, entry);
        }
        Ok(store)
    }

    /// Inserts or replaces the entry for its attraction.
    pub fn insert(&mut self, entry: KnowledgeEntry) {
        self.entries.insert(entry.attraction_id, entry);
    }

    pub fn get(&self, attraction_id: usize) -> Option<&KnowledgeEntry> {
        self.entries.get(&attraction_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries sorted by attraction id.
    pub fn entries(&self) -> Vec<&KnowledgeEntry> {
        let mut v: Vec<_> = self.entries.values().collect();
        v.sort_by_key(|e| e.attraction_id);
        v
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.entries())?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_string(path.as_ref(), &self.to_json()?)
    }
}

pub fn load_knowledge(path: impl AsRef<Path>, n_attractions: usize) -> Result<KnowledgeStore> {
    let text = read_to_string(path.as_ref())?;
    let entries: Vec<KnowledgeEntry> = serde_json::from_str(&text)?;
    KnowledgeStore::from_entries(entries, n_attractions)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub text: String,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PromptSet {
    pub prompts: Vec<Prompt>,
}

impl PromptSet {
    /// Validates feature counts and strings; duplicate features are dropped
    /// keeping first occurrence.
    pub fn new(prompts: Vec<Prompt>) -> Result<Self> {
        let mut out = Vec::with_capacity(prompts.len());
        for (i, mut p) in prompts.into_iter().enumerate() {
            if !(MIN_FEATURES..=MAX_FEATURES).contains(&p.features.len()) {
                return Err(CorpusError::FeatureCountOutOfRange(i));
            }
            if p.features.iter().any(|f| f.trim().is_empty()) {
                return Err(CorpusError::EmptyFeature(i));
            }
            let mut seen = HashSet::new();
            p.features.retain(|f| seen.insert(f.clone()));
            out.push(p);
        }
        Ok(Self { prompts: out })
    }

    pub fn len(&self) -> usize {
        self.prompts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prompts.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Prompt> {
        self.prompts.iter()
    }

    /// Prompt text to declared features. Later duplicates win.
    pub fn feature_map(&self) -> HashMap<String, Vec<String>> {
        self.prompts
            .iter()
            .map(|p| (p.text.clone(), p.features.clone()))
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_string(path.as_ref(), &serde_json::to_string_pretty(self)?)
    }
}

pub fn load_prompts(path: impl AsRef<Path>) -> Result<PromptSet> {
    let text = read_to_string(path.as_ref())?;
    parse_prompts(&text)
}

pub fn parse_prompts(text: &str) -> Result<PromptSet> {
    let prompts: Vec<Prompt> = serde_json::from_str(text)?;
    PromptSet::new(prompts)
}
