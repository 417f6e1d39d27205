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

//! History/geography extraction, through an LLM function call or a
//! rule-based splitter that works offline.

use rayon::prelude::*;

use crate::corpus::{Attraction, KnowledgeEntry, KnowledgeSource, KnowledgeStore};

use super::client::{ClientError, FunctionField, FunctionSchema, LlmClient};
use super::{RagError, Result};

pub const DEFAULT_IN_FLIGHT: usize = 4;

/// Phrases that mark a clause as geographic for the fallback extractor.
pub const LOCATION_LEXICON: &[&str] = &[
    "位于", "海拔", "境内", "距离", "公里", "千米", "米", "东部", "西部", "南部", "北部", "东南", "西南", "东北",
    "西北", "流域", "山脉", "地区", "县城", "市区", "周边", "坐落", "毗邻", "面积", "平方",
];

pub fn knowledge_schema() -> FunctionSchema {
    FunctionSchema {
        name: "record_viewpoint_knowledge".into(),
        description: "Record the historical and geographic information contained in a viewpoint description.".into(),
        fields: vec![
            FunctionField {
                name: "history".into(),
                description: "Historical background, origin and cultural significance of the viewpoint.".into(),
            },
            FunctionField {
                name: "geography".into(),
                description: "Location, altitude, terrain and surroundings of the viewpoint.".into(),
            },
        ],
    }
}

fn extraction_input(a: &Attraction) -> String {
    format!("{}\n{}", a.name, a.description)
}

/// Calls the client with [`knowledge_schema`]; a response with an empty or
/// missing field, or a failed call, is retried once.
pub fn extract_knowledge(attraction: &Attraction, client: &dyn LlmClient) -> Result<KnowledgeEntry> {
    if attraction.description.trim().is_empty() {
        return Err(RagError::ExtractionFailed(attraction.id));
    }
    let schema = knowledge_schema();
    let input = extraction_input(attraction);
    let mut timed_out = false;
    for _ in 0..2 {
        match client.call_function(&schema, &input) {
            Ok(fields) => {
                let get = |k: &str| fields.get(k).map(|v| v.trim().to_string()).unwrap_or_default();
                let (history, geography) = (get("history"), get("geography"));
                if !history.is_empty() && !geography.is_empty() {
                    return Ok(KnowledgeEntry {
                        attraction_id: attraction.id,
                        history,
                        geography,
                        source: Some(KnowledgeSource::Llm),
                    });
                }
                timed_out = false;
            }
            Err(ClientError::Timeout) => timed_out = true,
            Err(e) => {
                log::warn!("extraction call for attraction {} failed: {e}", attraction.id);
                timed_out = false;
            }
        }
    }
    if timed_out {
        Err(RagError::ClientTimeout)
    } else {
        Err(RagError::ExtractionFailed(attraction.id))
    }
}

fn clauses(text: &str) -> Vec<&str> {
    text.split(|c: char| "。！？；，!?;,\n".contains(c))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn join(parts: &[&str]) -> String {
    if parts.is_empty() {
        String::new()
    } else {
        format!("{}。", parts.join("，"))
    }
}

/// Clauses mentioning a location phrase become geography, the rest history.
/// An empty side is filled from the record's address fields (geography) or
/// the whole description (history).
pub fn fallback_extract(attraction: &Attraction) -> KnowledgeEntry {
    let (geo, hist): (Vec<&str>, Vec<&str>) = clauses(&attraction.description)
        .into_iter()
        .partition(|c| LOCATION_LEXICON.iter().any(|w| c.contains(w)));
    let mut geography = join(&geo);
    if geography.is_empty() {
        geography = format!(
            "{}位于{}{}{}。",
            attraction.name, attraction.province, attraction.city, attraction.district
        );
    }
    let mut history = join(&hist);
    if history.is_empty() {
        history = attraction.description.trim().to_string();
    }
    KnowledgeEntry {
        attraction_id: attraction.id,
        history,
        geography,
        source: Some(KnowledgeSource::Fallback),
    }
}

/// Extracts every attraction with at most `in_flight` concurrent calls.
/// Without a client, or when `fallback_on_error` is set and a call fails, the
/// rule-based extractor is used. Results keep the input order.
pub fn extract_all(
    attractions: &[Attraction],
    client: Option<&dyn LlmClient>,
    in_flight: usize,
    fallback_on_error: bool,
) -> Vec<Result<KnowledgeEntry>> {
    let Some(client) = client else {
        return attractions.iter().map(|a| Ok(fallback_extract(a))).collect();
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(in_flight.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        attractions
            .par_iter()
            .map(|a| match extract_knowledge(a, client) {
                Err(e) if fallback_on_error => {
                    log::warn!("attraction {}: {e}; using fallback", a.id);
                    Ok(fallback_extract(a))
                }
                other => other,
            })
            .collect()
    })
}

/// Inserts every successful extraction into `store`, returning the failures.
pub fn extract_into_store(
    store: &mut KnowledgeStore,
    attractions: &[Attraction],
    client: Option<&dyn LlmClient>,
    in_flight: usize,
    fallback_on_error: bool,
) -> Vec<RagError> {
    let mut failures = Vec::new();
    for result in extract_all(attractions, client, in_flight, fallback_on_error) {
        match result {
            Ok(entry) => store.insert(entry),
            Err(e) => failures.push(e),
        }
    }
    failures
}
