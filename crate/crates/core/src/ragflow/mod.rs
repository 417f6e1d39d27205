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

//! Retrieval-augmented answering: retrieve the top attractions for a query,
//! attach their stored history and geography, and ask an LLM client to
//! introduce them. Also hosts the knowledge-extraction job that fills the
//! store in the first place.

mod client;
mod extract;
mod prompt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{KnowledgeEntry, KnowledgeStore};
use crate::index::{IndexError, SearchResult, VectorIndex};
use crate::textproc::TokenizerSpec;
use crate::vectorize::TextEncoder;

pub use client::{
    ClientError, FunctionField, FunctionSchema, GenParams, HttpClient, HttpClientConfig, LlmClient, StubClient,
    TOKEN_ENV,
};
pub use extract::{
    extract_all, extract_into_store, extract_knowledge, fallback_extract, knowledge_schema, DEFAULT_IN_FLIGHT,
    LOCATION_LEXICON,
};
pub use prompt::{build_rag_prompt, RagPrompt, RAG_INSTRUCTION};

#[derive(Debug, Error)]
pub enum RagError {
    #[error("no knowledge entries to build a prompt from")]
    NoKnowledge,
    #[error("instruction alone exceeds the {0}-token input budget")]
    PromptBudget(usize),
    #[error("knowledge extraction failed for attraction {0}")]
    ExtractionFailed(usize),
    #[error("LLM request timed out")]
    ClientTimeout,
    #[error("LLM client: {0}")]
    Client(ClientError),
    #[error("no knowledge stored for attraction {0}")]
    MissingKnowledge(usize),
    #[error("encoder produces {encoder}-d vectors but the index holds {index}-d vectors")]
    EncoderMismatch { encoder: usize, index: usize },
    #[error(transparent)]
    Index(#[from] IndexError),
}

impl From<ClientError> for RagError {
    fn from(e: ClientError) -> Self {
        match e {
            ClientError::Timeout => Self::ClientTimeout,
            other => Self::Client(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, RagError>;

/// A text encoder paired with an index built from the same encoder.
pub struct Retriever {
    encoder: Box<dyn TextEncoder>,
    index: VectorIndex,
}

impl Retriever {
    pub fn new(encoder: Box<dyn TextEncoder>, index: VectorIndex) -> Result<Self> {
        if encoder.dim() != index.dim() {
            return Err(RagError::EncoderMismatch {
                encoder: encoder.dim(),
                index: index.dim(),
            });
        }
        Ok(Self { encoder, index })
    }

    pub fn retrieve(&self, query: &str, k: usize) -> Result<SearchResult> {
        Ok(self.index.search(&self.encoder.encode(query), k)?)
    }

    pub fn index(&self) -> &VectorIndex {
        &self.index
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RagOptions {
    pub k: usize,
    pub params: GenParams,
    /// Counts prompt tokens for the input budget.
    pub tokenizer: TokenizerSpec,
}

impl Default for RagOptions {
    fn default() -> Self {
        Self {
            k: 3,
            params: GenParams::default(),
            tokenizer: TokenizerSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RagAnswer {
    pub query: String,
    pub attraction_ids: Vec<usize>,
    /// One entry per id in `attraction_ids`, same order.
    pub knowledge_used: Vec<KnowledgeEntry>,
    pub answer: String,
}

pub fn answer(
    query: &str,
    retriever: &Retriever,
    store: &KnowledgeStore,
    client: &dyn LlmClient,
    options: &RagOptions,
) -> Result<RagAnswer> {
    let hits = retriever.retrieve(query, options.k)?;
    let knowledge_used = hits
        .ids
        .iter()
        .map(|&id| store.get(id).cloned().ok_or(RagError::MissingKnowledge(id)))
        .collect::<Result<Vec<_>>>()?;
    let prompt = build_rag_prompt(query, &knowledge_used, &options.tokenizer, options.params.max_input_tokens)?;
    let text = client.generate(&prompt.instruction, &prompt.input, &options.params)?;
    Ok(RagAnswer {
        query: query.to_string(),
        attraction_ids: hits.ids,
        knowledge_used,
        answer: text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::KnowledgeSource;
    use crate::index::{Family, IndexSpec, Metric};
    use crate::vectorize::{TfIdfModel, TfIdfOptions, Vector};

    fn docs() -> Vec<String> {
        ["纳木错 圣湖 湖水清澈", "色拉寺 古寺 辩经", "羊卓雍错 湖 高原", "冈仁波齐 神山 转山"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn setup() -> (Retriever, KnowledgeStore) {
        let tok = TokenizerSpec::default();
        let model = TfIdfModel::fit(&docs(), tok, TfIdfOptions::default()).unwrap();
        let vectors: Vec<Vector> = model.transform_all(&docs()).into_iter().map(Vector::Sparse).collect();
        let index = VectorIndex::build(&IndexSpec::new(Family::Flat, Metric::Ip), &vectors).unwrap();
        let store = KnowledgeStore::from_entries(
            (0..4).map(|i| KnowledgeEntry {
                attraction_id: i,
                history: format!("历史{i}"),
                geography: format!("地理{i}"),
                source: Some(KnowledgeSource::Fallback),
            }),
            4,
        )
        .unwrap();
        (Retriever::new(Box::new(model), index).unwrap(), store)
    }

    #[test]
    fn provenance_with_echo_stub() {
        let (r, store) = setup();
        let a = answer("辩经的古寺", &r, &store, &StubClient::echo(), &RagOptions::default()).unwrap();
        assert_eq!(a.attraction_ids, r.retrieve("辩经的古寺", 3).unwrap().ids);
        assert_eq!(a.attraction_ids[0], 1);
        for e in &a.knowledge_used {
            assert!(a.answer.contains(&e.history));
        }
        let ids: Vec<usize> = a.knowledge_used.iter().map(|e| e.attraction_id).collect();
        assert_eq!(ids, a.attraction_ids);
    }

    #[test]
    fn missing_knowledge() {
        let (r, _) = setup();
        let partial = KnowledgeStore::new();
        assert!(matches!(
            answer("圣湖", &r, &partial, &StubClient::echo(), &RagOptions::default()),
            Err(RagError::MissingKnowledge(_))
        ));
    }

    #[test]
    fn encoder_dimension_checked() {
        let (r, _) = setup();
        let other = TfIdfModel::fit(&["x y".to_string()], TokenizerSpec::default(), TfIdfOptions::default()).unwrap();
        assert!(matches!(
            Retriever::new(Box::new(other), r.index.clone()),
            Err(RagError::EncoderMismatch { .. })
        ));
    }
}
