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

use crate::corpus::KnowledgeEntry;
use crate::textproc::TokenizerSpec;

use super::{RagError, Result};

/// System instruction sent with every RAG request.
pub const RAG_INSTRUCTION: &str = "Please use the provided viewpoint knowledge to introduce the viewpoint to the user. \
Always adhere strictly to the provided viewpoint information.";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RagPrompt {
    pub instruction: String,
    pub input: String,
    /// Entries that survived truncation, from the front of the list.
    pub entries_included: usize,
    /// Whether the last included entry was cut mid-text.
    pub truncated_text: bool,
}

fn render(query: &str, knowledge: &[KnowledgeEntry]) -> String {
    let mut input = format!("Question: {query}\n");
    for (rank, entry) in knowledge.iter().enumerate() {
        input.push_str(&format!(
            "\n### Viewpoint {} (id {})\nHistory: {}\nGeography: {}\n",
            rank + 1,
            entry.attraction_id,
            entry.history,
            entry.geography
        ));
    }
    input
}

fn prompt_tokens(tokenizer: &TokenizerSpec, input: &str) -> usize {
    tokenizer.token_count(&format!("{RAG_INSTRUCTION}\n{input}"))
}

/// Builds the instruction and input for a query and its retrieved knowledge,
/// in retrieval order. Trailing entries are dropped whole until the token
/// count of instruction plus input fits `max_input_tokens`; if even the first
/// entry alone does not fit, its text is cut at the longest prefix that does.
pub fn build_rag_prompt(
    query: &str,
    knowledge: &[KnowledgeEntry],
    tokenizer: &TokenizerSpec,
    max_input_tokens: usize,
) -> Result<RagPrompt> {
    if knowledge.is_empty() {
        return Err(RagError::NoKnowledge);
    }
    for n in (1..=knowledge.len()).rev() {
        let input = render(query, &knowledge[..n]);
        if prompt_tokens(tokenizer, &input) <= max_input_tokens {
            return Ok(RagPrompt {
                instruction: RAG_INSTRUCTION.to_string(),
                input,
                entries_included: n,
                truncated_text: false,
            });
        }
    }
    // Longest char prefix of the single-entry input that fits.
    let full: Vec<char> = render(query, &knowledge[..1]).chars().collect();
    let fits = |len: usize| prompt_tokens(tokenizer, &full[..len].iter().collect::<String>()) <= max_input_tokens;
    if !fits(0) {
        return Err(RagError::PromptBudget(max_input_tokens));
    }
    let (mut lo, mut hi) = (0, full.len());
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(RagPrompt {
        instruction: RAG_INSTRUCTION.to_string(),
        input: full[..lo].iter().collect(),
        entries_included: 1,
        truncated_text: true,
    })
}
