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

//! Tokenization, stop-word filtering and keyword extraction.
//!
//! Three modes are supported:
//!
//! - `whitespace`: split on Unicode whitespace only.
//! - `char_bigram`: contiguous CJK runs emit overlapping character bigrams
//!   (a run of one character emits that character); other text is split into
//!   words.
//! - `unicode_mixed` (default): CJK runs emit every character and every
//!   bigram, interleaved by position; other text is split into words.
//!
//! In the two CJK-aware modes, whitespace and punctuation (ASCII, general
//! punctuation, CJK and fullwidth punctuation) separate runs and are never
//! emitted. Stop-words are removed by exact match after splitting.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerMode {
    #[default]
    UnicodeMixed,
    CharBigram,
    Whitespace,
}

impl fmt::Display for TokenizerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::UnicodeMixed => "unicode_mixed",
            Self::CharBigram => "char_bigram",
            Self::Whitespace => "whitespace",
        })
    }
}

impl FromStr for TokenizerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unicode_mixed" => Ok(Self::UnicodeMixed),
            "char_bigram" => Ok(Self::CharBigram),
            "whitespace" => Ok(Self::Whitespace),
            other => Err(format!("unknown tokenizer mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerSpec {
    pub mode: TokenizerMode,
    #[serde(default)]
    pub stopwords: BTreeSet<String>,
    #[serde(default = "default_lowercase")]
    pub lowercase: bool,
}

fn default_lowercase() -> bool {
    true
}

impl Default for TokenizerSpec {
    fn default() -> Self {
        Self {
            mode: TokenizerMode::default(),
            stopwords: BTreeSet::new(),
            lowercase: true,
        }
    }
}

impl TokenizerSpec {
    pub fn new(mode: TokenizerMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn with_stopwords(mut self, stopwords: impl IntoIterator<Item = String>) -> Self {
        self.stopwords = stopwords.into_iter().collect();
        self
    }

    pub fn with_lowercase(mut self, lowercase: bool) -> Self {
        self.lowercase = lowercase;
        self
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        tokenize(self, text)
    }

    pub fn keywords(&self, text: &str) -> BTreeSet<String> {
        extract_keywords(self, text)
    }

    /// Approximate model-token count used for prompt budgeting.
    pub fn token_count(&self, text: &str) -> usize {
        self.tokenize(text).len()
    }
}

pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF       // hiragana, katakana
        | 0x3400..=0x4DBF     // ext A
        | 0x4E00..=0x9FFF     // unified ideographs
        | 0xAC00..=0xD7AF     // hangul syllables
        | 0xF900..=0xFAFF     // compatibility ideographs
        | 0x20000..=0x2FA1F)  // ext B onwards
}

fn is_separator(c: char) -> bool {
    c.is_whitespace()
        || c.is_ascii_punctuation()
        || matches!(c as u32,
            0x2000..=0x206F
            | 0x3000..=0x303F
            | 0xFF00..=0xFF0F
            | 0xFF1A..=0xFF20
            | 0xFF3B..=0xFF40
            | 0xFF5B..=0xFF65)
}

#[derive(PartialEq)]
enum Run {
    Cjk,
    Word,
}

fn split_runs(text: &str) -> Vec<(Run, Vec<char>)> {
    let mut runs: Vec<(Run, Vec<char>)> = Vec::new();
    for c in text.chars() {
        if is_separator(c) {
            if runs.last().is_some_and(|(_, r)| !r.is_empty()) {
                runs.push((Run::Word, Vec::new()));
            }
            continue;
        }
        let kind = if is_cjk(c) { Run::Cjk } else { Run::Word };
        match runs.last_mut() {
            Some((k, chars)) if *k == kind || chars.is_empty() => {
                *k = kind;
                chars.push(c);
            }
            _ => runs.push((kind, vec![c])),
        }
    }
    runs.retain(|(_, r)| !r.is_empty());
    runs
}

pub fn tokenize(spec: &TokenizerSpec, text: &str) -> Vec<String> {
    let lowered;
    let text = if spec.lowercase {
        lowered = text.to_lowercase();
        &lowered
    } else {
        text
    };

    let mut tokens = Vec::new();
    match spec.mode {
        TokenizerMode::Whitespace => {
            tokens.extend(text.split_whitespace().map(str::to_string));
        }
        TokenizerMode::CharBigram | TokenizerMode::UnicodeMixed => {
            let with_chars = spec.mode == TokenizerMode::UnicodeMixed;
            for (kind, chars) in split_runs(text) {
                match kind {
                    Run::Word => tokens.push(chars.into_iter().collect()),
                    Run::Cjk if chars.len() == 1 => tokens.push(chars[0].to_string()),
                    Run::Cjk => {
                        for i in 0..chars.len() {
                            if with_chars {
                                tokens.push(chars[i].to_string());
                            }
                            if i + 1 < chars.len() {
                                tokens.push(chars[i..i + 2].iter().collect());
                            }
                        }
                    }
                }
            }
        }
    }
    if !spec.stopwords.is_empty() {
        tokens.retain(|t| !spec.stopwords.contains(t));
    }
    tokens
}

/// Deduplicated tokens of `text`.
pub fn extract_keywords(spec: &TokenizerSpec, text: &str) -> BTreeSet<String> {
    tokenize(spec, text).into_iter().collect()
}
