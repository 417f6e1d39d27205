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

//! Vector retrieval engine and benchmark harness for attraction recommendation.
//!
//! The pipeline is: load the attraction corpus ([`corpus`]), tokenize
//! ([`textproc`]), vectorize with TF-IDF or precomputed embeddings
//! ([`vectorize`]), index with one of eight index families under L2, L1 or
//! inner product ([`index`]), retrieve the top-3, and score the results by
//! keyword hits ([`evalkit`]). [`ragflow`] turns retrieval output into an LLM
//! prompt, and [`bench`] drives the full configuration sweep.

pub mod bench;
pub mod corpus;
pub mod evalkit;
pub mod index;
pub mod ragflow;
pub mod synthetic;
pub mod textproc;
pub mod vectorize;

pub use corpus::{Attraction, KnowledgeEntry, KnowledgeStore, Prompt, PromptSet};
pub use evalkit::{ComponentScores, CompositeWeights, EvalReport};
pub use index::{Family, IndexSpec, Metric, SearchResult, VectorIndex};
pub use textproc::{TokenizerMode, TokenizerSpec};
pub use vectorize::{DenseVector, EmbeddingTable, SparseVector, TfIdfModel, Vector};
