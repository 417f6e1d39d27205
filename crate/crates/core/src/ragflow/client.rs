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

//! LLM client abstraction: a deterministic offline stub and an HTTP client
//! for chat-completions style endpoints.

use std::collections::{BTreeMap, VecDeque};
use std::env;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

/// Environment variable holding the bearer token for [`HttpClient`].
pub const TOKEN_ENV: &str = "VRB_LLM_TOKEN";

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request timed out")]
    Timeout,
    #[error("transport: {0}")]
    Transport(String),
    #[error("unexpected response: {0}")]
    Protocol(String),
    #[error("missing credentials: set {0}")]
    MissingToken(&'static str),
}

/// Generation settings passed to [`LlmClient::generate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub temperature: f64,
    pub max_input_tokens: usize,
    pub max_output_tokens: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            temperature: 0.95,
            max_input_tokens: 1024,
            max_output_tokens: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionField {
    pub name: String,
    pub description: String,
}

/// A function whose arguments are all required string fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSchema {
    pub name: String,
    pub description: String,
    pub fields: Vec<FunctionField>,
}

impl FunctionSchema {
    /// JSON-schema `parameters` object.
    pub fn parameters(&self) -> Value {
        let properties: serde_json::Map<String, Value> = self
            .fields
            .iter()
            .map(|f| (f.name.clone(), json!({"type": "string", "description": f.description})))
            .collect();
        let required: Vec<&str> = self.fields.iter().map(|f| f.name.as_str()).collect();
        json!({"type": "object", "properties": properties, "required": required})
    }
}

pub trait LlmClient: Send + Sync {
    fn generate(&self, instruction: &str, input: &str, params: &GenParams) -> Result<String, ClientError>;

    fn call_function(&self, schema: &FunctionSchema, input: &str) -> Result<BTreeMap<String, String>, ClientError>;
}

/// Offline client. `generate` returns the input unchanged. `call_function`
/// replays queued responses in order, repeating the last one, or echoes the
/// input into every field when nothing was queued.
#[derive(Debug, Default)]
pub struct StubClient {
    responses: Mutex<VecDeque<BTreeMap<String, String>>>,
}

impl StubClient {
    pub fn echo() -> Self {
        Self::default()
    }

    pub fn with_function_responses(responses: impl IntoIterator<Item = BTreeMap<String, String>>) -> Self {
        Self {
            responses: Mutex::new(responses.into_iter().collect()),
        }
    }
}

impl LlmClient for StubClient {
    fn generate(&self, _instruction: &str, input: &str, _params: &GenParams) -> Result<String, ClientError> {
        Ok(input.to_string())
    }

    fn call_function(&self, schema: &FunctionSchema, input: &str) -> Result<BTreeMap<String, String>, ClientError> {
        let mut queue = self.responses.lock().expect("stub queue poisoned");
        match queue.len() {
            0 => Ok(schema
                .fields
                .iter()
                .map(|f| (f.name.clone(), input.to_string()))
                .collect()),
            1 => Ok(queue[0].clone()),
            _ => Ok(queue.pop_front().expect("non-empty")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpClientConfig {
    /// Base URL up to and excluding `/chat/completions`.
    pub base_url: String,
    pub model: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    60
}

/// Chat-completions client. Instruction goes in the system message, input in
/// the user message; function calls are forced through `tool_choice`.
pub struct HttpClient {
    config: HttpClientConfig,
    token: String,
    agent: ureq::Agent,
}

impl HttpClient {
    /// Reads the bearer token from [`TOKEN_ENV`].
    pub fn from_env(config: HttpClientConfig) -> Result<Self, ClientError> {
        let token = env::var(TOKEN_ENV).map_err(|_| ClientError::MissingToken(TOKEN_ENV))?;
        Ok(Self::new(config, token))
    }

    pub fn new(config: HttpClientConfig, token: String) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        Self { config, token, agent }
    }

    fn post(&self, body: Value) -> Result<Value, ClientError> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let response = self
            .agent
            .post(&url)
            .header("Authorization", &format!("Bearer {}", self.token))
            .send_json(&body)
            .map_err(map_ureq)?;
        response.into_body().read_json::<Value>().map_err(map_ureq)
    }
}

fn map_ureq(e: ureq::Error) -> ClientError {
    match e {
        ureq::Error::Timeout(_) => ClientError::Timeout,
        other => ClientError::Transport(other.to_string()),
    }
}

fn first_message(response: &Value) -> Result<&Value, ClientError> {
    response
        .pointer("/choices/0/message")
        .ok_or_else(|| ClientError::Protocol("no choices[0].message".into()))
}

impl LlmClient for HttpClient {
    fn generate(&self, instruction: &str, input: &str, params: &GenParams) -> Result<String, ClientError> {
        let body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": instruction},
                {"role": "user", "content": input},
            ],
            "temperature": params.temperature,
            "max_tokens": params.max_output_tokens,
        });
        let response = self.post(body)?;
        first_message(&response)?
            .get("content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ClientError::Protocol("message has no text content".into()))
    }

    fn call_function(&self, schema: &FunctionSchema, input: &str) -> Result<BTreeMap<String, String>, ClientError> {
        let body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": input}],
            "tools": [{
                "type": "function",
                "function": {
                    "name": schema.name,
                    "description": schema.description,
                    "parameters": schema.parameters(),
                },
            }],
            "tool_choice": {"type": "function", "function": {"name": schema.name}},
        });
        let response = self.post(body)?;
        let arguments = first_message(&response)?
            .pointer("/tool_calls/0/function/arguments")
            .and_then(Value::as_str)
            .ok_or_else(|| ClientError::Protocol("no tool call arguments".into()))?;
        let parsed: BTreeMap<String, Value> =
            serde_json::from_str(arguments).map_err(|e| ClientError::Protocol(e.to_string()))?;
        Ok(parsed
            .into_iter()
            .map(|(k, v)| match v {
                Value::String(s) => (k, s),
                other => (k, other.to_string()),
            })
            .collect())
    }
}
