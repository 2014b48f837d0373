//! Chat-completion transports: a live HTTP client that records every
//! exchange, and a replay directory keyed by prompt hash.
//!
//! A live session's log directory is itself a valid replay directory, so
//! recorded sessions replay bit-identically.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

/// Chat-completion request parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionParams {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for CompletionParams {
    fn default() -> Self {
        CompletionParams { model: "gpt-4".to_string(), temperature: 0.7, max_tokens: 2048 }
    }
}

/// Transport failures.
#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("endpoint returned status {status}: {body}")]
    Http { status: u16, body: String },
    #[error("authentication failed (status {status})")]
    Auth { status: u16 },
    #[error("network error: {0}")]
    Network(String),
    #[error("credential environment variable {env} is not set")]
    MissingCredential { env: String },
    #[error("no replay fixture for prompt hash {hash}")]
    NoFixture { hash: String },
    #[error("replay fixture {hash} stores a different prompt (hash collision or edited fixture)")]
    FixtureMismatch { hash: String },
    #[error("malformed completion response: {0}")]
    BadResponse(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// One request/response exchange; the on-disk replay fixture format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub prompt: String,
    pub params: CompletionParams,
    pub response: String,
}

/// SHA-256 of the prompt text, hex encoded. Fixture files are named
/// `<prompt-hash>.json`.
pub fn prompt_hash(prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(prompt.as_bytes());
    hex::encode(hasher.finalize())
}

/// A pluggable chat-completion backend.
pub trait Transport: Send + Sync {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String, TransportError>;
}

/// Replays stored responses from a fixture directory. Safe for concurrent
/// reads.
#[derive(Debug, Clone)]
pub struct ReplayTransport {
    dir: PathBuf,
}

impl ReplayTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayTransport { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes a fixture for `prompt`, returning its path. Used to seed
    /// replay directories and by the live transport's session log.
    pub fn store(
        dir: &Path,
        prompt: &str,
        params: &CompletionParams,
        response: &str,
    ) -> Result<PathBuf, TransportError> {
        std::fs::create_dir_all(dir)?;
        let record = FixtureRecord {
            prompt: prompt.to_string(),
            params: params.clone(),
            response: response.to_string(),
        };
        let path = dir.join(format!("{}.json", prompt_hash(prompt)));
        std::fs::write(&path, serde_json::to_string_pretty(&record)?)?;
        Ok(path)
    }
}

impl Transport for ReplayTransport {
    fn complete(&self, prompt: &str, _params: &CompletionParams) -> Result<String, TransportError> {
        let hash = prompt_hash(prompt);
        let path = self.dir.join(format!("{hash}.json"));
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(err) if err.kind() == std::io::ErrorKind::NotFound => {
                return Err(TransportError::NoFixture { hash })
            }
            Err(err) => return Err(err.into()),
        };
        let record: FixtureRecord = serde_json::from_str(&text)?;
        if record.prompt != prompt {
            return Err(TransportError::FixtureMismatch { hash });
        }
        Ok(record.response)
    }
}

/// Live chat-completion client. Performs at most one in-flight request at
/// a time and appends every exchange to the session log directory.
pub struct LiveTransport {
    endpoint: String,
    credential_env: String,
    session_log: Option<PathBuf>,
    serial: Mutex<()>,
    agent: ureq::Agent,
}

impl LiveTransport {
    /// `credential_env` names the environment variable holding the bearer
    /// token; credentials never live in config files.
    pub fn new(endpoint: &str, credential_env: &str, session_log: Option<PathBuf>) -> Self {
        LiveTransport {
            endpoint: endpoint.to_string(),
            credential_env: credential_env.to_string(),
            session_log,
            serial: Mutex::new(()),
            agent: ureq::AgentBuilder::new()
                .timeout(std::time::Duration::from_secs(120))
                .build(),
        }
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: String,
}

impl Transport for LiveTransport {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String, TransportError> {
        let _serial = self.serial.lock().expect("transport mutex poisoned");
        let credential = std::env::var(&self.credential_env).map_err(|_| {
            TransportError::MissingCredential { env: self.credential_env.clone() }
        })?;
        let body = ChatRequest {
            model: &params.model,
            messages: [ChatMessage { role: "user", content: prompt }],
            temperature: params.temperature,
            max_tokens: params.max_tokens,
        };
        let result = self
            .agent
            .post(&self.endpoint)
            .set("Authorization", &format!("Bearer {credential}"))
            .set("Content-Type", "application/json")
            .send_json(&body);
        let response = match result {
            Ok(resp) => resp,
            Err(ureq::Error::Status(status, resp)) => {
                if status == 401 || status == 403 {
                    return Err(TransportError::Auth { status });
                }
                let body = resp.into_string().unwrap_or_default();
                return Err(TransportError::Http { status, body });
            }
            Err(ureq::Error::Transport(err)) => {
                return Err(TransportError::Network(err.to_string()))
            }
        };
        let parsed: ChatResponse = response
            .into_json()
            .map_err(|e| TransportError::BadResponse(e.to_string()))?;
        let content = parsed
            .choices
            .first()
            .map(|c| c.message.content.clone())
            .ok_or_else(|| TransportError::BadResponse("response has no choices".to_string()))?;
        if let Some(dir) = &self.session_log {
            ReplayTransport::store(dir, prompt, params, &content)?;
        }
        Ok(content)
    }
}
