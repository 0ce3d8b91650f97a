//! Chat-completion client with live, record and replay transports.
//!
//! Live calls go to an OpenAI-compatible `/chat/completions` endpoint.
//! Record mode stores every response under [`fixture_key`] in a fixture
//! directory (`<key>.json`), and replay mode answers purely from that
//! directory without touching the network.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable holding the endpoint base URL, e.g.
/// `http://localhost:8000/v1`.
pub const ENV_BASE_URL: &str = "DOCDRIFT_API_BASE";
/// Environment variable holding the bearer token, if the endpoint needs one.
pub const ENV_API_KEY: &str = "DOCDRIFT_API_KEY";

pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 2048;
pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub system_text: String,
    pub user_text: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl ChatRequest {
    /// A request at temperature 0 with the default output budget.
    pub fn new(model: impl Into<String>, system_text: impl Into<String>, user_text: impl Into<String>) -> Self {
        ChatRequest {
            model: model.into(),
            system_text: system_text.into(),
            user_text: user_text.into(),
            temperature: 0.0,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportMode {
    Live,
    Record,
    Replay,
}

impl TransportMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TransportMode::Live => "live",
            TransportMode::Record => "record",
            TransportMode::Replay => "replay",
        }
    }
}

impl fmt::Display for TransportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransportMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "live" => Ok(TransportMode::Live),
            "record" => Ok(TransportMode::Record),
            "replay" => Ok(TransportMode::Replay),
            other => Err(crate::Error::Config(format!(
                "unknown transport {other:?} (expected live, record or replay)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub raw_text: String,
    pub latency_seconds: f64,
    pub transport: TransportMode,
}

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },

    #[error("no fixture stored for key {key}")]
    FixtureMiss { key: String },

    #[error("fixture {key} already recorded with different content")]
    FixtureConflict { key: String },

    #[error("fixture {}: {message}", path.display())]
    Fixture { path: PathBuf, message: String },

    #[error("{0}")]
    Config(String),
}

/// SHA-256 over the model, both prompt texts and the temperature, hex
/// encoded. Each text field is length-prefixed so field boundaries cannot
/// shift between requests.
pub fn fixture_key(request: &ChatRequest) -> String {
    let mut hasher = Sha256::new();
    for field in [&request.model, &request.system_text, &request.user_text] {
        hasher.update((field.len() as u64).to_be_bytes());
        hasher.update(field.as_bytes());
    }
    hasher.update(request.temperature.to_bits().to_be_bytes());
    hex::encode(hasher.finalize())
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// On-disk fixture record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub key: String,
    pub model: String,
    pub temperature: f64,
    pub system_sha256: String,
    pub user_sha256: String,
    pub raw_text: String,
}

impl FixtureRecord {
    pub fn new(request: &ChatRequest, raw_text: impl Into<String>) -> Self {
        FixtureRecord {
            key: fixture_key(request),
            model: request.model.clone(),
            temperature: request.temperature,
            system_sha256: sha256_hex(&request.system_text),
            user_sha256: sha256_hex(&request.user_text),
            raw_text: raw_text.into(),
        }
    }
}

/// A directory of `<key>.json` fixtures. Writes are serialized.
#[derive(Debug)]
pub struct FixtureStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureStore {
            dir: dir.into(),
            write_lock: Mutex::new(()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Result<Option<FixtureRecord>, ClientError> {
        let path = self.path_for(key);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => {
                return Err(ClientError::Fixture {
                    path,
                    message: e.to_string(),
                })
            }
        };
        serde_json::from_slice(&bytes).map(Some).map_err(|e| ClientError::Fixture {
            path,
            message: e.to_string(),
        })
    }

    /// Write-once: storing the same text again is a no-op, different text
    /// under an existing key is a [`ClientError::FixtureConflict`].
    pub fn store(&self, record: &FixtureRecord) -> Result<(), ClientError> {
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(existing) = self.load(&record.key)? {
            return if existing.raw_text == record.raw_text {
                Ok(())
            } else {
                Err(ClientError::FixtureConflict {
                    key: record.key.clone(),
                })
            };
        }
        let path = self.path_for(&record.key);
        let io_err = |e: std::io::Error| ClientError::Fixture {
            path: path.clone(),
            message: e.to_string(),
        };
        fs::create_dir_all(&self.dir).map_err(io_err)?;
        let mut json = serde_json::to_string_pretty(record).expect("fixture record serializes");
        json.push('\n');
        let tmp = path.with_extension("json.tmp");
        fs::File::create(&tmp)
            .and_then(|mut f| f.write_all(json.as_bytes()))
            .map_err(io_err)?;
        fs::rename(&tmp, &path).map_err(io_err)
    }
}

/// Anything that can turn a request into raw model text.
pub trait ChatTransport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<String, String>;
}

/// Endpoint coordinates for live and record modes.
#[derive(Clone)]
pub struct Endpoint {
    pub base_url: String,
    api_key: Option<String>,
    pub timeout: Duration,
}

impl fmt::Debug for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Endpoint")
            .field("base_url", &self.base_url)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl Endpoint {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Self {
        Endpoint {
            base_url: base_url.into(),
            api_key,
            timeout: Duration::from_secs(600),
        }
    }

    /// Reads [`ENV_BASE_URL`] and [`ENV_API_KEY`].
    pub fn from_env() -> Result<Self, ClientError> {
        let base = std::env::var(ENV_BASE_URL)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .ok_or_else(|| ClientError::Config(format!("{ENV_BASE_URL} must be set for live/record transport")))?;
        let key = std::env::var(ENV_API_KEY).ok().filter(|s| !s.is_empty());
        Ok(Endpoint::new(base, key))
    }

    fn completions_url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

/// OpenAI-compatible HTTP transport.
pub struct HttpTransport {
    endpoint: Endpoint,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(endpoint: Endpoint) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(endpoint.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpTransport { endpoint, agent }
    }
}

#[derive(Deserialize)]
struct CompletionBody {
    choices: Vec<CompletionChoice>,
}

#[derive(Deserialize)]
struct CompletionChoice {
    message: CompletionMessage,
}

#[derive(Deserialize)]
struct CompletionMessage {
    content: Option<String>,
}

impl ChatTransport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, String> {
        let body = serde_json::json!({
            "model": request.model,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": request.user_text},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        });
        let mut call = self.agent.post(self.endpoint.completions_url());
        if let Some(key) = &self.endpoint.api_key {
            call = call.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = call.send_json(&body).map_err(|e| e.to_string())?;
        let status = response.status();
        if !status.is_success() {
            let detail = response.body_mut().read_to_string().unwrap_or_default();
            let detail: String = detail.chars().take(300).collect();
            return Err(format!("HTTP {status}: {detail}"));
        }
        let parsed: CompletionBody = response.body_mut().read_json().map_err(|e| e.to_string())?;
        Ok(parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default())
    }
}

/// Returns canned responses keyed by user prompt text, for tests and for
/// seeding fixture stores from hand-written outputs.
#[derive(Debug, Default, Clone)]
pub struct ScriptedTransport {
    by_user_text: HashMap<String, String>,
}

impl ScriptedTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn respond(mut self, user_text: impl Into<String>, raw_text: impl Into<String>) -> Self {
        self.by_user_text.insert(user_text.into(), raw_text.into());
        self
    }

    pub fn insert(&mut self, user_text: impl Into<String>, raw_text: impl Into<String>) {
        self.by_user_text.insert(user_text.into(), raw_text.into());
    }
}

impl ChatTransport for ScriptedTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, String> {
        self.by_user_text
            .get(&request.user_text)
            .cloned()
            .ok_or_else(|| "no scripted response for this prompt".to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

/// Counting semaphore bounding concurrent network requests process-wide.
struct InFlightLimit {
    state: Mutex<(usize, usize)>,
    freed: Condvar,
}

static IN_FLIGHT: InFlightLimit = InFlightLimit {
    state: Mutex::new((0, DEFAULT_MAX_IN_FLIGHT)),
    freed: Condvar::new(),
};

/// Sets the process-wide limit on concurrent live requests (minimum 1).
pub fn set_max_in_flight(limit: usize) {
    let mut state = IN_FLIGHT.state.lock().unwrap_or_else(|e| e.into_inner());
    state.1 = limit.max(1);
    IN_FLIGHT.freed.notify_all();
}

pub fn max_in_flight() -> usize {
    IN_FLIGHT.state.lock().unwrap_or_else(|e| e.into_inner()).1
}

struct InFlightPermit;

impl InFlightPermit {
    fn acquire() -> Self {
        let mut state = IN_FLIGHT.state.lock().unwrap_or_else(|e| e.into_inner());
        while state.0 >= state.1 {
            state = IN_FLIGHT.freed.wait(state).unwrap_or_else(|e| e.into_inner());
        }
        state.0 += 1;
        InFlightPermit
    }
}

impl Drop for InFlightPermit {
    fn drop(&mut self) {
        let mut state = IN_FLIGHT.state.lock().unwrap_or_else(|e| e.into_inner());
        state.0 -= 1;
        IN_FLIGHT.freed.notify_one();
    }
}

pub struct ChatClient {
    mode: TransportMode,
    transport: Option<Box<dyn ChatTransport>>,
    store: Option<FixtureStore>,
    retry: RetryPolicy,
}

impl fmt::Debug for ChatClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChatClient")
            .field("mode", &self.mode)
            .field("store", &self.store)
            .field("retry", &self.retry)
            .finish_non_exhaustive()
    }
}

impl ChatClient {
    /// Replay-only client; never opens a connection.
    pub fn replay(store: FixtureStore) -> Self {
        ChatClient {
            mode: TransportMode::Replay,
            transport: None,
            store: Some(store),
            retry: RetryPolicy::default(),
        }
    }

    /// Live or record client over any transport. Record mode needs a store.
    pub fn with_transport(
        mode: TransportMode,
        transport: Box<dyn ChatTransport>,
        store: Option<FixtureStore>,
    ) -> Result<Self, ClientError> {
        match mode {
            TransportMode::Replay => {
                let store = store.ok_or_else(|| ClientError::Config("replay mode needs a fixture store".into()))?;
                Ok(ChatClient::replay(store))
            }
            TransportMode::Record if store.is_none() => {
                Err(ClientError::Config("record mode needs a fixture store".into()))
            }
            _ => Ok(ChatClient {
                mode,
                transport: Some(transport),
                store,
                retry: RetryPolicy::default(),
            }),
        }
    }

    /// Builds the client the CLI uses: HTTP from the environment for live
    /// and record, fixtures only for replay.
    pub fn from_env(mode: TransportMode, fixtures_dir: Option<PathBuf>) -> Result<Self, ClientError> {
        let store = fixtures_dir.map(FixtureStore::new);
        match mode {
            TransportMode::Replay => {
                let store = store.ok_or_else(|| ClientError::Config("replay mode needs a fixture store".into()))?;
                Ok(ChatClient::replay(store))
            }
            _ => {
                let endpoint = Endpoint::from_env()?;
                ChatClient::with_transport(mode, Box::new(HttpTransport::new(endpoint)), store)
            }
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn mode(&self) -> TransportMode {
        self.mode
    }

    pub fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        match self.mode {
            TransportMode::Replay => {
                let store = self.store.as_ref().expect("replay client has a store");
                let key = fixture_key(request);
                let record = store.load(&key)?.ok_or(ClientError::FixtureMiss { key })?;
                Ok(ChatResponse {
                    raw_text: record.raw_text,
                    latency_seconds: 0.0,
                    transport: TransportMode::Replay,
                })
            }
            TransportMode::Live | TransportMode::Record => {
                let started = Instant::now();
                let raw_text = self.send_with_retry(request)?;
                let latency_seconds = started.elapsed().as_secs_f64();
                if self.mode == TransportMode::Record {
                    let store = self.store.as_ref().expect("record client has a store");
                    store.store(&FixtureRecord::new(request, raw_text.clone()))?;
                }
                Ok(ChatResponse {
                    raw_text,
                    latency_seconds,
                    transport: self.mode,
                })
            }
        }
    }

    fn send_with_retry(&self, request: &ChatRequest) -> Result<String, ClientError> {
        let transport = self.transport.as_ref().expect("live client has a transport");
        let attempts = self.retry.attempts.max(1);
        let mut backoff = self.retry.initial_backoff;
        let mut last = String::new();
        for attempt in 1..=attempts {
            let outcome = {
                let _permit = InFlightPermit::acquire();
                transport.send(request)
            };
            match outcome {
                Ok(text) => return Ok(text),
                Err(e) => last = e,
            }
            if attempt < attempts {
                std::thread::sleep(backoff);
                backoff *= 2;
            }
        }
        Err(ClientError::Transport {
            attempts,
            message: last,
        })
    }
}
