//! Reply acquisition: remote chat-completion endpoints and built-in scripted
//! agents.
//!
//! The wire format is the de-facto OpenAI-compatible chat JSON. Transient
//! failures (transport errors, 429, 5xx) retry with exponential backoff;
//! terminal failure is a value (`failed: true`, empty text) so a flaky
//! endpoint never aborts a run. Scripted agents are deterministic planners
//! used for offline testing and fault injection: each non-Oracle agent is
//! built to trip one specific failure class.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Coord, GridWorld, TaskCase};
use crate::prompts::RenderedPrompt;
use crate::rng::{purpose, Rng};
use crate::solvers::{self, format_points};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpoint {
    pub base_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key. The key itself
    /// is read at request time and never serialized.
    pub credential_ref: Option<String>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_s: f64,
    pub max_retries: u32,
    pub parallelism: u32,
    /// Initial backoff; doubles per retry.
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    /// Log request/response JSON (credential redacted) to stderr.
    #[serde(default)]
    pub debug_wire: bool,
}

fn default_backoff_ms() -> u64 {
    500
}

impl ModelEndpoint {
    pub fn new(base_url: impl Into<String>, model_id: impl Into<String>) -> Self {
        ModelEndpoint {
            base_url: base_url.into(),
            model_id: model_id.into(),
            credential_ref: None,
            temperature: 0.0,
            max_tokens: 2048,
            timeout_s: 120.0,
            max_retries: 3,
            parallelism: 4,
            backoff_ms: default_backoff_ms(),
            debug_wire: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReply {
    pub text: String,
    /// Wall-clock seconds from first request to full response receipt.
    pub latency_s: f64,
    pub attempt_count: u32,
    pub failed: bool,
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("config error: {0}")]
    Config(String),
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

/// A pooled blocking client for one endpoint. Cloneable and thread-safe;
/// the runner shares one across its worker threads.
#[derive(Debug, Clone)]
pub struct ModelClient {
    endpoint: ModelEndpoint,
    http: reqwest::blocking::Client,
    api_key: Option<String>,
}

impl ModelClient {
    pub fn connect(endpoint: &ModelEndpoint) -> Result<ModelClient, GatewayError> {
        let api_key = match &endpoint.credential_ref {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                GatewayError::Config(format!("credential environment variable '{var}' is not set"))
            })?),
            None => None,
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(endpoint.timeout_s))
            .build()
            .map_err(|e| GatewayError::Config(format!("http client: {e}")))?;
        Ok(ModelClient { endpoint: endpoint.clone(), http, api_key })
    }

    pub fn endpoint(&self) -> &ModelEndpoint {
        &self.endpoint
    }

    /// Single-turn chat completion with retry/backoff on transient errors.
    /// Terminal failure returns `failed: true` rather than an error.
    pub fn complete(&self, prompt: &RenderedPrompt) -> ModelReply {
        let url = format!("{}/chat/completions", self.endpoint.base_url.trim_end_matches('/'));
        let body = ChatRequest {
            model: &self.endpoint.model_id,
            messages: [ChatMessage { role: "user", content: &prompt.text }],
            temperature: self.endpoint.temperature,
            max_tokens: self.endpoint.max_tokens,
        };
        if self.endpoint.debug_wire {
            eprintln!(
                "[wire] POST {url} authorization=<redacted> body={}",
                serde_json::to_string(&body).unwrap_or_default()
            );
        }
        let started = Instant::now();
        let max_attempts = self.endpoint.max_retries + 1;
        for attempt in 1..=max_attempts {
            let mut req = self.http.post(&url).json(&body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            let outcome = req.send();
            let transient = match outcome {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let latency_s = started.elapsed().as_secs_f64();
                        let text = resp
                            .json::<ChatResponse>()
                            .ok()
                            .and_then(|r| r.choices.into_iter().next())
                            .map(|c| c.message.content)
                            .unwrap_or_default();
                        if self.endpoint.debug_wire {
                            eprintln!("[wire] {status} attempt={attempt} reply={text:?}");
                        }
                        let failed = text.is_empty();
                        return ModelReply { text, latency_s, attempt_count: attempt, failed };
                    }
                    if self.endpoint.debug_wire {
                        eprintln!("[wire] {status} attempt={attempt}");
                    }
                    status.as_u16() == 429 || status.is_server_error()
                }
                Err(e) => {
                    if self.endpoint.debug_wire {
                        eprintln!("[wire] transport error attempt={attempt}: {e}");
                    }
                    true
                }
            };
            if !transient || attempt == max_attempts {
                return ModelReply {
                    text: String::new(),
                    latency_s: started.elapsed().as_secs_f64(),
                    attempt_count: attempt,
                    failed: true,
                };
            }
            let backoff = self.endpoint.backoff_ms.saturating_mul(1 << (attempt - 1));
            std::thread::sleep(Duration::from_millis(backoff));
        }
        unreachable!("loop always returns");
    }
}

/// Deterministic in-process planners. Oracle wraps the ground-truth solver;
/// the rest each construct one designated failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Oracle,
    GreedyManhattan,
    RandomWalk,
    DiagonalCheat,
    Silent,
    OffsetEndpoint,
    WallWalker,
}

impl AgentKind {
    pub const ALL: [AgentKind; 7] = [
        AgentKind::Oracle,
        AgentKind::GreedyManhattan,
        AgentKind::RandomWalk,
        AgentKind::DiagonalCheat,
        AgentKind::Silent,
        AgentKind::OffsetEndpoint,
        AgentKind::WallWalker,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Oracle => "oracle",
            AgentKind::GreedyManhattan => "greedy_manhattan",
            AgentKind::RandomWalk => "random_walk",
            AgentKind::DiagonalCheat => "diagonal_cheat",
            AgentKind::Silent => "silent",
            AgentKind::OffsetEndpoint => "offset_endpoint",
            AgentKind::WallWalker => "wall_walker",
        }
    }
}

impl std::str::FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        AgentKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown agent '{s}'"))
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Produce the reply text for one (agent, case). Deterministic under seed.
pub fn scripted_agent(kind: AgentKind, world: &GridWorld, case: &TaskCase, seed: u64) -> String {
    match kind {
        AgentKind::Oracle => {
            let path = solvers::dijkstra_shortest(world, case.start, case.end)
                .expect("generated cases have free endpoints")
                .expect("generated cases are connected");
            path.to_text()
        }
        AgentKind::Silent => "[]".to_string(),
        AgentKind::GreedyManhattan => {
            // Straight toward the goal, rows first, ignoring obstacles.
            let mut points = vec![case.start];
            let mut cur = case.start;
            while cur != case.end {
                if cur.x != case.end.x {
                    cur.x += (case.end.x - cur.x).signum();
                } else {
                    cur.y += (case.end.y - cur.y).signum();
                }
                points.push(cur);
            }
            format_points(&points)
        }
        AgentKind::DiagonalCheat => {
            // Chebyshev-optimal 8-connected path: diagonal while possible.
            let mut points = vec![case.start];
            let mut cur = case.start;
            while cur != case.end {
                if cur.x != case.end.x {
                    cur.x += (case.end.x - cur.x).signum();
                }
                if cur.y != case.end.y {
                    cur.y += (case.end.y - cur.y).signum();
                }
                points.push(cur);
            }
            format_points(&points)
        }
        AgentKind::OffsetEndpoint => {
            let path = solvers::dijkstra_shortest(world, case.start, case.end)
                .expect("free endpoints")
                .expect("connected");
            let mut points = path.points;
            if points.len() > 1 {
                points.pop();
            }
            format_points(&points)
        }
        AgentKind::WallWalker => {
            // Leave the grid above row 0, slide along row -1, and come back
            // down to the destination. Unit steps, correct endpoints, but
            // guaranteed out-of-bounds cells.
            let mut points = vec![case.start];
            let mut cur = case.start;
            while cur.x > -1 {
                cur.x -= 1;
                points.push(cur);
            }
            while cur.y != case.end.y {
                cur.y += (case.end.y - cur.y).signum();
                points.push(cur);
            }
            while cur.x < case.end.x {
                cur.x += 1;
                points.push(cur);
            }
            format_points(&points)
        }
        AgentKind::RandomWalk => {
            // Bounded walk over free cells; drops its last point if it
            // stumbles onto the destination, so the endpoint never matches.
            let mut rng = Rng::stream(seed, purpose::AGENT, fnv1a(case.case_id.as_bytes()));
            let mut points = vec![case.start];
            let mut cur = case.start;
            let budget = case.start.manhattan(case.end).max(2);
            for _ in 0..budget {
                let options: Vec<Coord> = solvers::MOVE_ORDER
                    .iter()
                    .map(|&(dx, dy)| Coord::new(cur.x + dx, cur.y + dy))
                    .filter(|&c| world.is_free(c))
                    .collect();
                if options.is_empty() {
                    break;
                }
                cur = options[rng.below(options.len() as u64) as usize];
                points.push(cur);
            }
            if points.len() > 1 && *points.last().unwrap() == case.end {
                points.pop();
            }
            format_points(&points)
        }
    }
}
