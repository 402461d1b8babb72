//! Run orchestration: build suites, execute a (target × prompt × size)
//! matrix, persist one JSONL record per case, and aggregate reports.
//!
//! The results file is append-only JSONL. A header line ties every case line
//! to its configuration via a content hash, which is also what makes reruns
//! resumable: case lines already persisted under the same hash are skipped.
//! Scripted-agent matrices evaluate in parallel (rayon, behind the
//! `parallel` feature); endpoint matrices use a bounded worker pool of
//! `parallelism` threads. Either way results are collected keyed by work
//! index and written sequentially in case order, so output order is
//! deterministic regardless of completion order.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::eval::{self, AggregateMetrics, CaseResult, ErrorType, Verdict};
use crate::gateway::{scripted_agent, AgentKind, GatewayError, ModelClient, ModelEndpoint};
use crate::grid::{self, Coord, GenError, GridWorld, Suite, SuiteConfig, TaskCase};
use crate::prompts::{render, PromptKind};
use crate::svg::render_grid_svg;

pub const RESULTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Target {
    Agent { agent: AgentKind },
    Endpoint { endpoint: ModelEndpoint },
}

impl Target {
    pub fn model_id(&self) -> String {
        match self {
            Target::Agent { agent } => format!("agent:{agent}"),
            Target::Endpoint { endpoint } => endpoint.model_id.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub suites: Vec<SuiteConfig>,
    pub prompts: Vec<PromptKind>,
    pub target: Target,
    pub output_dir: PathBuf,
    pub report_format: ReportFormat,
    pub render_svg: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        if self.suites.is_empty() {
            return Err(RunError::Config("at least one suite size is required".into()));
        }
        if self.prompts.is_empty() {
            return Err(RunError::Config("at least one prompt kind is required".into()));
        }
        Ok(())
    }

    /// Content hash over everything that determines the produced verdicts:
    /// suite configs, prompt list, and the target descriptor. Credentials are
    /// referenced by environment-variable name only and never hashed or
    /// persisted. Output paths and report format are excluded.
    pub fn config_hash(&self) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            suites: &'a [SuiteConfig],
            prompts: &'a [PromptKind],
            target: &'a Target,
        }
        let canon = serde_json::to_string(&Hashed {
            suites: &self.suites,
            prompts: &self.prompts,
            target: &self.target,
        })
        .expect("config serialization");
        let digest = Sha256::digest(canon.as_bytes());
        format!("{digest:x}")
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed results line: {0}")]
    Json(#[from] serde_json::Error),
    #[error("results file contains no case records")]
    EmptyResults,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunLine {
    Header(HeaderLine),
    Case(CaseLine),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderLine {
    pub schema_version: u32,
    pub config_hash: String,
    pub timestamp_s: f64,
    pub suites: Vec<SuiteConfig>,
    pub prompts: Vec<PromptKind>,
    pub target: Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseLine {
    pub schema_version: u32,
    pub config_hash: String,
    pub case_id: String,
    pub size: i32,
    pub env_index: u32,
    pub prompt: PromptKind,
    pub model_id: String,
    pub prompt_sha256: String,
    pub reply_text: String,
    pub points: Vec<Coord>,
    pub verdict: Verdict,
    pub optimal_len: u32,
    pub latency_s: f64,
}

fn sha256_hex(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

struct WorkItem<'a> {
    world: &'a GridWorld,
    case: &'a TaskCase,
    prompt: PromptKind,
    size: i32,
    seed: u64,
}

fn evaluate_item(item: &WorkItem<'_>, config_hash: &str, target: &Target, client: Option<&ModelClient>) -> CaseLine {
    let rendered = render(item.prompt, item.world, item.case);
    let (reply_text, latency_s) = match target {
        Target::Agent { agent } => {
            let started = Instant::now();
            let text = scripted_agent(*agent, item.world, item.case, item.seed);
            (text, started.elapsed().as_secs_f64())
        }
        Target::Endpoint { .. } => {
            let reply = client.expect("endpoint target has a client").complete(&rendered);
            (reply.text, reply.latency_s)
        }
    };
    let cand = eval::parse_path(&reply_text);
    let verdict = eval::validate(item.world, item.case, &cand);
    CaseLine {
        schema_version: RESULTS_SCHEMA_VERSION,
        config_hash: config_hash.to_string(),
        case_id: item.case.case_id.clone(),
        size: item.size,
        env_index: item.case.env_index,
        prompt: item.prompt,
        model_id: target.model_id(),
        prompt_sha256: sha256_hex(&rendered.text),
        reply_text,
        points: cand.points,
        verdict,
        optimal_len: item.case.optimal_len,
        latency_s,
    }
}

fn read_lines(path: &Path) -> Result<Vec<RunLine>, RunError> {
    let mut lines = Vec::new();
    if !path.exists() {
        return Ok(lines);
    }
    let reader = BufReader::new(fs::File::open(path)?);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        lines.push(serde_json::from_str(&line)?);
    }
    Ok(lines)
}

fn run_endpoint_pool(
    items: &[WorkItem<'_>],
    config_hash: &str,
    target: &Target,
    client: &ModelClient,
    parallelism: u32,
) -> Vec<CaseLine> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<CaseLine>>> = Mutex::new(vec![None; items.len()]);
    std::thread::scope(|scope| {
        for _ in 0..parallelism.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let line = evaluate_item(&items[i], config_hash, target, Some(client));
                slots.lock().unwrap()[i] = Some(line);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|s| s.expect("every work item completed"))
        .collect()
}

/// Execute the full matrix and return the results file path. Resumable:
/// (case, prompt) pairs already persisted under the same config hash are
/// skipped; partial files are left intact on error.
pub fn run_benchmark(config: &RunConfig) -> Result<PathBuf, RunError> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir)?;
    let results_path = config.output_dir.join("results.jsonl");
    let config_hash = config.config_hash();

    let existing = read_lines(&results_path)?;
    let mut has_header = false;
    let mut done: HashSet<(String, PromptKind)> = HashSet::new();
    for line in &existing {
        match line {
            RunLine::Header(h) if h.config_hash == config_hash => has_header = true,
            RunLine::Case(c) if c.config_hash == config_hash => {
                done.insert((c.case_id.clone(), c.prompt));
            }
            _ => {}
        }
    }

    let suites: Vec<Suite> =
        config.suites.iter().map(grid::build_suite).collect::<Result<_, _>>()?;

    let mut items: Vec<WorkItem<'_>> = Vec::new();
    for (suite, suite_config) in suites.iter().zip(&config.suites) {
        for env in &suite.environments {
            for case in &env.cases {
                for &prompt in &config.prompts {
                    if done.contains(&(case.case_id.clone(), prompt)) {
                        continue;
                    }
                    items.push(WorkItem {
                        world: &env.world,
                        case,
                        prompt,
                        size: suite_config.n_size,
                        seed: suite_config.seed,
                    });
                }
            }
        }
    }

    let lines: Vec<CaseLine> = match &config.target {
        Target::Agent { .. } => {
            let hash = config_hash.clone();
            let target = config.target.clone();
            crate::par::map(items.iter().collect::<Vec<_>>(), move |item| {
                evaluate_item(item, &hash, &target, None)
            })
        }
        Target::Endpoint { endpoint } => {
            let client = ModelClient::connect(endpoint)?;
            run_endpoint_pool(&items, &config_hash, &config.target, &client, endpoint.parallelism)
        }
    };

    let mut file = fs::OpenOptions::new().create(true).append(true).open(&results_path)?;
    if !has_header {
        let header = RunLine::Header(HeaderLine {
            schema_version: RESULTS_SCHEMA_VERSION,
            config_hash: config_hash.clone(),
            timestamp_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
            suites: config.suites.clone(),
            prompts: config.prompts.clone(),
            target: config.target.clone(),
        });
        writeln!(file, "{}", serde_json::to_string(&header)?)?;
    }
    for line in &lines {
        writeln!(file, "{}", serde_json::to_string(&RunLine::Case(line.clone()))?)?;
    }
    file.flush()?;

    if config.render_svg {
        let svg_dir = config.output_dir.join("svg");
        fs::create_dir_all(&svg_dir)?;
        for (item, line) in items.iter().zip(&lines) {
            let cand = eval::CandidatePath {
                points: line.points.clone(),
                raw_text: line.reply_text.clone(),
            };
            let svg = render_grid_svg(item.world, item.case, Some(&cand));
            fs::write(svg_dir.join(format!("{}-{}.svg", line.case_id, line.prompt)), svg)?;
        }
    }

    Ok(results_path)
}

/// One aggregated (config, model, prompt, size) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub config_hash: String,
    pub model_id: String,
    pub prompt: PromptKind,
    pub size: i32,
    pub metrics: AggregateMetrics,
    /// Count of cases per primary error class, keyed by the fixed class name.
    pub error_histogram: Vec<(String, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub groups: Vec<GroupReport>,
}

/// Aggregate a results file. Groups never mix config hashes, so concatenated
/// runs report separately.
pub fn report(results_path: &Path) -> Result<Report, RunError> {
    let lines = read_lines(results_path)?;
    let cases: Vec<&CaseLine> = lines
        .iter()
        .filter_map(|l| match l {
            RunLine::Case(c) => Some(c),
            RunLine::Header(_) => None,
        })
        .collect();
    if cases.is_empty() {
        return Err(RunError::EmptyResults);
    }
    let mut keys: Vec<(String, String, PromptKind, i32)> = cases
        .iter()
        .map(|c| (c.config_hash.clone(), c.model_id.clone(), c.prompt, c.size))
        .collect();
    keys.sort_by(|a, b| (&a.0, &a.1, a.2.name(), a.3).cmp(&(&b.0, &b.1, b.2.name(), b.3)));
    keys.dedup();

    let mut groups = Vec::new();
    for (config_hash, model_id, prompt, size) in keys {
        let members: Vec<&&CaseLine> = cases
            .iter()
            .filter(|c| {
                c.config_hash == config_hash
                    && c.model_id == model_id
                    && c.prompt == prompt
                    && c.size == size
            })
            .collect();
        let results: Vec<CaseResult> = members
            .iter()
            .map(|c| CaseResult {
                case_id: c.case_id.clone(),
                verdict: c.verdict.clone(),
                optimal_len: c.optimal_len,
                latency_s: c.latency_s,
                prompt_kind: c.prompt.name().to_string(),
                model_id: c.model_id.clone(),
            })
            .collect();
        let metrics = eval::aggregate(&results);
        let error_histogram = ErrorType::PRECEDENCE
            .iter()
            .map(|&e| {
                let count =
                    members.iter().filter(|c| c.verdict.primary_error == Some(e)).count() as u32;
                (e.name().to_string(), count)
            })
            .collect();
        groups.push(GroupReport { config_hash, model_id, prompt, size, metrics, error_histogram });
    }
    Ok(Report { groups })
}

fn fmt_opt(v: Option<f64>, precision: usize) -> String {
    match v {
        Some(v) => format!("{v:.precision$}"),
        None => "—".to_string(),
    }
}

impl Report {
    /// Plain-text tables: one metrics row per group in the appendix column
    /// layout, followed by the primary-error histogram per group.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<28} {:<15} {:>5} {:>7} {:>7} {:>7} {:>9} {:>9} {:>8} {:>6}\n",
            "Model", "Prompt", "Size", "CR", "FR", "OR", "GM", "MSE", "RT(s)", "Cases"
        ));
        for g in &self.groups {
            let m = &g.metrics;
            out.push_str(&format!(
                "{:<28} {:<15} {:>5} {:>7.1} {:>7.1} {:>7.1} {:>9} {:>9} {:>8.3} {:>6}\n",
                g.model_id,
                g.prompt.name(),
                g.size,
                m.cr,
                m.fr,
                m.or,
                fmt_opt(m.gm, 2),
                fmt_opt(m.mse, 2),
                m.rt,
                m.n_cases
            ));
        }
        out.push_str("\nPrimary error counts\n");
        for g in &self.groups {
            let counts: Vec<String> = g
                .error_histogram
                .iter()
                .filter(|(_, n)| *n > 0)
                .map(|(name, n)| format!("{name}={n}"))
                .collect();
            out.push_str(&format!(
                "{:<28} {:<15} {:>5}  {}\n",
                g.model_id,
                g.prompt.name(),
                g.size,
                if counts.is_empty() { "none".to_string() } else { counts.join(" ") }
            ));
        }
        out.push_str(
            "\nNotes: GM is reported x100 and, like MSE, is computed over feasible routes only; \
\"—\" marks groups with no feasible route. RT averages all cases including failures.\n",
        );
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}
