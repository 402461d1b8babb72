//! Command-line front end: generate suites, inspect cases and prompts, run
//! benchmark matrices, aggregate reports, and render SVGs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use routebench::eval::parse_path;
use routebench::gateway::{AgentKind, ModelEndpoint};
use routebench::grid::{build_suite, Suite, SuiteConfig};
use routebench::prompts::{render, PromptKind};
use routebench::runner::{report, run_benchmark, ReportFormat, RunConfig, Target};
use routebench::solvers::format_points;
use routebench::svg::render_grid_svg;

#[derive(Parser)]
#[command(name = "routebench", version, about = "Grid path-planning benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark suite and write it as JSON.
    Generate(GenerateArgs),
    /// Print the reference shortest path for one case of a suite.
    Solve(SolveArgs),
    /// Print a rendered prompt for one case of a suite.
    Prompt(PromptArgs),
    /// Execute a (target × prompt × size) matrix and persist JSONL results.
    Run(RunArgs),
    /// Aggregate a results file into metric tables.
    Report(ReportArgs),
    /// Render one case (world, reference path, optional reply) as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Grid size N. 10, 20, and 30 map to the standard obstacle counts.
    #[arg(long, default_value_t = 10)]
    size: i32,
    /// Number of obstacles (defaults to the standard value for the size).
    #[arg(long)]
    obstacles: Option<u32>,
    /// Obstacle side length (defaults to the standard value for the size).
    #[arg(long)]
    side: Option<i32>,
    #[arg(long, default_value_t = 20)]
    envs: u32,
    #[arg(long, default_value_t = 5)]
    pairs: u32,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    case: String,
}

#[derive(Args)]
struct PromptArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    case: String,
    #[arg(long)]
    prompt: PromptKindArg,
}

#[derive(Clone)]
struct PromptKindArg(PromptKind);

impl std::str::FromStr for PromptKindArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<PromptKind>().map(PromptKindArg).map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct RunArgs {
    /// Declarative config file (TOML, flat keys); flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid size; repeatable. Standard sizes 10/20/30.
    #[arg(long)]
    size: Vec<i32>,
    #[arg(long)]
    envs: Option<u32>,
    #[arg(long)]
    pairs: Option<u32>,
    /// Prompt kind; repeatable.
    #[arg(long)]
    prompt: Vec<PromptKindArg>,
    /// Scripted agent target (mutually exclusive with --model).
    #[arg(long)]
    agent: Option<AgentKind>,
    /// Remote model id target (endpoint settings from the config file).
    #[arg(long)]
    model: Option<String>,
    /// Output directory for results.jsonl (and svg/ when --svg).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format printed after the run: table|json.
    #[arg(long)]
    report: Option<String>,
    /// Render one SVG per (case, prompt).
    #[arg(long)]
    svg: bool,
    /// Max in-flight endpoint requests.
    #[arg(long)]
    parallelism: Option<u32>,
    /// Log request/response JSON (credential redacted).
    #[arg(long)]
    debug_wire: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Results JSONL file produced by `run`.
    #[arg(long)]
    results: PathBuf,
    /// table|json
    #[arg(long, default_value = "table")]
    report: String,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    case: String,
    /// Optional reply text; its parsed path is drawn as the candidate.
    #[arg(long)]
    reply: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flat-key run configuration file. Every key is optional; CLI flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    sizes: Option<Vec<i32>>,
    envs: Option<u32>,
    pairs: Option<u32>,
    prompts: Option<Vec<String>>,
    agent: Option<String>,
    model: Option<String>,
    out: Option<PathBuf>,
    report: Option<String>,
    svg: Option<bool>,
    parallelism: Option<u32>,
    debug_wire: Option<bool>,
    base_url: Option<String>,
    credential_env: Option<String>,
    temperature: Option<f64>,
    max_tokens: Option<u32>,
    timeout_s: Option<f64>,
    max_retries: Option<u32>,
}

fn fail(msg: impl std::fmt::Display) -> anyhow::Error {
    anyhow::anyhow!("{msg}")
}

fn load_suite(path: &PathBuf) -> anyhow::Result<Suite> {
    let text = std::fs::read_to_string(path)?;
    Ok(Suite::from_json(&text)?)
}

fn suite_config(args: &GenerateArgs) -> anyhow::Result<SuiteConfig> {
    if let Some(mut config) = SuiteConfig::standard(args.size, args.seed) {
        config.envs_per_config = args.envs;
        config.pairs_per_env = args.pairs;
        if let Some(n) = args.obstacles {
            config.n_obstacles = n;
        }
        if let Some(s) = args.side {
            config.obstacle_side = s;
        }
        return Ok(config);
    }
    match (args.obstacles, args.side) {
        (Some(n_obstacles), Some(obstacle_side)) => Ok(SuiteConfig {
            n_size: args.size,
            n_obstacles,
            obstacle_side,
            envs_per_config: args.envs,
            pairs_per_env: args.pairs,
            seed: args.seed,
        }),
        _ => Err(fail(format!(
            "size {} is not a standard configuration; pass --obstacles and --side",
            args.size
        ))),
    }
}

fn parse_report_format(s: &str) -> anyhow::Result<ReportFormat> {
    match s {
        "table" => Ok(ReportFormat::Table),
        "json" => Ok(ReportFormat::Json),
        other => Err(fail(format!("unknown report format '{other}' (expected table|json)"))),
    }
}

fn build_run_config(args: &RunArgs) -> anyhow::Result<RunConfig> {
    let file: FileConfig = match &args.config {
        Some(path) => toml::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| fail(format!("{}: {e}", path.display())))?,
        None => FileConfig::default(),
    };

    let seed = args.seed.or(file.seed).unwrap_or(7);
    let sizes: Vec<i32> = if !args.size.is_empty() {
        args.size.clone()
    } else {
        file.sizes.clone().unwrap_or_else(|| vec![10, 20, 30])
    };
    let suites: Vec<SuiteConfig> = sizes
        .iter()
        .map(|&n| {
            let mut config = SuiteConfig::standard(n, seed)
                .ok_or_else(|| fail(format!("size {n} is not a standard configuration")))?;
            if let Some(envs) = args.envs.or(file.envs) {
                config.envs_per_config = envs;
            }
            if let Some(pairs) = args.pairs.or(file.pairs) {
                config.pairs_per_env = pairs;
            }
            Ok(config)
        })
        .collect::<anyhow::Result<_>>()?;

    let prompts: Vec<PromptKind> = if !args.prompt.is_empty() {
        args.prompt.iter().map(|p| p.0).collect()
    } else if let Some(names) = &file.prompts {
        names
            .iter()
            .map(|n| n.parse::<PromptKind>().map_err(fail))
            .collect::<anyhow::Result<_>>()?
    } else {
        PromptKind::ALL.to_vec()
    };

    let agent = match (&args.agent, &file.agent) {
        (Some(a), _) => Some(*a),
        (None, Some(name)) => Some(name.parse::<AgentKind>().map_err(fail)?),
        _ => None,
    };
    let model = args.model.clone().or_else(|| file.model.clone());
    let target = match (agent, model) {
        (Some(_), Some(_)) => return Err(fail("--agent and --model are mutually exclusive")),
        (Some(agent), None) => Target::Agent { agent },
        (None, Some(model_id)) => {
            let base_url = file
                .base_url
                .clone()
                .ok_or_else(|| fail("a model target requires base_url in the config file"))?;
            let mut endpoint = ModelEndpoint::new(base_url, model_id);
            endpoint.credential_ref = file.credential_env.clone();
            if let Some(t) = file.temperature {
                endpoint.temperature = t;
            }
            if let Some(m) = file.max_tokens {
                endpoint.max_tokens = m;
            }
            if let Some(t) = file.timeout_s {
                endpoint.timeout_s = t;
            }
            if let Some(r) = file.max_retries {
                endpoint.max_retries = r;
            }
            if let Some(p) = args.parallelism.or(file.parallelism) {
                endpoint.parallelism = p;
            }
            endpoint.debug_wire = args.debug_wire || file.debug_wire.unwrap_or(false);
            Target::Endpoint { endpoint }
        }
        (None, None) => return Err(fail("pick a target: --agent or --model")),
    };

    let report_format = match args.report.as_deref().or(file.report.as_deref()) {
        Some(s) => parse_report_format(s)?,
        None => ReportFormat::Table,
    };
    Ok(RunConfig {
        suites,
        prompts,
        target,
        output_dir: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("runs")),
        report_format,
        render_svg: args.svg || file.svg.unwrap_or(false),
    })
}

fn write_or_print(out: Option<&PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let config = suite_config(&args)?;
            let suite = build_suite(&config)?;
            write_or_print(args.out.as_ref(), &(suite.to_json() + "\n"))?;
        }
        Command::Solve(args) => {
            let suite = load_suite(&args.suite)?;
            let (_, case) = suite
                .find_case(&args.case)
                .ok_or_else(|| fail(format!("no case '{}' in suite", args.case)))?;
            println!("{}", format_points(&case.reference_path));
            println!("optimal_len: {}", case.optimal_len);
        }
        Command::Prompt(args) => {
            let suite = load_suite(&args.suite)?;
            let (world, case) = suite
                .find_case(&args.case)
                .ok_or_else(|| fail(format!("no case '{}' in suite", args.case)))?;
            println!("{}", render(args.prompt.0, world, case).text);
        }
        Command::Run(args) => {
            let config = build_run_config(&args)?;
            let results_path = run_benchmark(&config)?;
            eprintln!("results: {}", results_path.display());
            let rep = report(&results_path)?;
            match config.report_format {
                ReportFormat::Table => println!("{}", rep.to_table()),
                ReportFormat::Json => println!("{}", rep.to_json()),
            }
        }
        Command::Report(args) => {
            let rep = report(&args.results)?;
            match parse_report_format(&args.report)? {
                ReportFormat::Table => println!("{}", rep.to_table()),
                ReportFormat::Json => println!("{}", rep.to_json()),
            }
        }
        Command::Render(args) => {
            let suite = load_suite(&args.suite)?;
            let (world, case) = suite
                .find_case(&args.case)
                .ok_or_else(|| fail(format!("no case '{}' in suite", args.case)))?;
            let cand = args.reply.as_deref().map(parse_path);
            let svg = render_grid_svg(world, case, cand.as_ref());
            write_or_print(args.out.as_ref(), &svg)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
