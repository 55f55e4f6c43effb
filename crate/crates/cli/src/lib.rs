//! Command-line surface over file-based inputs: synthesize, verify, analyze,
//! repair and bench.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use skillfix::abstraction::{compile_skills, Abstraction, AbstractionError, Skill};
use skillfix::analysis::{feedback_json, liveness_analysis, render_feedback, safety_analysis};
use skillfix::llm::{HttpBackend, HttpConfig, InformalCache, LlmBackend, LlmError, ReplayBackend, DEFAULT_API_KEY_VAR};
use skillfix::logic::Gr1Spec;
use skillfix::orchestrator::{
    verify_candidate, OrchestratorError, Orchestrator, Outcome, RepairOptions, RepairProblem,
    Timings, Verification,
};
use skillfix::synthesis::{check_realizability, SolverOptions, SynthesisError, Verdict, DEFAULT_STATE_BOUND};
use skillfix::violation::{Violation, ViolationError};

/// Process exit codes. Frozen; documented in the README.
pub mod exit {
    /// Realizable, repaired, or analysis completed.
    pub const OK: i32 = 0;
    /// Missing or malformed input files, bad flags.
    pub const INPUT: i32 = 1;
    /// The specification (or φ' of a candidate) is unrealizable.
    pub const UNREALIZABLE: i32 = 2;
    /// The candidate failed the syntax or type check.
    pub const SYNTAX: i32 = 3;
    /// The repair loop used every iteration without success.
    pub const EXHAUSTED: i32 = 4;
    /// The solver failed, e.g. the state bound was exceeded.
    pub const SOLVER: i32 = 5;
    /// The repair loop stopped on a backend error.
    pub const ABORTED: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("missing --{0}")]
    Missing(&'static str),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error(transparent)]
    Violation(#[from] ViolationError),
    #[error(transparent)]
    Solver(#[from] SynthesisError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Problem(#[from] OrchestratorError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(_) | CliError::Problem(OrchestratorError::Synthesis(_)) => exit::SOLVER,
            _ => exit::INPUT,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    #[default]
    Replay,
    Http,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BackendChoice {
    Replay { script: PathBuf },
    Http(HttpConfig),
}

/// Paths and settings shared by every command.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectConfig {
    pub spec: PathBuf,
    pub task: Option<PathBuf>,
    pub abstraction: Option<PathBuf>,
    pub skills: Option<PathBuf>,
    pub violation: Option<PathBuf>,
    pub backend: Option<BackendChoice>,
    pub max_iters: usize,
    pub state_bound: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

impl ProjectConfig {
    pub fn new(spec: impl Into<PathBuf>) -> Self {
        Self {
            spec: spec.into(),
            task: None,
            abstraction: None,
            skills: None,
            violation: None,
            backend: None,
            max_iters: skillfix::orchestrator::DEFAULT_MAX_ITERATIONS,
            state_bound: DEFAULT_STATE_BOUND,
            format: Format::Text,
            out: None,
            cache: None,
        }
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions {
            state_bound: self.state_bound,
        }
    }

    /// Reads and parses every referenced file.
    pub fn load(&self) -> Result<Project, CliError> {
        let spec = parse(&self.spec, Gr1Spec::from_json)?;
        let task = match &self.task {
            Some(p) => parse(p, Gr1Spec::from_json)?,
            None => spec.clone(),
        };
        let abstraction = self
            .abstraction
            .as_ref()
            .map(|p| parse(p, Abstraction::from_json))
            .transpose()?;
        let skills = match (&self.skills, &abstraction) {
            (Some(p), Some(a)) => parse(p, |t| Skill::load_json(t, a))?,
            (Some(_), None) => return Err(CliError::Missing("abstraction")),
            (None, _) => Vec::new(),
        };
        let violation = self
            .violation
            .as_ref()
            .map(|p| parse(p, Violation::from_json))
            .transpose()?;
        Ok(Project {
            spec,
            task,
            abstraction,
            skills,
            violation,
        })
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T, E: std::fmt::Display>(path: &Path, f: impl FnOnce(&str) -> Result<T, E>) -> Result<T, CliError> {
    f(&read(path)?).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Parsed inputs of a command.
#[derive(Clone, Debug)]
pub struct Project {
    /// The base specification; skills are compiled on top of it.
    pub spec: Gr1Spec,
    pub task: Gr1Spec,
    pub abstraction: Option<Abstraction>,
    pub skills: Vec<Skill>,
    pub violation: Option<Violation>,
}

impl Project {
    /// φ: the base with the skills compiled in.
    pub fn compiled(&self) -> Result<Gr1Spec, CliError> {
        match &self.abstraction {
            Some(a) if !self.skills.is_empty() => Ok(compile_skills(a, &self.skills, &self.spec)?),
            _ => Ok(self.spec.clone()),
        }
    }

    pub fn problem(&self) -> Result<RepairProblem, CliError> {
        let abstraction = self.abstraction.clone().ok_or(CliError::Missing("abstraction"))?;
        let violation = self.violation.clone().ok_or(CliError::Missing("violation"))?;
        Ok(RepairProblem::new(
            abstraction,
            self.skills.clone(),
            self.spec.clone(),
            self.task.clone(),
            violation,
            Vec::new(),
        )?)
    }
}

/// The result of a command: one status word, message lines and the same
/// content as structured data.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub code: i32,
    pub status: String,
    pub lines: Vec<String>,
    pub data: Value,
}

impl Report {
    fn new(code: i32, status: &str) -> Self {
        Self {
            code,
            status: status.to_string(),
            lines: Vec::new(),
            data: json!({}),
        }
    }

    fn line(mut self, l: impl Into<String>) -> Self {
        self.lines.push(l.into());
        self
    }

    fn lines(mut self, ls: impl IntoIterator<Item = String>) -> Self {
        self.lines.extend(ls);
        self
    }

    fn data(mut self, key: &str, v: Value) -> Self {
        self.data[key] = v;
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => {
                let mut s = format!("{}\n", self.status);
                for l in &self.lines {
                    s.push_str(l);
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let mut v = json!({
                    "status": self.status,
                    "exit_code": self.code,
                    "messages": self.lines,
                });
                if let Value::Object(extra) = &self.data {
                    for (k, x) in extra {
                        v[k] = x.clone();
                    }
                }
                format!("{}\n", serde_json::to_string_pretty(&v).expect("report serializes"))
            }
        }
    }
}

fn write_out(cfg: &ProjectConfig, name: &str, content: &str) -> Result<Option<PathBuf>, CliError> {
    let Some(dir) = &cfg.out else {
        return Ok(None);
    };
    let err = |source| CliError::Write {
        path: dir.join(name),
        source,
    };
    fs::create_dir_all(dir).map_err(err)?;
    let path = dir.join(name);
    fs::write(&path, content).map_err(err)?;
    Ok(Some(path))
}

fn skills_value(skills: &[Skill]) -> Value {
    Value::Object(
        skills
            .iter()
            .map(|s| (s.name().to_string(), serde_json::to_value(s.chain()).expect("chain serializes")))
            .collect(),
    )
}

/// Realizability check; writes the strategy or counterstrategy.
pub fn cmd_synthesize(cfg: &ProjectConfig) -> Result<Report, CliError> {
    let project = cfg.load()?;
    let spec = project.compiled()?;
    let solution = check_realizability(&spec, &cfg.solver())?;
    match &solution.verdict {
        Verdict::Realizable => {
            let strategy = solution.strategy()?;
            let mut r = Report::new(exit::OK, "REALIZABLE")
                .line(format!("strategy with {} nodes", strategy.len()))
                .data("strategy", strategy.to_json_value());
            if let Some(p) = write_out(cfg, "strategy.json", &strategy.to_json())? {
                r = r.line(format!("wrote {}", p.display()));
            }
            Ok(r)
        }
        Verdict::Unrealizable(reason) => {
            let cs = solution.counterstrategy()?;
            let mut r = Report::new(exit::UNREALIZABLE, "UNREALIZABLE")
                .line(reason.to_string())
                .line(format!("counterstrategy with {} nodes", cs.len()))
                .data("counterstrategy", cs.to_json_value());
            if let Some(p) = write_out(cfg, "counterstrategy.json", &cs.to_json())? {
                r = r.line(format!("wrote {}", p.display()));
            }
            Ok(r)
        }
    }
}

/// Syntax check, repair and realizability of one candidate file.
pub fn cmd_verify(cfg: &ProjectConfig, candidate: &Path) -> Result<Report, CliError> {
    let project = cfg.load()?;
    let problem = project.problem()?;
    let text = read(candidate)?;
    let verification = verify_candidate(&problem, &text, &cfg.solver(), &mut Timings::default())?;
    let feedback = verification.feedback();
    let lines: Vec<String> = render_feedback(&feedback).lines().map(str::to_string).collect();
    let report = match &verification {
        Verification::Syntax { .. } => Report::new(exit::SYNTAX, "SYNTAX ERROR"),
        Verification::Unrealizable { spec, .. } => {
            write_out(cfg, "candidate_spec.json", &spec.to_json())?;
            Report::new(exit::UNREALIZABLE, "UNREALIZABLE")
        }
        Verification::Realizable { skills, spec } => {
            write_out(cfg, "repaired_spec.json", &spec.to_json())?;
            write_out(
                cfg,
                "new_skills.json",
                &serde_json::to_string_pretty(&skills_value(skills)).expect("json"),
            )?;
            Report::new(exit::OK, "REPAIRED").data("new_skills", skills_value(skills))
        }
    };
    Ok(report.lines(lines).data("feedback", feedback_json(&feedback)))
}

/// Both analyses on a stored counterstrategy.
pub fn cmd_analyze(cfg: &ProjectConfig, counterstrategy: &Path) -> Result<Report, CliError> {
    let project = cfg.load()?;
    let cs = parse(counterstrategy, skillfix::synthesis::Counterstrategy::from_json)?;
    for p in project.task.propositions() {
        if cs.universe().kind_of(&p.name).is_none() {
            return Err(CliError::Parse {
                path: counterstrategy.to_path_buf(),
                message: format!("counterstrategy has no variable '{}'", p.name),
            });
        }
    }
    let mut feedback = safety_analysis(&cs, &project.task);
    feedback.extend(liveness_analysis(&cs, &project.task));
    let lines: Vec<String> = render_feedback(&feedback).lines().map(str::to_string).collect();
    let status = if feedback.is_empty() { "NO FINDINGS" } else { "FINDINGS" };
    Ok(Report::new(exit::OK, status)
        .lines(lines)
        .data("feedback", feedback_json(&feedback)))
}

fn backend(cfg: &ProjectConfig) -> Result<Box<dyn LlmBackend>, CliError> {
    match cfg.backend.as_ref().ok_or(CliError::Missing("backend"))? {
        BackendChoice::Replay { script } => Ok(Box::new(parse(script, ReplayBackend::from_json)?)),
        BackendChoice::Http(c) => Ok(Box::new(HttpBackend::from_env(c.clone())?)),
    }
}

/// The full repair loop with the configured backend.
pub fn cmd_repair(cfg: &ProjectConfig) -> Result<Report, CliError> {
    let project = cfg.load()?;
    let problem = project.problem()?;
    let mut backend = backend(cfg)?;
    let cache = match &cfg.cache {
        Some(dir) => InformalCache::on_disk(dir)?,
        None => InformalCache::in_memory(),
    };
    let options = RepairOptions {
        max_iterations: cfg.max_iters,
        solver: cfg.solver(),
    };
    let result = Orchestrator::new(&mut *backend, &cache, options).repair(&problem);

    if let Some(dir) = &cfg.out {
        write_out(cfg, "transcript.jsonl", "")?;
        let path = dir.join("transcript.jsonl");
        result.write_jsonl(&path).map_err(|source| CliError::Write { path, source })?;
        let path = dir.join("exchanges.jsonl");
        let _ = fs::remove_file(&path);
        result.exchanges.append_jsonl(&path)?;
    }

    let iterations: Vec<Value> = result
        .iterations
        .iter()
        .map(|r| {
            json!({
                "iteration": r.iteration,
                "verdict": r.verdict,
                "feedback": r.feedback,
                "timings": r.timings,
            })
        })
        .collect();
    let mut lines = Vec::new();
    for r in &result.iterations {
        let verdict = serde_json::to_value(r.verdict).expect("verdict");
        lines.push(format!("iteration {}: {}", r.iteration, verdict.as_str().unwrap_or_default()));
        lines.extend(r.rendered_feedback.lines().map(|l| format!("  {l}")));
        if let Some(e) = &r.error {
            lines.push(format!("  error: {e}"));
        }
    }
    let report = match &result.outcome {
        Outcome::Repaired(r) => {
            write_out(cfg, "repaired_spec.json", &r.spec().to_json())?;
            write_out(
                cfg,
                "new_skills.json",
                &serde_json::to_string_pretty(&skills_value(r.skills())).expect("json"),
            )?;
            Report::new(exit::OK, "REPAIRED")
                .data("iteration", json!(r.iteration()))
                .data("new_skills", skills_value(r.skills()))
        }
        Outcome::Exhausted { iterations, .. } => {
            Report::new(exit::EXHAUSTED, "EXHAUSTED").data("iteration", json!(iterations))
        }
        Outcome::Aborted { iteration, error } => Report::new(exit::ABORTED, "ABORTED")
            .data("iteration", json!(iteration))
            .data("error", json!(error)),
    };
    let report = report.lines(lines).data("iterations", Value::Array(iterations));
    write_out(
        cfg,
        "result.json",
        &report.render(Format::Json),
    )?;
    Ok(report)
}

#[derive(Debug, Parser)]
#[command(name = "skillfix", version, about = "Repair GR(1) robot controllers after assumption violations")]
pub struct Cli {
    #[command(flatten)]
    pub inputs: InputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Base GR(1) specification (JSON).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Task specification used for feedback; defaults to --spec.
    #[arg(long, global = true)]
    pub task: Option<PathBuf>,
    /// Abstraction with groundings (JSON).
    #[arg(long, global = true)]
    pub abstraction: Option<PathBuf>,
    /// Existing skills (JSON).
    #[arg(long, global = true)]
    pub skills: Option<PathBuf>,
    /// Observed violating transition (JSON).
    #[arg(long, global = true)]
    pub violation: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_STATE_BOUND)]
    pub state_bound: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Directory for every file the command writes.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check realizability; write the strategy or counterstrategy.
    Synthesize,
    /// Verify one candidate file of new skills.
    Verify { candidate: PathBuf },
    /// Analyze a stored counterstrategy.
    Analyze { counterstrategy: PathBuf },
    /// Run the LLM repair loop.
    Repair(RepairArgs),
    /// Time both analyses on synthetic counterstrategies.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Counterstrategy sizes, in nodes.
    #[arg(long, value_delimiter = ',', default_values_t = [1000, 2000, 4000])]
    pub sizes: Vec<usize>,
    /// Runs per size; the fastest counts.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

/// Analysis timings per size and the ratio to the previous size.
pub fn cmd_bench(args: &BenchArgs) -> Report {
    let mut report = Report::new(exit::OK, "BENCH");
    let mut rows = Vec::new();
    let mut prev: Option<f64> = None;
    for &n in &args.sizes {
        let ms = skillfix_bench::time_analysis(n, args.seed, args.reps).as_secs_f64() * 1e3;
        let ratio = prev.map(|p| ms / p.max(1e-9));
        report = report.line(match ratio {
            Some(r) => format!("{n} nodes: {ms:.3} ms (x{r:.2})"),
            None => format!("{n} nodes: {ms:.3} ms"),
        });
        rows.push(json!({"nodes": n, "ms": ms, "ratio": ratio}));
        prev = Some(ms);
    }
    report.data("runs", Value::Array(rows))
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    #[arg(long, value_enum, default_value_t = BackendKind::Replay)]
    pub backend: BackendKind,
    /// Replay script: a JSON list of responses.
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long, default_value_t = skillfix::orchestrator::DEFAULT_MAX_ITERATIONS)]
    pub max_iters: usize,
    #[arg(long, default_value = "https://api.openai.com/v1/chat/completions")]
    pub endpoint: String,
    #[arg(long, default_value = "o1-preview")]
    pub model: String,
    /// Environment variable holding the API key.
    #[arg(long, default_value = DEFAULT_API_KEY_VAR)]
    pub api_key_env: String,
    #[arg(long, default_value_t = 300)]
    pub timeout: u64,
    #[arg(long, default_value_t = 2)]
    pub max_retries: u32,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory caching informalization responses.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

impl Cli {
    pub fn config(&self) -> Result<ProjectConfig, CliError> {
        let spec = self.inputs.spec.clone().ok_or(CliError::Missing("spec"))?;
        let mut cfg = ProjectConfig::new(spec);
        cfg.task = self.inputs.task.clone();
        cfg.abstraction = self.inputs.abstraction.clone();
        cfg.skills = self.inputs.skills.clone();
        cfg.violation = self.inputs.violation.clone();
        cfg.state_bound = self.inputs.state_bound;
        cfg.format = self.inputs.format;
        cfg.out = self.inputs.out.clone();
        if let Command::Repair(r) = &self.command {
            cfg.max_iters = r.max_iters;
            cfg.cache = r.cache.clone();
            cfg.backend = Some(match r.backend {
                BackendKind::Replay => BackendChoice::Replay {
                    script: r.script.clone().ok_or(CliError::Missing("script"))?,
                },
                BackendKind::Http => BackendChoice::Http(HttpConfig {
                    endpoint: r.endpoint.clone(),
                    model: r.model.clone(),
                    api_key_var: r.api_key_env.clone(),
                    timeout_secs: r.timeout,
                    max_retries: r.max_retries,
                    temperature: r.temperature,
                    seed: r.seed,
                }),
            });
        }
        Ok(cfg)
    }
}

/// Runs one command; returns the rendered output and the exit code.
pub fn run(cli: &Cli) -> (String, i32) {
    if let Command::Bench(args) = &cli.command {
        let report = cmd_bench(args);
        return (report.render(cli.inputs.format), report.code);
    }
    let result = cli.config().and_then(|cfg| {
        let report = match &cli.command {
            Command::Synthesize => cmd_synthesize(&cfg),
            Command::Verify { candidate } => cmd_verify(&cfg, candidate),
            Command::Analyze { counterstrategy } => cmd_analyze(&cfg, counterstrategy),
            Command::Repair(_) => cmd_repair(&cfg),
            Command::Bench(_) => unreachable!("handled above"),
        }?;
        Ok((report.render(cfg.format), report.code))
    });
    match result {
        Ok(r) => r,
        Err(e) => (format!("error: {e}\n"), e.exit_code()),
    }
}
