//! Command-line layer: `run`, `sweep`, `preset` and `certify`.
//!
//! Exit codes: 0 success, 1 I/O failure while writing, 2 configuration or
//! usage error, 3 certification failure, 4 invariant breach during a run.

pub mod config;
pub mod emit;
pub mod presets;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::engine::{self, EngineError};
use crate::oracle::{self, GridSpec, OracleError};
use crate::policies::{Policy, PolicyKind};

pub use config::{ConfigError, ExperimentConfig, Format};
pub use emit::MetricsDocument;
pub use presets::Preset;

#[derive(Debug, Parser)]
#[command(name = "lodco", version, about = "Online offloading controller for an energy-harvesting device")]
pub struct Cli {
    /// TOML experiment file; omitted fields take the default scenario.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override any config leaf, e.g. `--set system.rho=0.4` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate each policy over several seeds with no sweep axis.
    Run(RunArgs),
    /// Sweep a scenario quantity.
    Sweep(SweepArgs),
    /// Run a named figure configuration.
    Preset(PresetArgs),
    /// Compare the controller with a brute-force grid search on random states.
    Certify(CertifyArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Policies to run (comma separated): lodco, mobile-gd, server-gd, dynamic-gd.
    #[arg(long, value_delimiter = ',')]
    pub policy: Vec<PolicyKind>,
    #[arg(long)]
    pub slots: Option<u64>,
    /// Number of seeds per cell.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// First seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Leading slots excluded from the metrics.
    #[arg(long)]
    pub warmup: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Metrics file (standard output when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Directory receiving one trace CSV per run.
    #[arg(long, value_name = "DIR")]
    pub trace: Option<PathBuf>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// One of v, e_min, rho, p_h, tau_d, d.
    #[arg(long)]
    pub axis: Option<engine::Axis>,
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    #[arg(long)]
    pub series_axis: Option<engine::Axis>,
    #[arg(long, value_delimiter = ',')]
    pub series_values: Vec<f64>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    /// fig2, fig3, fig4, fig5, fig6 or fig7.
    pub name: String,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, default_value_t = 10_000)]
    pub states: usize,
    /// Grid points per action axis.
    #[arg(long, default_value_t = 100_000)]
    pub grid: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = oracle::CERTIFY_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("certification failed: {failures} of {states} states exceed the gap threshold {threshold} (max gap {max_gap:.3e})")]
    Certification { failures: usize, states: usize, threshold: f64, max_gap: f64 },
    #[error(transparent)]
    Engine(EngineError),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Certification { .. } => 3,
            CliError::Engine(EngineError::Invariant { .. }) => 4,
            CliError::Engine(_) => 2,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::Engine(e)
    }
}

fn io_err(what: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{what} {}: {e}", path.display()))
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_owned()).to_string()
}

fn run_overrides(a: &RunArgs) -> Vec<String> {
    let mut o = Vec::new();
    if !a.policy.is_empty() {
        let names: Vec<String> = a.policy.iter().map(|p| quoted(p.name())).collect();
        o.push(format!("run.policies=[{}]", names.join(", ")));
    }
    let numbers = [
        ("run.slots", a.slots),
        ("run.seeds", a.seeds),
        ("run.seed", a.seed),
        ("run.warmup", a.warmup),
        ("run.workers", a.workers.map(|w| w as u64)),
    ];
    for (key, value) in numbers {
        if let Some(v) = value {
            o.push(format!("{key}={v}"));
        }
    }
    if let Some(p) = &a.output {
        o.push(format!("output.path={}", quoted(&p.to_string_lossy())));
    }
    if let Some(f) = a.format {
        o.push(format!("output.format={}", quoted(if f == Format::Csv { "csv" } else { "json" })));
    }
    if let Some(d) = &a.trace {
        o.push(format!("output.trace_dir={}", quoted(&d.to_string_lossy())));
    }
    o
}

fn float_list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| toml::Value::Float(*v).to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn base_config(cli_config: &Option<PathBuf>) -> Result<ExperimentConfig, ConfigError> {
    match cli_config {
        Some(path) => ExperimentConfig::load(path, &[]),
        None => Ok(ExperimentConfig::default()),
    }
}

/// Resolves the configuration a subcommand runs with.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let (mut cfg, flags) = match &cli.command {
        Command::Run(a) => {
            let mut cfg = base_config(&cli.config)?;
            cfg.sweep = None;
            (cfg, run_overrides(a))
        }
        Command::Sweep(s) => {
            let cfg = base_config(&cli.config)?;
            let mut o = Vec::new();
            if let Some(axis) = s.axis {
                o.push(format!("sweep.axis={}", quoted(axis.name())));
            }
            if !s.values.is_empty() {
                o.push(format!("sweep.values={}", float_list(&s.values)));
            }
            if let Some(axis) = s.series_axis {
                o.push(format!("sweep.series_axis={}", quoted(axis.name())));
            }
            if !s.series_values.is_empty() {
                o.push(format!("sweep.series_values={}", float_list(&s.series_values)));
            }
            o.extend(run_overrides(&s.run));
            (cfg, o)
        }
        Command::Preset(p) => {
            if cli.config.is_some() {
                return Err(ConfigError::invalid("--config", "a preset is a complete config; adjust it with --set"));
            }
            let preset: Preset = p.name.parse().map_err(|e: presets::UnknownPreset| ConfigError::invalid("preset", e.to_string()))?;
            (preset.config(), run_overrides(&p.run))
        }
        Command::Certify(c) => {
            let mut o = Vec::new();
            if let Some(seed) = c.seed {
                o.push(format!("run.seed={seed}"));
            }
            if let Some(p) = &c.output {
                o.push(format!("output.path={}", quoted(&p.to_string_lossy())));
            }
            if let Some(f) = c.format {
                o.push(format!("output.format={}", quoted(if f == Format::Csv { "csv" } else { "json" })));
            }
            (base_config(&cli.config)?, o)
        }
    };
    let mut overrides = cli.set.clone();
    overrides.extend(flags);
    cfg = cfg.with_overrides(&overrides)?;
    if matches!(cli.command, Command::Sweep(_)) && cfg.sweep.is_none() {
        return Err(ConfigError::invalid("sweep.axis", "sweep needs an axis and values (--axis/--values or a [sweep] section)"));
    }
    Ok(cfg)
}

fn print_config_requested(cli: &Cli) -> bool {
    match &cli.command {
        Command::Run(a) => a.print_config,
        Command::Sweep(s) => s.run.print_config,
        Command::Preset(p) => p.run.print_config,
        Command::Certify(_) => false,
    }
}

/// Writes `contents` to the configured path, or to `stdout` without one.
fn deliver(path: &Option<PathBuf>, contents: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => emit::write_file(p, contents).map_err(|e| io_err("cannot write", p, e)),
        None => stdout.write_all(contents.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Runs the experiment described by `cfg` and returns the metrics document.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MetricsDocument, CliError> {
    let spec = cfg.sweep_spec()?;
    let table = engine::sweep(&spec)?;
    let mut doc = MetricsDocument::new(cfg, table);
    if let Some(stride) = cfg.output.series_stride {
        for cell in &mut doc.cells {
            let seed = cell.runs[0].seed;
            let policy = Policy { kind: cell.policy, root: cfg.solver };
            let trace = engine::run_with(&policy, &cell.params, cfg.run.slots, seed)?;
            cell.series = Some(emit::series_points(&trace, stride));
        }
    }
    Ok(doc)
}

fn write_traces(cfg: &ExperimentConfig, doc: &MetricsDocument, dir: &Path) -> Result<(), CliError> {
    for cell in &doc.cells {
        let policy = Policy { kind: cell.policy, root: cfg.solver };
        for run in &cell.runs {
            let trace = engine::run_with(&policy, &cell.params, cfg.run.slots, run.seed)?;
            let path = dir.join(emit::trace_file_name(cell, doc.axis, doc.series_axis, run.seed));
            emit::write_file(&path, &emit::trace_csv(&trace)).map_err(|e| io_err("cannot write", &path, e))?;
        }
    }
    Ok(())
}

fn precheck_outputs(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let unwritable = |p: &Path, e: std::io::Error| {
        CliError::Config(ConfigError::invalid("output.path", format!("{} is not writable: {e}", p.display())))
    };
    if let Some(p) = &cfg.output.path {
        emit::check_writable_file(p).map_err(|e| unwritable(p, e))?;
        if cfg.output.series_stride.is_some() && cfg.output.format == Format::Csv {
            let s = emit::sibling_path(p, "series.csv");
            emit::check_writable_file(&s).map_err(|e| unwritable(&s, e))?;
        }
    } else if cfg.output.series_stride.is_some() && cfg.output.format == Format::Csv {
        return Err(ConfigError::invalid("output.path", "CSV time series need an output path").into());
    }
    if let Some(d) = &cfg.output.trace_dir {
        emit::check_writable_dir(d).map_err(|e| {
            CliError::Config(ConfigError::invalid("output.trace_dir", format!("{} is not writable: {e}", d.display())))
        })?;
    }
    Ok(())
}

fn simulate_command(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    precheck_outputs(cfg)?;
    let doc = run_experiment(cfg)?;
    if let Some(dir) = &cfg.output.trace_dir {
        write_traces(cfg, &doc, dir)?;
    }
    match cfg.output.format {
        Format::Json => deliver(&cfg.output.path, &emit::json_string(&doc), stdout),
        Format::Csv => {
            deliver(&cfg.output.path, &emit::metrics_csv(&doc), stdout)?;
            if let (Some(p), Some(_)) = (&cfg.output.path, cfg.output.series_stride) {
                let s = emit::sibling_path(p, "series.csv");
                emit::write_file(&s, &emit::series_csv(&doc)).map_err(|e| io_err("cannot write", &s, e))?;
            }
            Ok(())
        }
    }
}

fn certify_command(cfg: &ExperimentConfig, args: &CertifyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    precheck_outputs(cfg)?;
    let params = cfg.params()?;
    let grid = GridSpec::uniform(args.grid);
    let report = oracle::certify_with(&params, args.states, cfg.run.seed, &grid, args.threshold, &cfg.solver)
        .map_err(|e| match e {
            OracleError::Grid(_) => ConfigError::invalid("--grid", e.to_string()),
            OracleError::NoStates => ConfigError::invalid("--states", e.to_string()),
            OracleError::Model(m) => cfg.system.model_error(m),
        })?;
    let text = match cfg.output.format {
        Format::Json => emit::json_string(&report),
        Format::Csv => emit::certify_csv(&report),
    };
    deliver(&cfg.output.path, &text, stdout)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Certification {
            failures: report.failures.len(),
            states: report.n_states,
            threshold: report.threshold,
            max_gap: report.max_gap,
        })
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    if print_config_requested(cli) {
        return stdout.write_all(cfg.to_toml().as_bytes()).map_err(|e| CliError::Io(e.to_string()));
    }
    match &cli.command {
        Command::Certify(args) => certify_command(&cfg, args, stdout),
        _ => simulate_command(&cfg, stdout),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return u8::try_from(code).unwrap_or(2);
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn main_from_env() -> ExitCode {
    let code = main_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code)
}
