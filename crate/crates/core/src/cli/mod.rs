//! Command-line front end.
//!
//! Exit codes: 0 when every verdict passes, 1 when one fails, 2 on any
//! configuration or I/O error.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    fairness_test, run_equilibrium_experiment, run_fairness_experiment, scaling_experiment, table,
    winner_uniformity_test, ClaimObservation, ClaimsAudit, Experiment, Verdict,
};
use crate::error::ConfigError;
use crate::sim::{classify_good_execution, export, run_trial, CalibrationConstants, SimConfig};

pub use config::{parse_config, CoalitionField, ColorsField, ConfigDoc, ExperimentConfig, SupportersField};

/// Environment variable naming the directory reports go to when `--out` is absent.
pub const OUT_DIR_ENV: &str = "FAIR_GOSSIP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "fair-gossip", version, about = "Fair consensus over synchronous gossip: simulate, test, attack")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run one trial and emit its trace.
    Run(RunArgs),
    /// Estimate win frequencies per color and per agent.
    Fairness(RunArgs),
    /// Compare a coalition deviation against honest play on coupled seeds.
    Attack(RunArgs),
    /// Audit the winner claims over a batch of trials.
    Claims(RunArgs),
    /// Rounds and message sizes across several `n`.
    Scaling(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run(_) => "run",
            Command::Fairness(_) => "fairness",
            Command::Attack(_) => "attack",
            Command::Claims(_) => "claims",
            Command::Scaling(_) => "scaling",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Run(a) | Command::Fairness(a) | Command::Attack(a) | Command::Claims(a) | Command::Scaling(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Jsonl => "jsonl",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// TOML config document; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub chi: Option<f64>,
    #[arg(long)]
    pub sigma_size: Option<u32>,
    /// Count-by-color list, e.g. `32x1,32x2`.
    #[arg(long)]
    pub colors: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Explicit faulty ids, e.g. `2,3,4`.
    #[arg(long)]
    pub faulty: Option<String>,
    /// Fresh uniformly random faulty set of this size per trial.
    #[arg(long)]
    pub random_faults: Option<u32>,
    /// Make the first `--faulty-count` supporters of this color faulty.
    #[arg(long, requires = "faulty_count")]
    pub faulty_color: Option<u32>,
    #[arg(long, requires = "faulty_color")]
    pub faulty_count: Option<u32>,
    /// Coalition size; members are spread evenly over the active agents.
    #[arg(long, conflicts_with = "coalition_members")]
    pub coalition: Option<usize>,
    /// Explicit coalition ids, e.g. `1,17`.
    #[arg(long)]
    pub coalition_members: Option<String>,
    #[arg(long)]
    pub strategy: Option<String>,
    /// Strategy parameter `key=value`; values are read as JSON when they parse.
    #[arg(long = "strategy-param", value_name = "KEY=VALUE")]
    pub strategy_params: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub sigma_mult: Option<f64>,
    #[arg(long)]
    pub max_fail_rate: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    /// Sizes for `scaling`, e.g. `16,64,256`.
    #[arg(long)]
    pub n_values: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Upper bound on concurrently running trials.
    #[arg(long)]
    pub parallel: Option<usize>,
    #[arg(long, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

/// A fully parsed invocation.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    pub sim: SimConfig,
    pub experiment: ExperimentConfig,
}

fn id_list(field: &'static str, s: &str) -> Result<Vec<u32>, ConfigError> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| ConfigError::invalid(field, format!("`{p}` is not a number"))))
        .collect()
}

fn flag_doc(a: &RunArgs) -> Result<ConfigDoc, ConfigError> {
    let mut params = crate::adversary::StrategyParams::new();
    for kv in &a.strategy_params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError::invalid("strategy_params", format!("`{kv}` is not key=value")))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| serde_json::Value::String(v.to_string()));
        params.insert(k.to_string(), value);
    }
    let coalition =
        if a.coalition.is_some() || a.coalition_members.is_some() || a.strategy.is_some() || !params.is_empty() {
            Some(CoalitionField {
                members: a.coalition_members.as_deref().map(|s| id_list("coalition", s)).transpose()?,
                size: a.coalition,
                strategy: a.strategy.clone(),
                params,
            })
        } else {
            None
        };
    Ok(ConfigDoc {
        n: a.n,
        gamma: a.gamma,
        chi: a.chi,
        sigma_size: a.sigma_size,
        colors: a.colors.clone().map(ColorsField::Shorthand),
        alpha: a.alpha,
        faulty: a.faulty.as_deref().map(|s| id_list("faulty", s)).transpose()?,
        random_faults: a.random_faults,
        faulty_supporters: a.faulty_color.zip(a.faulty_count).map(|(color, count)| SupportersField { color, count }),
        coalition,
        seed: a.seed,
        trials: a.trials,
        sigma_mult: a.sigma_mult,
        max_fail_rate: a.max_fail_rate,
        calibration: None,
        n_values: a.n_values.as_deref().map(|s| id_list("n_values", s)).transpose()?,
    })
}

impl RunSpec {
    pub fn from_command(command: Command) -> Result<Self, CliError> {
        let args = command.args();
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                ConfigDoc::from_toml(&text)?
            }
            None => ConfigDoc::default(),
        };
        let mut doc = file.overlay(flag_doc(args)?);
        if args.beta1.is_some() || args.beta2.is_some() {
            let mut c = doc.calibration.unwrap_or_default();
            c.beta1 = args.beta1.unwrap_or(c.beta1);
            c.beta2 = args.beta2.unwrap_or(c.beta2);
            doc.calibration = Some(c);
        }
        let (sim, experiment) = parse_config(&doc)?;
        Ok(RunSpec { command, sim, experiment })
    }

    fn experiment(&self) -> Experiment {
        Experiment {
            base: self.sim.clone(),
            faults: self.experiment.faults.clone(),
            calibration: self.experiment.calibration,
        }
    }
}

/// What an invocation produced: the artifact bytes and whether every verdict passed.
#[derive(Debug, Clone)]
pub struct Execution {
    pub output: Vec<u8>,
    pub pass: bool,
    /// One human-readable line for stderr.
    pub summary: String,
}

#[derive(Serialize)]
struct Emitted<'a, R: Serialize, V: Serialize> {
    command: &'a str,
    pass: bool,
    verdict: V,
    report: R,
}

fn json_line<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec(value).map_err(|e| CliError::Output(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    f(&mut out).map_err(|e| CliError::Output(e.to_string()))?;
    Ok(out)
}

/// Runs the experiment `spec` describes, bounded by `--parallel` if set.
pub fn execute(spec: &RunSpec) -> Result<Execution, CliError> {
    match spec.command.args().parallel {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .map_err(|e| CliError::Output(e.to_string()))?;
            pool.install(|| execute_inner(spec))
        }
        None => execute_inner(spec),
    }
}

fn execute_inner(spec: &RunSpec) -> Result<Execution, CliError> {
    let args = spec.command.args();
    let x = &spec.experiment;
    let name = spec.command.name();
    match &spec.command {
        Command::Run(_) => {
            let trace = run_trial(&spec.sim)?;
            let flags = classify_good_execution(&trace, &x.calibration);
            let mut output = Vec::new();
            match args.format {
                Format::Jsonl => export::write_jsonl(&trace, flags, &mut output),
                Format::Csv => export::write_csv(&trace, flags, &mut output),
            }
            .map_err(|e| CliError::Output(e.to_string()))?;
            let summary = format!(
                "run: outcome {} winner {} rounds {} good {}",
                trace.outcome,
                trace.winner.map_or("none".to_string(), |w| w.to_string()),
                trace.stats.rounds_elapsed,
                flags.all()
            );
            Ok(Execution { output, pass: true, summary })
        }
        Command::Fairness(_) => {
            let report = run_fairness_experiment(&spec.experiment(), x.trials, x.seed)?;
            let fairness = fairness_test(&report, x.sigma_mult, x.max_fail_rate);
            let uniformity = winner_uniformity_test(&report, x.sigma_mult);
            let pass = fairness.verdict.is_pass() && uniformity.verdict.is_pass();
            let summary = format!(
                "fairness: {:?} uniformity: {:?} fail rate {:.4} over {} trials",
                fairness.verdict, uniformity.verdict, fairness.fail_rate, report.trials
            );
            let output = match args.format {
                Format::Jsonl => {
                    json_line(&Emitted { command: name, pass, verdict: (&fairness, &uniformity), report: &report })?
                }
                Format::Csv => csv_bytes(|w| table::fairness_csv(&report, w))?,
            };
            Ok(Execution { output, pass, summary })
        }
        Command::Attack(_) => {
            let strategy = match &spec.sim.coalition {
                Some(c) if !c.members.is_empty() => c.strategy.clone(),
                _ => return Err(ConfigError::invalid("coalition", "attack needs a coalition").into()),
            };
            let report = run_equilibrium_experiment(&spec.experiment(), &strategy, x.trials, x.seed, x.sigma_mult)?;
            let pass = report.exists_member_no_gain;
            let summary = format!(
                "attack {}: exists member without gain: {} ({} of {} pairs kept, deviation fail rate {:.4})",
                strategy.name, pass, report.kept_pairs, report.trials, report.deviation_fail_rate
            );
            let output = match args.format {
                Format::Jsonl => json_line(&Emitted { command: name, pass, verdict: pass, report: &report })?,
                Format::Csv => csv_bytes(|w| table::equilibrium_csv(&report, w))?,
            };
            Ok(Execution { output, pass, summary })
        }
        Command::Claims(_) => {
            let exp = spec.experiment();
            let members = spec.sim.members();
            let observations: Vec<ClaimObservation> = (0..x.trials)
                .into_par_iter()
                .map(|i| {
                    let trace = run_trial(&exp.trial_config(x.seed.wrapping_add(i))?)?;
                    let flags = classify_good_execution(&trace, &exp.calibration);
                    Ok(ClaimObservation::of(&trace, &flags, &members))
                })
                .collect::<Result<_, ConfigError>>()?;
            let mut audit = ClaimsAudit::default();
            for o in &observations {
                audit.observe(o);
            }
            let verdict = audit.verdict(x.sigma_mult);
            let pass = verdict.passed();
            let summary = format!(
                "claims: 1 {:?} ({} checked), 3 {:?}, 4 {:?} (rate {:.4} vs bound {:.4})",
                verdict.claim1,
                audit.claim1_checked,
                verdict.claim3,
                verdict.claim4,
                verdict.claim4_rate,
                verdict.claim4_bound
            );
            let output = match args.format {
                Format::Jsonl => json_line(&Emitted { command: name, pass, verdict: &verdict, report: &audit })?,
                Format::Csv => csv_bytes(|w| table::claims_csv(&audit, x.sigma_mult, w))?,
            };
            Ok(Execution { output, pass, summary })
        }
        Command::Scaling(_) => {
            let calib: CalibrationConstants = x.calibration;
            let gamma = spec.sim.params.gamma;
            let table = scaling_experiment(&x.n_values, gamma, x.trials, x.seed, &calib)?;
            let rounds = Verdict::from_bool(table.rounds_exact());
            let growth = Verdict::from_bool(table.message_growth_ok(2.0));
            let pass = rounds.is_pass() && growth.is_pass();
            let summary = format!("scaling: rounds {rounds:?}, message growth {growth:?}");
            let output = match args.format {
                Format::Jsonl => {
                    json_line(&Emitted { command: name, pass, verdict: (rounds, growth), report: &table })?
                }
                Format::Csv => csv_bytes(|w| table::scaling_csv(&table, w))?,
            };
            Ok(Execution { output, pass, summary })
        }
    }
}

/// Where the artifact goes: `--out`, else `<out_dir>/<command>.<ext>`, else stdout.
pub fn output_path(command: &Command) -> Option<PathBuf> {
    let a = command.args();
    a.out.clone().or_else(|| a.out_dir.as_ref().map(|d| d.join(format!("{}.{}", command.name(), a.format.extension()))))
}

/// Parses `args`, executes, writes the artifact and returns the exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match run_command(cli.command, stdout) {
        Ok(exec) => {
            let _ = writeln!(stderr, "{}", exec.summary);
            if exec.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

fn run_command(command: Command, stdout: &mut dyn Write) -> Result<Execution, CliError> {
    let path = output_path(&command);
    let spec = RunSpec::from_command(command)?;
    let exec = execute(&spec)?;
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            fs::write(&p, &exec.output).map_err(|e| CliError::io(&p, e))?;
        }
        None => stdout.write_all(&exec.output).map_err(|e| CliError::io(Path::new("<stdout>"), e))?,
    }
    Ok(exec)
}
