//! `hybridlab` command-line front-end.
//!
//! Exit codes: 0 when the physics comes out as the run predicts, 1 on a
//! physics-verdict mismatch, 2 on configuration, flag or I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hybridlab::config::{OutputFormat, ScenarioConfig, ScenarioKind};
use hybridlab::nogo::{
    exchange_report, verify_theorem1_trials, verify_theorem2_trials, Theorem2Params, TrialDynamics, Verdict,
    TRIAL_DIM_CAP,
};
use hybridlab::output::{to_csv, RunDocument};
use hybridlab::scenarios::run_scenario;

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "hybridlab", version, about = "Hybrid quantum-classical conservation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config (or a built-in default).
    Run(RunArgs),
    /// Randomized verification of the no-backreaction and conservation theorems.
    Verify(VerifyArgs),
    /// Two exchanging qubits: conserved total, moving locals.
    Counterexample(CounterexampleArgs),
    /// List the available scenarios.
    ListScenarios,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    MomentumQuantum,
    MomentumHybrid,
    Cow,
    Energy,
}

impl From<Scenario> for ScenarioKind {
    fn from(s: Scenario) -> Self {
        match s {
            Scenario::MomentumQuantum => ScenarioKind::MomentumQuantum,
            Scenario::MomentumHybrid => ScenarioKind::MomentumHybrid,
            Scenario::Cow => ScenarioKind::Cow,
            Scenario::Energy => ScenarioKind::Energy,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config file (JSON).
    #[arg(long, required_unless_present = "scenario", conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Use the built-in defaults for a scenario instead of a config file.
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    /// Output file; CSV output also writes a JSON report next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, env = "HYBRIDLAB_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    tol_global: Option<f64>,
    #[arg(long)]
    tol_local: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    theorem: u8,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Largest classical label count per trial.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=TRIAL_DIM_CAP as u64))]
    labels: u64,
    /// Largest quantum dimension per trial.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=TRIAL_DIM_CAP as u64))]
    qdim: u64,
    /// Slices per trial (theorem 2) or sampled times per trial (theorem 1).
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..=100_000))]
    slices: u64,
    #[arg(long, env = "HYBRIDLAB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol_global: Option<f64>,
    #[arg(long)]
    tol_local: Option<f64>,
    /// Theorem 2 only: draw unconstrained maps and check only trials whose
    /// total stays conserved.
    #[arg(long)]
    unconstrained: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CounterexampleArgs {
    /// End time of the exchange run.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    t: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Counterexample(a) => cmd_counterexample(a),
        Command::ListScenarios => {
            for kind in ScenarioKind::ALL {
                println!("{:<18} {}", kind.name(), kind.description());
            }
            Ok(0)
        }
    }
}

fn check_tol(name: &str, v: Option<f64>) -> Result<Option<f64>> {
    match v {
        Some(x) if !(x.is_finite() && x >= 0.0) => bail!("--{name} must be finite and non-negative"),
        other => Ok(other),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_run(a: RunArgs) -> Result<u8> {
    let mut cfg = match (&a.config, a.scenario) {
        (Some(path), _) => ScenarioConfig::from_path(path)?,
        (None, Some(kind)) => ScenarioConfig::defaults(kind.into()),
        (None, None) => bail!("either --config or --scenario is required"),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(t) = check_tol("tol-global", a.tol_global)? {
        cfg.tolerances.tol_global = t;
    }
    if let Some(t) = check_tol("tol-local", a.tol_local)? {
        cfg.tolerances.tol_local = t;
    }
    if let Some(f) = a.format {
        cfg.output.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if let Some(out) = &a.out {
        cfg.output.path = Some(out.clone());
    }
    cfg.validate()?;

    let result = run_scenario(&cfg)?;
    let doc = RunDocument::new(&cfg, &result);
    let json = doc.to_json() + "\n";
    let out = cfg.output.path.as_deref();
    match cfg.output.format {
        OutputFormat::Json => emit(&json, out)?,
        OutputFormat::Csv => {
            emit(&to_csv(&result), out)?;
            if let Some(path) = out {
                let sidecar = path.with_extension("json");
                if sidecar != path {
                    emit(&json, Some(&sidecar))?;
                }
            }
        }
    }
    for c in result.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} = {:e} ({:?} {:e})", c.name, c.value, c.relation, c.bound);
    }
    if result.as_expected() {
        Ok(0)
    } else {
        eprintln!(
            "verdict {} is not among the expected {:?}",
            result.verdict,
            result.expected_verdicts.iter().map(|v| v.as_str()).collect::<Vec<_>>()
        );
        Ok(EXIT_MISMATCH)
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<u8> {
    let tol_global = check_tol("tol-global", a.tol_global)?;
    let tol_local = check_tol("tol-local", a.tol_local)?;
    let summary = if a.theorem == 1 {
        if a.unconstrained || tol_global.is_some() || tol_local.is_some() {
            bail!("--unconstrained and tolerance flags apply to --theorem 2 only");
        }
        verify_theorem1_trials(a.labels as usize, a.qdim as usize, a.slices as usize, a.trials, a.seed)?
    } else {
        let mut p = Theorem2Params::new(a.labels as usize, a.qdim as usize, a.slices as usize, a.trials, a.seed);
        if let Some(t) = tol_global {
            p.tol_global = t;
        }
        if let Some(t) = tol_local {
            p.tol_local = t;
        }
        if a.unconstrained {
            p.dynamics = TrialDynamics::Unconstrained;
        }
        verify_theorem2_trials(&p)?
    };
    emit(&(serde_json::to_string_pretty(&summary)? + "\n"), a.out.as_deref())?;
    Ok(if summary.n_fail == 0 { 0 } else { EXIT_MISMATCH })
}

fn cmd_counterexample(a: CounterexampleArgs) -> Result<u8> {
    if !a.t.is_finite() {
        bail!("--t must be finite");
    }
    let report = exchange_report(a.t)?;
    emit(&(serde_json::to_string_pretty(&report)? + "\n"), a.out.as_deref())?;
    Ok(if report.verdict == Verdict::GlobalConservedLocalsMoved { 0 } else { EXIT_MISMATCH })
}
