//! `plcc` command line tool: simulate jump series, estimate parameters,
//! run replication studies.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use plcc::estimate::{sequential_fit, FitOptions};
use plcc::io::{
    jumps_csv_string, parse_jumps_csv, report_json_string, study_raw_csv, study_rows_csv,
    ResolvedConfig, RunConfig,
};
use plcc::simulate::{choose_truncation, simulate_series, JumpSeries};
use plcc::study::{run_study, truncation_diagnostic, Scenario, StudyConfig};
use plcc::vine::Plcc;

#[derive(Parser)]
#[command(
    name = "plcc",
    version,
    about = "Pair Lévy copula constructions: simulation, estimation, studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a jump series and write it as CSV.
    Simulate(SimulateArgs),
    /// Estimate margins and dependence parameters from a jump CSV.
    Estimate(EstimateArgs),
    /// Run a replication study and write the summary table as CSV.
    Study(StudyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON run configuration (scenario or explicit vine plus margins).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Simulation seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Observation threshold; overrides the config.
    #[arg(long)]
    eps: Option<f64>,
    /// Truncation safety factor; overrides the config.
    #[arg(long)]
    safety: Option<f64>,
}

#[derive(Args)]
struct EstimateArgs {
    /// JSON run configuration describing the skeleton and margins.
    #[arg(long)]
    config: PathBuf,
    /// Jump CSV produced by `plcc simulate`.
    #[arg(long)]
    jumps: PathBuf,
    /// Output JSON report path.
    #[arg(long)]
    out: PathBuf,
    /// Seed of the Monte Carlo normalizer streams; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Observation threshold; overrides the config.
    #[arg(long)]
    eps: Option<f64>,
    /// Monte Carlo budget of the normalizer; overrides the config.
    #[arg(long)]
    mc_samples: Option<usize>,
}

#[derive(Args)]
struct StudyArgs {
    /// Optional JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario name (H, M or L) when no config file is given.
    #[arg(long)]
    scenario: Option<String>,
    /// Output CSV path for the summary table; raw estimates go to
    /// `<out stem>_raw.csv`.
    #[arg(long)]
    out: PathBuf,
    /// Observation threshold.
    #[arg(long)]
    eps: Option<f64>,
    /// Replicate count.
    #[arg(long)]
    reps: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Truncation safety factor.
    #[arg(long)]
    safety: Option<f64>,
    /// Monte Carlo budget of the normalizer.
    #[arg(long)]
    mc_samples: Option<usize>,
}

/// Errors carrying their process exit code.
enum CmdError {
    Usage(String),
    Data(String),
}

impl CmdError {
    fn code(&self) -> u8 {
        match self {
            CmdError::Usage(_) => 1,
            CmdError::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CmdError::Usage(m) | CmdError::Data(m) => m,
        }
    }
}

fn data_err(context: &str, err: impl std::fmt::Display) -> CmdError {
    CmdError::Data(format!("{context}: {err}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Study(args) => cmd_study(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| data_err(&format!("reading {}", path.display()), e))?;
    RunConfig::parse(&text).map_err(|e| data_err(&format!("parsing {}", path.display()), e))
}

fn resolve(config: RunConfig) -> Result<ResolvedConfig, CmdError> {
    config
        .resolve()
        .map_err(|e| data_err("resolving configuration", e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CmdError> {
    std::fs::write(path, contents).map_err(|e| data_err(&format!("writing {}", path.display()), e))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CmdError> {
    let mut config = load_config(&args.config)?;
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if args.eps.is_some() {
        config.epsilon = args.eps;
    }
    if args.safety.is_some() {
        config.safety = args.safety;
    }
    let resolved = resolve(config)?;
    let plcc = Plcc::new(&resolved.spec).map_err(|e| data_err("building the vine", e))?;
    let tau = choose_truncation(&resolved.margins, resolved.epsilon, resolved.safety)
        .map_err(|e| data_err("choosing the truncation level", e))?;
    let series = simulate_series(
        &plcc,
        &resolved.margins,
        resolved.horizon,
        tau,
        resolved.seed,
    )
    .map_err(|e| data_err("simulating", e))?;
    write_file(&args.out, &jumps_csv_string(&series))?;
    eprintln!(
        "simulated {} events over [0, {}] at truncation {tau} (seed {})",
        series.events.len(),
        resolved.horizon,
        resolved.seed
    );
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CmdError> {
    let mut config = load_config(&args.config)?;
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if args.eps.is_some() {
        config.epsilon = args.eps;
    }
    if args.mc_samples.is_some() {
        config.mc_samples = args.mc_samples;
    }
    let resolved = resolve(config)?;
    let text = std::fs::read_to_string(&args.jumps)
        .map_err(|e| data_err(&format!("reading {}", args.jumps.display()), e))?;
    let (events, d) = parse_jumps_csv(&text).map_err(|e| data_err("parsing the jump CSV", e))?;
    if d != resolved.spec.dim() {
        return Err(CmdError::Data(format!(
            "jump CSV has {d} dimensions but the configured vine has {}",
            resolved.spec.dim()
        )));
    }
    if events.is_empty() {
        eprintln!("warning: the jump file contains no events; nothing can be fitted");
    }
    let series = JumpSeries {
        horizon: resolved.horizon,
        truncation: f64::INFINITY,
        events,
        seed: resolved.seed,
    };
    let options = FitOptions {
        mc_samples: resolved.mc_samples,
        mc_seed: resolved.seed,
        ..FitOptions::default()
    };
    let report = sequential_fit(&series, &resolved.spec, resolved.epsilon, &options)
        .map_err(|e| data_err("estimating", e))?;
    write_file(&args.out, &report_json_string(&report))?;
    let fitted = report.trees.iter().flatten().filter(|r| r.fitted).count();
    let total = report.trees.iter().flatten().count();
    eprintln!(
        "fitted {fitted}/{total} edges; report written to {}",
        args.out.display()
    );
    Ok(())
}

fn cmd_study(args: StudyArgs) -> Result<(), CmdError> {
    let mut config = match &args.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if args.scenario.is_some() {
        config.scenario = args.scenario.clone();
    }
    if args.eps.is_some() {
        config.epsilon = args.eps;
    }
    if args.reps.is_some() {
        config.reps = args.reps;
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if args.safety.is_some() {
        config.safety = args.safety;
    }
    if args.mc_samples.is_some() {
        config.mc_samples = args.mc_samples;
    }
    if config.scenario.is_none() {
        return Err(CmdError::Usage(
            "the study command needs --scenario or a config file with one".to_string(),
        ));
    }
    // Scenario-dependent safety default when neither flag nor config set it.
    let scenario = Scenario::parse(config.scenario.as_deref().unwrap_or_default())
        .map_err(|e| data_err("parsing the scenario", e))?;
    let study = StudyConfig {
        scenario,
        epsilon: config.epsilon.unwrap_or(1e-6),
        horizon: config.horizon.unwrap_or(1.0),
        reps: config.reps.unwrap_or(100),
        seed: config.seed.unwrap_or(1),
        safety: config
            .safety
            .unwrap_or_else(|| scenario.recommended_safety()),
        mc_samples: config.mc_samples.unwrap_or(100_000),
    };
    study
        .validate()
        .map_err(|e| data_err("validating the study configuration", e))?;

    match truncation_diagnostic(&study, 20_000) {
        Ok(losses) => {
            let max_loss = losses.iter().cloned().fold(0.0f64, f64::max);
            eprintln!(
                "truncation diagnostic: worst per-dimension observable rate loss {max_loss:.4} \
                 (safety {})",
                study.safety
            );
        }
        Err(e) => eprintln!("truncation diagnostic unavailable: {e}"),
    }

    let result = run_study(&study).map_err(|e| data_err("running the study", e))?;
    write_file(&args.out, &study_rows_csv(&result))?;
    let raw_path = raw_sibling(&args.out);
    write_file(&raw_path, &study_raw_csv(&result))?;
    for row in &result.rows {
        eprintln!(
            "tree {}: jumps {:.2}, true {:.3}, mean {:.4}, bias {:+.2e}, rmse {:.3e}",
            row.tree, row.jumps, row.true_value, row.mean, row.bias, row.rmse
        );
    }
    eprintln!(
        "summary written to {}, raw estimates to {}",
        args.out.display(),
        raw_path.display()
    );
    Ok(())
}

/// `results.csv` -> `results_raw.csv`.
fn raw_sibling(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("study");
    let mut name = format!("{stem}_raw");
    if let Some(ext) = out.extension().and_then(|s| s.to_str()) {
        name.push('.');
        name.push_str(ext);
    }
    out.with_file_name(name)
}
