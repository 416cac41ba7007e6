use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use stein_expo::experiments::{
    kind_schema_text, run, schema_text, ExperimentConfig, ExperimentKind, RunReport,
};
use stein_expo::markov_walk::{ChainSpec, Walk2DSpec};
use stein_expo::{Error, LawSpec};

/// Exponential approximation experiments: bounds against Monte Carlo truth.
#[derive(Parser)]
#[command(name = "stein-expo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic Galton-Watson bounds.
    GwBound(RunArgs),
    /// Spine coupling gap against the coupling bounds.
    GwCouple(RunArgs),
    /// Wasserstein distance of the conditioned population against C eta.
    GwDw(RunArgs),
    /// Markov-chain occupation time against its bound.
    Occupation(RunArgs),
    /// Returns of a planar walk and their exponential limit.
    Walk2d(RunArgs),
    /// Run every invariant of the library at desk scale.
    Verify(RunArgs),
    /// Sweep the closed-form inequalities over parameter grids.
    BoundsSweep(RunArgs),
    /// Print the CSV columns of every experiment.
    Schema,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Print this experiment's CSV columns and exit.
    #[arg(long)]
    schema: bool,
    /// Offspring law: poisson(m), geometric(m), binary(p) or pmf:[k:p,...].
    #[arg(long)]
    law: Option<String>,
    #[arg(long)]
    n: Option<u64>,
    /// Comma-separated ascending generations or path lengths.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<u64>>,
    #[arg(long)]
    reps: Option<usize>,
    /// Chain as a JSON file with `states`, `matrix` and `start`.
    #[arg(long)]
    chain: Option<PathBuf>,
    /// Step law: simple, lazy(p) or steps:[dx,dy:p;...].
    #[arg(long)]
    walk: Option<String>,
    /// Record wall time in the report (makes reruns differ).
    #[arg(long)]
    timing: bool,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn runtime(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

fn classify(error: Error) -> Failure {
    if error.is_input_error() {
        input(error)
    } else {
        runtime(error)
    }
}

fn build_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(input)?;
            let config = ExperimentConfig::from_json(&text).map_err(input)?;
            if config.experiment != kind {
                return Err(input(anyhow::anyhow!(
                    "{} describes a {} experiment, not {kind}",
                    path.display(),
                    config.experiment
                )));
            }
            config
        }
        None => ExperimentConfig::new(kind),
    };
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some(law) = &args.law {
        config.law = Some(law.parse::<LawSpec>().map_err(input)?);
    }
    if let Some(n) = args.n {
        config.n = Some(n);
        config.n_grid = None;
    }
    if let Some(grid) = &args.n_grid {
        config.n_grid = Some(grid.clone());
        config.n = None;
    }
    if let Some(reps) = args.reps {
        config.reps = Some(reps);
    }
    if let Some(path) = &args.chain {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(input)?;
        let chain: ChainSpec = serde_json::from_str(&text)
            .with_context(|| format!("chain file {}", path.display()))
            .map_err(input)?;
        config.chain = Some(chain);
    }
    if let Some(walk) = &args.walk {
        config.walk = Some(walk.parse::<Walk2DSpec>().map_err(input)?);
    }
    if let Some(threads) = args.threads {
        config.threads = threads;
    }
    if args.out_csv.is_some() {
        config.out_csv = args.out_csv.clone();
    }
    if args.out_json.is_some() {
        config.out_json = args.out_json.clone();
    }
    config.timing |= args.timing;
    config.validate().map_err(input)?;
    Ok(config)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(runtime)
}

fn print_summary(report: &RunReport) {
    for v in &report.verdicts {
        let detail = match (v.value, v.threshold) {
            (Some(x), Some(t)) => format!(" ({x:.6e} vs {t:.6e})"),
            _ => String::new(),
        };
        println!("{:<12} {}{detail}", v.status.label(), v.check);
    }
    let overall = if report.passed() { "PASS" } else { "FAIL" };
    println!("overall: {overall}");
}

fn execute(kind: ExperimentKind, args: &RunArgs) -> Result<bool, Failure> {
    if args.schema {
        print!("{}", kind_schema_text(kind));
        return Ok(true);
    }
    let config = build_config(kind, args)?;
    let report = run(&config).map_err(classify)?;
    if let Some(path) = &config.out_json {
        write_file(path, &report.to_json().map_err(runtime)?)?;
    }
    if let Some(path) = &config.out_csv {
        write_file(path, &report.to_csv_string().map_err(runtime)?)?;
    }
    print_summary(&report);
    for v in report.failures() {
        eprintln!("failed: {}", v.check);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::GwBound(a) => (ExperimentKind::GwBound, a),
        Command::GwCouple(a) => (ExperimentKind::GwCouple, a),
        Command::GwDw(a) => (ExperimentKind::GwDw, a),
        Command::Occupation(a) => (ExperimentKind::Occupation, a),
        Command::Walk2d(a) => (ExperimentKind::Walk2d, a),
        Command::Verify(a) => (ExperimentKind::Verify, a),
        Command::BoundsSweep(a) => (ExperimentKind::BoundsSweep, a),
        Command::Schema => {
            print!("{}", schema_text());
            return ExitCode::SUCCESS;
        }
    };
    match execute(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
