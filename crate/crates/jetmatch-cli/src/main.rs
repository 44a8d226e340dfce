//! Command-line front end: distances, boundary-value solves, lambda sweeps
//! for locating winding transitions, and the seeded invariant suite.
//!
//! Exit codes: 0 success, 1 malformed input or configuration, 2 solver
//! failure (both routes), 3 invariant-suite failure.

mod checks;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jetmatch::curves::{curve_from_json, load_curve, Curve, FileFormat};
use jetmatch::distance::{distance, sweep_lambda, DistanceConfig};
use jetmatch::error::Error;
use jetmatch::jets::Weights;

#[derive(Parser)]
#[command(name = "jetmatch", version, about = "Rigid-motion-invariant curve distances via jet matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the distance between two curves.
    Distance(DistanceArgs),
    /// Solve the boundary value problem and list all critical points found.
    SolveBvp(DistanceArgs),
    /// Sweep lambda_1 and report best energy, winding, and branch count per row.
    Sweep(SweepArgs),
    /// Run the seeded invariant suite and report measured values against bounds.
    Check(CheckArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Jet order.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Comma-separated jet weights lambda_1,...,lambda_k.
    #[arg(long, default_value = "1")]
    lambda: String,
    /// Number of grid segments N (nodes 0..=N).
    #[arg(long = "grid", default_value_t = 200)]
    grid: usize,
    /// Shooting residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Number of multistart rotations.
    #[arg(long, default_value_t = 8)]
    starts: usize,
    /// Rotation component to search: "so" or "o" (includes det = -1).
    #[arg(long, default_value = "so")]
    component: String,
    /// Seed for randomized property checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pretty-print JSON output.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DistanceArgs {
    /// First curve: a file path (.json/.csv) or inline JSON.
    #[arg(long)]
    curve1: String,
    /// Second curve: a file path (.json/.csv) or inline JSON.
    #[arg(long)]
    curve2: String,
    /// Write the best path's angle lift as CSV columns s,theta (n = 2 only).
    #[arg(long = "theta-csv")]
    theta_csv: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    curve1: String,
    #[arg(long)]
    curve2: String,
    #[arg(long = "lambda-min")]
    lambda_min: f64,
    #[arg(long = "lambda-max")]
    lambda_max: f64,
    /// Number of sweep rows (lambda values, endpoints included).
    #[arg(long, default_value_t = 41)]
    steps: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
}

const EXIT_INPUT: u8 = 1;
const EXIT_SOLVER: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Distance(args) => cmd_distance(&args, false),
        Command::SolveBvp(args) => cmd_distance(&args, true),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Check(args) => checks::cmd_check(&args.common.lambda, args.common.seed),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::NoConvergence(_) | Error::SingularJacobian { .. } | Error::AllStartsFailed => {
            EXIT_SOLVER
        }
        _ => EXIT_INPUT,
    }
}

fn parse_weights(text: &str) -> Result<Weights, Error> {
    let lambda: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let lambda =
        lambda.map_err(|e| Error::InvalidWeights(format!("cannot parse weights {text:?}: {e}")))?;
    Weights::new(lambda)
}

fn build_config(common: &CommonArgs) -> Result<DistanceConfig, Error> {
    let weights = parse_weights(&common.lambda)?;
    if weights.order() != common.k {
        return Err(Error::InvalidWeights(format!(
            "--lambda lists {} weights but --k is {}",
            weights.order(),
            common.k
        )));
    }
    if common.grid < 16 {
        return Err(Error::GridTooCoarse(
            "--grid must be at least 16".to_string(),
        ));
    }
    if !(common.tol > 0.0) {
        return Err(Error::InvalidWeights("--tol must be positive".to_string()));
    }
    let include_improper = match common.component.as_str() {
        "so" => false,
        "o" => true,
        other => {
            return Err(Error::InvalidWeights(format!(
                "--component must be \"so\" or \"o\", got {other:?}"
            )))
        }
    };
    Ok(DistanceConfig {
        k: common.k,
        weights,
        segments: common.grid,
        tol: common.tol,
        starts: common.starts,
        include_improper,
        ..DistanceConfig::default()
    })
}

fn parse_curve(spec: &str) -> Result<Curve, Error> {
    if spec.trim_start().starts_with('{') {
        return curve_from_json(spec);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::MalformedFile(format!("no such file: {spec}")));
    }
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => FileFormat::Csv,
        Some("json") => FileFormat::Json,
        other => {
            return Err(Error::MalformedFile(format!(
                "cannot infer format from extension {other:?} (want .csv or .json)"
            )))
        }
    };
    load_curve(path, format)
}

fn cmd_distance(args: &DistanceArgs, bvp_only: bool) -> Result<ExitCode, Error> {
    let config = build_config(&args.common)?;
    let c1 = parse_curve(&args.curve1)?;
    let c2 = parse_curve(&args.curve2)?;
    let result = distance(&c1, &c2, &config)?;
    if let Some(path) = &args.theta_csv {
        report::write_theta_csv(path, &result.best_path)?;
    }
    let text = if bvp_only {
        report::bvp_report(&result, args.common.json)
    } else {
        report::distance_report(&result, args.common.json)
    };
    println!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode, Error> {
    let config = build_config(&args.common)?;
    if !(args.lambda_min > 0.0) || args.lambda_max < args.lambda_min || args.steps < 1 {
        return Err(Error::InvalidWeights(
            "sweep needs 0 < lambda-min <= lambda-max and at least one step".to_string(),
        ));
    }
    let c1 = parse_curve(&args.curve1)?;
    let c2 = parse_curve(&args.curve2)?;
    let lambdas: Vec<f64> = (0..args.steps)
        .map(|i| {
            if args.steps == 1 {
                args.lambda_min
            } else {
                args.lambda_min
                    + (args.lambda_max - args.lambda_min) * i as f64 / (args.steps - 1) as f64
            }
        })
        .collect();
    let rows = sweep_lambda(&c1, &c2, &lambdas, &config)?;
    print!("{}", report::sweep_csv(&rows));
    Ok(ExitCode::SUCCESS)
}
