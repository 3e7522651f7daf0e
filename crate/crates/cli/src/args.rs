use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regint_core::hardy::TrialKind;
use regint_core::ExponentSpec;

#[derive(Debug, Parser)]
#[command(name = "regint", version, about = "Regular norms, interpolation checks and minimal regular extensions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regular norm of a matrix file, with witnesses.
    Norm(NormArgs),
    /// Compare the Calderón-product norm with the regular norm on random matrices.
    #[command(alias = "thm1")]
    Interp(InterpArgs),
    /// Bracket the minimal regular extension of an extension problem file.
    Extend(ExtendArgs),
    /// Ratio table for analytic-polynomial subspaces of the discrete torus.
    Hardy(HardyArgs),
    /// Write a seeded random matrix or extension problem.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Matrix,
    Extprob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HardyKind {
    Random,
    Identity,
    Diagonal,
}

impl From<HardyKind> for TrialKind {
    fn from(k: HardyKind) -> Self {
        match k {
            HardyKind::Random => TrialKind::Random,
            HardyKind::Identity => TrialKind::Identity,
            HardyKind::Diagonal => TrialKind::Diagonal,
        }
    }
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Matrix file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_exponent)]
    pub p: ExponentSpec,
    /// Required closure of the bracket, relative to the value.
    #[arg(long, default_value_t = 1e-9, value_parser = parse_tol)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct InterpArgs {
    /// Columns of each random matrix.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Rows of each random matrix; defaults to `n`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: Option<u64>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Comma-separated list; fractions such as `1/3` are accepted.
    #[arg(long, value_delimiter = ',', value_parser = parse_theta, default_value = "1/4,1/3,1/2,2/3,3/4")]
    pub theta: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance for `calderon ≈ regular`.
    #[arg(long, default_value_t = 1e-4, value_parser = parse_tol)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    /// Extension problem file.
    #[arg(long)]
    pub input: PathBuf,
    /// Override the exponent stored in the file.
    #[arg(long, value_parser = parse_exponent)]
    pub p: Option<ExponentSpec>,
    /// Largest acceptable relative gap between the bracket ends.
    #[arg(long, default_value_t = 5e-2, value_parser = parse_tol)]
    pub tol: f64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct HardyArgs {
    /// Grid points; defaults to `4 (degree + 1)`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 3)]
    pub degree: u64,
    /// Target dimension of random trials; defaults to the number of grid points.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: Option<u64>,
    #[arg(long, default_value = "2", value_parser = parse_exponent)]
    pub p: ExponentSpec,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    pub kind: HardyKind,
    /// Stopping tolerance of the extension solver.
    #[arg(long, default_value_t = 1e-6, value_parser = parse_tol)]
    pub tol: f64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Columns (matrix) or ambient dimension (extension problem).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Rows or target dimension; defaults to `n`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: Option<u64>,
    /// Subspace dimension of an extension problem.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long, default_value = "2", value_parser = parse_exponent)]
    pub p: ExponentSpec,
    /// Uniform [0, 1] entries instead of complex Gaussian ones.
    #[arg(long)]
    pub nonneg: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_exponent(s: &str) -> Result<ExponentSpec, String> {
    ExponentSpec::parse(s).map_err(|e| e.to_string())
}

fn parse_number(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
            a / b
        }
        None => s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?,
    };
    Ok(value)
}

fn parse_theta(s: &str) -> Result<f64, String> {
    let t = parse_number(s)?;
    if t > 0.0 && t < 1.0 {
        Ok(t)
    } else {
        Err(format!("theta must lie in (0, 1), got {s}"))
    }
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let t = parse_number(s)?;
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(format!("tolerance must be positive and finite, got {s}"))
    }
}
