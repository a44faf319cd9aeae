//! `randers`: geodesics, isoparametric families and focal sets of Randers
//! spheres from the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use randers_core::Verdict;

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "randers", version, about = "Geodesics and isoparametric families of Randers spheres")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for sampled commands (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (geodesic CSV) or directory (family and focal point clouds).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Primary tolerance of the command.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a unit-speed geodesic and check speed, Euler-Lagrange residual and closure.
    Geodesic(GeodesicArgs),
    /// Decide closedness of the S² geodesic family from (a, b, c).
    Classify(ClassifyArgs),
    /// Check the isoparametric equations for f = f̄ ∘ ψ⁻¹.
    Verify(VerifyArgs),
    /// Emit members of the isoparametric family through the zero level.
    Family(FamilyArgs),
    /// Emit the two focal submanifolds and check them against predictions.
    Focal(FocalArgs),
    /// Round-trip diagnostics for ψ and its inverse.
    Psi(PsiArgs),
}

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    /// (a, b, c) = (0, 1/2, 0) over [0, 4π].
    #[arg(long, conflicts_with_all = ["fig2", "abc"])]
    fig1: bool,
    /// (a, b, c) = (0, 1 − 1/√2, 0) over [0, 29π].
    #[arg(long, conflicts_with = "abc")]
    fig2: bool,
    #[arg(long, num_args = 3, value_names = ["A", "B", "C"], allow_negative_numbers = true)]
    abc: Option<Vec<f64>>,
    #[arg(long)]
    s_max: Option<f64>,
    /// Number of samples written to the CSV.
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Expect {
    Closed,
    NonClosed,
    Undecided,
}

impl Expect {
    fn verdict(self) -> Verdict {
        match self {
            Self::Closed => Verdict::Closed,
            Self::NonClosed => Verdict::NonClosed,
            Self::Undecided => Verdict::Undecided,
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, conflicts_with_all = ["fig2", "abc"])]
    fig1: bool,
    #[arg(long, conflicts_with = "abc")]
    fig2: bool,
    #[arg(long, num_args = 3, value_names = ["A", "B", "C"], allow_negative_numbers = true)]
    abc: Option<Vec<f64>>,
    #[arg(long)]
    max_denominator: Option<u64>,
    /// Fail unless the verdict matches.
    #[arg(long, value_enum)]
    expect: Option<Expect>,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// g1: ⟨x, e₁⟩ on S^n with rate a in the (1, 3) plane; g2: the quadric |x̄₁|² − |x̄₂|².
    #[arg(long, value_parser = ["g1", "g2"])]
    example: Option<String>,
    /// Sphere dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Quadric split: x̄₁ has p + 1 coordinates.
    #[arg(long)]
    p: Option<usize>,
    /// Rotation rate of Q.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    example: ExampleArgs,
    #[arg(long)]
    samples: Option<usize>,
    /// Comma-separated levels of f.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    levels: Option<Vec<f64>>,
    /// Tolerance on the per-level spread of B.
    #[arg(long, default_value_t = 5e-4)]
    b_tol: f64,
    /// Also run with ψ⁻¹ replaced by the identity and require it to fail.
    #[arg(long)]
    control: bool,
    /// Minimum A deviation the control must show.
    #[arg(long, default_value_t = 1e-2)]
    control_margin: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Ply,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Self::Ply => "ply",
            Self::Csv => "csv",
        }
    }
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// The g = 1 family on S² for both Q = 0 and Q₁₃ = 1/2.
    #[arg(long, conflicts_with = "example")]
    fig34: bool,
    #[command(flatten)]
    example: ExampleArgs,
    /// Comma-separated family parameters in (−1, 1).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    ts: Option<Vec<f64>>,
    /// Points sampled on the zero level.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, value_enum, default_value = "ply")]
    format: Format,
}

#[derive(Debug, Args)]
pub struct FocalArgs {
    #[command(flatten)]
    example: ExampleArgs,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, value_enum, default_value = "ply")]
    format: Format,
}

#[derive(Debug, Args)]
pub struct PsiArgs {
    #[command(flatten)]
    example: ExampleArgs,
    #[arg(long)]
    samples: Option<usize>,
    /// Grid size of the scan-and-bisect oracle.
    #[arg(long, default_value_t = 100_000)]
    scan_points: usize,
    /// Run the oracle on every k-th sample.
    #[arg(long, default_value_t = 10)]
    scan_every: usize,
}

fn run(cli: Cli) -> Result<commands::Outcome> {
    let cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut common = cli.common.clone();
    if common.out.is_none() {
        common.out = cfg.out.clone().map(PathBuf::from);
    }
    match &cli.command {
        Command::Geodesic(args) => commands::geodesic(args, &common, &cfg),
        Command::Classify(args) => commands::classify(args, &common, &cfg),
        Command::Verify(args) => commands::verify(args, &common, &cfg),
        Command::Family(args) => commands::family(args, &common, &cfg),
        Command::Focal(args) => commands::focal(args, &common, &cfg),
        Command::Psi(args) => commands::psi(args, &common, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(mut outcome) => {
            let passed = outcome.failures.is_empty();
            outcome.summary["passed"] = passed.into();
            outcome.summary["failures"] = outcome.failures.into();
            println!("{}", serde_json::to_string_pretty(&outcome.summary).expect("JSON values serialize"));
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
