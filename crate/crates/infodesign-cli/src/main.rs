//! `infodesign`: certify information structures, sweep the Bertrand example,
//! build the persuasion and investment structures, and run Monte Carlo checks.
//!
//! Exit codes: 0 success/certified, 1 not certified or a failed check,
//! 2 bad input.

mod commands;
mod grid;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "infodesign", version, about = "Information design for linear-quadratic-Gaussian games")]
pub struct Cli {
    /// Write the result to PATH instead of stdout (a directory for `fixtures`).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Monte Carlo seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub samples: u64,
    /// Relative duality-gap tolerance for a Certified verdict.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Emit JSON where the default output is CSV.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check obedience, dual concavity and the duality gap for a structure.
    Certify(CertifyArgs),
    /// Optimal pricing structure of the Bertrand duopoly, one CSV row per δ.
    Bertrand(BertrandArgs),
    /// Polarization or co-movement persuasion structures.
    Persuade(PersuadeArgs),
    /// Investment with congestion.
    Invest(InvestArgs),
    /// Co-movement with a nearly common state: q*(Δ) and its slope.
    Perturb(PerturbArgs),
    /// Monte Carlo twins of the analytic values and obedience moments.
    Mc(McArgs),
    /// List the shipped fixtures, or write them as JSON files into --out.
    Fixtures,
}

#[derive(Args, Debug)]
pub struct ProblemFiles {
    /// Shipped fixture name (see `fixtures`).
    #[arg(long, conflicts_with_all = ["game", "structure"])]
    pub fixture: Option<String>,
    #[arg(long, requires = "structure")]
    pub game: Option<PathBuf>,
    #[arg(long, requires = "game")]
    pub structure: Option<PathBuf>,
    #[arg(long)]
    pub contract: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub files: ProblemFiles,
}

#[derive(Args, Debug)]
pub struct BertrandArgs {
    /// Market parameters as JSON (fields c, theta_bar, sigma2, eta, xi, delta).
    #[arg(long, conflicts_with_all = ["c", "theta_bar", "sigma2", "eta", "xi"])]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub theta_bar: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub xi: f64,
    /// Single consumer-surplus weight.
    #[arg(long, conflicts_with = "sweep_delta")]
    pub delta: Option<f64>,
    /// Grid `lo:hi:step` (closed) or a comma-separated list.
    #[arg(long)]
    pub sweep_delta: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PersuasionKind {
    Polarization,
    Comovement,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureKind {
    Selective,
    Gaussian,
}

#[derive(Args, Debug)]
pub struct PersuadeArgs {
    #[arg(long, value_enum)]
    pub mode: PersuasionKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// State mean (polarization only).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub omega_bar: f64,
    /// Co-movement weight, a decimal or an exact ratio `p/q`.
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long, value_enum, default_value_t = StructureKind::Selective)]
    pub structure: StructureKind,
}

#[derive(Args, Debug)]
pub struct InvestArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    /// Prior mean of the normalized quality.
    #[arg(long, allow_hyphen_values = true)]
    pub mean: f64,
    /// Prior variance of the normalized quality.
    #[arg(long)]
    pub var: f64,
    #[arg(long, value_enum, default_value_t = StructureKind::Selective)]
    pub structure: StructureKind,
    /// Second prior `mean,var`; the contract is rebuilt from its mean only.
    #[arg(long, allow_hyphen_values = true)]
    pub prior2: Option<String>,
}

#[derive(Args, Debug)]
pub struct PerturbArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub rho: f64,
    /// Δ values: `lo:hi:step` or a comma-separated list.
    #[arg(long, default_value = "0.1,0.01,0.001")]
    pub delta_grid: String,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[command(flatten)]
    pub files: ProblemFiles,
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("INFODESIGN_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("INFODESIGN_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("INFODESIGN_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let run = init_threads().and_then(|_| commands::run(&cli));
    match run {
        Ok(commands::Status::Success) => ExitCode::SUCCESS,
        Ok(commands::Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
