use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "stark",
    version,
    about = "Spectral laboratory for the confined 2D Stark operator"
)]
pub struct Cli {
    /// Emit JSON instead of human-readable text.
    #[arg(long, global = true)]
    pub machine_readable: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a closed-form limit or constant.
    Predict(PredictArgs),
    /// Eigenvalues below the threshold of a configured operator at one h.
    Solve(SingleArgs),
    /// Bracketed eigenvalue count below the threshold at one h.
    Count(SingleArgs),
    /// Projector-density pairing with the configured potential at one h.
    Density(SingleArgs),
    /// Run a convergence study and write CSV rows plus a JSON manifest.
    Study(RunArgs),
    /// Dirichlet/full/mixed bracketing check over the configured h and μ values.
    BracketCheck(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PredictKind {
    Constant,
    Weyl,
    Expansion,
    CountingFirst,
    CountingSecond,
    RoughWeyl,
    Density,
    Shift,
    Perturbed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeylModel {
    /// V ≡ 0 on the unit box (0,1)^d.
    Box,
    /// V = (κ₀/2)|x|² on ℝ^d.
    Oscillator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum)]
pub enum RegimeArg {
    #[default]
    First,
    Second,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    pub kind: PredictKind,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 4.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa0: f64,
    #[arg(long, default_value_t = 0.8)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    /// Dimension for `constant` and `weyl`.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Eigenvalue index for `expansion` and `shift`.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Spectral parameter Λ for `weyl`.
    #[arg(long, default_value_t = 4.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = WeylModel::Box)]
    pub model: WeylModel,
    #[arg(long, value_enum, default_value_t = RegimeArg::First)]
    pub regime: RegimeArg,
    /// Test potential: `zero`, `gaussian:A,sc,tc,σs,σt`, `bump:A,sc,tc,rs,rt` or `box:v,s0,s1,t0,t1`.
    #[arg(long)]
    pub potential: Option<String>,
}

#[derive(Args, Debug)]
pub struct SingleArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Semiclassical parameter; defaults to the smallest entry of the config's h_list.
    #[arg(long)]
    pub h: Option<f64>,
    /// Overrides the eigenpair residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to the config's `output` entry, then the current directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Overrides the eigenpair residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}
