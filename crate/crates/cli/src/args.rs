use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lifecover::config::SchemeChoice;

#[derive(Debug, Parser)]
#[command(
    name = "lifecover",
    version,
    about = "Optimal life insurance for a two-earner household"
)]
pub struct Cli {
    /// Scenario document (.toml or .json). Flags below override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    /// Seed for the Monte Carlo commands.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    pub seed: u64,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Scenario values given on the command line. Money is in units of $50,000.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub r: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda_x: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda_y: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub income_x: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub income_y: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub wealth: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Premium loading; replaces any premium setting from the config.
    #[arg(long, global = true, conflicts_with_all = ["loss_prob", "rate"], allow_hyphen_values = true)]
    pub loading: Option<f64>,
    /// Separate loading for the continuous scheme.
    #[arg(long, global = true, requires = "loading", allow_hyphen_values = true)]
    pub continuous_loading: Option<f64>,
    /// Price both schemes so the insurer loses money with this probability.
    #[arg(long, global = true, conflicts_with = "rate", allow_hyphen_values = true)]
    pub loss_prob: Option<f64>,
    /// Premium rate `H` or `h` directly; needs `--scheme single|continuous`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Single,
    Continuous,
    Both,
}

impl From<SchemeArg> for SchemeChoice {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Single => SchemeChoice::Single,
            SchemeArg::Continuous => SchemeChoice::Continuous,
            SchemeArg::Both => SchemeChoice::Both,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal benefit, investment and consumption for each premium scheme.
    Solve,
    /// Premium rates that give the insurer a target loss probability (`--loss-prob`).
    Calibrate,
    /// Comparative statics over a parameter grid.
    Sweep(SweepArgs),
    /// Probability that consumption reaches zero, analytic next to Monte Carlo.
    Ruin(McArgs),
    /// Simulated consumption paths, scheme comparison and insurer losses.
    Simulate(McArgs),
    /// Check the variational inequality and the solution invariants.
    Verify(VerifyArgs),
    /// Serve the JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// theta, alpha, I_x, I_y, lambda_x or lambda_y.
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub to: f64,
    /// Number of grid points, ends included.
    #[arg(long)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    /// Base time step in years.
    #[arg(long, default_value_t = 1.0 / 2000.0)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Tolerance on the scaled residuals of the variational inequality.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Wealth grid points.
    #[arg(long, default_value_t = 201)]
    pub n_w: usize,
    /// Benefit grid points.
    #[arg(long, default_value_t = 161)]
    pub n_d: usize,
    /// Also compare derivatives against finite differences.
    #[arg(long)]
    pub fd: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
}
