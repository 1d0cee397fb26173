use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

/// Linear space-time block codes: catalog, minimum determinants,
/// determinant criteria, Monte-Carlo error and outage rates, DMT oracles.
#[derive(Debug, Parser)]
#[command(name = "stbc-lab", version, about, propagate_version = true)]
pub struct Cli {
    /// TOML file with defaults: top-level `seed` and `threads`, plus tables
    /// named after subcommands (`[mindet]`, `[simulate.pe]`, `[dmt.kkt]`, ...).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Base seed for every random stream.
    #[arg(long, global = true, env = "STBC_LAB_SEED")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Inspect the code catalog.
    #[command(subcommand)]
    Codes(CodesCmd),
    /// Minimum determinant of a finite code or of its integer design.
    Mindet(MindetArgs),
    /// Check the determinant criteria for DMT optimality.
    Criterion(CriterionArgs),
    /// Monte-Carlo simulations.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Diversity-multiplexing tradeoff oracles.
    #[command(subcommand)]
    Dmt(DmtCmd),
}

#[derive(Debug, Subcommand)]
pub enum CodesCmd {
    /// List every catalog row.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Parameters of one code.
    Info {
        name: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MindetArgs {
    /// Catalog name or path to a code JSON file.
    pub code: Option<String>,
    /// PAM size for an exact search over the finite code.
    #[arg(long = "M", value_name = "M")]
    pub m: Option<u32>,
    /// Per-coordinate bound for a search over the integer design.
    #[arg(long, value_name = "B", conflicts_with = "m")]
    pub integer: Option<u32>,
    /// With --integer: sample this many random vectors instead of enumerating.
    #[arg(long, value_name = "N", requires = "integer")]
    pub random: Option<u64>,
    /// Maximum number of vectors to enumerate.
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionArgs {
    pub code: Option<String>,
    #[arg(long)]
    pub nr: Option<usize>,
    /// Multiplexing gain; omit to sweep 0, 0.1, ... up to the code rate.
    #[arg(long)]
    pub r: Option<f64>,
    /// enhanced, elia or both.
    #[arg(long)]
    pub which: Option<String>,
    /// Integer-design bound used for the NVD constant.
    #[arg(long)]
    pub bound: Option<u32>,
    /// SNR grid in dB as start:step:stop.
    #[arg(long)]
    pub snr: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCmd {
    /// Codeword error probability with ML decoding.
    Pe(PeArgs),
    /// Outage probability of the i.i.d. Rayleigh channel.
    Outage(OutageArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeArgs {
    #[arg(long)]
    pub code: Option<String>,
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    /// SNR grid in dB as start:step:stop.
    #[arg(long)]
    pub snr: Option<String>,
    /// Trial budget per SNR point.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Stop a point after this many errors; 0 disables the rule.
    #[arg(long)]
    pub errors: Option<u64>,
    /// sphere or exhaustive.
    #[arg(long)]
    pub decoder: Option<String>,
    /// Decode columns by increasing norm.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub sorted_qr: Option<bool>,
    /// Round PAM sizes to even values only.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub even_only: Option<bool>,
    /// Top fraction of the grid used for the slope.
    #[arg(long)]
    pub window: Option<f64>,
    /// CSV output path (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary path.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutageArgs {
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Constant added to r log2 SNR, in bits (default 1 when r = 0, else 0).
    #[arg(long)]
    pub offset: Option<f64>,
    #[arg(long)]
    pub snr: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// mc (plain Monte-Carlo) or is (importance sampling).
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum DmtCmd {
    /// Slope of an error or outage CSV written by `simulate`.
    Estimate(EstimateArgs),
    /// Optimal tradeoff curve.
    Optimal(OptimalArgs),
    /// Water-filling solution with a projected-gradient cross-check.
    Kkt(KktArgs),
    /// Numerical outage-exponent minimization.
    Exponent(ExponentArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub window: Option<f64>,
    /// With --nr and --r, also report the optimal diversity for comparison.
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimalArgs {
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub nr: Option<usize>,
    /// Also evaluate the curve at this gain.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KktArgs {
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub nr: Option<usize>,
    /// Comma-separated squared singular values, one per transmit antenna.
    #[arg(long)]
    pub dsq: Option<String>,
    #[arg(long)]
    pub snr_db: Option<f64>,
    /// r + δ; the program depends on the sum only.
    #[arg(long, conflicts_with_all = ["r", "delta"])]
    pub rdelta: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Random restarts of the projected-gradient cross-check.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentArgs {
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
