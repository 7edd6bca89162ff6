use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nakamoto_bounds::sim::{SimMode, DEFAULT_HORIZON, DEFAULT_TRIALS, DEFAULT_WARMUP};
use nakamoto_bounds::{LeadVariant, PmfVariant};

#[derive(Debug, Parser)]
#[command(name = "nakabounds", version, about = "Discard-probability bounds for k-deep confirmation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower and upper bounds for each confirmation depth.
    Bound(BoundArgs),
    /// Monte Carlo estimate of the discard probability.
    Simulate(SimulateArgs),
    /// Write the data behind the k- and alpha-sweep figures as CSV files.
    Figures(FiguresArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LeadArg {
    Truncated,
    Full,
}

impl From<LeadArg> for LeadVariant {
    fn from(a: LeadArg) -> Self {
        match a {
            LeadArg::Truncated => LeadVariant::TruncatedLower,
            LeadArg::Full => LeadVariant::FullLower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PmfArg {
    Printed,
    Composition,
}

impl From<PmfArg> for PmfVariant {
    fn from(a: PmfArg) -> Self {
        match a {
            PmfArg::Printed => PmfVariant::Printed,
            PmfArg::Composition => PmfVariant::Composition,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    PrivateDelta,
    Rigged,
}

impl From<ModeArg> for SimMode {
    fn from(a: ModeArg) -> Self {
        match a {
            ModeArg::PrivateDelta => SimMode::PrivateAttackDelta,
            ModeArg::Rigged => SimMode::RiggedModel,
        }
    }
}

/// Numerical options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct NumericArgs {
    /// Truncation threshold for the infinite distributions.
    #[arg(long, default_value_t = nakamoto_bounds::DEFAULT_EPS, value_parser = parse_eps)]
    pub eps: f64,
    /// Evaluation route for the confirmation-count distribution.
    #[arg(long, value_enum, default_value_t = PmfArg::Printed)]
    pub pmf_variant: PmfArg,
    /// Significant digits for printed probabilities.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=17))]
    pub precision: u32,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Block rate per second; fractions such as 1/600 are accepted.
    #[arg(long, default_value = "1/600", value_parser = parse_number)]
    pub lambda: f64,
    /// Maximum network delay in seconds.
    #[arg(long, default_value = "10", value_parser = parse_number)]
    pub delta: f64,
    /// Honest fraction of the mining power.
    #[arg(long, default_value = "0.9", value_parser = parse_number)]
    pub alpha: f64,
    /// Confirmation depth, or an inclusive range `a..b`.
    #[arg(long, default_value = "6", value_parser = parse_k)]
    pub k: RangeInclusive<u32>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub numeric: NumericArgs,
    /// Lead distribution used by the lower bound.
    #[arg(long, value_enum, default_value_t = LeadArg::Truncated)]
    pub lead_variant: LeadArg,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub numeric: NumericArgs,
    /// Lead distribution used by the reported lower bound.
    #[arg(long, value_enum, default_value_t = LeadArg::Truncated)]
    pub lead_variant: LeadArg,
    #[arg(long, value_enum, default_value_t = ModeArg::PrivateDelta)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_TRIALS, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mining events simulated before the lead is read.
    #[arg(long, default_value_t = DEFAULT_WARMUP, value_parser = clap::value_parser!(u64).range(1..))]
    pub warmup: u64,
    /// Step cap for the post-confirmation race.
    #[arg(long, default_value_t = DEFAULT_HORIZON, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: u64,
    /// Also write the raw lead and confirmation-count histograms here (CSV).
    #[arg(long)]
    pub hist_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FiguresArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub numeric: NumericArgs,
    /// Lead distribution used by the lower bound.
    #[arg(long, value_enum, default_value_t = LeadArg::Full)]
    pub lead_variant: LeadArg,
    /// Largest depth in the k sweeps.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    pub k_max: u32,
}

/// A decimal or a fraction `p/q`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|e| format!("bad numerator: {e}"))?;
            let q: f64 = q.trim().parse().map_err(|e| format!("bad denominator: {e}"))?;
            if q == 0.0 {
                return Err("zero denominator".into());
            }
            p / q
        }
        None => s.trim().parse().map_err(|e| format!("{e}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err("must be finite".into())
    }
}

fn parse_eps(s: &str) -> Result<f64, String> {
    let eps = parse_number(s)?;
    if eps > 0.0 && eps < 1.0 {
        Ok(eps)
    } else {
        Err("must lie in (0, 1)".into())
    }
}

/// `6` or `1..12` (inclusive).
pub fn parse_k(s: &str) -> Result<RangeInclusive<u32>, String> {
    let one = |t: &str| -> Result<u32, String> {
        let k: u32 = t.trim().parse().map_err(|e| format!("{e}"))?;
        if k == 0 {
            Err("depth must be at least 1".into())
        } else {
            Ok(k)
        }
    };
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (one(a)?, one(b.trim_start_matches('='))?),
        None => {
            let k = one(s)?;
            (k, k)
        }
    };
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..=b)
}
