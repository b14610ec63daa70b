//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fdiv", version, about = "f-divergences between exponential family members")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form Pearson, Neyman or symmetric chi-square.
    #[command(allow_negative_numbers = true)]
    Chi2(Chi2Args),
    /// Signed chi-type distance of order k centered at lambda.
    #[command(allow_negative_numbers = true)]
    Chik(ChikArgs),
    /// Any built-in f-divergence by series, oracle or Monte Carlo.
    #[command(allow_negative_numbers = true)]
    Fdiv(FdivArgs),
    /// Kullback-Leibler divergence.
    #[command(allow_negative_numbers = true)]
    Kl(KlArgs),
    /// Symmetrized Monte Carlo estimate.
    #[command(allow_negative_numbers = true)]
    Mc(McArgs),
    /// Brute-force summation or quadrature.
    #[command(allow_negative_numbers = true)]
    Oracle(OracleArgs),
    /// Recompute every published constant and report pass/fail.
    #[command(name = "paper-repro")]
    PaperRepro(OutputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Poisson,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// The pair of members, in source parameters.
#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    #[arg(long, value_enum, default_value_t = FamilyKind::Poisson)]
    pub family: FamilyKind,
    /// Poisson rate of the first member.
    #[arg(long)]
    pub l1: Option<f64>,
    /// Poisson rate of the second member.
    #[arg(long)]
    pub l2: Option<f64>,
    /// Gaussian mean of the first member, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu1: Option<Vec<f64>>,
    /// Gaussian mean of the second member, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu2: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    /// kl, reverse-kl, pearson, neyman, hellinger, js, alpha, vajda or tv.
    #[arg(long)]
    pub generator: String,
    /// Order parameter of the alpha generator.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Power of the vajda generator.
    #[arg(long)]
    pub vajda_k: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct SamplingArgs {
    /// Draws from each member.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Pearson,
    Neyman,
    Symmetric,
}

#[derive(Debug, Clone, Args)]
pub struct Chi2Args {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_enum, default_value_t = Side::Pearson)]
    pub side: Side,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ChikArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long)]
    pub k: usize,
    /// Center; 1 gives the signed Pearson-Vajda distance.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Largest order accepted before cancellation makes the expansion unreliable.
    #[arg(long, default_value_t = fdiv_core::closed_form::DEFAULT_K_MAX)]
    pub k_max: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FdivMethod {
    Taylor,
    TaylorAuto,
    SecondOrder,
    Oracle,
    Mc,
}

#[derive(Debug, Clone, Args)]
pub struct FdivArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, value_enum, default_value_t = FdivMethod::Taylor)]
    pub method: FdivMethod,
    /// Truncation order.
    #[arg(long, default_value_t = 10)]
    pub s: usize,
    /// Expansion center.
    #[arg(long, default_value_t = 1.0)]
    pub center: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 30)]
    pub s_max: usize,
    /// Lower end of the density-ratio interval for the remainder bound.
    #[arg(long, requires = "ratio_max")]
    pub ratio_min: Option<f64>,
    #[arg(long, requires = "ratio_min")]
    pub ratio_max: Option<f64>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KlMethod {
    Bregman,
    Series,
    Taylor,
    Mc,
    Oracle,
}

#[derive(Debug, Clone, Args)]
pub struct KlArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_enum, default_value_t = KlMethod::Bregman)]
    pub method: KlMethod,
    #[arg(long, default_value_t = 10)]
    pub s: usize,
    #[arg(long, default_value_t = 1.0)]
    pub center: f64,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// Poisson: sum at least this far.
    #[arg(long)]
    pub x_max: Option<u64>,
    /// Gaussian: absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub quad_tol: f64,
    /// Draws per member if the Gaussian dimension forces a Monte Carlo fallback.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

impl Command {
    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Chi2(a) => &a.out,
            Command::Chik(a) => &a.out,
            Command::Fdiv(a) => &a.out,
            Command::Kl(a) => &a.out,
            Command::Mc(a) => &a.out,
            Command::Oracle(a) => &a.out,
            Command::PaperRepro(a) => a,
        }
    }
}
