use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "acg", version, about = "Assortative configuration graphs")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample graphs from a parameter file.
    Generate(GenerateArgs),
    /// Exact small-E wiring combinatorics.
    #[command(subcommand)]
    Exact(ExactCommand),
    /// Critical points and the Laplace approximation.
    #[command(subcommand)]
    Asymptotics(AsymptoticsCommand),
    /// Configuration probabilities and counts.
    #[command(subcommand)]
    Configs(ConfigsCommand),
    /// Monte Carlo validation suites.
    Validate(ValidateArgs),
    /// Marginals, mean degree, self-loop rate and consistency of a parameter file.
    Describe(DescribeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamsArg {
    /// Parameter JSON: {"K": int, "P": [[...]], "Q": [[...]] | "independent"}.
    #[arg(long)]
    pub params: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OutArg {
    /// Output directory, created if absent.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    /// RNG seed; falls back to ACG_SEED, then to a random value.
    #[arg(long, env = "ACG_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    /// Number of nodes.
    #[arg(long)]
    pub n: usize,
    /// Clipping exponent: draws with |D| > N^(1/2+delta) are rejected.
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Number of independent graphs; sample s uses RNG stream s.
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_redraws: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Args)]
pub struct ExactCommon {
    #[command(flatten)]
    pub params: ParamsArg,
    /// Stub margins `e⁻_1,..,e⁻_K:e⁺_1,..,e⁺_K`.
    #[arg(long)]
    pub margins: String,
    #[arg(long, default_value_t = 60)]
    pub max_edges: u64,
    #[arg(long, default_value_t = 5_000_000)]
    pub max_tables: u64,
    /// Print the full JSON result instead of a bare number.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum ExactCommand {
    /// Partition functions Z_0 and C.
    Partition(ExactCommon),
    /// E[e_kj | e].
    Mean(ExactMomentArgs),
    /// Var[e_kj | e].
    Var(ExactMomentArgs),
    /// Probability that the first edges have the given types.
    Joint(ExactJointArgs),
    /// Brute-force permutation-pair enumeration (E <= 7).
    Oracle(ExactOracleArgs),
}

#[derive(Debug, Args)]
pub struct ExactMomentArgs {
    #[command(flatten)]
    pub common: ExactCommon,
    /// Edge type `k,j`.
    #[arg(long = "type")]
    pub edge_type: String,
}

#[derive(Debug, Args)]
pub struct ExactJointArgs {
    #[command(flatten)]
    pub common: ExactCommon,
    /// Edge types `k,j;k,j;...` in wiring order.
    #[arg(long)]
    pub types: String,
}

#[derive(Debug, Args)]
pub struct ExactOracleArgs {
    #[command(flatten)]
    pub common: ExactCommon,
    /// Length of the edge-type prefix to tally.
    #[arg(long, default_value_t = 1)]
    pub first_m: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    /// Integer stub margins `e⁻:e⁺`, normalised by E.
    #[arg(long, conflicts_with = "x")]
    pub margins: Option<String>,
    /// Normalised margins `x⁻:x⁺`; default is (Q⁻, Q⁺).
    #[arg(long)]
    pub x: Option<String>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum AsymptoticsCommand {
    /// Gauge-fixed minimiser of H(.; x).
    CriticalPoint(PointArgs),
    /// Limiting edge-type frequencies at x.
    EdgeMean(EdgeMeanArgs),
    /// Exact I(m e) against its Laplace approximation for several m.
    LaplaceCheck(LaplaceCheckArgs),
}

#[derive(Debug, Args)]
pub struct EdgeMeanArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Edge type `k,j`; all types when absent.
    #[arg(long = "type")]
    pub edge_type: Option<String>,
}

#[derive(Debug, Args)]
pub struct LaplaceCheckArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    #[arg(long)]
    pub margins: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![5u64, 10, 20])]
    pub scales: Vec<u64>,
    #[arg(long, default_value_t = 5_000_000)]
    pub max_tables: u64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum ConfigsCommand {
    /// Limiting probabilities of a configuration.
    Predict(ConfigPredictArgs),
    /// Embeddings of a configuration in sampled graphs.
    Count(ConfigCountArgs),
}

#[derive(Debug, Args)]
pub struct ConfigPredictArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    /// Configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ConfigCountArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    NodeLln,
    EdgeLln,
    FirstEdges,
    SelfLoops,
    Assortativity,
    All,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1000usize, 10000])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    /// Prefix length for the first-edges suite.
    #[arg(long, default_value_t = 2)]
    pub first_l: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct DescribeArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    #[command(flatten)]
    pub out: OutArg,
}
