use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "refcmfs",
    version,
    about = "Robust sparse fuzzy C-means experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one algorithm once and print a JSON run report.
    Fit(FitArgs),
    /// Run a (k_tilde, r) grid over several seeds and print an aggregated CSV table.
    Sweep(SweepArgs),
    /// Time a fixed number of iterations on synthetic data of growing size.
    Bench(BenchArgs),
    /// Print the per-iteration objective as two columns.
    Trace(TraceArgs),
    /// Write a synthetic Gaussian blob dataset as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeArg {
    None,
    Minmax,
    Zscore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitArg {
    Kmeanspp,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Input CSV file.
    #[arg(long)]
    pub data: PathBuf,
    /// Label column: a 0-based index, `last`, or `none`.
    #[arg(long, default_value = "none")]
    pub labels_col: String,
    /// Skip the first CSV line.
    #[arg(long)]
    pub header: bool,
    #[arg(long, value_enum, default_value = "minmax")]
    pub normalize: NormalizeArg,
    /// kmeans, fcm, sim-refcmfs or refcmfs.
    #[arg(long, default_value = "refcmfs")]
    pub algo: String,
    /// Number of clusters.
    #[arg(long)]
    pub c: usize,
    /// Nonzero memberships per sample (refcmfs, sim-refcmfs).
    #[arg(long)]
    pub k_tilde: Option<usize>,
    /// Fuzzifier (fcm, refcmfs, sim-refcmfs).
    #[arg(long, default_value_t = 1.1)]
    pub r: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value = "kmeanspp")]
    pub init: InitArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also write the paired JSON run report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated k_tilde values; defaults to 2..c-1.
    #[arg(long, value_delimiter = ',')]
    pub k_tilde_grid: Option<Vec<usize>>,
    /// Comma-separated fuzzifier values.
    #[arg(long, value_delimiter = ',', default_value = "1.1,1.2,1.3,1.4,1.5")]
    pub r_grid: Vec<f64>,
    /// Runs per grid point, with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Write one CSV row per individual run here.
    #[arg(long)]
    pub runs_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated ascending sample counts.
    #[arg(long, value_delimiter = ',', default_value = "10000,20000,40000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 32)]
    pub d: usize,
    #[arg(long, default_value_t = 20)]
    pub c: usize,
    #[arg(long, default_value_t = 3)]
    pub k_tilde: usize,
    #[arg(long, default_value_t = 1.1)]
    pub r: f64,
    /// Iterations timed per size.
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    /// Timing repeats per size; the fastest is kept.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value = "refcmfs")]
    pub algo: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Cluster centers, `;`-separated, coordinates comma-separated: `0,0;5,0`.
    #[arg(long)]
    pub centers: String,
    #[arg(long, default_value_t = 1.0)]
    pub stdev: f64,
    /// Points per cluster.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub outliers: usize,
    #[arg(long, default_value_t = 10.0)]
    pub box_scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
