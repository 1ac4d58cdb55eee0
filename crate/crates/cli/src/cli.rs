use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::OUT_ROOT_ENV;

#[derive(Debug, Parser)]
#[command(name = "geoqugan", version, about = "Quantum and classical GANs for K4 edge weights")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a dataset of normalized K4 edge weights from airport coordinates.
    Dataset(DatasetArgs),
    /// Train one or more models; one run directory per model and seed.
    Train(TrainArgs),
    /// Re-evaluate a finished run from its final checkpoint.
    Evaluate(EvaluateArgs),
    /// Combine finished runs into a table plus curve and histogram files.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Airport table (OpenFlights `airports.dat` layout).
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub source: Option<PathBuf>,
    /// Use bundled synthetic airports instead of a source file.
    #[arg(long)]
    pub synthetic: bool,
    /// Number of synthetic airports.
    #[arg(long, default_value_t = 7698)]
    pub synthetic_airports: usize,
    /// Number of quadruples to sample.
    #[arg(short, long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = geoqugan::dataset::MIN_EDGE_KM)]
    pub min_edge_km: f64,
    /// Output CSV; a `.provenance.json` sidecar is written next to it.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone, Default)]
pub struct TrainArgs {
    /// Model name(s), comma separated, or `all`.
    #[arg(short, long, value_delimiter = ',', required = true)]
    pub model: Vec<String>,
    /// Dataset CSV from the `dataset` command.
    #[arg(short, long)]
    pub data: PathBuf,
    /// Seed(s), comma separated; one run per seed.
    #[arg(long, value_delimiter = ',')]
    pub seed: Vec<u64>,
    /// JSON training config; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, env = OUT_ROOT_ENV, default_value = "runs")]
    pub out_root: PathBuf,
    /// Run directory name (single model and seed only).
    #[arg(long)]
    pub run_name: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Force the variance regularizer on or off.
    #[arg(long)]
    pub variance: Option<bool>,
    /// Force the scaling head on or off.
    #[arg(long)]
    pub scaling: Option<bool>,
    #[arg(long)]
    pub eval_every: Option<usize>,
    #[arg(long)]
    pub eval_samples: Option<usize>,
    #[arg(long)]
    pub final_eval_samples: Option<usize>,
    /// Comma-separated discriminator hidden widths.
    #[arg(long, value_delimiter = ',')]
    pub discriminator_hidden: Option<Vec<usize>>,
    /// Derive opposite-edge couplings from the training data.
    #[arg(long)]
    pub opposite_from_data: Option<bool>,
    /// Bootstrap resamples for the final confidence intervals.
    #[arg(long)]
    pub bootstrap_resamples: Option<usize>,
    /// Continue from a checkpoint instead of starting fresh.
    #[arg(long, conflicts_with = "config")]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Finished run directory.
    pub run: PathBuf,
    /// Sample count; defaults to the run's final evaluation size.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Seed for the evaluation draws; defaults to the run seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Compare against this dataset instead of the training one.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output JSON; defaults to `evaluation.json` in the run directory.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directories (or roots containing them).
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
}
