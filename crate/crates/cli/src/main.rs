//! `secleds` command-line tool.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for input errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use secleds::model::{InitMode, ModelParams, DEFAULT_BATCH_FACTOR, DEFAULT_LAMBDA};
use secleds::streamgen::{DriftIndex, OrderKind};
use secleds::{DistanceFn, Error};

#[derive(Parser, Debug)]
#[command(name = "secleds", version, about = "Streaming k-medoids with multiple medoids per cluster")]
struct Cli {
    /// Run trials one after another instead of in parallel.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic dataset as JSONL.
    Generate {
        #[command(subcommand)]
        dataset: Dataset,
    },
    /// Cluster a JSONL stream over one or more trials.
    Cluster(ClusterArgs),
    /// Score saved assignments against item labels.
    Evaluate(EvaluateArgs),
    /// Sweep stream length and medoids per cluster.
    Bench(BenchArgs),
    /// Stream items through the model and persist periodic snapshots.
    Sample(SampleArgs),
}

#[derive(Subcommand, Debug, Clone)]
enum Dataset {
    /// Two-dimensional Gaussian blobs.
    Blobs {
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Per-class standard deviations; a single value applies to all classes.
        #[arg(long, value_delimiter = ',', default_value = "1.0")]
        stds: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Univariate sine curves from the reference classes.
    Sine(SineArgs),
    /// Sine curves with incremental phase drift (drift 0.05 by default).
    SineDrifted(SineArgs),
    /// Sliding windows over synthetic per-host netflow byte volumes.
    Netflow {
        #[arg(long, default_value_t = 16)]
        hosts: usize,
        #[arg(long, default_value_t = 10)]
        botnet_hosts: usize,
        #[arg(long, default_value_t = 300)]
        flows_per_host: usize,
        #[arg(long, default_value_t = 100)]
        w: usize,
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct SineArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Number of reference classes to use, 1 to 4.
    #[arg(long, default_value_t = 4)]
    classes: usize,
    #[arg(long, default_value_t = 100)]
    w: usize,
    /// Phase shift per curve index.
    #[arg(long)]
    drift: Option<f64>,
    #[arg(long, value_enum, default_value_t = DriftIndexArg::Class)]
    drift_index: DriftIndexArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum DriftIndexArg {
    Class,
    Stream,
}

impl From<DriftIndexArg> for DriftIndex {
    fn from(a: DriftIndexArg) -> Self {
        match a {
            DriftIndexArg::Class => DriftIndex::Class,
            DriftIndexArg::Stream => DriftIndex::Stream,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum InitArg {
    Sampled,
    Random,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum DistanceArg {
    Euclidean,
    Dtw,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum OrderArg {
    /// Reshuffle the stream for every trial.
    Shuffled,
    /// Keep arrival order.
    Time,
    /// Group items by label.
    Class,
}

impl From<OrderArg> for OrderKind {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Shuffled => OrderKind::Shuffled,
            OrderArg::Time => OrderKind::TimeOrdered,
            OrderArg::Class => OrderKind::ClassOrdered,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    p: usize,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, value_enum, default_value_t = DistanceArg::Euclidean)]
    distance: DistanceArg,
    /// Sakoe-Chiba band for DTW.
    #[arg(long)]
    dtw_band: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::Sampled)]
    init: InitArg,
    #[arg(long, default_value_t = DEFAULT_BATCH_FACTOR)]
    batch_factor: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, Error> {
        let distance = match (self.distance, self.dtw_band) {
            (DistanceArg::Euclidean, None) => DistanceFn::EUCLIDEAN,
            (DistanceArg::Euclidean, Some(_)) => {
                return Err(Error::BadConfig("--dtw-band requires --distance dtw".into()))
            }
            (DistanceArg::Dtw, None) => DistanceFn::DTW,
            (DistanceArg::Dtw, Some(b)) => DistanceFn::dtw_banded(b),
        };
        let params = ModelParams {
            lambda: self.lambda,
            distance,
            init_mode: match self.init {
                InitArg::Sampled => InitMode::Sampled,
                InitArg::Random => InitMode::Random,
            },
            seed: self.seed,
            ..ModelParams::new(self.k, self.p)
        };
        params.validate()?;
        if !(self.batch_factor.is_finite() && self.batch_factor >= 1.0) {
            return Err(Error::BadConfig("--batch-factor must be >= 1".into()));
        }
        Ok(params)
    }
}

#[derive(Args, Debug, Clone)]
struct ClusterArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = OrderArg::Shuffled)]
    order: OrderArg,
    /// Input items (JSONL).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Write per-trial vote traces.
    #[arg(long)]
    trace_votes: bool,
    /// Write per-trial cumulative F1 with this checkpoint interval.
    #[arg(long)]
    cumulative_every: Option<usize>,
    #[command(flatten)]
    traffic: TrafficArgs,
}

#[derive(Args, Debug, Clone)]
struct TrafficArgs {
    /// Netflows per sequence for the bandwidth estimate (default: sequence length).
    #[arg(long)]
    flows_per_sequence: Option<f64>,
    #[arg(long, default_value_t = 55.2)]
    packets_per_flow: f64,
    #[arg(long, default_value_t = 1500.0)]
    bytes_per_packet: f64,
}

#[derive(Args, Debug, Clone)]
struct EvaluateArgs {
    /// Labeled items (JSONL).
    #[arg(long)]
    items: PathBuf,
    /// Assignments CSV.
    #[arg(long)]
    assignments: PathBuf,
    /// Metrics JSON destination (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum BenchData {
    Blobs,
    Sine,
    SineDrifted,
}

#[derive(Args, Debug, Clone)]
struct BenchArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Items to sweep over; prefixes of this file are used for each n.
    #[arg(long = "in", conflicts_with = "dataset")]
    input: Option<PathBuf>,
    /// Generated dataset, when no input file is given.
    #[arg(long, value_enum, default_value_t = BenchData::Sine)]
    dataset: BenchData,
    #[arg(long, value_delimiter = ',', default_value = "2000,4000,8000")]
    ns: Vec<usize>,
    /// Medoids per cluster to sweep (default: --p).
    #[arg(long, value_delimiter = ',')]
    ps: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = OrderArg::Shuffled)]
    order: OrderArg,
    /// Also run exact PAM on up to --oracle-max items of each stream.
    #[arg(long)]
    with_oracle: bool,
    #[arg(long, default_value_t = 1000)]
    oracle_max: usize,
    /// CSV destination (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "in")]
    input: PathBuf,
    /// Snapshot interval in items.
    #[arg(long)]
    every: usize,
    #[arg(long)]
    max_snapshots: Option<usize>,
    /// Snapshot JSONL destination.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    traffic: TrafficArgs,
}

/// Error with its process exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BadConfig(_) => 2,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        secleds::Execution::Sequential
    } else {
        secleds::Execution::best_available()
    };
    let result = match cli.command {
        Command::Generate { dataset } => commands::generate(dataset),
        Command::Cluster(a) => commands::cluster(a, exec),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Bench(a) => commands::bench(a, exec),
        Command::Sample(a) => commands::sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
