//! Command-line pipeline driver.
//!
//! Every flag can also be set through a `STYLERANK_*` environment variable
//! or a `key = value` file passed with `--config`; flags win over the
//! environment, which wins over the file. Failures print a JSON error
//! object on stderr and exit nonzero.

mod commands;
mod config;

pub use config::parse_config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::dataset::Split;
use crate::error::Error;

#[derive(Debug, Parser)]
#[command(
    name = "stylerank",
    version,
    about = "Style-compatibility learning and furniture suggestion"
)]
pub struct Cli {
    /// `key = value` file supplying defaults for any flag.
    #[arg(long, global = true, env = "STYLERANK_CONFIG")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus: annotations, features and a furniture registry.
    Synth(SynthArgs),
    /// Read expert annotations, assign splits and write a dataset manifest.
    Ingest(IngestArgs),
    /// Sample comparison labels from a dataset manifest.
    GenComparisons(GenComparisonsArgs),
    /// Train a style head on comparison labels.
    Train(TrainArgs),
    /// Grid-search lambda, threshold and comparison count.
    GridSearch(GridSearchArgs),
    /// Write style embeddings for every image in a feature file.
    Embed(EmbedArgs),
    /// Precompute the furniture distance index.
    BuildIndex(BuildIndexArgs),
    /// Evaluate a trained head on a split of the dataset.
    Eval(EvalArgs),
    /// Print ranked suggestions as `rank,id,distance` lines.
    Suggest(SuggestArgs),
    /// Run the HTTP suggestion service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, env = "STYLERANK_OUT_DIR")]
    pub out_dir: PathBuf,
    #[arg(long, env = "STYLERANK_SEED")]
    pub seed: u64,
    #[arg(long, env = "STYLERANK_IMAGES", default_value_t = 2000)]
    pub images: usize,
    #[arg(long, env = "STYLERANK_EXPERTS", default_value_t = 10)]
    pub experts: usize,
    #[arg(long, env = "STYLERANK_FEATURE_DIM", default_value_t = 64)]
    pub feature_dim: usize,
    #[arg(long, env = "STYLERANK_CONCENTRATION", default_value_t = 0.5)]
    pub concentration: f64,
    #[arg(long, env = "STYLERANK_EXPERT_NOISE", default_value_t = 0.1)]
    pub expert_noise: f64,
    #[arg(long, env = "STYLERANK_FEATURE_NOISE", default_value_t = 0.05)]
    pub feature_noise: f64,
    /// Furniture items in the generated registry.
    #[arg(long, env = "STYLERANK_ITEMS", default_value_t = 200)]
    pub items: usize,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// JSON Lines of `{image_id, expert_id, style}`.
    #[arg(long, env = "STYLERANK_ANNOTATIONS")]
    pub annotations: PathBuf,
    /// Style vocabulary, comma separated.
    #[arg(long, env = "STYLERANK_STYLES", value_delimiter = ',')]
    pub styles: Vec<String>,
    /// Train, validation and test fractions.
    #[arg(long, env = "STYLERANK_FRACTIONS", value_delimiter = ',', default_values_t = [0.8, 0.1, 0.1])]
    pub fractions: Vec<f64>,
    #[arg(long, env = "STYLERANK_SEED")]
    pub seed: u64,
    #[arg(long, env = "STYLERANK_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenComparisonsArgs {
    #[arg(long, env = "STYLERANK_DATASET")]
    pub dataset: PathBuf,
    /// Minimum label-count margin.
    #[arg(long, env = "STYLERANK_T", default_value_t = crate::comparisons::DEFAULT_THRESHOLD)]
    pub t: u32,
    /// Number of comparisons to draw.
    #[arg(long, env = "STYLERANK_N")]
    pub n: usize,
    #[arg(long, env = "STYLERANK_SPLIT", default_value_t = Split::Train)]
    pub split: Split,
    #[arg(long, env = "STYLERANK_SEED")]
    pub seed: u64,
    #[arg(long, env = "STYLERANK_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainingFlags {
    #[arg(long, env = "STYLERANK_LEARNING_RATE", default_value_t = 1e-4)]
    pub learning_rate: f64,
    #[arg(long, env = "STYLERANK_BATCH_SIZE", default_value_t = 256)]
    pub batch_size: usize,
    #[arg(long, env = "STYLERANK_EPOCHS", default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, env = "STYLERANK_PATIENCE", default_value_t = 10)]
    pub patience: usize,
    #[arg(long, env = "STYLERANK_HIDDEN", default_value_t = crate::stylenet::DEFAULT_HIDDEN)]
    pub hidden: usize,
    /// Score comparisons on logits instead of softmax probabilities.
    #[arg(long, env = "STYLERANK_LOGIT_SCORES")]
    pub logit_scores: bool,
    /// Per-style label thresholds for the clean validation set.
    #[arg(long, env = "STYLERANK_L_MIN", value_delimiter = ',', default_values_t = [10, 8, 7, 7])]
    pub l_min: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, env = "STYLERANK_DATASET")]
    pub dataset: PathBuf,
    #[arg(long, env = "STYLERANK_FEATURES")]
    pub features: PathBuf,
    #[arg(long, env = "STYLERANK_COMPARISONS")]
    pub comparisons: PathBuf,
    #[arg(long, env = "STYLERANK_LAMBDA", default_value_t = 0.0)]
    pub lambda: f64,
    #[command(flatten)]
    pub training: TrainingFlags,
    #[arg(long, env = "STYLERANK_SEED")]
    pub seed: u64,
    #[arg(long, env = "STYLERANK_OUT")]
    pub out: PathBuf,
    /// Per-epoch metrics as JSON Lines.
    #[arg(long, env = "STYLERANK_METRICS")]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridSearchArgs {
    #[arg(long, env = "STYLERANK_DATASET")]
    pub dataset: PathBuf,
    #[arg(long, env = "STYLERANK_FEATURES")]
    pub features: PathBuf,
    #[arg(long, env = "STYLERANK_LAMBDAS", value_delimiter = ',', default_values_t = [0.002, 0.0002, 0.00002])]
    pub lambdas: Vec<f64>,
    #[arg(long, env = "STYLERANK_THRESHOLDS", value_delimiter = ',', default_values_t = [1, 2, 3])]
    pub thresholds: Vec<u32>,
    /// Comparison counts to try.
    #[arg(long, env = "STYLERANK_COUNTS", value_delimiter = ',', required = true)]
    pub counts: Vec<usize>,
    #[command(flatten)]
    pub training: TrainingFlags,
    #[arg(long, env = "STYLERANK_SEED")]
    pub seed: u64,
    /// Checkpoint of the best cell.
    #[arg(long, env = "STYLERANK_OUT")]
    pub out: PathBuf,
    /// Every cell with its validation accuracy, as JSON.
    #[arg(long, env = "STYLERANK_REPORT")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long, env = "STYLERANK_CHECKPOINT")]
    pub checkpoint: PathBuf,
    #[arg(long, env = "STYLERANK_FEATURES")]
    pub features: PathBuf,
    #[arg(long, env = "STYLERANK_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildIndexArgs {
    #[arg(long, env = "STYLERANK_REGISTRY")]
    pub registry: PathBuf,
    #[arg(long, env = "STYLERANK_EMBEDDINGS")]
    pub embeddings: PathBuf,
    /// Index file; its manifest is written next to it with a `.json` suffix.
    #[arg(long, env = "STYLERANK_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, env = "STYLERANK_CHECKPOINT")]
    pub checkpoint: PathBuf,
    #[arg(long, env = "STYLERANK_DATASET")]
    pub dataset: PathBuf,
    #[arg(long, env = "STYLERANK_FEATURES")]
    pub features: PathBuf,
    #[arg(long, env = "STYLERANK_SPLIT", default_value_t = Split::Test)]
    pub split: Split,
    #[arg(long, env = "STYLERANK_L_MIN", value_delimiter = ',', default_values_t = [10, 8, 7, 7])]
    pub l_min: Vec<u32>,
    /// Rank cutoff for recall, mAP and NDCG.
    #[arg(long, env = "STYLERANK_CUTOFF", default_value_t = 5)]
    pub cutoff: usize,
    #[arg(long, env = "STYLERANK_OUT")]
    pub out: PathBuf,
    #[arg(long, env = "STYLERANK_CSV")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SuggestArgs {
    #[arg(long, env = "STYLERANK_INDEX")]
    pub index: PathBuf,
    /// Single seed item.
    #[arg(long, conflicts_with = "scene", required_unless_present = "scene")]
    pub seed_item: Option<String>,
    /// Scene members for a multi-seed query, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub scene: Vec<String>,
    #[arg(long)]
    pub class: String,
    #[arg(long, env = "STYLERANK_K", default_value_t = crate::compat::DEFAULT_K)]
    pub k: usize,
    /// Refuse to answer if the index was built from another registry state.
    #[arg(long, env = "STYLERANK_REGISTRY")]
    pub registry: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "STYLERANK_INDEX")]
    pub index: PathBuf,
    #[arg(long, env = "STYLERANK_ADDR", default_value = "127.0.0.1:8080")]
    pub addr: String,
    /// Directory for saved scenes; in memory when absent.
    #[arg(long, env = "STYLERANK_SCENES_DIR")]
    pub scenes_dir: Option<PathBuf>,
    #[arg(long, env = "STYLERANK_REGISTRY")]
    pub registry: Option<PathBuf>,
}

fn report(e: &Error) {
    let body = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    eprintln!("{body}");
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let args = match config::apply_config::<Cli>(args) {
        Ok(a) => a,
        Err(e) => {
            report(&e);
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("STYLERANK_LOG")
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .try_init();
    match commands::run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            report(&e);
            1
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os().collect())
}
