use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use summalign_core::segmentation::Distance;

/// Align match summaries to broadcasts, score key shots and evaluate summaries.
///
/// Relative paths are resolved against SUMMALIGN_DATA_DIR when it is set.
/// Every file written with --out gets a sibling <out>.manifest.json.
#[derive(Debug, Parser)]
#[command(name = "summalign", version)]
pub struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,

    /// Log verbosity (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    pub log: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a feature sequence into shots.
    Segment(SegmentArgs),
    /// Propose a broadcast source for every summary shot.
    Align(AlignArgs),
    /// Score predicted summaries against ground truth.
    Evaluate(EvaluateArgs),
    /// Decode per-frame predictions into a summary.
    Summarize(SummarizeArgs),
    /// Fit the reference scorer on one match.
    TrainRef(TrainArgs),
    /// Distribution of summary content over match phases.
    Stats(StatsArgs),
    /// Run the review service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SegmentMethod {
    Knn,
    Threshold,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DistanceArg {
    Euclidean,
    Cosine,
}

impl From<DistanceArg> for Distance {
    fn from(d: DistanceArg) -> Self {
        match d {
            DistanceArg::Euclidean => Distance::Euclidean,
            DistanceArg::Cosine => Distance::Cosine,
        }
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Feature file (.sfeat).
    #[arg(long)]
    pub features: PathBuf,
    /// Boundary method.
    #[arg(long, value_enum, default_value = "knn")]
    pub method: SegmentMethod,
    /// Neighbours per frame (knn).
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Shortest run of consecutive neighbours that counts as evidence (knn).
    #[arg(long, default_value_t = 2)]
    pub outlier_min_run: usize,
    /// Frame distance (knn).
    #[arg(long, value_enum, default_value = "euclidean")]
    pub distance: DistanceArg,
    /// Transition scores JSON (threshold).
    #[arg(long, required_if_eq("method", "threshold"))]
    pub scores: Option<PathBuf>,
    /// Overrides the threshold stored in the scores file.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Match id of the shot list; defaults to the feature file's source id.
    #[arg(long)]
    pub match_id: Option<String>,
    /// Output shot list; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Summary feature file (.sfeat).
    #[arg(long)]
    pub summary_features: PathBuf,
    /// Broadcast feature file (.sfeat).
    #[arg(long)]
    pub broadcast_features: PathBuf,
    /// Summary shots on the summary timeline (shot list JSON).
    #[arg(long)]
    pub shots: PathBuf,
    /// Match id of the proposals; defaults to the shot list's.
    #[arg(long)]
    pub match_id: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Frame,
    Shot,
    AtT,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predicted shot list or proposal file, or a directory of them.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth annotation, or a directory of them.
    #[arg(long)]
    pub truth: PathBuf,
    /// Metric family.
    #[arg(long, value_enum, default_value = "frame")]
    pub level: Level,
    /// IoU thresholds for shot level (repeatable). Without --iou and
    /// --tolerance the standard sweep is used.
    #[arg(long)]
    pub iou: Vec<f64>,
    /// Time tolerances in seconds for shot level (repeatable).
    #[arg(long)]
    pub tolerance: Vec<f64>,
    /// Emit a flat CSV table instead of JSON.
    #[arg(long)]
    pub csv: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Per-chunk scores and offsets JSON.
    #[arg(long)]
    pub scores: PathBuf,
    /// Broadcast features; when given, chunks are checked against its length.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// TOML settings file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Chunk length in seconds; overrides the config.
    #[arg(long)]
    pub chunk_s: Option<f64>,
    /// Minimum frame score for a proposal; overrides the config.
    #[arg(long)]
    pub score_threshold: Option<f64>,
    /// Keep overlapping proposals.
    #[arg(long)]
    pub no_nms: bool,
    /// Summary length budget in seconds.
    #[arg(long)]
    pub target_s: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Feature file (.sfeat).
    #[arg(long)]
    pub features: PathBuf,
    /// Ground-truth summary on the same timeline.
    #[arg(long)]
    pub truth: PathBuf,
    /// Seed for MixUp pairing and weights.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Full-batch gradient steps.
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    /// Learning rate.
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
    /// Weight of the regression loss.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Width of the positional code appended to each frame.
    #[arg(long, default_value_t = 0)]
    pub pe_dim: usize,
    /// Enables MixUp with Beta(alpha, beta) weights.
    #[arg(long)]
    pub mixup_alpha: Option<f64>,
    /// Defaults to alpha.
    #[arg(long)]
    pub mixup_beta: Option<f64>,
    /// Chunk length in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub chunk_s: f64,
    /// Also write the trained scorer's predictions for every chunk.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Directory of summary annotations.
    #[arg(long)]
    pub summaries: PathBuf,
    /// Directory of match records.
    #[arg(long)]
    pub matches: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// One subdirectory per match holding proposals.json.
    #[arg(long)]
    pub data: PathBuf,
    /// Port to listen on; 0 picks a free one.
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Static files for the review UI.
    #[arg(long)]
    pub ui: Option<PathBuf>,
}
