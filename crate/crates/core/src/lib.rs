//! Shot-level alignment of edited match summaries to full broadcasts, baseline
//! key-shot scoring math, and summary evaluation over precomputed frame features.

pub mod alignment;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod review;
pub mod segmentation;
pub mod summarization;

pub use alignment::{align_all, align_shot, average_features, AlignmentProposal, ProposalStatus};
pub use dataset::{FrameFeatureSequence, Interval, MatchRecord, Shot, SummaryAnnotation};
pub use error::{Error, Result};
pub use evaluation::FrameMetrics;
