//! Key-shot scoring math: chunking, per-frame targets, losses, boundary
//! decoding, suppression and a small reference scorer.

mod chunks;
mod config;
mod encoding;
mod loss;
mod mixup;
mod nms;
mod predictions;
mod scorer;
mod targets;

pub use chunks::{make_chunks, ChunkSpec};
pub use config::SummarizeConfig;
pub use encoding::sinusoidal_pe;
pub use loss::{bce, loss_cls, loss_reg, loss_total, smooth_l1, smooth_l1_grad, LossConfig, EPS};
pub use mixup::{draw_weight, mix_with_weight, mixup, ChunkSample};
pub use nms::nms;
pub use predictions::{ingest_scores, ingest_scores_str, ChunkPredictions, PredictionsFile};
pub use scorer::{
    chunk_samples, infer, loss_and_gradient, train, LossBreakdown, MixupConfig, ScorerWeights, TrainConfig,
    TrainReport,
};
pub use targets::{
    decode_boundaries, encode_targets, Decoded, FramePredictions, FrameTargets, DEFAULT_SCORE_THRESHOLD,
    IGNORE_OFFSET,
};

use crate::dataset::Shot;
use crate::error::Result;

/// Decodes every chunk onto the match timeline and, when enabled, resolves
/// overlapping proposals with NMS. Output is sorted by start.
pub fn summarize(preds: &PredictionsFile, cfg: &SummarizeConfig) -> Result<Decoded> {
    let mut all = Decoded::default();
    for chunk in &preds.chunks {
        let d = decode_boundaries(&chunk.preds, chunk.origin_frame, preds.fps, cfg.score_threshold)?;
        all.shots.extend(d.shots);
        all.dropped += d.dropped;
    }
    if cfg.nms {
        all.shots = nms(&all.shots)?;
    } else {
        all.shots
            .sort_by_key(|s: &Shot| (s.interval.start(), s.interval.end()));
    }
    Ok(all)
}
