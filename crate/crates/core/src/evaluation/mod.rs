//! Summary evaluation: frame-level overlap, shot-level matching, duration
//! constrained (@T) selection and match-phase statistics.

mod at_t;
mod phases;
mod report;
mod shot;

pub use at_t::{at_t_metrics, at_t_select, at_t_select_shots};
pub use phases::{phase_distribution, weighted_phase_average, PhaseDistribution};
pub use report::{default_shot_sweep, EvalLevel, EvalReport, GamePair, GameRow, MacroRow};
pub use shot::{shot_level_metrics, ShotMatchConfig, IOU_GRID, TOLERANCE_GRID_S};

use serde::{Deserialize, Serialize};

use crate::dataset::{common_fps, intersection_frames, normalize_intervals, total_frames, Interval};
use crate::error::{Error, Result};

/// Precision/recall bundle over frames (or shots, for shot-level matching).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl FrameMetrics {
    /// Both sets empty counts as perfect agreement; any other zero
    /// denominator yields 0.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        if tp + fp + fn_ == 0 {
            return FrameMetrics {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
                iou: 1.0,
                tp,
                fp,
                fn_,
            };
        }
        let ratio = |num: u64, den: u64| if den > 0 { num as f64 / den as f64 } else { 0.0 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        FrameMetrics {
            precision,
            recall,
            f1,
            iou: ratio(tp, tp + fp + fn_),
            tp,
            fp,
            fn_,
        }
    }

    pub fn vacuous(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }
}

fn shared_fps(a: &[Interval], b: &[Interval]) -> Result<()> {
    if let (Some(x), Some(y)) = (common_fps(a)?, common_fps(b)?) {
        if x != y {
            return Err(Error::Unit(x, y));
        }
    }
    Ok(())
}

/// Frame-level precision, recall, F1 and IoU between two interval sets.
///
/// Inputs are normalized internally, so order and overlap within a set do
/// not matter.
pub fn frame_metrics(predicted: &[Interval], truth: &[Interval]) -> Result<FrameMetrics> {
    shared_fps(predicted, truth)?;
    let p = normalize_intervals(predicted)?;
    let t = normalize_intervals(truth)?;
    let tp = intersection_frames(&p, &t) as u64;
    let fp = total_frames(&p) as u64 - tp;
    let fn_ = total_frames(&t) as u64 - tp;
    Ok(FrameMetrics::from_counts(tp, fp, fn_))
}

/// Intersection over union of two intervals, in frames.
pub fn interval_iou(a: &Interval, b: &Interval) -> f64 {
    let inter = a.overlap(b);
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Mean of per-game metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
    pub games: usize,
}

pub fn macro_average<'a>(per_game: impl IntoIterator<Item = &'a FrameMetrics>) -> MacroMetrics {
    let mut acc = MacroMetrics {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
        iou: 0.0,
        games: 0,
    };
    for m in per_game {
        acc.precision += m.precision;
        acc.recall += m.recall;
        acc.f1 += m.f1;
        acc.iou += m.iou;
        acc.games += 1;
    }
    if acc.games > 0 {
        let n = acc.games as f64;
        acc.precision /= n;
        acc.recall /= n;
        acc.f1 /= n;
        acc.iou /= n;
    }
    acc
}
