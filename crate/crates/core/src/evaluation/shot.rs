use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{interval_iou, shared_fps, FrameMetrics};
use crate::dataset::{Interval, Shot};
use crate::error::{Error, Result};

/// IoU thresholds of the shot-level sweep.
pub const IOU_GRID: [f64; 10] = [0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95];

/// Time tolerances (seconds) of the shot-level sweep.
pub const TOLERANCE_GRID_S: [f64; 10] = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotMatchConfig {
    pub iou_threshold: f64,
    pub tolerance_s: f64,
}

impl ShotMatchConfig {
    pub fn new(iou_threshold: f64, tolerance_s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&iou_threshold) {
            return Err(Error::Input(format!("IoU threshold {iou_threshold} outside [0, 1]")));
        }
        if !(tolerance_s >= 0.0 && tolerance_s.is_finite()) {
            return Err(Error::Input(format!("tolerance {tolerance_s} must be non-negative")));
        }
        Ok(ShotMatchConfig {
            iou_threshold,
            tolerance_s,
        })
    }
}

/// Frames separating two disjoint intervals (0 when they touch or overlap).
fn gap(a: &Interval, b: &Interval) -> usize {
    a.start().saturating_sub(b.end()).max(b.start().saturating_sub(a.end()))
}

struct Candidate {
    iou: f64,
    gap: usize,
    gt: usize,
    pred: usize,
}

/// One-to-one greedy shot matching.
///
/// Pairs are visited by IoU descending, then by temporal gap ascending, then
/// by ground-truth order and predicted order (both by start time). A pair
/// matches when its IoU exceeds the threshold or, with a positive tolerance,
/// when the prediction overlaps the ground-truth shot dilated by the
/// tolerance on both sides. Counts are reported as shot-level tp/fp/fn.
pub fn shot_level_metrics(predicted: &[Shot], truth: &[Interval], cfg: &ShotMatchConfig) -> Result<FrameMetrics> {
    let cfg = ShotMatchConfig::new(cfg.iou_threshold, cfg.tolerance_s)?;
    let mut preds: Vec<Interval> = predicted.iter().map(|s| s.interval).collect();
    let mut gts = truth.to_vec();
    shared_fps(&preds, &gts)?;
    preds.sort_by_key(|i| (i.start(), i.end()));
    gts.sort_by_key(|i| (i.start(), i.end()));

    let dilation = gts.first().map_or(0.0, |g| cfg.tolerance_s * g.fps());
    let mut candidates = Vec::new();
    for (gi, g) in gts.iter().enumerate() {
        for (pi, p) in preds.iter().enumerate() {
            let iou = interval_iou(p, g);
            let by_iou = iou > cfg.iou_threshold;
            let d = gap(p, g);
            let by_tolerance = cfg.tolerance_s > 0.0 && (iou > 0.0 || (d as f64) < dilation);
            if by_iou || by_tolerance {
                candidates.push(Candidate {
                    iou,
                    gap: d,
                    gt: gi,
                    pred: pi,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.iou
            .partial_cmp(&a.iou)
            .unwrap_or(Ordering::Equal)
            .then(a.gap.cmp(&b.gap))
            .then(a.gt.cmp(&b.gt))
            .then(a.pred.cmp(&b.pred))
    });

    let mut gt_used = vec![false; gts.len()];
    let mut pred_used = vec![false; preds.len()];
    let mut matches = 0u64;
    for c in candidates {
        if !gt_used[c.gt] && !pred_used[c.pred] {
            gt_used[c.gt] = true;
            pred_used[c.pred] = true;
            matches += 1;
        }
    }
    Ok(FrameMetrics::from_counts(
        matches,
        preds.len() as u64 - matches,
        gts.len() as u64 - matches,
    ))
}
