//! Summary-to-broadcast shot alignment.
//!
//! Each summary shot is reduced to the mean of its frame features and compared
//! with the mean of every same-length broadcast window (stride 1). The window
//! with the smallest Euclidean distance is proposed as the shot's source.
//! Window means come from per-column prefix sums, so a shot costs
//! `O(N_b · dim)` regardless of its length.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{FrameFeatureSequence, Interval};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProposalStatus {
    Proposed,
    Accepted,
    Adjusted,
    Rejected,
}

impl ProposalStatus {
    pub fn is_reviewed(self) -> bool {
        self != ProposalStatus::Proposed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentProposal {
    pub shot_index: usize,
    pub summary_interval: Interval,
    /// Same length as `summary_interval`, on the broadcast timeline.
    pub broadcast_interval: Interval,
    /// Distance between the shot mean and the window mean. `f64::MAX` for
    /// placeholders of shots that could not be aligned.
    pub distance: f64,
    pub status: ProposalStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjusted_interval: Option<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl AlignmentProposal {
    /// The interval a reviewer settled on, if the proposal survives review.
    pub fn final_interval(&self) -> Option<Interval> {
        match self.status {
            ProposalStatus::Rejected => None,
            ProposalStatus::Adjusted => self.adjusted_interval,
            _ => Some(self.broadcast_interval),
        }
    }
}

fn check_window(features: &FrameFeatureSequence, window: &Interval) -> Result<()> {
    if window.end() > features.len() {
        return Err(Error::Input(format!(
            "window {window} exceeds sequence of {} frames",
            features.len()
        )));
    }
    Ok(())
}

/// Elementwise mean of the rows inside `window`.
pub fn average_features(features: &FrameFeatureSequence, window: &Interval) -> Result<Vec<f64>> {
    check_window(features, window)?;
    let mut acc = vec![0.0f64; features.dim()];
    for k in window.start()..window.end() {
        for (a, v) in acc.iter_mut().zip(features.row(k)) {
            *a += *v as f64;
        }
    }
    let n = window.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Column-wise prefix sums: row `j` holds the sum of frames `0..j`.
#[derive(Debug, Clone)]
pub struct PrefixSums {
    dim: usize,
    frames: usize,
    sums: Vec<f64>,
}

impl PrefixSums {
    pub fn new(features: &FrameFeatureSequence) -> Self {
        let dim = features.dim();
        let frames = features.len();
        let mut sums = vec![0.0f64; (frames + 1) * dim];
        for (k, row) in features.rows().enumerate() {
            let (prev, next) = sums[k * dim..(k + 2) * dim].split_at_mut(dim);
            for ((n, p), v) in next.iter_mut().zip(prev.iter()).zip(row) {
                *n = *p + *v as f64;
            }
        }
        PrefixSums { dim, frames, sums }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.sums[j * self.dim..(j + 1) * self.dim]
    }

    /// Distance between `target` and the mean of frames `[start, start + len)`.
    pub fn window_distance(&self, target: &[f64], start: usize, len: usize) -> f64 {
        let inv = 1.0 / len as f64;
        self.row(start + len)
            .iter()
            .zip(self.row(start))
            .zip(target)
            .map(|((hi, lo), t)| {
                let d = t - (hi - lo) * inv;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Smallest-distance window start (earliest on ties) and its distance.
    pub fn best_window(&self, target: &[f64], len: usize) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for j in 0..=self.frames - len {
            let d = self.window_distance(target, j, len);
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    }
}

fn check_shot(summary: &FrameFeatureSequence, shot: &Interval, broadcast_frames: usize, broadcast_dim: usize) -> Result<()> {
    if summary.dim() != broadcast_dim {
        return Err(Error::Dim(summary.dim(), broadcast_dim));
    }
    check_window(summary, shot)?;
    if shot.len() > broadcast_frames {
        return Err(Error::Input(format!(
            "shot of {} frames is longer than the broadcast ({broadcast_frames} frames)",
            shot.len()
        )));
    }
    Ok(())
}

fn align_with_prefix(
    shot_index: usize,
    summary: &FrameFeatureSequence,
    shot: &Interval,
    prefix: &PrefixSums,
    broadcast_fps: f64,
) -> Result<AlignmentProposal> {
    check_shot(summary, shot, prefix.frames(), prefix.dim())?;
    let target = average_features(summary, shot)?;
    let (j, distance) = prefix.best_window(&target, shot.len());
    Ok(AlignmentProposal {
        shot_index,
        summary_interval: *shot,
        broadcast_interval: Interval::new(j, j + shot.len(), broadcast_fps)?,
        distance,
        status: ProposalStatus::Proposed,
        adjusted_interval: None,
        failure: None,
    })
}

/// Finds the broadcast window whose mean feature is closest to the shot's.
pub fn align_shot(
    summary: &FrameFeatureSequence,
    shot: &Interval,
    broadcast: &FrameFeatureSequence,
) -> Result<AlignmentProposal> {
    if summary.dim() != broadcast.dim() {
        return Err(Error::Dim(summary.dim(), broadcast.dim()));
    }
    let prefix = PrefixSums::new(broadcast);
    align_with_prefix(0, summary, shot, &prefix, broadcast.fps())
}

/// Aligns every shot independently; output order follows input order.
///
/// A shot that cannot be aligned yields a rejected placeholder carrying the
/// error message instead of failing the batch.
pub fn align_all(
    shots: &[Interval],
    summary: &FrameFeatureSequence,
    broadcast: &FrameFeatureSequence,
) -> Vec<AlignmentProposal> {
    let prefix = PrefixSums::new(broadcast);
    let fps = broadcast.fps();
    shots
        .par_iter()
        .enumerate()
        .map(|(i, shot)| {
            align_with_prefix(i, summary, shot, &prefix, fps).unwrap_or_else(|e| {
                log::warn!("shot {i} {shot}: {e}");
                AlignmentProposal {
                    shot_index: i,
                    summary_interval: *shot,
                    broadcast_interval: Interval::new(0, shot.len(), fps)
                        .expect("shot length is positive"),
                    distance: f64::MAX,
                    status: ProposalStatus::Rejected,
                    adjusted_interval: None,
                    failure: Some(e.to_string()),
                }
            })
        })
        .collect()
}

/// Distances `(j, d_j)` for every window start `j` inside `range`
/// (the whole broadcast when `None`).
pub fn distance_curve(
    summary: &FrameFeatureSequence,
    shot: &Interval,
    broadcast: &FrameFeatureSequence,
    range: Option<&Interval>,
) -> Result<Vec<(usize, f64)>> {
    check_shot(summary, shot, broadcast.len(), broadcast.dim())?;
    let prefix = PrefixSums::new(broadcast);
    let target = average_features(summary, shot)?;
    let len = shot.len();
    let last = broadcast.len() - len;
    let (lo, hi) = match range {
        Some(r) => (r.start().min(last), r.end().saturating_sub(len).min(last)),
        None => (0, last),
    };
    Ok((lo..=hi)
        .map(|j| (j, prefix.window_distance(&target, j, len)))
        .collect())
}
