//! Shot boundary detection over summary frame features.
//!
//! Two detectors are provided: a nearest-neighbour grouping detector that only
//! needs frame embeddings, and a threshold adapter over per-transition scores
//! produced by an external boundary network.

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{FrameFeatureSequence, Interval};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    #[default]
    Euclidean,
    Cosine,
}

impl Distance {
    pub fn between(self, a: &[f32], b: &[f32]) -> f64 {
        match self {
            Distance::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let d = *x as f64 - *y as f64;
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            Distance::Cosine => {
                let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
                for (x, y) in a.iter().zip(b) {
                    let (x, y) = (*x as f64, *y as f64);
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                match (na > 0.0, nb > 0.0) {
                    (false, false) => 0.0,
                    (true, true) => (1.0 - dot / (na.sqrt() * nb.sqrt())).max(0.0),
                    _ => 1.0,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnSbdConfig {
    pub k: usize,
    /// Minimum length of a run of consecutive neighbour indices (the query
    /// frame included) for its members to count as evidence.
    pub outlier_min_run: usize,
    pub distance: Distance,
}

impl Default for KnnSbdConfig {
    fn default() -> Self {
        KnnSbdConfig {
            k: 10,
            outlier_min_run: 2,
            distance: Distance::Euclidean,
        }
    }
}

impl KnnSbdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Input("k must be at least 1".into()));
        }
        if self.outlier_min_run == 0 {
            return Err(Error::Input("outlier_min_run must be at least 1".into()));
        }
        Ok(())
    }
}

/// What one query frame says about shot structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameEvidence {
    /// First and last index of the consecutive run around the query frame.
    pub run: (usize, usize),
    /// Set when retained neighbours exist outside `run`; the boundary goes
    /// right after the run's last index.
    pub cut_after_run: bool,
}

/// k nearest neighbours of frame `t`, excluding itself.
///
/// Equal distances are ordered by temporal distance to `t`, then by index.
pub fn nearest_neighbors(features: &FrameFeatureSequence, t: usize, k: usize, metric: Distance) -> Vec<usize> {
    let query = features.row(t);
    let mut cands: Vec<(f64, usize, usize)> = (0..features.len())
        .filter(|&j| j != t)
        .map(|j| (metric.between(query, features.row(j)), j.abs_diff(t), j))
        .collect();
    let k = k.min(cands.len());
    let cmp = |a: &(f64, usize, usize), b: &(f64, usize, usize)| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    };
    if k < cands.len() && k > 0 {
        cands.select_nth_unstable_by(k - 1, cmp);
        cands.truncate(k);
    }
    cands.sort_by(cmp);
    cands.into_iter().map(|(_, _, j)| j).collect()
}

/// Groups the neighbour set of `t` into runs of consecutive indices, drops
/// short runs as outliers and reports the run that contains `t`.
pub fn frame_evidence(t: usize, neighbors: &[usize], outlier_min_run: usize) -> FrameEvidence {
    let mut idx: Vec<usize> = neighbors.iter().copied().chain(std::iter::once(t)).collect();
    idx.sort_unstable();
    idx.dedup();

    let mut runs: Vec<(usize, usize)> = Vec::new();
    for &i in &idx {
        match runs.last_mut() {
            Some((_, hi)) if *hi + 1 == i => *hi = i,
            _ => runs.push((i, i)),
        }
    }
    let own = *runs
        .iter()
        .find(|(lo, hi)| *lo <= t && t <= *hi)
        .expect("query frame is in its own candidate set");
    let cut_after_run = runs
        .iter()
        .any(|r| *r != own && r.1 - r.0 + 1 >= outlier_min_run);
    FrameEvidence {
        run: own,
        cut_after_run,
    }
}

/// Converts sorted, deduplicated cut positions (a cut at `c` separates frame
/// `c - 1` from `c`) into a partition of `[0, frames)`.
pub fn partition_from_cuts(frames: usize, cuts: &[usize], fps: f64) -> Result<Vec<Interval>> {
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0;
    for &c in cuts.iter().filter(|&&c| c > 0 && c < frames) {
        if c > start {
            out.push(Interval::new(start, c, fps)?);
            start = c;
        }
    }
    out.push(Interval::new(start, frames, fps)?);
    Ok(out)
}

/// Nearest-neighbour shot boundary detection.
///
/// Every frame retrieves its `k` nearest neighbours. A cut is placed between
/// frames `g - 1` and `g` when no frame's consecutive run spans that gap, and
/// after the end of a frame's run whenever that frame also has retained
/// neighbours elsewhere in the video. The detector oversegments on purpose.
pub fn knn_shot_boundaries(features: &FrameFeatureSequence, cfg: &KnnSbdConfig) -> Result<Vec<Interval>> {
    cfg.validate()?;
    let n = features.len();
    if n < 2 {
        return Err(Error::Input(format!("need at least 2 frames, got {n}")));
    }
    let mut k = cfg.k;
    if k >= n {
        log::warn!("k={k} is not below the frame count {n}; clamping to {}", n - 1);
        k = n - 1;
    }

    let evidence: Vec<FrameEvidence> = (0..n)
        .into_par_iter()
        .map(|t| {
            let nn = nearest_neighbors(features, t, k, cfg.distance);
            frame_evidence(t, &nn, cfg.outlier_min_run)
        })
        .collect();

    // covered[g] > 0 iff some run spans the gap before frame g
    let mut delta = vec![0i64; n + 1];
    let mut cut = vec![false; n + 1];
    for ev in &evidence {
        let (lo, hi) = ev.run;
        if hi > lo {
            delta[lo + 1] += 1;
            delta[hi + 1] -= 1;
        }
        if ev.cut_after_run {
            cut[hi + 1] = true;
        }
    }
    let mut cuts = Vec::new();
    let mut covered = 0i64;
    for g in 1..n {
        covered += delta[g];
        if covered == 0 || cut[g] {
            cuts.push(g);
        }
    }
    partition_from_cuts(n, &cuts, features.fps())
}

/// Per-transition scores from an external boundary network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionScores {
    pub threshold: f64,
    /// `scores[t]` is the transition score between frames `t` and `t + 1`.
    pub scores: Vec<f64>,
}

impl TransitionScores {
    pub fn new(scores: Vec<f64>, threshold: f64) -> Result<Self> {
        let ts = TransitionScores { threshold, scores };
        ts.validate()?;
        Ok(ts)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Input(format!(
                "threshold {} outside (0, 1)",
                self.threshold
            )));
        }
        if let Some(s) = self.scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::Data(format!("transition score {s} outside [0, 1]")));
        }
        Ok(())
    }

    pub fn frames(&self) -> usize {
        self.scores.len() + 1
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let ts: TransitionScores = serde_json::from_str(&fs::read_to_string(path)?)?;
        ts.validate()?;
        Ok(ts)
    }
}

/// Cuts after frame `t` whenever `scores[t] > threshold`.
pub fn threshold_shot_boundaries(ts: &TransitionScores, fps: f64) -> Result<Vec<Interval>> {
    ts.validate()?;
    let cuts: Vec<usize> = ts
        .scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > ts.threshold)
        .map(|(t, _)| t + 1)
        .collect();
    partition_from_cuts(ts.frames(), &cuts, fps)
}
