//! Per-frame supervision targets and their inverse, boundary decoding.
//!
//! Offsets are in frames. For a summary frame `g` inside shot `[a, b)`,
//! `δ_start = g − a` and `δ_end = (b − 1) − g`; non-summary frames carry the
//! `(-1, -1)` sentinel. Decoding inverts this into the half-open interval
//! `[n − δ_start, n + δ_end + 1)`.

use serde::{Deserialize, Serialize};

use crate::dataset::{normalize_intervals, Interval, Shot};
use crate::error::{Error, Result};

pub const IGNORE_OFFSET: f64 = -1.0;

/// Classification threshold applied before boundary decoding.
pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTargets {
    /// 0/1 labels (soft after mixing).
    pub cls: Vec<f64>,
    /// `(δ_start, δ_end)` per frame, `(-1, -1)` outside the summary.
    pub offsets: Vec<[f64; 2]>,
}

impl FrameTargets {
    pub fn len(&self) -> usize {
        self.cls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cls.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePredictions {
    pub scores: Vec<f64>,
    pub offsets: Vec<[f64; 2]>,
}

impl FramePredictions {
    pub fn new(scores: Vec<f64>, offsets: Vec<[f64; 2]>) -> Result<Self> {
        if scores.len() != offsets.len() {
            return Err(Error::Shape(format!(
                "{} scores but {} offset pairs",
                scores.len(),
                offsets.len()
            )));
        }
        if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::Data(format!("score {s} outside [0, 1]")));
        }
        Ok(FramePredictions { scores, offsets })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Builds targets for every frame of `chunk`. Offsets are not clipped to the
/// chunk, so shots crossing a chunk border point past it.
pub fn encode_targets(chunk: &Interval, truth: &[Interval]) -> Result<FrameTargets> {
    let truth = normalize_intervals(truth)?;
    if let Some(t) = truth.first() {
        if t.fps() != chunk.fps() {
            return Err(Error::Unit(chunk.fps(), t.fps()));
        }
    }
    let mut cls = Vec::with_capacity(chunk.len());
    let mut offsets = Vec::with_capacity(chunk.len());
    let mut idx = truth.partition_point(|t| t.end() <= chunk.start());
    for g in chunk.start()..chunk.end() {
        while idx < truth.len() && truth[idx].end() <= g {
            idx += 1;
        }
        match truth.get(idx) {
            Some(t) if t.contains(g) => {
                cls.push(1.0);
                offsets.push([(g - t.start()) as f64, (t.end() - 1 - g) as f64]);
            }
            _ => {
                cls.push(0.0);
                offsets.push([IGNORE_OFFSET, IGNORE_OFFSET]);
            }
        }
    }
    Ok(FrameTargets { cls, offsets })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Decoded {
    pub shots: Vec<Shot>,
    /// Proposals whose rounded end did not exceed their start.
    pub dropped: usize,
}

/// Turns every frame scoring above `threshold` into a shot proposal on the
/// global timeline (`chunk_origin` is the chunk's first global frame).
pub fn decode_boundaries(
    preds: &FramePredictions,
    chunk_origin: usize,
    fps: f64,
    threshold: f64,
) -> Result<Decoded> {
    let mut out = Decoded::default();
    for (n, (&c, off)) in preds.scores.iter().zip(&preds.offsets).enumerate() {
        if c <= threshold {
            continue;
        }
        let g = (chunk_origin + n) as i64;
        let start = (g - off[0].round() as i64).max(0);
        let end = g + off[1].round() as i64 + 1;
        if end <= start {
            out.dropped += 1;
            continue;
        }
        let interval = Interval::new(start as usize, end as usize, fps)?;
        out.shots.push(Shot::scored(interval, c)?);
    }
    Ok(out)
}
