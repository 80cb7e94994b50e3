use serde::{Deserialize, Serialize};

use super::targets::{FramePredictions, FrameTargets};
use crate::error::{Error, Result};

/// Scores are clamped to `[EPS, 1 − EPS]` before taking logs.
pub const EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    /// Weight of the regression term.
    pub lambda: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { lambda: 1.0 }
    }
}

impl LossConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Input(format!("lambda {lambda} must be non-negative")));
        }
        Ok(LossConfig { lambda })
    }
}

fn check_batch(preds: &[FramePredictions], targets: &[FrameTargets]) -> Result<()> {
    if preds.len() != targets.len() {
        return Err(Error::Shape(format!(
            "{} prediction chunks vs {} target chunks",
            preds.len(),
            targets.len()
        )));
    }
    for (b, (p, t)) in preds.iter().zip(targets).enumerate() {
        if p.scores.len() != t.cls.len() || p.offsets.len() != t.offsets.len() || p.scores.len() != p.offsets.len() {
            return Err(Error::Shape(format!(
                "chunk {b}: {} scores / {} offsets vs {} labels / {} target offsets",
                p.scores.len(),
                p.offsets.len(),
                t.cls.len(),
                t.offsets.len()
            )));
        }
    }
    Ok(())
}

/// Binary cross-entropy of one (score, label) pair with clamped score.
pub fn bce(score: f64, label: f64) -> f64 {
    let s = score.clamp(EPS, 1.0 - EPS);
    -(label * s.ln() + (1.0 - label) * (1.0 - s).ln())
}

/// Mean binary cross-entropy over every frame of every chunk.
pub fn loss_cls(preds: &[FramePredictions], targets: &[FrameTargets]) -> Result<f64> {
    check_batch(preds, targets)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p, t) in preds.iter().zip(targets) {
        for (&s, &y) in p.scores.iter().zip(&t.cls) {
            sum += bce(s, y);
            count += 1;
        }
    }
    Ok(if count > 0 { sum / count as f64 } else { 0.0 })
}

/// Smooth L1: quadratic below 1, linear above, both branches 0.5 at |d| = 1.
pub fn smooth_l1(d: f64) -> f64 {
    let a = d.abs();
    if a < 1.0 {
        0.5 * d * d
    } else {
        a - 0.5
    }
}

/// Derivative of [`smooth_l1`].
pub fn smooth_l1_grad(d: f64) -> f64 {
    if d.abs() < 1.0 {
        d
    } else {
        d.signum()
    }
}

/// Smooth L1 over offset channels whose target is non-negative, averaged over
/// the number of such channels. Zero when every target is masked.
pub fn loss_reg(preds: &[FramePredictions], targets: &[FrameTargets]) -> Result<f64> {
    check_batch(preds, targets)?;
    let mut sum = 0.0;
    let mut m = 0usize;
    for (p, t) in preds.iter().zip(targets) {
        for (s, y) in p.offsets.iter().zip(&t.offsets) {
            for c in 0..2 {
                if y[c] >= 0.0 {
                    sum += smooth_l1(s[c] - y[c]);
                    m += 1;
                }
            }
        }
    }
    Ok(if m > 0 { sum / m as f64 } else { 0.0 })
}

pub fn loss_total(cls: f64, reg: f64, cfg: &LossConfig) -> f64 {
    cls + cfg.lambda * reg
}
