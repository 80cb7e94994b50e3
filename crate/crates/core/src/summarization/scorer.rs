//! Desk-scale reference scorer: a per-frame affine map from features (plus an
//! optional sinusoidal position code) to one logit and two boundary offsets,
//! fitted by full-batch gradient descent on the combined loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::chunks::{make_chunks, ChunkSpec};
use super::encoding::sinusoidal_pe;
use super::loss::{bce, loss_total, smooth_l1, smooth_l1_grad, LossConfig, EPS};
use super::mixup::{draw_weight, mix_with_weight, ChunkSample};
use super::targets::{encode_targets, FramePredictions};
use crate::dataset::{FrameFeatureSequence, Interval};
use crate::error::{Error, Result};

const OUTPUTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerWeights {
    pub dim_in: usize,
    pub pe_dim: usize,
    /// Row-major `3 × (dim_in + pe_dim)`: logit row, then δ_start, then δ_end.
    pub weights: Vec<f64>,
    pub bias: [f64; OUTPUTS],
}

impl ScorerWeights {
    pub fn zeros(dim_in: usize, pe_dim: usize) -> Result<Self> {
        if dim_in == 0 {
            return Err(Error::Input("scorer needs at least one input feature".into()));
        }
        if !pe_dim.is_multiple_of(2) {
            return Err(Error::Input(format!("encoding width must be even, got {pe_dim}")));
        }
        Ok(ScorerWeights {
            dim_in,
            pe_dim,
            weights: vec![0.0; OUTPUTS * (dim_in + pe_dim)],
            bias: [0.0; OUTPUTS],
        })
    }

    /// Width of the scorer input after the position code is appended.
    pub fn width(&self) -> usize {
        self.dim_in + self.pe_dim
    }

    fn row(&self, out: usize) -> &[f64] {
        let w = self.width();
        &self.weights[out * w..(out + 1) * w]
    }

    /// Flattened parameters: weights then bias.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.extend_from_slice(&self.bias);
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.weights.len() + OUTPUTS {
            return Err(Error::Shape(format!(
                "{} parameters for a scorer with {}",
                params.len(),
                self.weights.len() + OUTPUTS
            )));
        }
        let (w, b) = params.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias.copy_from_slice(b);
        Ok(())
    }

    fn check(&self) -> Result<()> {
        if self.weights.len() != OUTPUTS * self.width() {
            return Err(Error::Shape(format!(
                "{} weights for input width {}",
                self.weights.len(),
                self.width()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixupConfig {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub loss: LossConfig,
    pub pe_dim: usize,
    pub mixup: Option<MixupConfig>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            lr: 0.5,
            seed: 7,
            loss: LossConfig::default(),
            pe_dim: 0,
            mixup: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub cls: f64,
    pub reg: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub weights: ScorerWeights,
    /// Total loss before each update.
    pub losses: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Input rows for one chunk with the position code appended.
fn design_rows(w: &ScorerWeights, sample_dim: usize, features: &[f64]) -> Result<Vec<Vec<f64>>> {
    if sample_dim != w.dim_in {
        return Err(Error::Dim(w.dim_in, sample_dim));
    }
    let frames = features.len() / sample_dim;
    let pe = if w.pe_dim > 0 {
        sinusoidal_pe(frames, w.pe_dim)?
    } else {
        Vec::new()
    };
    Ok((0..frames)
        .map(|n| {
            let mut row = features[n * sample_dim..(n + 1) * sample_dim].to_vec();
            if let Some(p) = pe.get(n) {
                row.extend_from_slice(p);
            }
            row
        })
        .collect())
}

/// Scores and offsets for one chunk of row-major features.
pub fn infer(w: &ScorerWeights, dim: usize, features: &[f64]) -> Result<FramePredictions> {
    w.check()?;
    let rows = design_rows(w, dim, features)?;
    let mut scores = Vec::with_capacity(rows.len());
    let mut offsets = Vec::with_capacity(rows.len());
    for x in &rows {
        scores.push(sigmoid(dot(w.row(0), x) + w.bias[0]));
        offsets.push([dot(w.row(1), x) + w.bias[1], dot(w.row(2), x) + w.bias[2]]);
    }
    FramePredictions::new(scores, offsets)
}

/// Combined loss over a batch and its analytic gradient with respect to
/// every weight and bias.
pub fn loss_and_gradient(
    w: &ScorerWeights,
    batch: &[ChunkSample],
    cfg: &LossConfig,
) -> Result<(LossBreakdown, ScorerWeights)> {
    w.check()?;
    let width = w.width();
    let mut grad = ScorerWeights::zeros(w.dim_in, w.pe_dim)?;

    let designs: Vec<Vec<Vec<f64>>> = batch
        .iter()
        .map(|s| design_rows(w, s.dim, &s.features))
        .collect::<Result<_>>()?;
    let count: usize = batch.iter().map(|s| s.frames()).sum();
    let masked: usize = batch
        .iter()
        .flat_map(|s| s.targets.offsets.iter())
        .map(|o| o.iter().filter(|v| **v >= 0.0).count())
        .sum();

    let (mut cls_sum, mut reg_sum) = (0.0, 0.0);
    for (sample, rows) in batch.iter().zip(&designs) {
        for (n, x) in rows.iter().enumerate() {
            let y = sample.targets.cls[n];
            let s = sigmoid(dot(w.row(0), x) + w.bias[0]);
            cls_sum += bce(s, y);
            // d bce / d z vanishes where the clamp is active
            let dz0 = if (EPS..=1.0 - EPS).contains(&s) {
                (s - y) / count as f64
            } else {
                0.0
            };
            let mut dz = [dz0, 0.0, 0.0];
            for c in 0..2 {
                let t = sample.targets.offsets[n][c];
                if t >= 0.0 {
                    let d = dot(w.row(c + 1), x) + w.bias[c + 1] - t;
                    reg_sum += smooth_l1(d);
                    dz[c + 1] = cfg.lambda * smooth_l1_grad(d) / masked as f64;
                }
            }
            for (o, g) in dz.iter().enumerate() {
                if *g == 0.0 {
                    continue;
                }
                grad.bias[o] += g;
                for (gw, xi) in grad.weights[o * width..(o + 1) * width].iter_mut().zip(x) {
                    *gw += g * xi;
                }
            }
        }
    }
    let cls = if count > 0 { cls_sum / count as f64 } else { 0.0 };
    let reg = if masked > 0 { reg_sum / masked as f64 } else { 0.0 };
    Ok((
        LossBreakdown {
            cls,
            reg,
            total: loss_total(cls, reg, cfg),
        },
        grad,
    ))
}

/// Full-batch gradient descent from zero weights. Single-threaded and
/// deterministic for a given seed (the seed only drives MixUp pairing).
pub fn train(batch: &[ChunkSample], cfg: &TrainConfig) -> Result<TrainReport> {
    let first = batch
        .first()
        .ok_or_else(|| Error::Input("no training chunks".into()))?;
    if let Some(s) = batch.iter().find(|s| s.dim != first.dim) {
        return Err(Error::Dim(first.dim, s.dim));
    }
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(Error::Input(format!("learning rate {} must be positive", cfg.lr)));
    }
    let mut w = ScorerWeights::zeros(first.dim, cfg.pe_dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mixed;
        let epoch_batch = match cfg.mixup {
            Some(m) => {
                mixed = mix_batch(batch, m, &mut rng)?;
                &mixed[..]
            }
            None => batch,
        };
        let (loss, grad) = loss_and_gradient(&w, epoch_batch, &cfg.loss)?;
        if !loss.total.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        losses.push(loss.total);
        for (p, g) in w.weights.iter_mut().zip(&grad.weights) {
            *p -= cfg.lr * g;
        }
        for (p, g) in w.bias.iter_mut().zip(&grad.bias) {
            *p -= cfg.lr * g;
        }
        if w.parameters().iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
    }
    Ok(TrainReport { weights: w, losses })
}

/// Pairs every chunk with a random partner of the same length.
fn mix_batch(batch: &[ChunkSample], m: MixupConfig, rng: &mut ChaCha8Rng) -> Result<Vec<ChunkSample>> {
    batch
        .iter()
        .map(|x1| {
            let partners: Vec<&ChunkSample> = batch.iter().filter(|s| s.frames() == x1.frames()).collect();
            let x2 = partners[rng.random_range(0..partners.len())];
            let weight = draw_weight(m.alpha, m.beta, rng)?;
            mix_with_weight(x1, x2, weight)
        })
        .collect()
}

/// Cuts a feature sequence into chunks and pairs each with its targets.
pub fn chunk_samples(
    features: &FrameFeatureSequence,
    truth: &[Interval],
    spec: &ChunkSpec,
) -> Result<Vec<ChunkSample>> {
    if (features.fps() - spec.fps).abs() > 1e-6 {
        return Err(Error::Unit(spec.fps, features.fps()));
    }
    let truth: Vec<Interval> = truth
        .iter()
        .map(|t| Interval::new(t.start(), t.end(), spec.fps))
        .collect::<Result<_>>()?;
    make_chunks(features.len(), spec)?
        .into_iter()
        .map(|chunk| {
            let targets = encode_targets(&chunk, &truth)?;
            let values = (chunk.start()..chunk.end())
                .flat_map(|k| features.row(k).iter().map(|&v| v as f64))
                .collect();
            ChunkSample::new(chunk.start(), features.dim(), values, targets)
        })
        .collect()
}
