use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use super::targets::FrameTargets;
use crate::error::{Error, Result};

/// One training chunk: row-major features plus per-frame targets.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkSample {
    pub origin: usize,
    pub dim: usize,
    pub features: Vec<f64>,
    pub targets: FrameTargets,
}

impl ChunkSample {
    pub fn new(origin: usize, dim: usize, features: Vec<f64>, targets: FrameTargets) -> Result<Self> {
        if dim == 0 || features.len() != dim * targets.len() || targets.offsets.len() != targets.len() {
            return Err(Error::Shape(format!(
                "{} feature values, dim {dim}, {} labels, {} offset pairs",
                features.len(),
                targets.len(),
                targets.offsets.len()
            )));
        }
        Ok(ChunkSample {
            origin,
            dim,
            features,
            targets,
        })
    }

    pub fn frames(&self) -> usize {
        self.targets.len()
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.features[n * self.dim..(n + 1) * self.dim]
    }
}

/// Convex combination with a given weight on `x1`.
///
/// Features and classification labels are mixed; regression targets (and
/// their `-1` sentinels) come whole from the sample with the larger weight.
pub fn mix_with_weight(x1: &ChunkSample, x2: &ChunkSample, weight: f64) -> Result<ChunkSample> {
    if x1.dim != x2.dim || x1.frames() != x2.frames() {
        return Err(Error::Shape(format!(
            "cannot mix {}x{} with {}x{}",
            x1.frames(),
            x1.dim,
            x2.frames(),
            x2.dim
        )));
    }
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::Input(format!("mixing weight {weight} outside [0, 1]")));
    }
    let mix = |a: &f64, b: &f64| weight * a + (1.0 - weight) * b;
    let dominant = if weight >= 0.5 { x1 } else { x2 };
    Ok(ChunkSample {
        origin: dominant.origin,
        dim: x1.dim,
        features: x1.features.iter().zip(&x2.features).map(|(a, b)| mix(a, b)).collect(),
        targets: FrameTargets {
            cls: x1.targets.cls.iter().zip(&x2.targets.cls).map(|(a, b)| mix(a, b)).collect(),
            offsets: dominant.targets.offsets.clone(),
        },
    })
}

/// Draws a mixing weight from `Beta(alpha, beta)`.
pub fn draw_weight(alpha: f64, beta: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    let dist = Beta::new(alpha, beta).map_err(|e| Error::Input(format!("beta({alpha}, {beta}): {e}")))?;
    Ok(dist.sample(rng))
}

/// MixUp of two chunks with a weight drawn from `Beta(alpha, beta)` under `seed`.
/// Returns the mixed sample and the weight used.
pub fn mixup(x1: &ChunkSample, x2: &ChunkSample, alpha: f64, beta: f64, seed: u64) -> Result<(ChunkSample, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = draw_weight(alpha, beta, &mut rng)?;
    Ok((mix_with_weight(x1, x2, w)?, w))
}
