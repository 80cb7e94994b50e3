//! Seeded synthetic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use summalign_core::{FrameFeatureSequence, Interval};

/// Uniform random features in `[-1, 1)`.
pub fn random_sequence(id: &str, frames: usize, dim: usize, fps: f32, seed: u64) -> FrameFeatureSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..frames * dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    FrameFeatureSequence::new(id, fps, dim, data).expect("valid synthetic sequence")
}

/// `count` random intervals of at most `max_len` frames inside `[0, frames)`.
pub fn random_intervals(frames: usize, count: usize, max_len: usize, fps: f64, seed: u64) -> Vec<Interval> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.random_range(1..=max_len.min(frames));
            let start = rng.random_range(0..=frames - len);
            Interval::new(start, start + len, fps).expect("positive length")
        })
        .collect()
}
