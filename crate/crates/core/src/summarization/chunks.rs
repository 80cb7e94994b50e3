use serde::{Deserialize, Serialize};

use crate::dataset::Interval;
use crate::error::{Error, Result};

/// Fixed-length chunking of a broadcast: `frames = round(chunk_size_s · fps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChunkSpec {
    pub chunk_size_s: f64,
    pub fps: f64,
    pub frames: usize,
}

impl ChunkSpec {
    pub fn new(chunk_size_s: f64, fps: f64) -> Result<Self> {
        if !(chunk_size_s > 0.0 && chunk_size_s.is_finite()) {
            return Err(Error::Input(format!("chunk size {chunk_size_s} s must be positive")));
        }
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(Error::Input(format!("fps {fps} must be positive")));
        }
        let frames = (chunk_size_s * fps).round() as usize;
        if frames == 0 {
            return Err(Error::Input(format!(
                "chunk of {chunk_size_s} s at {fps} fps holds no frames"
            )));
        }
        Ok(ChunkSpec {
            chunk_size_s,
            fps,
            frames,
        })
    }
}

/// Consecutive chunks covering `[0, total_frames)`; the last may be shorter.
pub fn make_chunks(total_frames: usize, spec: &ChunkSpec) -> Result<Vec<Interval>> {
    if total_frames == 0 {
        return Err(Error::Input("cannot chunk an empty sequence".into()));
    }
    (0..total_frames)
        .step_by(spec.frames)
        .map(|start| Interval::new(start, (start + spec.frames).min(total_frames), spec.fps))
        .collect()
}
