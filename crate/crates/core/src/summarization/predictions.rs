use std::path::Path;

use serde::{Deserialize, Serialize};

use super::chunks::ChunkSpec;
use super::targets::FramePredictions;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkPredictions {
    pub origin_frame: usize,
    #[serde(flatten)]
    pub preds: FramePredictions,
}

/// Externally computed per-frame scores and offsets for one match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionsFile {
    pub match_id: String,
    pub fps: f64,
    pub chunks: Vec<ChunkPredictions>,
}

#[derive(Deserialize)]
struct RawChunk {
    origin_frame: usize,
    scores: Option<Vec<f64>>,
    offsets: Option<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
struct RawFile {
    match_id: String,
    fps: f64,
    chunks: Vec<RawChunk>,
}

/// Parses a predictions document, clamping scores into `[0, 1]`.
/// Returns the file and the number of clamped scores.
pub fn ingest_scores_str(text: &str) -> Result<(PredictionsFile, usize)> {
    let raw: RawFile = serde_json::from_str(text)?;
    if !(raw.fps > 0.0 && raw.fps.is_finite()) {
        return Err(Error::Data(format!("fps {} must be positive", raw.fps)));
    }
    let mut clamped = 0;
    let mut chunks = Vec::with_capacity(raw.chunks.len());
    for (i, c) in raw.chunks.into_iter().enumerate() {
        let scores = c
            .scores
            .ok_or_else(|| Error::Shape(format!("chunk {i} has no scores")))?;
        let offsets = c
            .offsets
            .ok_or_else(|| Error::Shape(format!("chunk {i} has no offsets")))?;
        if scores.len() != offsets.len() {
            return Err(Error::Shape(format!(
                "chunk {i}: {} scores but {} offset pairs",
                scores.len(),
                offsets.len()
            )));
        }
        if scores.iter().chain(offsets.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("chunk {i} holds a non-finite value")));
        }
        let scores = scores
            .into_iter()
            .map(|s| {
                let v = s.clamp(0.0, 1.0);
                if v != s {
                    clamped += 1;
                }
                v
            })
            .collect();
        chunks.push(ChunkPredictions {
            origin_frame: c.origin_frame,
            preds: FramePredictions::new(scores, offsets)?,
        });
    }
    if clamped > 0 {
        log::warn!("{clamped} score(s) clamped into [0, 1]");
    }
    Ok((
        PredictionsFile {
            match_id: raw.match_id,
            fps: raw.fps,
            chunks,
        },
        clamped,
    ))
}

pub fn ingest_scores(path: impl AsRef<Path>) -> Result<(PredictionsFile, usize)> {
    ingest_scores_str(&std::fs::read_to_string(path)?)
}

impl PredictionsFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("predictions serialize");
        s.push('\n');
        s
    }

    /// Checks frame rate and chunk lengths against a chunking scheme. Chunks
    /// must start on the grid and only the last one may be short.
    pub fn validate(&self, spec: &ChunkSpec, total_frames: Option<usize>) -> Result<()> {
        if (self.fps - spec.fps).abs() > 1e-6 {
            return Err(Error::Unit(spec.fps, self.fps));
        }
        for (i, c) in self.chunks.iter().enumerate() {
            let len = c.preds.len();
            if c.origin_frame % spec.frames != 0 || len > spec.frames || len == 0 {
                return Err(Error::Shape(format!(
                    "chunk {i} at frame {} holds {len} frames, grid is {}",
                    c.origin_frame, spec.frames
                )));
            }
            let end = c.origin_frame + len;
            let full_end = total_frames == Some(end);
            if len < spec.frames && !full_end && total_frames.is_some() {
                return Err(Error::Shape(format!("chunk {i} is short but not last")));
            }
            if let Some(t) = total_frames {
                if end > t {
                    return Err(Error::Shape(format!("chunk {i} ends at {end}, past frame {t}")));
                }
            }
        }
        Ok(())
    }
}
