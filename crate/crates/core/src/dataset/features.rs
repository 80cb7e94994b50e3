//! Per-frame embedding matrices and the `.sfeat` binary container.
//!
//! Layout (little-endian):
//!
//! | bytes | field                         |
//! |-------|-------------------------------|
//! | 4     | magic `SFEA`                  |
//! | 4     | version (`u32`, currently 1)  |
//! | 8     | frame count (`u64`)           |
//! | 4     | dim (`u32`)                   |
//! | 4     | fps (`f32`)                   |
//! | N·D·4 | row-major `f32` payload       |

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::dataset::Interval;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SFEA";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 24;
pub const EXTENSION: &str = "sfeat";

#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeatureSequence {
    source_id: String,
    fps: f32,
    dim: usize,
    data: Vec<f32>,
}

impl FrameFeatureSequence {
    /// Builds a sequence from a row-major buffer of `frames * dim` values.
    pub fn new(source_id: impl Into<String>, fps: f32, dim: usize, data: Vec<f32>) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::Data(format!("fps must be positive, got {fps}")));
        }
        if dim == 0 {
            return Err(Error::Data("dim must be at least 1".into()));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::Data(format!(
                "payload of {} values is not a positive multiple of dim {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value at frame {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(FrameFeatureSequence {
            source_id: source_id.into(),
            fps,
            dim,
            data,
        })
    }

    pub fn from_rows(source_id: impl Into<String>, fps: f32, rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::Dim(dim, bad.len()));
        }
        Self::new(source_id, fps, dim, rows.concat())
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn fps(&self) -> f64 {
        self.fps as f64
    }

    pub fn fps_f32(&self) -> f32 {
        self.fps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, k: usize) -> &[f32] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Interval covering the whole sequence.
    pub fn full_interval(&self) -> Interval {
        Interval::new(0, self.len(), self.fps()).expect("sequence is non-empty")
    }

    pub fn timestamp_s(&self, k: usize) -> f64 {
        k as f64 / self.fps()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.data.len() * 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&self.fps.to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(source_id: impl Into<String>, bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!(
                "header needs {HEADER_LEN} bytes, file has {}",
                bytes.len()
            )));
        }
        if &bytes[0..4] != MAGIC {
            return Err(Error::Format("bad magic, expected SFEA".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let frames = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let dim = u32::from_le_bytes(bytes[16..20].try_into().unwrap()) as u64;
        let fps = f32::from_le_bytes(bytes[20..24].try_into().unwrap());
        if frames == 0 || dim == 0 {
            return Err(Error::Format(format!("empty shape {frames}x{dim}")));
        }
        let expected = frames
            .checked_mul(dim)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Format("shape overflows".into()))?;
        let found = (bytes.len() - HEADER_LEN) as u64;
        if found < expected {
            return Err(Error::Truncation { expected, found });
        }
        if found > expected {
            return Err(Error::Format(format!(
                "{} trailing bytes after payload",
                found - expected
            )));
        }
        let data = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(source_id, fps, dim as usize, data)
    }
}

/// Reads a `.sfeat` file; the source id is the file stem.
pub fn load_features(path: impl AsRef<Path>) -> Result<FrameFeatureSequence> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    FrameFeatureSequence::from_bytes(id, &bytes)
}

pub fn save_features(features: &FrameFeatureSequence, path: impl AsRef<Path>) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&features.to_bytes())?;
    file.sync_all()?;
    Ok(())
}

/// Concatenates sequences (e.g. the two halves of a broadcast) into one
/// timeline. Returns the joined sequence and the start frame of each part.
pub fn concat_features(
    source_id: impl Into<String>,
    parts: &[FrameFeatureSequence],
) -> Result<(FrameFeatureSequence, Vec<usize>)> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Input("nothing to concatenate".into()))?;
    let mut offsets = Vec::with_capacity(parts.len());
    let mut data = Vec::new();
    for p in parts {
        if p.dim != first.dim {
            return Err(Error::Dim(first.dim, p.dim));
        }
        if p.fps != first.fps {
            return Err(Error::Unit(first.fps(), p.fps()));
        }
        offsets.push(data.len() / first.dim);
        data.extend_from_slice(&p.data);
    }
    Ok((FrameFeatureSequence::new(source_id, first.fps, first.dim, data)?, offsets))
}
