use std::path::Path;

use serde::{Deserialize, Serialize};

use super::chunks::ChunkSpec;
use super::loss::LossConfig;
use super::targets::DEFAULT_SCORE_THRESHOLD;
use crate::error::{Error, Result};

/// Summarizer settings, read from a small TOML file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SummarizeConfig {
    pub chunk_size_s: f64,
    pub fps: f64,
    pub lambda: f64,
    pub nms: bool,
    pub score_threshold: f64,
}

impl Default for SummarizeConfig {
    fn default() -> Self {
        SummarizeConfig {
            chunk_size_s: 60.0,
            fps: 2.0,
            lambda: 1.0,
            nms: true,
            score_threshold: DEFAULT_SCORE_THRESHOLD,
        }
    }
}

impl SummarizeConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SummarizeConfig = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.chunk_spec()?;
        self.loss()?;
        if !(0.0..1.0).contains(&self.score_threshold) {
            return Err(Error::Input(format!(
                "score threshold {} outside [0, 1)",
                self.score_threshold
            )));
        }
        Ok(())
    }

    pub fn chunk_spec(&self) -> Result<ChunkSpec> {
        ChunkSpec::new(self.chunk_size_s, self.fps)
    }

    pub fn loss(&self) -> Result<LossConfig> {
        LossConfig::new(self.lambda)
    }
}
