//! Domain types and file formats for matches, summaries and frame features.

mod features;
mod interval;
mod records;

pub use features::{
    concat_features, load_features, save_features, FrameFeatureSequence, EXTENSION as FEATURE_EXTENSION,
};
pub use interval::{common_fps, intersection_frames, normalize_intervals, total_frames, Interval};
pub use records::{
    annotation_from_json, annotation_to_json, load_annotation, load_match, match_from_json,
    match_to_json, save_annotation, save_match, League, MatchRecord, PhaseName, ShotList, Split,
    SplitManifest, SummaryAnnotation, DEFAULT_MATCH_FPS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A temporal segment with an optional confidence in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub interval: Interval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl Shot {
    pub fn new(interval: Interval, score: Option<f64>) -> Result<Self> {
        if let Some(s) = score {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Input(format!("shot score {s} outside [0, 1]")));
            }
        }
        Ok(Shot { interval, score })
    }

    pub fn scored(interval: Interval, score: f64) -> Result<Self> {
        Self::new(interval, Some(score))
    }
}
