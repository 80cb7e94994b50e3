//! JSON records: summary annotations, match metadata and split manifests.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{normalize_intervals, total_frames, Interval, Shot};
use crate::error::{Error, Result};

/// Frame rate assumed for match records that do not declare one.
pub const DEFAULT_MATCH_FPS: f64 = 2.0;

/// Ground-truth (or predicted) summary of one match on the broadcast timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryAnnotation {
    pub match_id: String,
    pub fps: f64,
    /// Normalized: sorted, disjoint, non-touching.
    pub shots: Vec<Interval>,
    /// Summary length `T` in seconds.
    pub total_duration_s: f64,
}

impl SummaryAnnotation {
    /// Normalizes `shots` and derives `total_duration_s`.
    pub fn new(match_id: impl Into<String>, fps: f64, shots: &[Interval]) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::Schema(format!("fps must be positive, got {fps}")));
        }
        if let Some(bad) = shots.iter().find(|s| s.fps() != fps) {
            return Err(Error::Unit(fps, bad.fps()));
        }
        let shots = normalize_intervals(shots)?;
        let total_duration_s = total_frames(&shots) as f64 / fps;
        Ok(SummaryAnnotation {
            match_id: match_id.into(),
            fps,
            shots,
            total_duration_s,
        })
    }

    pub fn total_frames(&self) -> usize {
        total_frames(&self.shots)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShotEntry {
    start_s: f64,
    end_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
}

/// On-disk shape shared by annotations and predicted summaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ShotFile {
    match_id: String,
    fps: f64,
    shots: Vec<ShotEntry>,
}

impl ShotFile {
    fn parse(text: &str) -> Result<Self> {
        let file: ShotFile = serde_json::from_str(text)?;
        if !(file.fps.is_finite() && file.fps > 0.0) {
            return Err(Error::Schema(format!("fps must be positive, got {}", file.fps)));
        }
        Ok(file)
    }

    fn shots(&self) -> Result<Vec<Shot>> {
        self.shots
            .iter()
            .map(|e| {
                let interval = Interval::from_seconds(e.start_s, e.end_s, self.fps)
                    .map_err(|err| Error::Schema(err.to_string()))?;
                Shot::new(interval, e.score).map_err(|err| Error::Schema(err.to_string()))
            })
            .collect()
    }
}

fn entry(i: &Interval, score: Option<f64>) -> ShotEntry {
    ShotEntry {
        start_s: i.start_s(),
        end_s: i.end_s(),
        score,
    }
}

pub fn annotation_from_json(text: &str) -> Result<SummaryAnnotation> {
    let file = ShotFile::parse(text)?;
    let intervals: Vec<Interval> = file.shots()?.into_iter().map(|s| s.interval).collect();
    SummaryAnnotation::new(file.match_id, file.fps, &intervals)
}

pub fn annotation_to_json(ann: &SummaryAnnotation) -> String {
    let file = ShotFile {
        match_id: ann.match_id.clone(),
        fps: ann.fps,
        shots: ann.shots.iter().map(|i| entry(i, None)).collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

pub fn load_annotation(path: impl AsRef<Path>) -> Result<SummaryAnnotation> {
    annotation_from_json(&fs::read_to_string(path)?)
}

pub fn save_annotation(ann: &SummaryAnnotation, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, annotation_to_json(ann))?;
    Ok(())
}

/// A scored shot list for one match, e.g. the output of key-shot selection.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotList {
    pub match_id: String,
    pub fps: f64,
    pub shots: Vec<Shot>,
}

impl ShotList {
    pub fn from_json(text: &str) -> Result<Self> {
        let file = ShotFile::parse(text)?;
        Ok(ShotList {
            shots: file.shots()?,
            match_id: file.match_id,
            fps: file.fps,
        })
    }

    pub fn to_json(&self) -> String {
        let file = ShotFile {
            match_id: self.match_id.clone(),
            fps: self.fps,
            shots: self.shots.iter().map(|s| entry(&s.interval, s.score)).collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum League {
    Spain,
    France,
    Italy,
    #[serde(rename = "other", alias = "Other")]
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PhaseName {
    PreMatch,
    FirstHalf,
    HalfTime,
    SecondHalf,
    PostMatch,
}

impl PhaseName {
    pub const ALL: [PhaseName; 5] = [
        PhaseName::PreMatch,
        PhaseName::FirstHalf,
        PhaseName::HalfTime,
        PhaseName::SecondHalf,
        PhaseName::PostMatch,
    ];
}

impl fmt::Display for PhaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchRecord {
    pub match_id: String,
    pub league: League,
    pub season: String,
    pub split: Split,
    /// Sorted by start, pairwise disjoint.
    pub phases: Vec<(PhaseName, Interval)>,
}

impl MatchRecord {
    pub fn new(
        match_id: impl Into<String>,
        league: League,
        season: impl Into<String>,
        split: Split,
        mut phases: Vec<(PhaseName, Interval)>,
    ) -> Result<Self> {
        phases.sort_by_key(|(_, i)| (i.start(), i.end()));
        let mut seen = BTreeSet::new();
        for (name, _) in &phases {
            if !seen.insert(*name) {
                return Err(Error::Phase(format!("phase {name} listed twice")));
            }
        }
        for pair in phases.windows(2) {
            let ((a, ia), (b, ib)) = (&pair[0], &pair[1]);
            if ia.fps() != ib.fps() {
                return Err(Error::Unit(ia.fps(), ib.fps()));
            }
            if ia.intersects(ib) {
                return Err(Error::Phase(format!("{a} {ia} overlaps {b} {ib}")));
            }
        }
        Ok(MatchRecord {
            match_id: match_id.into(),
            league,
            season: season.into(),
            split,
            phases,
        })
    }

    pub fn fps(&self) -> Option<f64> {
        self.phases.first().map(|(_, i)| i.fps())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PhaseEntry {
    name: PhaseName,
    start_s: f64,
    end_s: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MatchFile {
    match_id: String,
    league: League,
    season: String,
    split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fps: Option<f64>,
    phases: Vec<PhaseEntry>,
}

pub fn match_from_json(text: &str) -> Result<MatchRecord> {
    let file: MatchFile = serde_json::from_str(text)?;
    let fps = file.fps.unwrap_or(DEFAULT_MATCH_FPS);
    let phases = file
        .phases
        .iter()
        .map(|p| {
            Interval::from_seconds(p.start_s, p.end_s, fps)
                .map(|i| (p.name, i))
                .map_err(|e| Error::Schema(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    MatchRecord::new(file.match_id, file.league, file.season, file.split, phases)
}

pub fn match_to_json(record: &MatchRecord) -> String {
    let file = MatchFile {
        match_id: record.match_id.clone(),
        league: record.league,
        season: record.season.clone(),
        split: record.split,
        fps: record.fps(),
        phases: record
            .phases
            .iter()
            .map(|(name, i)| PhaseEntry {
                name: *name,
                start_s: i.start_s(),
                end_s: i.end_s(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

pub fn load_match(path: impl AsRef<Path>) -> Result<MatchRecord> {
    match_from_json(&fs::read_to_string(path)?)
}

pub fn save_match(record: &MatchRecord, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, match_to_json(record))?;
    Ok(())
}

/// Match ids per split.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitManifest {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

impl SplitManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let manifest: SplitManifest = serde_json::from_str(text)?;
        manifest.assignments()?;
        Ok(manifest)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Maps every match id to its split; fails if an id appears twice.
    pub fn assignments(&self) -> Result<BTreeMap<&str, Split>> {
        let mut out = BTreeMap::new();
        for (split, ids) in [
            (Split::Train, &self.train),
            (Split::Validation, &self.validation),
            (Split::Test, &self.test),
        ] {
            for id in ids {
                if let Some(prev) = out.insert(id.as_str(), split) {
                    return Err(Error::Schema(format!(
                        "match {id} assigned to both {prev:?} and {split:?}"
                    )));
                }
            }
        }
        Ok(out)
    }

    /// Checks that the manifest partitions exactly `match_ids`.
    pub fn check_partition<'a>(&self, match_ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
        let assigned = self.assignments()?;
        let all: BTreeSet<&str> = match_ids.into_iter().collect();
        if let Some(missing) = all.iter().find(|id| !assigned.contains_key(*id)) {
            return Err(Error::Schema(format!("match {missing} has no split")));
        }
        if let Some(extra) = assigned.keys().find(|id| !all.contains(*id)) {
            return Err(Error::Schema(format!("split lists unknown match {extra}")));
        }
        Ok(())
    }

    pub fn ids(&self, split: Split) -> &[String] {
        match split {
            Split::Train => &self.train,
            Split::Validation => &self.validation,
            Split::Test => &self.test,
        }
    }
}
