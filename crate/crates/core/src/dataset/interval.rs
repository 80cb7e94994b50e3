//! Half-open frame intervals on a fixed-rate timeline.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Snap tolerance (in frames) applied before flooring/ceiling second-valued
/// boundaries, so that `k / fps` read back from JSON maps to frame `k`.
const FRAME_SNAP: f64 = 1e-6;

/// Half-open interval `[start, end)` of frame indices at `fps` frames per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntervalRepr", into = "IntervalRepr")]
pub struct Interval {
    start: usize,
    end: usize,
    fps: f64,
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    start: usize,
    end: usize,
    fps: f64,
    #[serde(default, skip_deserializing)]
    start_s: f64,
    #[serde(default, skip_deserializing)]
    end_s: f64,
}

impl TryFrom<IntervalRepr> for Interval {
    type Error = Error;

    fn try_from(r: IntervalRepr) -> Result<Self> {
        Interval::new(r.start, r.end, r.fps)
    }
}

impl From<Interval> for IntervalRepr {
    fn from(i: Interval) -> Self {
        IntervalRepr {
            start: i.start,
            end: i.end,
            fps: i.fps,
            start_s: i.start_s(),
            end_s: i.end_s(),
        }
    }
}

impl Interval {
    pub fn new(start: usize, end: usize, fps: f64) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::Input(format!("fps must be positive, got {fps}")));
        }
        if start >= end {
            return Err(Error::Input(format!("empty interval [{start}, {end})")));
        }
        Ok(Interval { start, end, fps })
    }

    /// Converts second-valued boundaries with `start = floor(t0·fps)`, `end = ceil(t1·fps)`.
    pub fn from_seconds(start_s: f64, end_s: f64, fps: f64) -> Result<Self> {
        if !(start_s.is_finite() && end_s.is_finite()) || start_s < 0.0 {
            return Err(Error::Input(format!(
                "invalid second boundaries [{start_s}, {end_s})"
            )));
        }
        Interval::new(floor_frame(start_s * fps), ceil_frame(end_s * fps), fps)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    /// Always false; intervals are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start_s(&self) -> f64 {
        self.start as f64 / self.fps
    }

    pub fn end_s(&self) -> f64 {
        self.end as f64 / self.fps
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.fps
    }

    pub fn contains(&self, frame: usize) -> bool {
        self.start <= frame && frame < self.end
    }

    /// Number of frames shared with `other`.
    pub fn overlap(&self, other: &Interval) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.overlap(other) > 0
    }

    /// Returns an interval with the same fps but new bounds.
    pub fn with_bounds(&self, start: usize, end: usize) -> Result<Self> {
        Interval::new(start, end, self.fps)
    }

    /// Grows both sides by `frames`, clamping at `0` and at `limit` when given.
    pub fn dilate(&self, frames: usize, limit: Option<usize>) -> Interval {
        let start = self.start.saturating_sub(frames);
        let mut end = self.end.saturating_add(frames);
        if let Some(limit) = limit {
            end = end.min(limit.max(start + 1));
        }
        Interval {
            start,
            end,
            fps: self.fps,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})@{}fps", self.start, self.end, self.fps)
    }
}

fn floor_frame(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() < FRAME_SNAP {
        r.max(0.0) as usize
    } else {
        x.floor().max(0.0) as usize
    }
}

fn ceil_frame(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() < FRAME_SNAP {
        r.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

/// Checks that every interval uses the same frame rate and returns it.
pub fn common_fps(intervals: &[Interval]) -> Result<Option<f64>> {
    let mut fps = None;
    for i in intervals {
        match fps {
            None => fps = Some(i.fps),
            Some(f) if f != i.fps => return Err(Error::Unit(f, i.fps)),
            _ => {}
        }
    }
    Ok(fps)
}

/// Sorts and merges overlapping or adjacent intervals.
///
/// The output covers exactly the union of the input frame sets, is sorted by
/// start, and no two output intervals touch.
pub fn normalize_intervals(intervals: &[Interval]) -> Result<Vec<Interval>> {
    common_fps(intervals)?;
    let mut sorted = intervals.to_vec();
    sorted.sort_by_key(|i| (i.start, i.end));
    let mut out: Vec<Interval> = Vec::with_capacity(sorted.len());
    for i in sorted {
        match out.last_mut() {
            Some(last) if i.start <= last.end => last.end = last.end.max(i.end),
            _ => out.push(i),
        }
    }
    Ok(out)
}

/// Total frame count of a normalized interval list.
pub fn total_frames(intervals: &[Interval]) -> usize {
    intervals.iter().map(Interval::len).sum()
}

/// Frames shared between two normalized interval lists (linear merge).
pub fn intersection_frames(a: &[Interval], b: &[Interval]) -> usize {
    let (mut i, mut j, mut acc) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        acc += a[i].overlap(&b[j]);
        if a[i].end <= b[j].end {
            i += 1;
        } else {
            j += 1;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(s: usize, e: usize) -> Interval {
        Interval::new(s, e, 2.0).unwrap()
    }

    #[test]
    fn rejects_empty_and_bad_fps() {
        assert!(Interval::new(3, 3, 2.0).is_err());
        assert!(Interval::new(4, 3, 2.0).is_err());
        assert!(Interval::new(0, 3, 0.0).is_err());
    }

    #[test]
    fn merges_overlap_and_adjacency() {
        assert_eq!(normalize_intervals(&[iv(0, 10), iv(5, 15)]).unwrap(), vec![iv(0, 15)]);
        assert_eq!(normalize_intervals(&[iv(0, 5), iv(5, 9)]).unwrap(), vec![iv(0, 9)]);
        assert!(normalize_intervals(&[]).unwrap().is_empty());
    }

    #[test]
    fn mixed_fps_is_unit_error() {
        let a = Interval::new(0, 2, 2.0).unwrap();
        let b = Interval::new(0, 2, 25.0).unwrap();
        assert!(matches!(normalize_intervals(&[a, b]), Err(Error::Unit(..))));
    }

    #[test]
    fn seconds_conversion_is_conservative() {
        let i = Interval::from_seconds(1.2, 3.1, 2.0).unwrap();
        assert_eq!((i.start(), i.end()), (2, 7));
        // exact multiples survive float noise
        let j = Interval::from_seconds(0.1 * 3.0, 0.7, 10.0).unwrap();
        assert_eq!((j.start(), j.end()), (3, 7));
    }

    #[test]
    fn duration_is_exact_for_integer_frames() {
        let i = Interval::new(4, 9, 2.0).unwrap();
        assert_eq!(i.duration_s() * i.fps(), i.len() as f64);
    }

    #[test]
    fn dilation_clamps() {
        let i = iv(10, 20);
        assert_eq!(i.dilate(15, Some(30)), iv(0, 30));
        assert_eq!(i.dilate(0, None), i);
    }

    #[test]
    fn serde_carries_seconds() {
        let v = serde_json::to_value(iv(3, 7)).unwrap();
        assert_eq!(v["start_s"], 1.5);
        assert_eq!(v["end_s"], 3.5);
        let back: Interval = serde_json::from_value(v).unwrap();
        assert_eq!(back, iv(3, 7));
        let bad = serde_json::json!({"start": 5, "end": 5, "fps": 2.0});
        assert!(serde_json::from_value::<Interval>(bad).is_err());
    }
}
