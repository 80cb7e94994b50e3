use std::cmp::Ordering;

use super::{frame_metrics, FrameMetrics};
use crate::dataset::{Interval, Shot, SummaryAnnotation};
use crate::error::{Error, Result};

/// Keeps the highest-scoring shots until their summed duration reaches `t_s`.
///
/// Shots are ranked by score (earlier start first on ties). The shot that
/// would overflow the budget is cut to its first frames so the selection
/// lasts exactly `round(t_s · fps)` frames, or all predicted frames when the
/// budget is larger. The result is sorted by start.
pub fn at_t_select(predicted: &[Shot], t_s: f64, fps: f64) -> Result<Vec<Interval>> {
    Ok(at_t_select_shots(predicted, t_s, fps)?
        .into_iter()
        .map(|s| s.interval)
        .collect())
}

/// [`at_t_select`] keeping each selected shot's score.
pub fn at_t_select_shots(predicted: &[Shot], t_s: f64, fps: f64) -> Result<Vec<Shot>> {
    if !(t_s >= 0.0 && t_s.is_finite()) {
        return Err(Error::Input(format!("target duration {t_s} must be non-negative")));
    }
    let mut ranked: Vec<(f64, Interval)> = predicted
        .iter()
        .map(|s| {
            if s.interval.fps() != fps {
                return Err(Error::Unit(fps, s.interval.fps()));
            }
            s.score
                .map(|c| (c, s.interval))
                .ok_or_else(|| Error::Input(format!("shot {} has no score", s.interval)))
        })
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.start().cmp(&b.1.start()))
            .then(a.1.end().cmp(&b.1.end()))
    });

    let budget = (t_s * fps).round() as usize;
    let mut used = 0;
    let mut out = Vec::new();
    for (score, interval) in ranked {
        if used >= budget {
            break;
        }
        let take = interval.len().min(budget - used);
        out.push(Shot::scored(interval.with_bounds(interval.start(), interval.start() + take)?, score)?);
        used += take;
    }
    out.sort_by_key(|s| (s.interval.start(), s.interval.end()));
    Ok(out)
}

/// Frame metrics after constraining the prediction to the annotation's length.
pub fn at_t_metrics(predicted: &[Shot], annotation: &SummaryAnnotation) -> Result<FrameMetrics> {
    let selected = at_t_select(predicted, annotation.total_duration_s, annotation.fps)?;
    frame_metrics(&selected, &annotation.shots)
}
