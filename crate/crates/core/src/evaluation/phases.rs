use std::collections::BTreeMap;

use crate::dataset::{MatchRecord, PhaseName, SummaryAnnotation};
use crate::error::{Error, Result};

/// Share of summary frames (percent) falling in each match phase.
pub type PhaseDistribution = BTreeMap<PhaseName, f64>;

/// Percentage of summary frames inside each phase. Every phase appears in the
/// result. An empty summary yields all zeros.
pub fn phase_distribution(summary: &SummaryAnnotation, record: &MatchRecord) -> Result<PhaseDistribution> {
    if let Some(fps) = record.fps() {
        if fps != summary.fps {
            return Err(Error::Unit(summary.fps, fps));
        }
    }
    let mut counts: BTreeMap<PhaseName, usize> = PhaseName::ALL.iter().map(|p| (*p, 0)).collect();
    let total = summary.total_frames();
    let mut covered = 0;
    for shot in &summary.shots {
        let mut inside = 0;
        for (name, phase) in &record.phases {
            let n = shot.overlap(phase);
            *counts.get_mut(name).expect("all phases present") += n;
            inside += n;
        }
        if inside < shot.len() {
            return Err(Error::Coverage(format!(
                "{} frame(s) of summary shot {shot} lie outside every phase of {}",
                shot.len() - inside,
                record.match_id
            )));
        }
        covered += inside;
    }
    debug_assert_eq!(covered, total);
    Ok(counts
        .into_iter()
        .map(|(name, n)| {
            let pct = if total > 0 { 100.0 * n as f64 / total as f64 } else { 0.0 };
            (name, pct)
        })
        .collect())
}

/// Average of per-group distributions weighted by each group's game count.
pub fn weighted_phase_average(groups: &[(usize, PhaseDistribution)]) -> PhaseDistribution {
    let total: usize = groups.iter().map(|(w, _)| w).sum();
    PhaseName::ALL
        .iter()
        .map(|name| {
            let acc: f64 = groups
                .iter()
                .map(|(w, d)| *w as f64 * d.get(name).copied().unwrap_or(0.0))
                .sum();
            (*name, if total > 0 { acc / total as f64 } else { 0.0 })
        })
        .collect()
}
