use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::dataset::Shot;
use crate::error::{Error, Result};

/// Greedy non-maximum suppression with any-overlap suppression.
///
/// Proposals are visited by score (descending), then earlier start, then
/// shorter length. A proposal is kept unless it shares a frame with one
/// already kept. The result is sorted by start.
pub fn nms(proposals: &[Shot]) -> Result<Vec<Shot>> {
    let mut ranked: Vec<(f64, Shot)> = proposals
        .iter()
        .map(|p| {
            p.score
                .map(|c| (c, *p))
                .ok_or_else(|| Error::Input(format!("proposal {} has no score", p.interval)))
        })
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.interval.start().cmp(&b.1.interval.start()))
            .then(a.1.interval.len().cmp(&b.1.interval.len()))
    });

    // kept intervals are disjoint, so ends increase with starts
    let mut kept: BTreeMap<usize, Shot> = BTreeMap::new();
    for (_, shot) in ranked {
        let iv = shot.interval;
        let blocked = kept
            .range(..iv.end())
            .next_back()
            .is_some_and(|(_, k)| k.interval.end() > iv.start());
        if !blocked {
            kept.insert(iv.start(), shot);
        }
    }
    Ok(kept.into_values().collect())
}
