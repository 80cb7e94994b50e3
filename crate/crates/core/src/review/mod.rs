//! Human review of alignment proposals.
//!
//! A session's state is a fold of its journal over the initial proposals.
//! Each proposal carries a version that every accepted action bumps, and
//! writers must name the version they saw (optimistic concurrency).

mod store;

use serde::{Deserialize, Serialize};

use crate::alignment::{AlignmentProposal, ProposalStatus};
use crate::dataset::{Interval, SummaryAnnotation};
use crate::error::{Error, Result};

pub use store::{ReviewSession, JOURNAL_FILE, PROPOSALS_FILE, SNAPSHOT_FILE};

/// Default half-width of the review hint window, in seconds.
pub const DEFAULT_HINT_TOLERANCE_S: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Open,
    Finalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "lowercase")]
pub enum ReviewAction {
    Accept,
    Adjust { interval: Interval },
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReviewEvent {
    Action {
        index: usize,
        #[serde(flatten)]
        action: ReviewAction,
    },
    Finalize,
}

/// One journal line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRecord {
    /// 1-based, contiguous.
    pub seq: u64,
    pub timestamp_ms: u64,
    pub reviewer_id: String,
    pub event: ReviewEvent,
}

/// Initial proposals for one match, as written by the aligner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalSet {
    pub match_id: String,
    pub fps: f64,
    /// Broadcast length, used to bound adjustments and hint windows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub broadcast_frames: Option<usize>,
    pub proposals: Vec<AlignmentProposal>,
}

impl ProposalSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::Schema(format!("fps must be positive, got {}", self.fps)));
        }
        for (i, p) in self.proposals.iter().enumerate() {
            let b = p.broadcast_interval;
            if b.fps() != self.fps {
                return Err(Error::Unit(self.fps, b.fps()));
            }
            if self.broadcast_frames.is_some_and(|n| b.end() > n) {
                return Err(Error::Data(format!("proposal {i} {b} is past the broadcast end")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub match_id: String,
    pub fps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub broadcast_frames: Option<usize>,
    pub proposals: Vec<AlignmentProposal>,
    pub versions: Vec<u64>,
    pub status: SessionStatus,
    /// Number of journal records folded in.
    pub applied: u64,
}

impl SessionState {
    pub fn new(set: ProposalSet) -> Result<Self> {
        set.validate()?;
        Ok(SessionState {
            versions: vec![0; set.proposals.len()],
            match_id: set.match_id,
            fps: set.fps,
            broadcast_frames: set.broadcast_frames,
            proposals: set.proposals,
            status: SessionStatus::Open,
            applied: 0,
        })
    }

    /// Replays `records` in order on top of `initial`.
    pub fn replay(initial: ProposalSet, records: &[JournalRecord]) -> Result<Self> {
        let mut state = SessionState::new(initial)?;
        for r in records {
            state.apply(r)?;
        }
        Ok(state)
    }

    pub fn version(&self, index: usize) -> Result<u64> {
        self.versions
            .get(index)
            .copied()
            .ok_or_else(|| Error::Input(format!("no proposal {index} in {}", self.match_id)))
    }

    /// Checks that `event` is legal in the current state without changing it.
    pub fn check(&self, event: &ReviewEvent) -> Result<()> {
        if self.status == SessionStatus::Finalized {
            return Err(Error::State(format!("session {} is finalized", self.match_id)));
        }
        match event {
            ReviewEvent::Finalize => {
                let pending = self.proposals.iter().filter(|p| !p.status.is_reviewed()).count();
                if pending > 0 {
                    return Err(Error::State(format!("{pending} proposal(s) still unreviewed")));
                }
            }
            ReviewEvent::Action { index, action } => {
                self.version(*index)?;
                if let ReviewAction::Adjust { interval } = action {
                    if interval.fps() != self.fps {
                        return Err(Error::Unit(self.fps, interval.fps()));
                    }
                    if let Some(n) = self.broadcast_frames {
                        if interval.end() > n {
                            return Err(Error::Input(format!(
                                "adjusted interval {interval} is past the broadcast end ({n} frames)"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Folds one journal record into the state.
    pub fn apply(&mut self, record: &JournalRecord) -> Result<()> {
        if record.seq != self.applied + 1 {
            return Err(Error::Format(format!(
                "journal record {} follows record {}",
                record.seq, self.applied
            )));
        }
        self.check(&record.event)?;
        match record.event {
            ReviewEvent::Finalize => self.status = SessionStatus::Finalized,
            ReviewEvent::Action { index, action } => {
                let p = &mut self.proposals[index];
                match action {
                    ReviewAction::Accept => {
                        p.status = ProposalStatus::Accepted;
                        p.adjusted_interval = None;
                    }
                    ReviewAction::Adjust { interval } => {
                        p.status = ProposalStatus::Adjusted;
                        p.adjusted_interval = Some(interval);
                    }
                    ReviewAction::Reject => {
                        p.status = ProposalStatus::Rejected;
                        p.adjusted_interval = None;
                    }
                }
                self.versions[index] += 1;
            }
        }
        self.applied = record.seq;
        Ok(())
    }

    /// Ground truth from a finalized session: accepted and adjusted intervals,
    /// normalized, with rejected proposals left out.
    pub fn export(&self) -> Result<SummaryAnnotation> {
        if self.status != SessionStatus::Finalized {
            return Err(Error::State(format!("session {} is not finalized", self.match_id)));
        }
        let kept: Vec<Interval> = self.proposals.iter().filter_map(|p| p.final_interval()).collect();
        SummaryAnnotation::new(self.match_id.clone(), self.fps, &kept)
    }
}

/// The proposal's broadcast interval grown by `tolerance_s` on each side and
/// clamped to `[0, broadcast_frames)`.
pub fn hint_window(
    proposal: &AlignmentProposal,
    tolerance_s: f64,
    broadcast_frames: Option<usize>,
) -> Result<Interval> {
    if !(tolerance_s >= 0.0 && tolerance_s.is_finite()) {
        return Err(Error::Input(format!("tolerance {tolerance_s} s must be non-negative")));
    }
    let b = proposal.broadcast_interval;
    let frames = (tolerance_s * b.fps()).round() as usize;
    Ok(b.dilate(frames, broadcast_frames))
}
