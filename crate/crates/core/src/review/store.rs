//! File-backed review sessions.
//!
//! Layout of a session directory:
//! `proposals.json` (initial [`ProposalSet`]), `journal.jsonl` (one
//! [`JournalRecord`] per line) and an optional `snapshot.json`.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{JournalRecord, ProposalSet, ReviewAction, ReviewEvent, SessionState};
use crate::alignment::AlignmentProposal;
use crate::dataset::SummaryAnnotation;
use crate::error::{Error, Result};

pub const PROPOSALS_FILE: &str = "proposals.json";
pub const JOURNAL_FILE: &str = "journal.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";

const DEFAULT_SNAPSHOT_EVERY: u64 = 64;

#[derive(Serialize, Deserialize)]
struct Snapshot {
    state: SessionState,
}

pub struct ReviewSession {
    dir: PathBuf,
    state: SessionState,
    journal: File,
    snapshot_every: u64,
}

impl std::fmt::Debug for ReviewSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReviewSession")
            .field("dir", &self.dir)
            .field("applied", &self.state.applied)
            .finish()
    }
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

/// Reads complete journal lines. A final line without its newline is a torn
/// write and is dropped; returns the byte length of the intact prefix.
fn read_journal(path: &Path) -> Result<(Vec<JournalRecord>, u64)> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Vec::new(), 0)),
        Err(e) => return Err(e.into()),
    };
    let mut reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut good = 0u64;
    let mut line = String::new();
    let mut lineno = 0;
    loop {
        line.clear();
        let n = reader.read_line(&mut line)?;
        if n == 0 {
            break;
        }
        lineno += 1;
        if !line.ends_with('\n') {
            log::warn!("{}: ignoring torn record at line {lineno}", path.display());
            break;
        }
        let record: JournalRecord = serde_json::from_str(line.trim_end())
            .map_err(|e| Error::Format(format!("{} line {lineno}: {e}", path.display())))?;
        records.push(record);
        good += n as u64;
    }
    Ok((records, good))
}

impl ReviewSession {
    /// Writes the initial proposals into a fresh session directory.
    pub fn create(dir: impl AsRef<Path>, set: &ProposalSet) -> Result<Self> {
        let dir = dir.as_ref();
        set.validate()?;
        fs::create_dir_all(dir)?;
        if dir.join(PROPOSALS_FILE).exists() {
            return Err(Error::State(format!("{} already holds a session", dir.display())));
        }
        let mut text = serde_json::to_string_pretty(set)?;
        text.push('\n');
        write_atomic(&dir.join(PROPOSALS_FILE), text.as_bytes())?;
        Self::open(dir)
    }

    /// Opens a session and replays its journal. A corrupt journal (an
    /// unparsable complete line or an illegal event) refuses to open.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let initial: ProposalSet = serde_json::from_str(&fs::read_to_string(dir.join(PROPOSALS_FILE))?)?;
        let journal_path = dir.join(JOURNAL_FILE);
        let (records, good_len) = read_journal(&journal_path)?;

        let mut state = match Self::read_snapshot(&dir) {
            Some(s) if s.applied <= records.len() as u64 && s.match_id == initial.match_id => s,
            _ => SessionState::new(initial)?,
        };
        for r in &records[state.applied as usize..] {
            state
                .apply(r)
                .map_err(|e| Error::Format(format!("{} record {}: {e}", journal_path.display(), r.seq)))?;
        }

        let journal = OpenOptions::new().create(true).append(true).open(&journal_path)?;
        if journal.metadata()?.len() > good_len {
            journal.set_len(good_len)?;
            journal.sync_data()?;
        }
        Ok(ReviewSession {
            dir,
            state,
            journal,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
        })
    }

    fn read_snapshot(dir: &Path) -> Option<SessionState> {
        let text = fs::read_to_string(dir.join(SNAPSHOT_FILE)).ok()?;
        match serde_json::from_str::<Snapshot>(&text) {
            Ok(s) => Some(s.state),
            Err(e) => {
                log::warn!("{}: ignoring unreadable snapshot: {e}", dir.display());
                None
            }
        }
    }

    pub fn with_snapshot_every(mut self, events: u64) -> Self {
        self.snapshot_every = events.max(1);
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn proposal(&self, index: usize) -> Result<&AlignmentProposal> {
        self.state
            .proposals
            .get(index)
            .ok_or_else(|| Error::Input(format!("no proposal {index} in {}", self.state.match_id)))
    }

    /// Applies a reviewer action if `expected_version` is still current.
    /// The journal line is on disk before this returns.
    pub fn act(
        &mut self,
        index: usize,
        action: ReviewAction,
        expected_version: u64,
        reviewer_id: &str,
        timestamp_ms: u64,
    ) -> Result<&AlignmentProposal> {
        let current = self.state.version(index)?;
        if current != expected_version {
            return Err(Error::Conflict {
                index,
                expected: expected_version,
                current,
            });
        }
        self.commit(ReviewEvent::Action { index, action }, reviewer_id, timestamp_ms)?;
        Ok(&self.state.proposals[index])
    }

    pub fn finalize(&mut self, reviewer_id: &str, timestamp_ms: u64) -> Result<()> {
        self.commit(ReviewEvent::Finalize, reviewer_id, timestamp_ms)
    }

    pub fn export_ground_truth(&self) -> Result<SummaryAnnotation> {
        self.state.export()
    }

    fn commit(&mut self, event: ReviewEvent, reviewer_id: &str, timestamp_ms: u64) -> Result<()> {
        self.state.check(&event)?;
        let record = JournalRecord {
            seq: self.state.applied + 1,
            timestamp_ms,
            reviewer_id: reviewer_id.to_string(),
            event,
        };
        let mut line = serde_json::to_string(&record)?;
        line.push('\n');
        self.journal.write_all(line.as_bytes())?;
        self.journal.flush()?;
        self.journal.sync_data()?;
        self.state.apply(&record)?;
        if self.state.applied.is_multiple_of(self.snapshot_every) {
            if let Err(e) = self.write_snapshot() {
                log::warn!("{}: snapshot failed: {e}", self.dir.display());
            }
        }
        Ok(())
    }

    fn write_snapshot(&self) -> Result<()> {
        let text = serde_json::to_string(&Snapshot {
            state: self.state.clone(),
        })?;
        write_atomic(&self.dir.join(SNAPSHOT_FILE), text.as_bytes())
    }
}
