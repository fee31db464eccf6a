//! Append-only event log per learner, plus snapshots.
//!
//! Each learner has `<id>.log`, one JSON record per line:
//!
//! ```text
//! {"seq":1,"lid":"L1","ts":1700000000000,"kind":"LearnerCreated","payload":{"name":"Ada"},"crc32":"0c4f1a2b"}
//! ```
//!
//! The checksum covers the line with the `crc32` member removed. A snapshot
//! lives next to the log as `<id>.snap.json`.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::EventBody;
use crate::ids::LearnerId;
use crate::session::{LearnerState, ReplayError, Tutor};

const LOG_EXT: &str = "log";
const SNAP_SUFFIX: &str = ".snap.json";

pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    }
}

/// Deterministic clock for tests: starts at `start`, advances `step` per read.
#[derive(Debug)]
pub struct SteppingClock {
    next: AtomicU64,
    step: u64,
}

impl SteppingClock {
    pub fn new(start: u64, step: u64) -> Self {
        Self { next: AtomicU64::new(start), step }
    }
}

impl Clock for SteppingClock {
    fn now_ms(&self) -> u64 {
        self.next.fetch_add(self.step, Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub seq: u64,
    pub lid: LearnerId,
    pub ts: u64,
    pub body: EventBody,
}

#[derive(Serialize)]
struct LineOut<'a> {
    seq: u64,
    lid: &'a LearnerId,
    ts: u64,
    #[serde(flatten)]
    body: &'a EventBody,
}

#[derive(Deserialize)]
struct LineIn {
    seq: u64,
    lid: LearnerId,
    ts: u64,
    #[serde(flatten)]
    body: serde_json::Value,
    crc32: String,
}

impl EventRecord {
    /// The full log line, without the trailing newline.
    pub fn encode(&self) -> String {
        let mut line = serde_json::to_string(&LineOut {
            seq: self.seq,
            lid: &self.lid,
            ts: self.ts,
            body: &self.body,
        })
        .expect("event records always serialize");
        debug_assert!(line.ends_with('}'));
        let crc = crc32fast::hash(line.as_bytes());
        line.pop();
        line.push_str(&format!(",\"crc32\":\"{crc:08x}\"}}"));
        line
    }

    /// Parses and checks one line. `None` means the line is damaged.
    pub fn decode(line: &str) -> Option<Self> {
        let (head, tail) = line.rsplit_once(",\"crc32\":\"")?;
        let hex = tail.strip_suffix("\"}")?;
        if hex.len() != 8 || !hex.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return None;
        }
        let stored = u32::from_str_radix(hex, 16).ok()?;
        if crc32fast::hash(format!("{head}}}").as_bytes()) != stored {
            return None;
        }
        let raw: LineIn = serde_json::from_str(line).ok()?;
        if raw.crc32 != hex {
            return None;
        }
        let body: EventBody = serde_json::from_value(raw.body).ok()?;
        Some(Self { seq: raw.seq, lid: raw.lid, ts: raw.ts, body })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub learner_id: LearnerId,
    pub as_of_seq: u64,
    pub model: crate::learner::LearnerModel,
    #[serde(default)]
    pub session: Option<crate::session::Session>,
}

impl Snapshot {
    pub fn state(&self) -> LearnerState {
        LearnerState {
            model: self.model.clone(),
            session: self.session.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown learner {0}")]
    UnknownLearner(LearnerId),
    #[error("invalid learner id {0:?}")]
    InvalidLearnerId(String),
    #[error("learner {0} already exists")]
    LearnerExists(LearnerId),
    #[error("sequence conflict: expected {expected}, got {got}")]
    SequenceConflict { expected: u64, got: u64 },
    #[error("log of {learner} is corrupt at sequence {sequence}")]
    CorruptLog { learner: LearnerId, sequence: u64 },
    #[error("snapshot of {0} is unreadable or ahead of its log")]
    CorruptSnapshot(LearnerId),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("i/o failure: {0}")]
    IoFailure(#[from] io::Error),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownLearner(_) => "UnknownLearner",
            Self::InvalidLearnerId(_) => "InvalidLearnerId",
            Self::LearnerExists(_) => "LearnerExists",
            Self::SequenceConflict { .. } => "SequenceConflict",
            Self::CorruptLog { .. } => "CorruptLog",
            Self::CorruptSnapshot(_) => "CorruptSnapshot",
            Self::Replay(_) => "ReplayMismatch",
            Self::IoFailure(_) => "IoFailure",
        }
    }
}

type Cursor = Arc<Mutex<Option<u64>>>;

/// Directory-backed event store. Appends to one learner are serialized;
/// different learners do not contend.
pub struct EventStore {
    dir: PathBuf,
    clock: Arc<dyn Clock>,
    fsync: bool,
    cursors: Mutex<HashMap<LearnerId, Cursor>>,
}

impl std::fmt::Debug for EventStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventStore")
            .field("dir", &self.dir)
            .field("fsync", &self.fsync)
            .finish_non_exhaustive()
    }
}

impl EventStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            clock: Arc::new(SystemClock),
            fsync: true,
            cursors: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_fsync(mut self, fsync: bool) -> Self {
        self.fsync = fsync;
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn log_path(&self, lid: &LearnerId) -> PathBuf {
        self.dir.join(format!("{lid}.{LOG_EXT}"))
    }

    pub fn snapshot_path(&self, lid: &LearnerId) -> PathBuf {
        self.dir.join(format!("{lid}{SNAP_SUFFIX}"))
    }

    fn check_id(lid: &LearnerId) -> Result<(), StoreError> {
        if lid.is_valid() {
            Ok(())
        } else {
            Err(StoreError::InvalidLearnerId(lid.to_string()))
        }
    }

    pub fn exists(&self, lid: &LearnerId) -> bool {
        lid.is_valid() && self.log_path(lid).is_file()
    }

    fn cursor(&self, lid: &LearnerId) -> Cursor {
        let mut map = self.cursors.lock().expect("cursor map poisoned");
        map.entry(lid.clone()).or_default().clone()
    }

    /// Appends one event. With `expected = Some(n)` the write only happens
    /// if `n` is the next sequence number.
    pub fn append(&self, lid: &LearnerId, expected: Option<u64>, body: EventBody) -> Result<u64, StoreError> {
        let mut seqs = self.append_batch(lid, expected, std::slice::from_ref(&body))?;
        Ok(seqs.pop().expect("one event appended"))
    }

    /// Appends events with consecutive sequence numbers in a single write.
    pub fn append_batch(
        &self,
        lid: &LearnerId,
        expected: Option<u64>,
        bodies: &[EventBody],
    ) -> Result<Vec<u64>, StoreError> {
        Self::check_id(lid)?;
        let cursor = self.cursor(lid);
        let mut last = cursor.lock().expect("cursor poisoned");
        let current = match *last {
            Some(n) => n,
            None => self.read_log(lid).map(|r| r.last().map_or(0, |e| e.seq)).or_else(|e| match e {
                StoreError::UnknownLearner(_) => Ok(0),
                e => Err(e),
            })?,
        };
        if let Some(got) = expected {
            if got != current + 1 {
                *last = Some(current);
                return Err(StoreError::SequenceConflict { expected: current + 1, got });
            }
        }
        let mut buf = String::new();
        let mut seqs = Vec::with_capacity(bodies.len());
        for (i, body) in bodies.iter().enumerate() {
            let seq = current + 1 + i as u64;
            let rec = EventRecord {
                seq,
                lid: lid.clone(),
                ts: self.clock.now_ms(),
                body: body.clone(),
            };
            buf.push_str(&rec.encode());
            buf.push('\n');
            seqs.push(seq);
        }
        let mut f = OpenOptions::new().create(true).append(true).open(self.log_path(lid))?;
        f.write_all(buf.as_bytes())?;
        if self.fsync {
            f.sync_data()?;
        }
        *last = Some(current + bodies.len() as u64);
        Ok(seqs)
    }

    /// Creates an empty log. Fails if the learner already has one.
    pub fn create(&self, lid: &LearnerId) -> Result<(), StoreError> {
        Self::check_id(lid)?;
        match OpenOptions::new().write(true).create_new(true).open(self.log_path(lid)) {
            Ok(f) => {
                if self.fsync {
                    f.sync_all()?;
                }
                Ok(())
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(StoreError::LearnerExists(lid.clone())),
            Err(e) => Err(e.into()),
        }
    }

    /// Every record in the log, verified.
    pub fn read_log(&self, lid: &LearnerId) -> Result<Vec<EventRecord>, StoreError> {
        Self::check_id(lid)?;
        let text = match fs::read(self.log_path(lid)) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::UnknownLearner(lid.clone())),
            Err(e) => return Err(e.into()),
        };
        let mut out: Vec<EventRecord> = Vec::new();
        let corrupt = |out: &Vec<EventRecord>| StoreError::CorruptLog {
            learner: lid.clone(),
            sequence: out.last().map_or(1, |e| e.seq + 1),
        };
        let mut rest = &text[..];
        while !rest.is_empty() {
            let Some(nl) = rest.iter().position(|&b| b == b'\n') else {
                // Trailing bytes without a newline: a torn write.
                return Err(corrupt(&out));
            };
            let line = std::str::from_utf8(&rest[..nl]).map_err(|_| corrupt(&out))?;
            rest = &rest[nl + 1..];
            let rec = EventRecord::decode(line).ok_or_else(|| corrupt(&out))?;
            let want = out.last().map_or(1, |e| e.seq + 1);
            if rec.seq != want || &rec.lid != lid {
                return Err(corrupt(&out));
            }
            out.push(rec);
        }
        Ok(out)
    }

    /// Raw log lines, as written.
    pub fn read_lines(&self, lid: &LearnerId) -> Result<Vec<String>, StoreError> {
        Self::check_id(lid)?;
        let text = fs::read_to_string(self.log_path(lid)).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => StoreError::UnknownLearner(lid.clone()),
            _ => e.into(),
        })?;
        Ok(text.lines().map(str::to_owned).collect())
    }

    pub fn read_snapshot(&self, lid: &LearnerId) -> Result<Option<Snapshot>, StoreError> {
        Self::check_id(lid)?;
        match fs::read(self.snapshot_path(lid)) {
            Ok(b) => serde_json::from_slice(&b)
                .map(Some)
                .map_err(|_| StoreError::CorruptSnapshot(lid.clone())),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Folds the whole log from an empty learner.
    pub fn load_from_genesis(&self, tutor: &Tutor, lid: &LearnerId) -> Result<LearnerState, StoreError> {
        let log = self.read_log(lid)?;
        let state = LearnerState::new(lid.clone()).replay(tutor, log.iter().map(|r| &r.body))?;
        Ok(state)
    }

    /// Latest snapshot, if any, plus the events after it.
    pub fn load_learner(&self, tutor: &Tutor, lid: &LearnerId) -> Result<LearnerState, StoreError> {
        let log = self.read_log(lid)?;
        let (start, from) = match self.read_snapshot(lid)? {
            Some(snap) => {
                let last = log.last().map_or(0, |e| e.seq);
                if snap.as_of_seq > last || &snap.learner_id != lid {
                    return Err(StoreError::CorruptSnapshot(lid.clone()));
                }
                (snap.state(), snap.as_of_seq as usize)
            }
            None => (LearnerState::new(lid.clone()), 0),
        };
        Ok(start.replay(tutor, log[from..].iter().map(|r| &r.body))?)
    }

    /// Folds the current log and writes it as the learner's snapshot.
    pub fn snapshot(&self, tutor: &Tutor, lid: &LearnerId) -> Result<Snapshot, StoreError> {
        let log = self.read_log(lid)?;
        let state = self.load_learner(tutor, lid)?;
        let snap = Snapshot {
            learner_id: lid.clone(),
            as_of_seq: log.last().map_or(0, |e| e.seq),
            model: state.model,
            session: state.session,
        };
        let tmp = self.dir.join(format!("{lid}{SNAP_SUFFIX}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            f.write_all(&serde_json::to_vec(&snap).expect("snapshot serializes"))?;
            if self.fsync {
                f.sync_all()?;
            }
        }
        fs::rename(&tmp, self.snapshot_path(lid))?;
        Ok(snap)
    }

    /// Learners with a log, in lexicographic order.
    pub fn list_learners(&self) -> Result<Vec<LearnerId>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some(LOG_EXT) {
                continue;
            }
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                let id = LearnerId::new(stem);
                if id.is_valid() {
                    ids.push(id);
                }
            }
        }
        ids.sort();
        Ok(ids)
    }
}
