//! Append-only JSONL ledger of per-machine search outcomes.
//!
//! Every line is one self-contained JSON record: which machine, under
//! which budgets and convention, produced which outcome. A search passes
//! its ledger along; before simulating a machine it looks the key up and
//! reuses the recorded outcome, so an interrupted search resumes where it
//! stopped and a finished one replays entirely from the file, performing
//! zero new simulations. Outcomes are deterministic functions of the key,
//! which is what makes reuse sound.
//!
//! Records are never rewritten. Appends go through a mutex, so one ledger
//! can serve a parallel search; the resulting line order is whatever the
//! workers raced to, which is fine because order carries no meaning here.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

pub const SCHEMA_VERSION: u32 = 1;

/// One ledger line. `kind`, `n`, `convention`, `machine`, and `budgets`
/// form the lookup key; the rest is the recorded outcome.
#[derive(Clone, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
pub struct LedgerRecord {
    pub schema_version: u32,
    /// "classical" or "ittm".
    pub kind: String,
    pub n: usize,
    /// The measure the search ran under: "rado", "clean", or "steps".
    pub convention: String,
    /// Compact machine encoding.
    pub machine: String,
    /// "halted", "non-halting:<proof>", "undecided", "value", "diverges",
    /// "not-unary", or "undetermined:<reason>".
    pub outcome: String,
    /// Halting stage (or the stage an undetermined run reached), printed
    /// as `w*b+c`. Informational; reports are rebuilt from `score` alone.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stage: Option<String>,
    /// The machine's contribution under the convention, when it has one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub score: Option<u64>,
    /// Budget fingerprint; outcomes are only reusable under equal budgets.
    pub budgets: String,
    /// Unix seconds at recording time.
    pub timestamp: u64,
}

type LedgerKey = (String, usize, String, String, String);

impl LedgerRecord {
    fn key(&self) -> LedgerKey {
        (
            self.kind.clone(),
            self.n,
            self.convention.clone(),
            self.machine.clone(),
            self.budgets.clone(),
        )
    }
}

struct LedgerState {
    map: HashMap<LedgerKey, LedgerRecord>,
    file: File,
}

/// An open ledger: the file plus an in-memory index of every record.
pub struct Ledger {
    path: PathBuf,
    state: Mutex<LedgerState>,
    appended: AtomicU64,
}

impl Ledger {
    /// Opens or creates the ledger at `path`, loading every existing
    /// record. A malformed line fails the open with its line number.
    pub fn open(path: impl AsRef<Path>) -> io::Result<Ledger> {
        let path = path.as_ref().to_path_buf();
        let mut map = HashMap::new();
        match File::open(&path) {
            Ok(existing) => {
                for (i, line) in BufReader::new(existing).lines().enumerate() {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let record: LedgerRecord =
                        serde_json::from_str(&line).map_err(|e| {
                            io::Error::new(
                                io::ErrorKind::InvalidData,
                                format!("{}:{}: {e}", path.display(), i + 1),
                            )
                        })?;
                    map.insert(record.key(), record);
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Ledger {
            path,
            state: Mutex::new(LedgerState { map, file }),
            appended: AtomicU64::new(0),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// The recorded outcome for a key, if any.
    pub fn lookup(
        &self,
        kind: &str,
        n: usize,
        convention: &str,
        machine: &str,
        budgets: &str,
    ) -> Option<LedgerRecord> {
        let key =
            (kind.to_string(), n, convention.to_string(), machine.to_string(), budgets.to_string());
        self.state.lock().expect("ledger lock").map.get(&key).cloned()
    }

    /// Appends one record and indexes it.
    pub fn record(&self, record: LedgerRecord) -> io::Result<()> {
        let line = serde_json::to_string(&record).expect("records always serialize");
        let mut state = self.state.lock().expect("ledger lock");
        writeln!(state.file, "{line}")?;
        state.map.insert(record.key(), record);
        self.appended.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }

    /// Records appended since this handle was opened. A resumed search
    /// that found everything in the ledger leaves this at zero.
    pub fn appended(&self) -> u64 {
        self.appended.load(Ordering::Relaxed)
    }

    /// Number of records currently indexed.
    pub fn len(&self) -> usize {
        self.state.lock().expect("ledger lock").map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Unix seconds now, for stamping fresh records.
pub fn timestamp_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}
