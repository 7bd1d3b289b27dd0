//! On-disk layout of a ledger data directory.
//!
//! ```text
//! genesis.json     genesis parameters the journal was produced under
//! journal.jsonl    one event record per line, fsynced per command
//! snapshot.json    latest snapshot, replaced atomically
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use spectrum_core::journal::{complete_prefix_len, encode_records, parse_journal};
use spectrum_core::{EventRecord, GenesisConfig, Ledger, ReplayError, Snapshot};
use tracing::{info, warn};

use crate::StartupError;

pub const GENESIS_FILE: &str = "genesis.json";
pub const JOURNAL_FILE: &str = "journal.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";

/// Durable destination for committed events and snapshots.
pub trait Persistence: Send + 'static {
    /// Must not return before `records` are durable.
    fn append(&mut self, records: &[EventRecord]) -> io::Result<()>;
    fn write_snapshot(&mut self, snapshot: &Snapshot) -> io::Result<()>;
}

pub struct FileStore {
    dir: PathBuf,
    journal: File,
    /// Journal length after the last durable append.
    durable_len: u64,
}

impl FileStore {
    /// Opens (or initializes) `dir` and rebuilds the ledger it holds.
    pub fn open(dir: &Path, genesis: &GenesisConfig) -> Result<(FileStore, Ledger), StartupError> {
        fs::create_dir_all(dir)?;
        check_genesis(dir, genesis)?;

        let journal_path = dir.join(JOURNAL_FILE);
        let records = read_journal_recovering(&journal_path)?;
        let ledger = match read_snapshot(dir) {
            Some(snapshot) => {
                let at = snapshot.last_seq;
                let ledger = Ledger::restore(genesis.clone(), snapshot, records)?;
                info!(snapshot_seq = at, last_seq = ledger.state().last_seq(), "restored from snapshot");
                ledger
            }
            None => Ledger::replay(genesis.clone(), records)?,
        };

        let journal = OpenOptions::new().create(true).append(true).open(&journal_path)?;
        let durable_len = journal.metadata()?.len();
        Ok((FileStore { dir: dir.to_path_buf(), journal, durable_len }, ledger))
    }
}

impl Persistence for FileStore {
    fn append(&mut self, records: &[EventRecord]) -> io::Result<()> {
        // One write per command keeps its records together on disk.
        let bytes = encode_records(records);
        let result = self
            .journal
            .write_all(bytes.as_bytes())
            .and_then(|()| self.journal.sync_data());
        match result {
            Ok(()) => {
                self.durable_len += bytes.len() as u64;
                Ok(())
            }
            Err(e) => {
                // Cut off whatever part of the failed write landed so the next
                // append starts on a clean line.
                if let Err(trunc) = self.journal.set_len(self.durable_len) {
                    warn!(error = %trunc, "could not roll back a failed journal append");
                }
                Err(e)
            }
        }
    }

    fn write_snapshot(&mut self, snapshot: &Snapshot) -> io::Result<()> {
        let tmp = self.dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        {
            let mut file = File::create(&tmp)?;
            serde_json::to_writer(&mut file, snapshot)?;
            file.sync_all()?;
        }
        fs::rename(&tmp, self.dir.join(SNAPSHOT_FILE))?;
        File::open(&self.dir)?.sync_all()
    }
}

fn check_genesis(dir: &Path, genesis: &GenesisConfig) -> Result<(), StartupError> {
    let path = dir.join(GENESIS_FILE);
    match fs::read_to_string(&path) {
        Ok(text) => {
            let stored: GenesisConfig = serde_json::from_str(&text)
                .map_err(|e| StartupError::Config(format!("{}: {e}", path.display())))?;
            if &stored != genesis {
                return Err(ReplayError::GenesisMismatch(format!(
                    "{} was initialized with a different genesis",
                    dir.display()
                ))
                .into());
            }
            Ok(())
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            let tmp = dir.join(format!("{GENESIS_FILE}.tmp"));
            fs::write(&tmp, serde_json::to_vec_pretty(genesis).expect("genesis serializes"))?;
            fs::rename(&tmp, &path)?;
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

/// Reads the journal, dropping a torn final line left by a crash mid-write.
/// Such a line was never acknowledged, so discarding it loses nothing.
fn read_journal_recovering(path: &Path) -> Result<Vec<EventRecord>, StartupError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let complete = complete_prefix_len(&bytes);
    if complete < bytes.len() {
        warn!(dropped_bytes = bytes.len() - complete, "truncating torn journal tail");
        let file = OpenOptions::new().write(true).open(path)?;
        file.set_len(complete as u64)?;
        file.sync_all()?;
    }
    let text = std::str::from_utf8(&bytes[..complete])
        .map_err(|e| ReplayError::CorruptJournal(format!("journal is not UTF-8: {e}")))?;
    Ok(parse_journal(text)?)
}

fn read_snapshot(dir: &Path) -> Option<Snapshot> {
    let path = dir.join(SNAPSHOT_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return None,
        Err(e) => {
            warn!(error = %e, "cannot read snapshot, replaying the full journal");
            return None;
        }
    };
    match serde_json::from_str(&text) {
        Ok(snapshot) => Some(snapshot),
        Err(e) => {
            // The journal is the source of truth; a bad snapshot only costs time.
            warn!(error = %e, "ignoring unreadable snapshot, replaying the full journal");
            None
        }
    }
}
