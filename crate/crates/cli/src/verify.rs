//! Offline journal check: strict parse plus a full replay.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use spectrum_core::journal::parse_journal;
use spectrum_core::{GenesisConfig, Ledger, ReplayError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Verification {
    pub valid: bool,
    pub final_hash: String,
    pub event_count: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("genesis: {0}")]
    Genesis(String),
    /// The journal itself is bad.
    #[error("{code}: {0}", code = .0.code())]
    Invalid(#[from] ReplayError),
}

/// Reads a genesis file. A full service configuration also works, since it
/// embeds the genesis fields.
pub fn load_genesis(path: &Path) -> Result<GenesisConfig, VerifyError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| VerifyError::Genesis(format!("{}: {e}", path.display())))
}

/// Unlike service startup, a torn final line is an error here.
pub fn verify_journal(journal: &Path, genesis: &GenesisConfig) -> Result<Verification, VerifyError> {
    let text = read(journal)?;
    let records = parse_journal(&text)?;
    let event_count = records.len();
    let ledger = Ledger::replay(genesis.clone(), records)?;
    Ok(Verification { valid: true, final_hash: ledger.state_hash(), event_count })
}

fn read(path: &Path) -> Result<String, VerifyError> {
    fs::read_to_string(path).map_err(|source| VerifyError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use spectrum_core::journal::encode_records;
    use spectrum_core::{fixtures, Command, LedgerState, Wei};

    fn journal_with_two_faucets() -> (String, String) {
        let mut ledger = Ledger::new(fixtures::genesis()).unwrap();
        for _ in 0..2 {
            ledger
                .execute(&Command::Faucet { caller: fixtures::sma(), to: fixtures::winner(), amount: Wei::ether(1) })
                .unwrap();
        }
        (encode_records(ledger.events()), ledger.state_hash())
    }

    #[test]
    fn empty_journal_is_valid_at_genesis() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        fs::write(&path, "").unwrap();
        let v = verify_journal(&path, &fixtures::genesis()).unwrap();
        assert_eq!(v.event_count, 0);
        assert_eq!(v.final_hash, LedgerState::genesis(&fixtures::genesis()).state_hash());
    }

    #[test]
    fn valid_journal_reports_the_replayed_hash() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        let (text, hash) = journal_with_two_faucets();
        fs::write(&path, text).unwrap();
        assert_eq!(
            verify_journal(&path, &fixtures::genesis()).unwrap(),
            Verification { valid: true, final_hash: hash, event_count: 2 }
        );
    }

    #[test]
    fn truncated_last_line_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        let (text, _) = journal_with_two_faucets();
        fs::write(&path, &text[..text.len() - 5]).unwrap();
        let err = verify_journal(&path, &fixtures::genesis()).unwrap_err();
        assert!(matches!(err, VerifyError::Invalid(ReplayError::CorruptJournal(_))), "{err}");
    }
}
