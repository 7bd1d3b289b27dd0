//! JSON Lines encoding of the event journal.
//!
//! One record per line, fields in the order `seq, timestamp, event, args`,
//! every line terminated by `\n`.

use crate::error::ReplayError;
use crate::event::EventRecord;

pub fn encode_record(record: &EventRecord) -> String {
    let mut line = serde_json::to_string(record).expect("event record serializes");
    line.push('\n');
    line
}

pub fn encode_records<'a>(records: impl IntoIterator<Item = &'a EventRecord>) -> String {
    records.into_iter().map(encode_record).collect()
}

/// Parses a whole journal. A final line without its terminating newline is
/// reported as truncated.
pub fn parse_journal(text: &str) -> Result<Vec<EventRecord>, ReplayError> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| ReplayError::CorruptJournal("truncated last line".into()))?;
    body.split('\n')
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str::<EventRecord>(line)
                .map_err(|e| ReplayError::CorruptJournal(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

/// Length of the prefix made of complete (newline-terminated) lines.
pub fn complete_prefix_len(bytes: &[u8]) -> usize {
    bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::Timestamp;
    use crate::event::EventArgs;

    fn record(seq: u64) -> EventRecord {
        let mut args = EventArgs::new();
        args.insert("tokenId".into(), "1".into());
        args.insert("status".into(), "Occupied".into());
        EventRecord { seq, timestamp: Timestamp(1703136913), event: "UpdateSpectrumStatus".into(), args }
    }

    #[test]
    fn line_layout() {
        assert_eq!(
            encode_record(&record(4)),
            "{\"seq\":4,\"timestamp\":1703136913,\"event\":\"UpdateSpectrumStatus\",\"args\":{\"tokenId\":\"1\",\"status\":\"Occupied\"}}\n"
        );
    }

    #[test]
    fn parses_what_it_encodes() {
        let text = encode_records(&[record(1), record(2)]);
        assert_eq!(parse_journal(&text).unwrap(), vec![record(1), record(2)]);
        assert_eq!(parse_journal("").unwrap(), vec![]);
    }

    #[test]
    fn truncated_tail_is_corrupt() {
        let text = encode_records(&[record(1), record(2)]);
        let cut = &text[..text.len() - 5];
        assert!(matches!(parse_journal(cut), Err(ReplayError::CorruptJournal(_))));
        assert_eq!(complete_prefix_len(cut.as_bytes()), encode_record(&record(1)).len());
    }

    #[test]
    fn blank_or_unknown_fields_are_corrupt() {
        assert!(parse_journal("\n").is_err());
        let extra = "{\"seq\":1,\"timestamp\":1,\"event\":\"X\",\"args\":{},\"extra\":1}\n";
        assert!(parse_journal(extra).is_err());
    }
}
