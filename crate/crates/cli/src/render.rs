//! Human-readable output. `--json` bypasses all of this.

use serde_json::Value;

use crate::ops::Op;

pub fn human(op: Op, data: &Value) -> String {
    match op {
        Op::Idle => idle_table(data),
        Op::Events => event_lines(data),
        Op::Accounts => table(
            &["ADDRESS", "BALANCE", "ROLE"],
            rows(&data["accounts"], &["address", "balanceEther", "role"]),
        ),
        _ => fields(data),
    }
}

fn idle_table(data: &Value) -> String {
    table(
        &["ID", "START", "END", "LOCATION", "BENEFICIARY", "ENDS AT", "HIGHEST BID", "BIDDER"],
        rows(
            &data["idle"],
            &["tokenId", "startFreq", "endFreq", "location", "beneficiary", "endTime", "highestBid", "highestBidder"],
        ),
    )
}

fn event_lines(data: &Value) -> String {
    let mut out = String::new();
    for event in data["events"].as_array().into_iter().flatten() {
        let args = event["args"]
            .as_object()
            .map(|args| args.iter().map(|(k, v)| format!("{k}={}", scalar(v))).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        out.push_str(&format!("{:>6} {} {} {args}\n", scalar(&event["seq"]), scalar(&event["timestamp"]), scalar(&event["event"])));
    }
    out
}

fn rows(list: &Value, keys: &[&str]) -> Vec<Vec<String>> {
    list.as_array()
        .into_iter()
        .flatten()
        .map(|item| keys.iter().map(|k| scalar(&item[*k])).collect())
        .collect()
}

fn table(headers: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    for row in &rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

/// One `key: value` line per field of an object.
fn fields(data: &Value) -> String {
    let Some(map) = data.as_object() else {
        return format!("{}\n", scalar(data));
    };
    let width = map.keys().map(String::len).max().unwrap_or(0);
    map.iter().map(|(k, v)| format!("{k:<width$}  {}\n", scalar(v))).collect()
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) if s.is_empty() => "-".into(),
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}
