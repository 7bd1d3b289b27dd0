//! Scripted runs against a live service.
//!
//! A scenario is a JSON file:
//!
//! ```json
//! {
//!   "name": "demo",
//!   "accounts": { "admin": "0x03C6...", "alice": "0x5B38..." },
//!   "steps": [
//!     { "caller": "@admin", "op": "faucet", "params": { "to": "@alice", "amountEther": "5" } },
//!     { "caller": "@alice", "op": "bid", "params": { "tokenId": 1, "amountEther": "2" },
//!       "expect": { "error": "NoOpenAuction" } },
//!     { "op": "account", "params": { "address": "@alice" },
//!       "expect": { "fields": { "balanceEther": "5.0" } } }
//!   ]
//! }
//! ```
//!
//! Any string of the form `@name` is replaced by the named account. A step
//! without `expect` must succeed; `expect.fields` maps dotted paths into the
//! response data to expected values. Steps run in order and the first
//! failing step stops the run.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use spectrum_client::{ClientError, SpectrumClient};
use spectrum_core::Address;

use crate::ops::{Call, Op};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub accounts: BTreeMap<String, Address>,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub caller: Option<String>,
    pub op: Op,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub expect: Option<Expect>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default)]
    pub fields: Map<String, Value>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("ScenarioParseError: {0}")]
    Parse(String),
    #[error("ServiceUnreachable: {0}")]
    Unreachable(ClientError),
}

/// A step ready to send: aliases resolved and the HTTP call built.
struct Prepared {
    caller: Option<Address>,
    call: Call,
    expect: Expect,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    fn resolve(&self, value: &Value) -> Result<Value, ScenarioError> {
        Ok(match value {
            Value::String(s) => match s.strip_prefix('@') {
                Some(name) => Value::String(self.alias(name)?.to_string()),
                None => value.clone(),
            },
            Value::Array(items) => Value::Array(items.iter().map(|v| self.resolve(v)).collect::<Result<_, _>>()?),
            Value::Object(map) => Value::Object(self.resolve_map(map)?),
            other => other.clone(),
        })
    }

    fn resolve_map(&self, map: &Map<String, Value>) -> Result<Map<String, Value>, ScenarioError> {
        map.iter()
            .map(|(k, v)| {
                // Keys may be dotted field paths; resolve each segment.
                let key = k
                    .split('.')
                    .map(|seg| match seg.strip_prefix('@') {
                        Some(name) => self.alias(name).map(|a| a.to_string()),
                        None => Ok(seg.to_string()),
                    })
                    .collect::<Result<Vec<_>, _>>()?
                    .join(".");
                Ok((key, self.resolve(v)?))
            })
            .collect()
    }

    fn alias(&self, name: &str) -> Result<Address, ScenarioError> {
        self.accounts
            .get(name)
            .copied()
            .ok_or_else(|| ScenarioError::Parse(format!("unknown account @{name}")))
    }

    fn prepare(&self) -> Result<Vec<Prepared>, ScenarioError> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, step)| {
                let at = |e: String| ScenarioError::Parse(format!("step {}: {e}", i + 1));
                let caller = match step.caller.as_deref() {
                    None => None,
                    Some(raw) => Some(match raw.strip_prefix('@') {
                        Some(name) => self.alias(name)?,
                        None => raw.parse().map_err(|e| at(format!("caller: {e}")))?,
                    }),
                };
                let call = step.op.call(&self.resolve(&step.params)?).map_err(|e| at(e.to_string()))?;
                let expect = match &step.expect {
                    None => Expect::default(),
                    Some(expect) => Expect { error: expect.error.clone(), fields: self.resolve_map(&expect.fields)? },
                };
                if expect.error.is_some() && !expect.fields.is_empty() {
                    return Err(at("expect takes either error or fields, not both".into()));
                }
                Ok(Prepared { caller, call, expect })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StepReport {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub op: Op,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caller: Option<Address>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    /// Steps not run because an earlier step failed.
    pub skipped: usize,
    pub final_state_hash: String,
    pub final_seq: u64,
    pub steps: Vec<StepReport>,
}

impl Report {
    pub fn success(&self) -> bool {
        self.failed == 0 && self.skipped == 0
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let mark = if step.passed { "ok  " } else { "FAIL" };
            let _ = write!(out, "{mark} #{:<3} {}", step.index, step.op);
            if let Some(label) = &step.label {
                let _ = write!(out, " ({label})");
            }
            if let Some(detail) = &step.detail {
                let _ = write!(out, ": {detail}");
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "scenario {}: {} passed, {} failed, {} skipped",
            self.name, self.passed, self.failed, self.skipped
        );
        let _ = writeln!(out, "state hash {} at seq {}", self.final_state_hash, self.final_seq);
        out
    }
}

/// Runs every step against the service at `client`'s base URL.
pub async fn run(scenario: &Scenario, client: &SpectrumClient) -> Result<Report, ScenarioError> {
    let prepared = scenario.prepare()?;
    let mut steps = Vec::with_capacity(prepared.len());
    for (i, (step, prep)) in scenario.steps.iter().zip(&prepared).enumerate() {
        let client = match prep.caller {
            Some(caller) => client.clone().with_caller(caller),
            None => client.clone(),
        };
        let result = prep.call.send(&client).await;
        let detail = match result {
            Ok(data) => check_success(&prep.expect, &data),
            Err(ClientError::Api { code, message, .. }) => check_error(&prep.expect, &code, &message),
            Err(other) => return Err(ScenarioError::Unreachable(other)),
        };
        steps.push(StepReport {
            index: i + 1,
            label: step.label.clone(),
            op: step.op,
            caller: prep.caller,
            passed: detail.is_none(),
            detail,
        });
        if steps.last().is_some_and(|s| !s.passed) {
            break;
        }
    }
    let hash = client.state_hash().await.map_err(ScenarioError::Unreachable)?;
    let passed = steps.iter().filter(|s| s.passed).count();
    Ok(Report {
        name: scenario.name.clone(),
        passed,
        failed: steps.len() - passed,
        skipped: scenario.steps.len() - steps.len(),
        final_state_hash: hash.state_hash,
        final_seq: hash.last_seq,
        steps,
    })
}

/// `None` when the expectation holds, else what went wrong.
fn check_success(expect: &Expect, data: &Value) -> Option<String> {
    if let Some(code) = &expect.error {
        return Some(format!("expected {code}, but the call succeeded"));
    }
    let mismatches: Vec<String> = expect
        .fields
        .iter()
        .filter_map(|(path, want)| match lookup(data, path) {
            None => Some(format!("{path}: missing")),
            Some(got) if !values_match(want, got) => Some(format!("{path}: expected {want}, got {got}")),
            Some(_) => None,
        })
        .collect();
    (!mismatches.is_empty()).then(|| mismatches.join("; "))
}

fn check_error(expect: &Expect, code: &str, message: &str) -> Option<String> {
    match &expect.error {
        Some(want) if want == code => None,
        Some(want) => Some(format!("expected {want}, got {code}: {message}")),
        None => Some(format!("{code}: {message}")),
    }
}

/// Follows a dotted path through objects and arrays. A segment that does not
/// exist as a key is retried with the rest of the path joined, so keys that
/// contain dots still resolve.
fn lookup<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    if path.is_empty() {
        return Some(value);
    }
    if let Some(v) = value.as_object().and_then(|m| m.get(path)) {
        return Some(v);
    }
    let (head, tail) = path.split_once('.')?;
    let next = match value {
        Value::Object(map) => map.get(head)?,
        Value::Array(items) => items.get(head.parse::<usize>().ok()?)?,
        _ => return None,
    };
    lookup(next, tail)
}

/// Addresses compare case-insensitively; everything else exactly.
fn values_match(want: &Value, got: &Value) -> bool {
    match (want, got) {
        (Value::String(w), Value::String(g)) if w.parse::<Address>().is_ok() => w.eq_ignore_ascii_case(g),
        _ => want == got,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn scenario(steps: Value) -> Scenario {
        serde_json::from_value(json!({
            "name": "t",
            "accounts": {"a": "0x5B38Da6a701c568545dCfcB03FcB875f56beddC4"},
            "steps": steps,
        }))
        .unwrap()
    }

    #[test]
    fn aliases_resolve_in_params_keys_and_callers() {
        let s = scenario(json!([{
            "caller": "@a", "op": "faucet", "params": {"to": "@a", "amountEther": "1"},
            "expect": {"fields": {"refunds.@a": "1.0"}}
        }]));
        let prepared = s.prepare().unwrap();
        let addr = "0x5b38da6a701c568545dcfcb03fcb875f56beddc4";
        assert_eq!(prepared[0].caller.unwrap().to_string(), addr);
        assert_eq!(prepared[0].call.body.as_ref().unwrap()["to"], addr);
        assert!(prepared[0].expect.fields.contains_key(&format!("refunds.{addr}")));
    }

    #[test]
    fn unknown_alias_and_bad_params_are_parse_errors() {
        assert!(matches!(scenario(json!([{"caller": "@nobody", "op": "idle"}])).prepare(), Err(ScenarioError::Parse(_))));
        assert!(matches!(scenario(json!([{"op": "bid", "params": {}}])).prepare(), Err(ScenarioError::Parse(_))));
        assert!(Scenario::parse(r#"{"name":"x","steps":[{"op":"fly"}]}"#).is_err());
    }

    #[test]
    fn field_checks() {
        let data = json!({"winner": "0x17f6ad8ef982297579c203069c1dbffe4348c372", "refunds": {"0xab": "2.5"}, "list": [{"n": 1}]});
        let expect = |fields: Value| Expect { error: None, fields: fields.as_object().unwrap().clone() };
        assert_eq!(check_success(&expect(json!({"winner": "0x17F6AD8Ef982297579C203069C1DbfFE4348c372"})), &data), None);
        assert_eq!(check_success(&expect(json!({"refunds.0xab": "2.5", "list.0.n": 1})), &data), None);
        assert!(check_success(&expect(json!({"list.1.n": 1})), &data).unwrap().contains("missing"));
        assert!(check_success(&expect(json!({"refunds.0xab": "2.50"})), &data).is_some());
    }

    #[test]
    fn error_expectations() {
        let want = Expect { error: Some("SelfOutbid".into()), fields: Map::new() };
        assert_eq!(check_error(&want, "SelfOutbid", ""), None);
        assert!(check_error(&want, "BidTooLow", "").is_some());
        assert!(check_success(&want, &json!({})).is_some());
        assert!(check_error(&Expect::default(), "BidTooLow", "m").is_some());
    }
}
