//! Mapping from operation names to HTTP calls. Shared by the direct
//! subcommands and the scenario runner.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use spectrum_client::{ClientError, Method, SpectrumClient};

/// Every operation the service exposes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Op {
    Mint,
    Faucet,
    AdvanceTime,
    SetUser,
    Start,
    Bid,
    End,
    Withdraw,
    Idle,
    Info,
    Auction,
    Account,
    Accounts,
    Events,
    Health,
    StateHash,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = serde_json::to_value(self).expect("op serializes");
        f.write_str(name.as_str().expect("op is a string"))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{op}: {message}")]
pub struct ParamError {
    pub op: Op,
    pub message: String,
}

/// A concrete request: method, path and optional JSON body.
#[derive(Clone, Debug, PartialEq)]
pub struct Call {
    pub post: bool,
    pub path: String,
    pub body: Option<Value>,
}

impl Op {
    pub fn is_mutating(self) -> bool {
        matches!(
            self,
            Op::Mint | Op::Faucet | Op::AdvanceTime | Op::SetUser | Op::Start | Op::Bid | Op::End | Op::Withdraw
        )
    }

    /// Builds the call for this operation. Route parameters (`tokenId`,
    /// `address`, `since`) are taken out of `params`; the rest is the body.
    pub fn call(self, params: &Value) -> Result<Call, ParamError> {
        let mut rest = match params {
            Value::Object(map) => map.clone(),
            Value::Null => Map::new(),
            _ => return Err(self.error("params must be an object")),
        };
        let token = |rest: &mut Map<String, Value>| -> Result<u64, ParamError> {
            rest.remove("tokenId")
                .and_then(|v| v.as_u64())
                .ok_or_else(|| self.error("tokenId (a non-negative integer) is required"))
        };
        let (post, path) = match self {
            Op::Mint => (true, "admin/mint".to_string()),
            Op::Faucet => (true, "admin/faucet".to_string()),
            Op::AdvanceTime => (true, "admin/advance-time".to_string()),
            Op::SetUser => (true, format!("nfst/{}/user", token(&mut rest)?)),
            Op::Start => (true, format!("auction/{}/start", token(&mut rest)?)),
            Op::Bid => (true, format!("auction/{}/bid", token(&mut rest)?)),
            Op::End => (true, format!("auction/{}/end", token(&mut rest)?)),
            Op::Withdraw => (true, format!("auction/{}/withdraw", token(&mut rest)?)),
            Op::Idle => (false, "spectrum/idle".to_string()),
            Op::Info => (false, format!("nfst/{}", token(&mut rest)?)),
            Op::Auction => (false, format!("auction/{}", token(&mut rest)?)),
            Op::Account => {
                let address = rest
                    .remove("address")
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .ok_or_else(|| self.error("address is required"))?;
                (false, format!("accounts/{address}"))
            }
            Op::Accounts => (false, "accounts".to_string()),
            Op::Events => {
                let since = match rest.remove("since") {
                    None => 0,
                    Some(v) => v.as_u64().ok_or_else(|| self.error("since must be a non-negative integer"))?,
                };
                (false, format!("events?since={since}"))
            }
            Op::Health => (false, "healthz".to_string()),
            Op::StateHash => (false, "state-hash".to_string()),
        };
        let body = match (post, rest.is_empty()) {
            (true, false) => Some(Value::Object(rest)),
            (true, true) => None,
            (false, true) => None,
            (false, false) => {
                let keys: Vec<_> = rest.keys().cloned().collect();
                return Err(self.error(format!("unexpected params {keys:?}")));
            }
        };
        Ok(Call { post, path, body })
    }

    fn error(self, message: impl Into<String>) -> ParamError {
        ParamError { op: self, message: message.into() }
    }
}

impl Call {
    /// Sends the call and returns the envelope's `data`.
    pub async fn send(&self, client: &SpectrumClient) -> Result<Value, ClientError> {
        let method = if self.post { Method::POST } else { Method::GET };
        Ok(client.call::<Value, Value>(method, &self.path, self.body.as_ref()).await?.data)
    }
}
