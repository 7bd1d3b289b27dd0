//! Journal records and the typed events they encode.
//!
//! Every argument value is a string. Token ids, timestamps and durations are
//! decimal integers, amounts are decimal wei, frequencies are `"<n>MHz"`.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::clock::Timestamp;
use crate::money::Wei;
use crate::registry::{FrequencyMhz, SpectrumStatus, TokenId};

pub type EventArgs = IndexMap<String, String>;

/// One line of the event journal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRecord {
    pub seq: u64,
    pub timestamp: Timestamp,
    pub event: String,
    pub args: EventArgs,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LedgerEvent {
    Faucet {
        to: Address,
        amount: Wei,
    },
    TimeAdvanced {
        delta: u64,
        now: Timestamp,
    },
    /// Ownership record created at mint, from the zero address.
    Transfer {
        from: Address,
        to: Address,
        token_id: TokenId,
    },
    NfstMint {
        start_freq: FrequencyMhz,
        end_freq: FrequencyMhz,
        location: String,
        lease_duration: u64,
        token_id: TokenId,
        status: SpectrumStatus,
    },
    UpdateUser {
        token_id: TokenId,
        user: Address,
        expires: Timestamp,
    },
    UpdateSpectrumStatus {
        token_id: TokenId,
        status: SpectrumStatus,
    },
    AuctionStarted {
        token_id: TokenId,
        end_time: Timestamp,
        lease_duration: u64,
        beneficiary: Address,
        starting_price: Wei,
    },
    BidPlaced {
        token_id: TokenId,
        bidder: Address,
        amount: Wei,
    },
    Refund {
        token_id: TokenId,
        bidder: Address,
        amount: Wei,
    },
    AuctionEnded {
        token_id: TokenId,
        winner: Option<Address>,
        amount: Wei,
    },
    Withdrawal {
        token_id: TokenId,
        bidder: Address,
        amount: Wei,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("unknown event {0:?}")]
    UnknownEvent(String),
    #[error("{event}: expected args {expected:?}, found {found:?}")]
    ArgKeys {
        event: String,
        expected: Vec<&'static str>,
        found: Vec<String>,
    },
    #[error("{event}.{key}: bad value {value:?}")]
    BadValue {
        event: String,
        key: &'static str,
        value: String,
    },
}

impl LedgerEvent {
    pub fn name(&self) -> &'static str {
        match self {
            LedgerEvent::Faucet { .. } => "Faucet",
            LedgerEvent::TimeAdvanced { .. } => "TimeAdvanced",
            LedgerEvent::Transfer { .. } => "Transfer",
            LedgerEvent::NfstMint { .. } => "NFSTMint",
            LedgerEvent::UpdateUser { .. } => "UpdateUser",
            LedgerEvent::UpdateSpectrumStatus { .. } => "UpdateSpectrumStatus",
            LedgerEvent::AuctionStarted { .. } => "AuctionStarted",
            LedgerEvent::BidPlaced { .. } => "BidPlaced",
            LedgerEvent::Refund { .. } => "Refund",
            LedgerEvent::AuctionEnded { .. } => "AuctionEnded",
            LedgerEvent::Withdrawal { .. } => "Withdrawal",
        }
    }

    fn keys(name: &str) -> Option<&'static [&'static str]> {
        Some(match name {
            "Faucet" => &["to", "amount"],
            "TimeAdvanced" => &["delta", "now"],
            "Transfer" => &["from", "to", "tokenId"],
            "NFSTMint" => &["startFreq", "endFreq", "location", "leaseDuration", "NFSTID", "status"],
            "UpdateUser" => &["tokenId", "user", "expires"],
            "UpdateSpectrumStatus" => &["tokenId", "status"],
            "AuctionStarted" => &["tokenId", "endTime", "leaseDuration", "beneficiary", "startingPrice"],
            "BidPlaced" | "Refund" | "Withdrawal" => &["tokenId", "bidder", "amount"],
            "AuctionEnded" => &["tokenId", "winner", "amount"],
            _ => return None,
        })
    }

    /// Argument map in the documented key order.
    pub fn args(&self) -> EventArgs {
        let pairs: Vec<String> = match self {
            LedgerEvent::Faucet { to, amount } => vec![to.to_string(), amount.to_string()],
            LedgerEvent::TimeAdvanced { delta, now } => vec![delta.to_string(), now.to_string()],
            LedgerEvent::Transfer { from, to, token_id } => {
                vec![from.to_string(), to.to_string(), token_id.to_string()]
            }
            LedgerEvent::NfstMint {
                start_freq,
                end_freq,
                location,
                lease_duration,
                token_id,
                status,
            } => vec![
                start_freq.to_string(),
                end_freq.to_string(),
                location.clone(),
                lease_duration.to_string(),
                token_id.to_string(),
                status.to_string(),
            ],
            LedgerEvent::UpdateUser { token_id, user, expires } => {
                vec![token_id.to_string(), user.to_string(), expires.to_string()]
            }
            LedgerEvent::UpdateSpectrumStatus { token_id, status } => {
                vec![token_id.to_string(), status.to_string()]
            }
            LedgerEvent::AuctionStarted {
                token_id,
                end_time,
                lease_duration,
                beneficiary,
                starting_price,
            } => vec![
                token_id.to_string(),
                end_time.to_string(),
                lease_duration.to_string(),
                beneficiary.to_string(),
                starting_price.to_string(),
            ],
            LedgerEvent::BidPlaced { token_id, bidder, amount }
            | LedgerEvent::Refund { token_id, bidder, amount }
            | LedgerEvent::Withdrawal { token_id, bidder, amount } => {
                vec![token_id.to_string(), bidder.to_string(), amount.to_string()]
            }
            LedgerEvent::AuctionEnded { token_id, winner, amount } => vec![
                token_id.to_string(),
                winner.map(|w| w.to_string()).unwrap_or_default(),
                amount.to_string(),
            ],
        };
        let keys = Self::keys(self.name()).expect("every variant has a key list");
        keys.iter().map(|k| k.to_string()).zip(pairs).collect()
    }

    /// Strict inverse of [`LedgerEvent::name`] + [`LedgerEvent::args`]: the
    /// key set and order must match exactly.
    pub fn decode(name: &str, args: &EventArgs) -> Result<LedgerEvent, DecodeError> {
        let keys = Self::keys(name).ok_or_else(|| DecodeError::UnknownEvent(name.to_string()))?;
        if !args.keys().map(String::as_str).eq(keys.iter().copied()) {
            return Err(DecodeError::ArgKeys {
                event: name.to_string(),
                expected: keys.to_vec(),
                found: args.keys().cloned().collect(),
            });
        }
        let field = Field { event: name, args };
        Ok(match name {
            "Faucet" => LedgerEvent::Faucet {
                to: field.parse("to")?,
                amount: field.wei("amount")?,
            },
            "TimeAdvanced" => LedgerEvent::TimeAdvanced {
                delta: field.parse("delta")?,
                now: Timestamp(field.parse("now")?),
            },
            "Transfer" => LedgerEvent::Transfer {
                from: field.parse("from")?,
                to: field.parse("to")?,
                token_id: field.parse("tokenId")?,
            },
            "NFSTMint" => LedgerEvent::NfstMint {
                start_freq: field.parse("startFreq")?,
                end_freq: field.parse("endFreq")?,
                location: field.raw("location").to_string(),
                lease_duration: field.parse("leaseDuration")?,
                token_id: field.parse("NFSTID")?,
                status: field.parse("status")?,
            },
            "UpdateUser" => LedgerEvent::UpdateUser {
                token_id: field.parse("tokenId")?,
                user: field.parse("user")?,
                expires: Timestamp(field.parse("expires")?),
            },
            "UpdateSpectrumStatus" => LedgerEvent::UpdateSpectrumStatus {
                token_id: field.parse("tokenId")?,
                status: field.parse("status")?,
            },
            "AuctionStarted" => LedgerEvent::AuctionStarted {
                token_id: field.parse("tokenId")?,
                end_time: Timestamp(field.parse("endTime")?),
                lease_duration: field.parse("leaseDuration")?,
                beneficiary: field.parse("beneficiary")?,
                starting_price: field.wei("startingPrice")?,
            },
            "BidPlaced" => LedgerEvent::BidPlaced {
                token_id: field.parse("tokenId")?,
                bidder: field.parse("bidder")?,
                amount: field.wei("amount")?,
            },
            "Refund" => LedgerEvent::Refund {
                token_id: field.parse("tokenId")?,
                bidder: field.parse("bidder")?,
                amount: field.wei("amount")?,
            },
            "Withdrawal" => LedgerEvent::Withdrawal {
                token_id: field.parse("tokenId")?,
                bidder: field.parse("bidder")?,
                amount: field.wei("amount")?,
            },
            "AuctionEnded" => LedgerEvent::AuctionEnded {
                token_id: field.parse("tokenId")?,
                winner: match field.raw("winner") {
                    "" => None,
                    _ => Some(field.parse("winner")?),
                },
                amount: field.wei("amount")?,
            },
            _ => unreachable!("key table covers every event name"),
        })
    }
}

struct Field<'a> {
    event: &'a str,
    args: &'a EventArgs,
}

impl Field<'_> {
    fn raw(&self, key: &'static str) -> &str {
        self.args.get(key).map(String::as_str).unwrap_or_default()
    }

    fn bad(&self, key: &'static str) -> DecodeError {
        DecodeError::BadValue {
            event: self.event.to_string(),
            key,
            value: self.raw(key).to_string(),
        }
    }

    /// Parses and insists on the canonical spelling, so "01", "+1" or an
    /// upper-case address never make it into a replayed state.
    fn parse<T: std::str::FromStr + std::fmt::Display>(&self, key: &'static str) -> Result<T, DecodeError> {
        let raw = self.raw(key);
        let value: T = raw.parse().map_err(|_| self.bad(key))?;
        if value.to_string() != raw {
            return Err(self.bad(key));
        }
        Ok(value)
    }

    fn wei(&self, key: &'static str) -> Result<Wei, DecodeError> {
        self.parse::<u128>(key).map(Wei::new)
    }
}

impl EventRecord {
    pub fn decode(&self) -> Result<LedgerEvent, DecodeError> {
        LedgerEvent::decode(&self.event, &self.args)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::FrequencyMhz;

    #[test]
    fn mint_args_follow_documented_order() {
        let ev = LedgerEvent::NfstMint {
            start_freq: FrequencyMhz(3350),
            end_freq: FrequencyMhz(3370),
            location: "location1".into(),
            lease_duration: 0,
            token_id: TokenId(1),
            status: SpectrumStatus::Occupied,
        };
        let args = ev.args();
        let rendered: Vec<(&str, &str)> = args.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        assert_eq!(
            rendered,
            vec![
                ("startFreq", "3350MHz"),
                ("endFreq", "3370MHz"),
                ("location", "location1"),
                ("leaseDuration", "0"),
                ("NFSTID", "1"),
                ("status", "Occupied"),
            ]
        );
        assert_eq!(LedgerEvent::decode("NFSTMint", &args).unwrap(), ev);
    }

    #[test]
    fn decode_rejects_reordered_or_extra_keys() {
        let mut args = EventArgs::new();
        args.insert("amount".into(), "5".into());
        args.insert("to".into(), "0x17f6ad8ef982297579c203069c1dbffe4348c372".into());
        assert!(matches!(LedgerEvent::decode("Faucet", &args), Err(DecodeError::ArgKeys { .. })));
        assert!(matches!(LedgerEvent::decode("Mystery", &args), Err(DecodeError::UnknownEvent(_))));
    }

    #[test]
    fn decode_rejects_non_canonical_numbers() {
        let ev = LedgerEvent::UpdateSpectrumStatus { token_id: TokenId(1), status: SpectrumStatus::Idle };
        let mut args = ev.args();
        args.insert("tokenId".into(), "01".into());
        assert!(matches!(
            LedgerEvent::decode("UpdateSpectrumStatus", &args),
            Err(DecodeError::BadValue { key: "tokenId", .. })
        ));
    }

    #[test]
    fn ended_without_winner_renders_empty() {
        let ev = LedgerEvent::AuctionEnded { token_id: TokenId(2), winner: None, amount: Wei::ZERO };
        assert_eq!(ev.args()["winner"], "");
        assert_eq!(LedgerEvent::decode("AuctionEnded", &ev.args()).unwrap(), ev);
    }
}
