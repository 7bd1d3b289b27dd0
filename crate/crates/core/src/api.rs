//! JSON bodies exchanged between the HTTP service and its clients.
//!
//! Amounts cross this boundary as decimal ether strings (`"3.5"`);
//! frequencies as `"3350MHz"`; absent addresses as `""` where noted.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::auction::{AuctionView, Settlement};
use crate::clock::{ClockMode, Timestamp};
use crate::event::EventRecord;
use crate::ledger::{Account, Role};
use crate::money::Wei;
use crate::registry::{FrequencyMhz, IdleSpectrum, SpectrumStatus, TokenInfo, UserGrant};

pub const CALLER_HEADER: &str = "X-Caller-Address";

/// Response envelope. `seq` is the last applied event sequence number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub ok: bool,
    pub seq: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MintRequest {
    pub owner: Address,
    pub start_freq_mhz: u64,
    pub end_freq_mhz: u64,
    pub geo_location: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MintResponse {
    pub token_ids: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FaucetRequest {
    pub to: Address,
    pub amount_ether: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdvanceTimeRequest {
    pub seconds: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockResponse {
    pub now: Timestamp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SetUserRequest {
    pub user: Address,
    pub lease_duration_sec: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GrantResponse {
    pub user: Address,
    pub expires: Timestamp,
}

impl From<UserGrant> for GrantResponse {
    fn from(g: UserGrant) -> Self {
        GrantResponse { user: g.user, expires: g.expires }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StartAuctionRequest {
    pub auction_duration_sec: u64,
    pub lease_duration_sec: u64,
    pub beneficiary: Address,
    pub starting_price_ether: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BidRequest {
    #[serde(alias = "amount")]
    pub amount_ether: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AccountResponse {
    pub address: Address,
    pub balance_ether: String,
    pub balance_wei: Wei,
    pub role: Role,
}

impl AccountResponse {
    pub fn new(address: Address, account: Option<&Account>) -> Self {
        let balance = account.map(|a| a.balance).unwrap_or_default();
        AccountResponse {
            address,
            balance_ether: balance.to_ether_string(),
            balance_wei: balance,
            role: account.map(|a| a.role).unwrap_or(Role::Plain),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountsResponse {
    pub accounts: Vec<AccountResponse>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TokenInfoResponse {
    pub token_id: u64,
    pub start_freq: FrequencyMhz,
    pub end_freq: FrequencyMhz,
    pub location: String,
    pub owner: Address,
    pub issuer: Address,
    pub user: Option<Address>,
    pub user_expires: Option<Timestamp>,
    pub status: SpectrumStatus,
}

impl From<TokenInfo> for TokenInfoResponse {
    fn from(t: TokenInfo) -> Self {
        TokenInfoResponse {
            token_id: t.token_id.0,
            start_freq: t.band.start_freq,
            end_freq: t.band.end_freq,
            location: t.band.geo_location,
            owner: t.owner,
            issuer: t.issuer,
            user: t.user,
            user_expires: t.user_expires,
            status: t.status,
        }
    }
}

fn address_or_empty(a: Option<Address>) -> String {
    a.map(|a| a.to_string()).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AuctionInfoResponse {
    pub token_id: u64,
    pub beneficiary: Address,
    pub starting_price: String,
    pub end_time: Timestamp,
    pub lease_duration: u64,
    pub highest_bid: String,
    /// Empty string until a bid is accepted.
    pub highest_bidder: String,
    pub ended: bool,
}

impl From<AuctionView> for AuctionInfoResponse {
    fn from(a: AuctionView) -> Self {
        AuctionInfoResponse {
            token_id: a.token_id.0,
            beneficiary: a.beneficiary,
            starting_price: a.starting_price.to_ether_string(),
            end_time: a.end_time,
            lease_duration: a.lease_duration,
            highest_bid: a.highest_bid.to_ether_string(),
            highest_bidder: address_or_empty(a.highest_bidder),
            ended: a.ended,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IdleEntry {
    pub token_id: u64,
    pub start_freq: FrequencyMhz,
    pub end_freq: FrequencyMhz,
    pub location: String,
    pub owner: Address,
    pub beneficiary: Address,
    pub end_time: Timestamp,
    pub highest_bid: String,
    pub highest_bidder: String,
}

impl From<IdleSpectrum> for IdleEntry {
    fn from(i: IdleSpectrum) -> Self {
        IdleEntry {
            token_id: i.token_id.0,
            start_freq: i.band.start_freq,
            end_freq: i.band.end_freq,
            location: i.band.geo_location,
            owner: i.owner,
            beneficiary: i.beneficiary,
            end_time: i.end_time,
            highest_bid: i.highest_bid.to_ether_string(),
            highest_bidder: address_or_empty(i.highest_bidder),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdleResponse {
    pub idle: Vec<IdleEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettlementResponse {
    /// Empty string when the auction closed without bids.
    pub winner: String,
    pub paid: String,
    pub refunds: BTreeMap<Address, String>,
}

impl From<Settlement> for SettlementResponse {
    fn from(s: Settlement) -> Self {
        SettlementResponse {
            winner: address_or_empty(s.winner),
            paid: s.paid.to_ether_string(),
            refunds: s.refunds.into_iter().map(|(a, w)| (a, w.to_ether_string())).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WithdrawResponse {
    pub refunded: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventsResponse {
    pub events: Vec<EventRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HealthResponse {
    pub status: String,
    pub now: Timestamp,
    pub clock_mode: ClockMode,
    pub sma_address: Address,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateHashResponse {
    pub state_hash: String,
    pub last_seq: u64,
}
