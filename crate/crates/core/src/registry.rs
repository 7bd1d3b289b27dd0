//! Spectrum tokens: band metadata, minting, separated owner and user roles.
//!
//! A token's user grant is never cleared by a command. It simply stops being
//! effective once the ledger clock passes `expires`, which is what makes the
//! lease reset automatic.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::address::Address;
use crate::clock::Timestamp;
use crate::error::CommandError;
use crate::event::LedgerEvent;
use crate::genesis::GenesisConfig;
use crate::ledger::{ApplyError, LedgerState, Role};

/// Upper bound on tokens created by a single mint call.
pub const MAX_TOKENS_PER_MINT: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub u64);

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for TokenId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(TokenId)
    }
}

/// A frequency in whole MHz, rendered as `"3350MHz"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrequencyMhz(pub u64);

impl fmt::Display for FrequencyMhz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}MHz", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid frequency {0:?}: expected <integer>MHz")]
pub struct FrequencyParseError(String);

impl FromStr for FrequencyMhz {
    type Err = FrequencyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_suffix("MHz").ok_or_else(|| FrequencyParseError(s.to_string()))?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(FrequencyParseError(s.to_string()));
        }
        digits.parse().map(FrequencyMhz).map_err(|_| FrequencyParseError(s.to_string()))
    }
}

impl Serialize for FrequencyMhz {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FrequencyMhz {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumBand {
    pub start_freq: FrequencyMhz,
    pub end_freq: FrequencyMhz,
    pub geo_location: String,
}

impl SpectrumBand {
    pub fn width_mhz(&self) -> u64 {
        self.end_freq.0.saturating_sub(self.start_freq.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserGrant {
    pub user: Address,
    pub expires: Timestamp,
}

impl UserGrant {
    /// Effective through `expires` inclusive, void strictly after.
    pub fn is_effective_at(&self, now: Timestamp) -> bool {
        now <= self.expires
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpectrumStatus {
    Idle,
    Occupied,
}

impl fmt::Display for SpectrumStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumStatus::Idle => "Idle",
            SpectrumStatus::Occupied => "Occupied",
        })
    }
}

impl FromStr for SpectrumStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Idle" => Ok(SpectrumStatus::Idle),
            "Occupied" => Ok(SpectrumStatus::Occupied),
            other => Err(format!("unknown status {other:?}")),
        }
    }
}

/// Stored per-token metadata. Ownership lives in a separate map, as in ERC721.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct NfstRecord {
    pub(crate) band: SpectrumBand,
    pub(crate) issuer: Address,
    pub(crate) grant: Option<UserGrant>,
}

/// Read-only view of one token.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TokenInfo {
    pub token_id: TokenId,
    pub band: SpectrumBand,
    pub owner: Address,
    pub issuer: Address,
    pub user: Option<Address>,
    pub user_expires: Option<Timestamp>,
    pub status: SpectrumStatus,
}

/// Entry of the idle-spectrum listing: a token with an open auction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IdleSpectrum {
    pub token_id: TokenId,
    pub band: SpectrumBand,
    pub owner: Address,
    pub beneficiary: Address,
    pub end_time: Timestamp,
    pub highest_bid: crate::money::Wei,
    pub highest_bidder: Option<Address>,
}

/// Splits `[start, end)` into consecutive `min_alloc`-wide chunks.
///
/// Widths that are not an exact multiple of `min_alloc` are refused instead
/// of minting a last chunk that runs past `end`.
pub fn split_band(
    start: FrequencyMhz,
    end: FrequencyMhz,
    min_alloc: u64,
) -> Result<Vec<(FrequencyMhz, FrequencyMhz)>, CommandError> {
    if min_alloc == 0 {
        return Err(CommandError::InvalidBand("allocation unit is zero".into()));
    }
    if start >= end {
        return Err(CommandError::InvalidBand(format!("{start} is not below {end}")));
    }
    let width = end.0 - start.0;
    if width % min_alloc != 0 {
        return Err(CommandError::MisalignedBand { width, min_alloc });
    }
    let tokens = width / min_alloc;
    if tokens > MAX_TOKENS_PER_MINT {
        return Err(CommandError::MintTooLarge { tokens, limit: MAX_TOKENS_PER_MINT });
    }
    Ok((0..tokens)
        .map(|i| {
            let lo = start.0 + i * min_alloc;
            (FrequencyMhz(lo), FrequencyMhz(lo + min_alloc))
        })
        .collect())
}

impl LedgerState {
    pub(crate) fn decide_mint(
        &self,
        genesis: &GenesisConfig,
        caller: Address,
        owner: Address,
        start: FrequencyMhz,
        end: FrequencyMhz,
        geo_location: &str,
    ) -> Result<Vec<LedgerEvent>, CommandError> {
        if caller != genesis.sma_address {
            return Err(CommandError::NotAuthorized);
        }
        if owner.is_zero() {
            return Err(CommandError::ZeroAddress);
        }
        if geo_location.trim().is_empty() {
            return Err(CommandError::InvalidBand("geo location is empty".into()));
        }
        let chunks = split_band(start, end, genesis.min_alloc_mhz)?;
        let first = self.next_token_id();
        let mut events = Vec::with_capacity(chunks.len() * 2);
        for (i, (lo, hi)) in chunks.into_iter().enumerate() {
            let token_id = TokenId(first.0 + i as u64);
            events.push(LedgerEvent::Transfer { from: Address::ZERO, to: owner, token_id });
            events.push(LedgerEvent::NfstMint {
                start_freq: lo,
                end_freq: hi,
                location: geo_location.to_string(),
                lease_duration: 0,
                token_id,
                status: SpectrumStatus::Occupied,
            });
        }
        Ok(events)
    }

    pub(crate) fn decide_set_user(
        &self,
        caller: Address,
        token_id: TokenId,
        user: Address,
        lease_duration: u64,
    ) -> Result<Vec<LedgerEvent>, CommandError> {
        let owner = self.owner_of(token_id)?;
        if caller != owner {
            return Err(CommandError::NotAuthorized);
        }
        if user.is_zero() {
            return Err(CommandError::ZeroAddress);
        }
        if lease_duration == 0 {
            return Err(CommandError::ZeroDuration);
        }
        // A direct grant during an open auction would block its settlement.
        if self.open_auction(token_id).is_some() {
            return Err(CommandError::AuctionAlreadyOpen(token_id));
        }
        if self.user_of(token_id)?.is_some() {
            return Err(CommandError::AlreadyLeased(token_id));
        }
        let expires = self.clock().checked_add_secs(lease_duration).ok_or(CommandError::Overflow)?;
        Ok(vec![
            LedgerEvent::UpdateUser { token_id, user, expires },
            LedgerEvent::UpdateSpectrumStatus { token_id, status: SpectrumStatus::Occupied },
        ])
    }

    pub(crate) fn apply_transfer(
        &mut self,
        from: Address,
        to: Address,
        token_id: TokenId,
    ) -> Result<(), ApplyError> {
        if !from.is_zero() {
            return Err(ApplyError::new("ownership transfers are not supported"));
        }
        if to.is_zero() {
            return Err(ApplyError::new("mint to the zero address"));
        }
        if token_id != self.next_token_id() {
            return Err(ApplyError::new(format!("token {token_id} minted out of sequence")));
        }
        self.owners.insert(token_id, to);
        self.account_mut(to).promote(Role::Pu);
        Ok(())
    }

    pub(crate) fn apply_nfst_mint(
        &mut self,
        genesis: &GenesisConfig,
        band: SpectrumBand,
        lease_duration: u64,
        token_id: TokenId,
        status: SpectrumStatus,
    ) -> Result<(), ApplyError> {
        if !self.owners.contains_key(&token_id) || self.tokens.contains_key(&token_id) {
            return Err(ApplyError::new(format!("NFSTMint for token {token_id} without a fresh Transfer")));
        }
        if lease_duration != 0 || status != SpectrumStatus::Occupied {
            return Err(ApplyError::new("minted token must be Occupied with no lease"));
        }
        if band.start_freq >= band.end_freq || band.width_mhz() != genesis.min_alloc_mhz {
            return Err(ApplyError::new(format!("band {}..{} is not one allocation unit", band.start_freq, band.end_freq)));
        }
        if band.geo_location.trim().is_empty() {
            return Err(ApplyError::new("empty geo location"));
        }
        self.tokens.insert(
            token_id,
            NfstRecord { band, issuer: genesis.sma_address, grant: None },
        );
        Ok(())
    }

    pub(crate) fn apply_update_user(
        &mut self,
        token_id: TokenId,
        user: Address,
        expires: Timestamp,
    ) -> Result<(), ApplyError> {
        let now = self.clock();
        let record = self
            .tokens
            .get_mut(&token_id)
            .ok_or_else(|| ApplyError::new(format!("UpdateUser for unknown token {token_id}")))?;
        if record.grant.is_some_and(|g| g.is_effective_at(now)) {
            return Err(ApplyError::new(format!("token {token_id} already has an effective user")));
        }
        if expires <= now || user.is_zero() {
            return Err(ApplyError::new("grant must name a user and expire in the future"));
        }
        record.grant = Some(UserGrant { user, expires });
        Ok(())
    }

    pub(crate) fn apply_update_status(
        &self,
        token_id: TokenId,
        status: SpectrumStatus,
    ) -> Result<(), ApplyError> {
        let derived = self
            .status_of(token_id)
            .map_err(|_| ApplyError::new(format!("status update for unknown token {token_id}")))?;
        if derived != status {
            return Err(ApplyError::new(format!(
                "status {status} recorded for token {token_id} whose derived status is {derived}"
            )));
        }
        Ok(())
    }

    pub(crate) fn next_token_id(&self) -> TokenId {
        TokenId(self.owners.len() as u64 + 1)
    }

    fn record(&self, token_id: TokenId) -> Result<&NfstRecord, CommandError> {
        self.tokens.get(&token_id).ok_or(CommandError::UnknownToken(token_id))
    }

    pub fn token_ids(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.tokens.keys().copied()
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn owner_of(&self, token_id: TokenId) -> Result<Address, CommandError> {
        self.owners.get(&token_id).copied().ok_or(CommandError::UnknownToken(token_id))
    }

    /// The lessee while the grant is effective, `None` otherwise.
    pub fn user_of(&self, token_id: TokenId) -> Result<Option<Address>, CommandError> {
        self.user_of_at(token_id, self.clock())
    }

    /// The user as seen at `now`. Expiry is purely a read-time check.
    pub fn user_of_at(&self, token_id: TokenId, now: Timestamp) -> Result<Option<Address>, CommandError> {
        Ok(self
            .record(token_id)?
            .grant
            .filter(|g| g.is_effective_at(now))
            .map(|g| g.user))
    }

    /// Expiry of the last grant, kept after it lapses.
    pub fn user_expires(&self, token_id: TokenId) -> Result<Option<Timestamp>, CommandError> {
        Ok(self.record(token_id)?.grant.map(|g| g.expires))
    }

    pub fn status_of(&self, token_id: TokenId) -> Result<SpectrumStatus, CommandError> {
        self.record(token_id)?;
        Ok(if self.open_auction(token_id).is_some() {
            SpectrumStatus::Idle
        } else {
            SpectrumStatus::Occupied
        })
    }

    pub fn band_of(&self, token_id: TokenId) -> Result<&SpectrumBand, CommandError> {
        Ok(&self.record(token_id)?.band)
    }

    pub fn token_info(&self, token_id: TokenId) -> Result<TokenInfo, CommandError> {
        self.token_info_at(token_id, self.clock())
    }

    pub fn token_info_at(&self, token_id: TokenId, now: Timestamp) -> Result<TokenInfo, CommandError> {
        let record = self.record(token_id)?;
        Ok(TokenInfo {
            token_id,
            band: record.band.clone(),
            owner: self.owner_of(token_id)?,
            issuer: record.issuer,
            user: self.user_of_at(token_id, now)?,
            user_expires: record.grant.map(|g| g.expires),
            status: self.status_of(token_id)?,
        })
    }

    /// Tokens with an open auction, ascending by id.
    pub fn list_idle(&self) -> Vec<IdleSpectrum> {
        self.tokens
            .iter()
            .filter_map(|(&token_id, record)| {
                let auction = self.open_auction(token_id)?;
                Some(IdleSpectrum {
                    token_id,
                    band: record.band.clone(),
                    owner: self.owners[&token_id],
                    beneficiary: auction.beneficiary,
                    end_time: auction.end_time,
                    highest_bid: auction.highest_bid,
                    highest_bidder: auction.highest_bidder,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_rendering() {
        assert_eq!(FrequencyMhz(3350).to_string(), "3350MHz");
        assert_eq!("3370MHz".parse::<FrequencyMhz>().unwrap(), FrequencyMhz(3370));
        for bad in ["3370", "MHz", "-5MHz", "33.5MHz", "3370mhz"] {
            assert!(bad.parse::<FrequencyMhz>().is_err(), "{bad}");
        }
    }

    #[test]
    fn single_unit_band_is_one_token() {
        let chunks = split_band(FrequencyMhz(3350), FrequencyMhz(3370), 20).unwrap();
        assert_eq!(chunks, vec![(FrequencyMhz(3350), FrequencyMhz(3370))]);
    }

    #[test]
    fn band_split_edges() {
        assert!(matches!(
            split_band(FrequencyMhz(3370), FrequencyMhz(3350), 20),
            Err(CommandError::InvalidBand(_))
        ));
        assert!(matches!(
            split_band(FrequencyMhz(3350), FrequencyMhz(3350), 20),
            Err(CommandError::InvalidBand(_))
        ));
        assert_eq!(
            split_band(FrequencyMhz(3350), FrequencyMhz(3375), 20),
            Err(CommandError::MisalignedBand { width: 25, min_alloc: 20 })
        );
        assert!(matches!(
            split_band(FrequencyMhz(0), FrequencyMhz(u64::MAX - 1), 2),
            Err(CommandError::MintTooLarge { .. })
        ));
    }

    #[test]
    fn grant_boundary_is_inclusive() {
        let grant = UserGrant { user: Address::from_bytes([7; 20]), expires: Timestamp(1703136913) };
        assert!(grant.is_effective_at(Timestamp(1703136913)));
        assert!(!grant.is_effective_at(Timestamp(1703136914)));
    }
}
