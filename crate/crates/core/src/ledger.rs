//! The ledger state machine.
//!
//! Commands are validated against the current state and turned into events
//! (`decide`); events are folded into the state (`apply`). The live path and
//! journal replay share the fold, so a journal is a complete description of
//! the state it produced.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::address::Address;
use crate::auction::{AuctionView, Settlement};
use crate::clock::{ClockMode, SystemClock, Timestamp, WallClock};
use crate::error::{CommandError, ReplayError};
use crate::event::{EventRecord, LedgerEvent};
use crate::genesis::GenesisConfig;
use crate::money::{checked_sum, Wei};
use crate::registry::{FrequencyMhz, SpectrumBand, TokenId, TokenInfo, UserGrant};

/// Informational account label. Ordered by precedence: an account is only
/// ever promoted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Role {
    Plain,
    Su,
    Pu,
    Sma,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub balance: Wei,
    pub role: Role,
}

impl Account {
    pub(crate) fn promote(&mut self, role: Role) {
        self.role = self.role.max(role);
    }
}

/// An event that cannot be folded into the current state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApplyError(String);

impl ApplyError {
    pub(crate) fn new(msg: impl Into<String>) -> Self {
        ApplyError(msg.into())
    }
}

impl fmt::Display for ApplyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Complete ledger state, minus the event list.
///
/// Field order is the canonical serialization order used by
/// [`LedgerState::state_hash`]; every map is a `BTreeMap` so iteration is
/// key-sorted. Do not reorder fields without accepting that every stored
/// hash changes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerState {
    pub(crate) clock: Timestamp,
    pub(crate) last_seq: u64,
    pub(crate) issuance: Wei,
    pub(crate) accounts: BTreeMap<Address, Account>,
    pub(crate) owners: BTreeMap<TokenId, Address>,
    pub(crate) tokens: BTreeMap<TokenId, crate::registry::NfstRecord>,
    pub(crate) auctions: BTreeMap<TokenId, Vec<crate::auction::Auction>>,
}

impl LedgerState {
    pub fn genesis(genesis: &GenesisConfig) -> Self {
        let mut accounts = BTreeMap::new();
        accounts.insert(genesis.sma_address, Account { balance: Wei::ZERO, role: Role::Sma });
        LedgerState {
            clock: genesis.genesis_time,
            last_seq: 0,
            issuance: Wei::ZERO,
            accounts,
            owners: BTreeMap::new(),
            tokens: BTreeMap::new(),
            auctions: BTreeMap::new(),
        }
    }

    pub fn clock(&self) -> Timestamp {
        self.clock
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    pub fn total_issuance(&self) -> Wei {
        self.issuance
    }

    pub fn balance_of(&self, addr: Address) -> Wei {
        self.accounts.get(&addr).map(|a| a.balance).unwrap_or_default()
    }

    pub fn account(&self, addr: Address) -> Option<&Account> {
        self.accounts.get(&addr)
    }

    pub fn accounts(&self) -> impl Iterator<Item = (&Address, &Account)> {
        self.accounts.iter()
    }

    pub fn total_balances(&self) -> Wei {
        checked_sum(self.accounts.values().map(|a| a.balance)).expect("balances bounded by issuance")
    }

    /// Σ balances + Σ escrow = Σ issuance.
    pub fn conservation_holds(&self) -> bool {
        self.total_balances().checked_add(self.total_escrow()) == Some(self.issuance)
    }

    /// Hex SHA-256 over the canonical JSON encoding of the state.
    pub fn state_hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("ledger state serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub(crate) fn account_mut(&mut self, addr: Address) -> &mut Account {
        self.accounts
            .entry(addr)
            .or_insert(Account { balance: Wei::ZERO, role: Role::Plain })
    }

    pub(crate) fn credit(&mut self, addr: Address, amount: Wei) -> Result<(), ApplyError> {
        let account = self.account_mut(addr);
        account.balance = account
            .balance
            .checked_add(amount)
            .ok_or_else(|| ApplyError::new(format!("balance overflow for {addr}")))?;
        Ok(())
    }

    pub(crate) fn debit(&mut self, addr: Address, amount: Wei) -> Result<(), ApplyError> {
        let account = self.account_mut(addr);
        account.balance = account
            .balance
            .checked_sub(amount)
            .ok_or_else(|| ApplyError::new(format!("{addr} cannot cover {amount} wei")))?;
        Ok(())
    }

    fn decide(&self, genesis: &GenesisConfig, cmd: &Command) -> Result<Vec<LedgerEvent>, CommandError> {
        match cmd {
            Command::Faucet { caller, to, amount } => {
                if *caller != genesis.sma_address {
                    return Err(CommandError::NotAuthorized);
                }
                if amount.is_zero() {
                    return Err(CommandError::ZeroAmount);
                }
                if to.is_zero() {
                    return Err(CommandError::ZeroAddress);
                }
                self.issuance.checked_add(*amount).ok_or(CommandError::Overflow)?;
                self.balance_of(*to).checked_add(*amount).ok_or(CommandError::Overflow)?;
                Ok(vec![LedgerEvent::Faucet { to: *to, amount: *amount }])
            }
            Command::AdvanceTime { caller, seconds } => {
                if genesis.clock_mode != ClockMode::Sim {
                    return Err(CommandError::NotSimMode);
                }
                if *caller != genesis.sma_address {
                    return Err(CommandError::NotAuthorized);
                }
                if *seconds == 0 {
                    return Err(CommandError::ZeroDelta);
                }
                let now = self.clock.checked_add_secs(*seconds).ok_or(CommandError::Overflow)?;
                Ok(vec![LedgerEvent::TimeAdvanced { delta: *seconds, now }])
            }
            Command::Mint { caller, owner, start_freq, end_freq, geo_location } => {
                self.decide_mint(genesis, *caller, *owner, *start_freq, *end_freq, geo_location)
            }
            Command::SetUser { caller, token_id, user, lease_duration } => {
                self.decide_set_user(*caller, *token_id, *user, *lease_duration)
            }
            Command::StartAuction {
                caller,
                token_id,
                auction_duration,
                lease_duration,
                beneficiary,
                starting_price,
            } => self.decide_start_auction(
                *caller,
                *token_id,
                *auction_duration,
                *lease_duration,
                *beneficiary,
                *starting_price,
            ),
            Command::Bid { caller, token_id, amount } => self.decide_bid(*caller, *token_id, *amount),
            Command::EndAuction { caller, token_id } => self.decide_end_auction(*caller, *token_id),
            Command::Withdraw { caller, token_id } => self.decide_withdraw(*caller, *token_id),
        }
    }

    pub(crate) fn apply_event(&mut self, genesis: &GenesisConfig, event: &LedgerEvent) -> Result<(), ApplyError> {
        match event {
            LedgerEvent::Faucet { to, amount } => {
                if amount.is_zero() {
                    return Err(ApplyError::new("zero faucet credit"));
                }
                self.issuance = self
                    .issuance
                    .checked_add(*amount)
                    .ok_or_else(|| ApplyError::new("issuance overflow"))?;
                self.credit(*to, *amount)
            }
            LedgerEvent::TimeAdvanced { delta, now } => {
                if genesis.clock_mode != ClockMode::Sim || *delta == 0 {
                    return Err(ApplyError::new("time advance outside sim mode or by zero"));
                }
                if self.clock.checked_add_secs(*delta) != Some(*now) {
                    return Err(ApplyError::new(format!("advance by {delta}s does not reach {now}")));
                }
                self.clock = *now;
                Ok(())
            }
            LedgerEvent::Transfer { from, to, token_id } => self.apply_transfer(*from, *to, *token_id),
            LedgerEvent::NfstMint { start_freq, end_freq, location, lease_duration, token_id, status } => self
                .apply_nfst_mint(
                    genesis,
                    SpectrumBand {
                        start_freq: *start_freq,
                        end_freq: *end_freq,
                        geo_location: location.clone(),
                    },
                    *lease_duration,
                    *token_id,
                    *status,
                ),
            LedgerEvent::UpdateUser { token_id, user, expires } => self.apply_update_user(*token_id, *user, *expires),
            LedgerEvent::UpdateSpectrumStatus { token_id, status } => self.apply_update_status(*token_id, *status),
            LedgerEvent::AuctionStarted { token_id, end_time, lease_duration, beneficiary, starting_price } => self
                .apply_auction_started(*token_id, *end_time, *lease_duration, *beneficiary, *starting_price),
            LedgerEvent::BidPlaced { token_id, bidder, amount } => self.apply_bid(*token_id, *bidder, *amount),
            LedgerEvent::Refund { token_id, bidder, amount }
            | LedgerEvent::Withdrawal { token_id, bidder, amount } => self.apply_return(*token_id, *bidder, *amount),
            LedgerEvent::AuctionEnded { token_id, winner, amount } => {
                self.apply_auction_ended(*token_id, *winner, *amount)
            }
        }
    }

    /// Folds one journal record, checking its sequence number and timestamp.
    fn replay_record(&mut self, genesis: &GenesisConfig, record: &EventRecord) -> Result<(), ReplayError> {
        let corrupt = |why: String| ReplayError::CorruptJournal(format!("seq {}: {why}", record.seq));
        if record.seq != self.last_seq + 1 {
            return Err(ReplayError::CorruptJournal(format!(
                "expected seq {}, found {}",
                self.last_seq + 1,
                record.seq
            )));
        }
        if record.timestamp < genesis.genesis_time {
            return Err(ReplayError::GenesisMismatch(format!(
                "seq {} is stamped {} before genesis time {}",
                record.seq, record.timestamp, genesis.genesis_time
            )));
        }
        if record.timestamp < self.clock {
            return Err(corrupt(format!("clock moves back from {} to {}", self.clock, record.timestamp)));
        }
        let event = record.decode().map_err(|e| corrupt(e.to_string()))?;
        match genesis.clock_mode {
            ClockMode::Wall => self.clock = record.timestamp,
            ClockMode::Sim => {
                if !matches!(event, LedgerEvent::TimeAdvanced { .. }) && record.timestamp != self.clock {
                    return Err(corrupt(format!("timestamp {} differs from sim clock {}", record.timestamp, self.clock)));
                }
            }
        }
        self.apply_event(genesis, &event).map_err(|e| corrupt(e.to_string()))?;
        if self.clock != record.timestamp {
            return Err(corrupt(format!("timestamp {} differs from clock {}", record.timestamp, self.clock)));
        }
        self.last_seq = record.seq;
        Ok(())
    }

    /// Structural checks that only hold at command boundaries.
    fn check_consistency(&self) -> Result<(), ReplayError> {
        if !self.owners.keys().eq(self.tokens.keys()) {
            return Err(ReplayError::CorruptJournal("journal ends inside a mint".into()));
        }
        if !self.conservation_holds() {
            return Err(ReplayError::CorruptJournal("balances and escrow do not match issuance".into()));
        }
        Ok(())
    }
}

/// A state-changing request. `caller` is the authenticated address.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Command {
    Faucet { caller: Address, to: Address, amount: Wei },
    AdvanceTime { caller: Address, seconds: u64 },
    Mint {
        caller: Address,
        owner: Address,
        start_freq: FrequencyMhz,
        end_freq: FrequencyMhz,
        geo_location: String,
    },
    SetUser { caller: Address, token_id: TokenId, user: Address, lease_duration: u64 },
    StartAuction {
        caller: Address,
        token_id: TokenId,
        auction_duration: u64,
        lease_duration: u64,
        beneficiary: Address,
        starting_price: Wei,
    },
    Bid { caller: Address, token_id: TokenId, amount: Wei },
    EndAuction { caller: Address, token_id: TokenId },
    Withdraw { caller: Address, token_id: TokenId },
}

impl Command {
    pub fn caller(&self) -> Address {
        match self {
            Command::Faucet { caller, .. }
            | Command::AdvanceTime { caller, .. }
            | Command::Mint { caller, .. }
            | Command::SetUser { caller, .. }
            | Command::StartAuction { caller, .. }
            | Command::Bid { caller, .. }
            | Command::EndAuction { caller, .. }
            | Command::Withdraw { caller, .. } => *caller,
        }
    }
}

/// What a successful command returns to its caller.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Balance(Wei),
    Clock(Timestamp),
    Minted(Vec<TokenId>),
    Grant(UserGrant),
    Auction(AuctionView),
    Settlement(Settlement),
    Refunded(Wei),
}

fn outcome_for(cmd: &Command, events: &[LedgerEvent], state: &LedgerState) -> Outcome {
    match cmd {
        Command::Faucet { to, .. } => Outcome::Balance(state.balance_of(*to)),
        Command::AdvanceTime { .. } => Outcome::Clock(state.clock),
        Command::Mint { .. } => Outcome::Minted(
            events
                .iter()
                .filter_map(|e| match e {
                    LedgerEvent::NfstMint { token_id, .. } => Some(*token_id),
                    _ => None,
                })
                .collect(),
        ),
        Command::SetUser { token_id, .. } => {
            Outcome::Grant(state.tokens[token_id].grant.expect("grant was just set"))
        }
        Command::StartAuction { token_id, .. } | Command::Bid { token_id, .. } => {
            Outcome::Auction(state.latest_auction(*token_id).expect("auction exists").view())
        }
        Command::EndAuction { .. } => {
            let mut settlement = Settlement { winner: None, paid: Wei::ZERO, refunds: BTreeMap::new() };
            for event in events {
                match event {
                    LedgerEvent::Refund { bidder, amount, .. } => {
                        settlement.refunds.insert(*bidder, *amount);
                    }
                    LedgerEvent::AuctionEnded { winner, amount, .. } => {
                        settlement.winner = *winner;
                        settlement.paid = *amount;
                    }
                    _ => {}
                }
            }
            Outcome::Settlement(settlement)
        }
        Command::Withdraw { .. } => Outcome::Refunded(
            events
                .iter()
                .find_map(|e| match e {
                    LedgerEvent::Withdrawal { amount, .. } => Some(*amount),
                    _ => None,
                })
                .unwrap_or_default(),
        ),
    }
}

/// A validated command whose effects are computed but not yet visible.
///
/// Persist [`Staged::records`] first, then hand the value to
/// [`Ledger::commit`]. Dropping it discards the command.
#[derive(Debug)]
pub struct Staged {
    state: LedgerState,
    records: Vec<EventRecord>,
    outcome: Outcome,
    base_seq: u64,
}

impl Staged {
    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn outcome(&self) -> &Outcome {
        &self.outcome
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Applied {
    pub outcome: Outcome,
    pub records: Vec<EventRecord>,
    pub last_seq: u64,
}

/// Serialized state at a command boundary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub genesis_fingerprint: String,
    pub last_seq: u64,
    pub state_hash: String,
    pub state: LedgerState,
}

/// A ledger instance: genesis, current state and the full event list.
#[derive(Clone)]
pub struct Ledger {
    genesis: GenesisConfig,
    state: Arc<LedgerState>,
    events: Vec<EventRecord>,
    wall_clock: Arc<dyn WallClock>,
}

impl fmt::Debug for Ledger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ledger")
            .field("genesis", &self.genesis)
            .field("last_seq", &self.state.last_seq)
            .finish_non_exhaustive()
    }
}

impl Ledger {
    pub fn new(genesis: GenesisConfig) -> Result<Self, ReplayError> {
        if genesis.min_alloc_mhz == 0 {
            return Err(ReplayError::InvalidGenesis("min_alloc_mhz must be positive".into()));
        }
        if genesis.sma_address.is_zero() {
            return Err(ReplayError::InvalidGenesis("sma_address must not be the zero address".into()));
        }
        Ok(Ledger {
            state: Arc::new(LedgerState::genesis(&genesis)),
            genesis,
            events: Vec::new(),
            wall_clock: Arc::new(SystemClock),
        })
    }

    /// Replaces the system clock used in wall mode.
    pub fn with_wall_clock(mut self, clock: Arc<dyn WallClock>) -> Self {
        self.wall_clock = clock;
        self
    }

    /// Rebuilds a ledger by folding a journal from genesis.
    pub fn replay(genesis: GenesisConfig, records: Vec<EventRecord>) -> Result<Self, ReplayError> {
        let mut ledger = Ledger::new(genesis)?;
        let mut state = LedgerState::genesis(&ledger.genesis);
        for record in &records {
            state.replay_record(&ledger.genesis, record)?;
        }
        state.check_consistency()?;
        ledger.state = Arc::new(state);
        ledger.events = records;
        Ok(ledger)
    }

    /// Rebuilds a ledger from a snapshot plus the full journal, folding only
    /// the records after the snapshot.
    pub fn restore(genesis: GenesisConfig, snapshot: Snapshot, records: Vec<EventRecord>) -> Result<Self, ReplayError> {
        let mut ledger = Ledger::new(genesis)?;
        if snapshot.genesis_fingerprint != ledger.genesis.fingerprint() {
            return Err(ReplayError::GenesisMismatch("snapshot was taken under a different genesis".into()));
        }
        if snapshot.state.state_hash() != snapshot.state_hash || snapshot.state.last_seq != snapshot.last_seq {
            return Err(ReplayError::CorruptJournal("snapshot does not match its recorded hash".into()));
        }
        let cut = usize::try_from(snapshot.last_seq).expect("seq fits in usize");
        if records.len() < cut {
            return Err(ReplayError::CorruptJournal(format!(
                "journal has {} records but the snapshot covers {}",
                records.len(),
                snapshot.last_seq
            )));
        }
        for (i, record) in records[..cut].iter().enumerate() {
            if record.seq != i as u64 + 1 {
                return Err(ReplayError::CorruptJournal(format!("expected seq {}, found {}", i + 1, record.seq)));
            }
        }
        let mut state = snapshot.state;
        for record in &records[cut..] {
            state.replay_record(&ledger.genesis, record)?;
        }
        state.check_consistency()?;
        ledger.state = Arc::new(state);
        ledger.events = records;
        Ok(ledger)
    }

    pub fn genesis(&self) -> &GenesisConfig {
        &self.genesis
    }

    pub fn state(&self) -> &Arc<LedgerState> {
        &self.state
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    /// Records with `seq > since`.
    pub fn events_since(&self, since: u64) -> &[EventRecord] {
        let start = usize::try_from(since).unwrap_or(usize::MAX).min(self.events.len());
        &self.events[start..]
    }

    pub fn now(&self) -> Timestamp {
        self.state.clock
    }

    pub fn state_hash(&self) -> String {
        self.state.state_hash()
    }

    /// The time a command staged right now would run at. Equals [`Ledger::now`]
    /// in sim mode; in wall mode the ledger clock lags until the next command.
    pub fn observed_time(&self) -> Timestamp {
        match self.genesis.clock_mode {
            ClockMode::Sim => self.state.clock,
            ClockMode::Wall => self.state.clock.max(self.wall_clock.now()),
        }
    }

    /// Current user of a token, evaluated at [`Ledger::observed_time`].
    pub fn user_of(&self, token_id: TokenId) -> Result<Option<Address>, CommandError> {
        self.state.user_of_at(token_id, self.observed_time())
    }

    pub fn token_info(&self, token_id: TokenId) -> Result<TokenInfo, CommandError> {
        self.state.token_info_at(token_id, self.observed_time())
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            genesis_fingerprint: self.genesis.fingerprint(),
            last_seq: self.state.last_seq,
            state_hash: self.state.state_hash(),
            state: (*self.state).clone(),
        }
    }

    /// Validates `cmd` and computes its effects without changing the ledger.
    pub fn stage(&self, cmd: &Command) -> Result<Staged, CommandError> {
        let mut next = (*self.state).clone();
        next.clock = self.observed_time();
        let events = next.decide(&self.genesis, cmd)?;
        let base_seq = next.last_seq;
        let mut records = Vec::with_capacity(events.len());
        for event in &events {
            next.apply_event(&self.genesis, event)
                .map_err(|e| CommandError::Internal(e.to_string()))?;
            next.last_seq += 1;
            records.push(EventRecord {
                seq: next.last_seq,
                timestamp: next.clock,
                event: event.name().to_string(),
                args: event.args(),
            });
        }
        let outcome = outcome_for(cmd, &events, &next);
        Ok(Staged { state: next, records, outcome, base_seq })
    }

    /// Makes a staged command visible.
    ///
    /// # Panics
    ///
    /// If another command was committed after `staged` was produced.
    pub fn commit(&mut self, staged: Staged) -> Applied {
        assert_eq!(staged.base_seq, self.state.last_seq, "staged command is stale");
        let last_seq = staged.state.last_seq;
        self.state = Arc::new(staged.state);
        self.events.extend(staged.records.iter().cloned());
        Applied { outcome: staged.outcome, records: staged.records, last_seq }
    }

    pub fn execute(&mut self, cmd: &Command) -> Result<Applied, CommandError> {
        let staged = self.stage(cmd)?;
        Ok(self.commit(staged))
    }
}
