//! English auction of a token's lease term.
//!
//! Every accepted bid is escrowed in full. When a bid is displaced, its hold
//! moves into `pending_returns` for the displaced bidder, who can withdraw it
//! at any time. Ending the auction sweeps whatever is still pending back to
//! its owners, pays the winning hold to the beneficiary and grants the lease.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::clock::Timestamp;
use crate::error::CommandError;
use crate::event::LedgerEvent;
use crate::ledger::{ApplyError, LedgerState, Role};
use crate::money::{checked_sum, Wei};
use crate::registry::{SpectrumStatus, TokenId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Auction {
    pub token_id: TokenId,
    pub beneficiary: Address,
    pub starting_price: Wei,
    pub end_time: Timestamp,
    pub lease_duration: u64,
    pub highest_bidder: Option<Address>,
    pub highest_bid: Wei,
    /// Displaced holds. Entries are removed once refunded.
    pub pending_returns: BTreeMap<Address, Wei>,
    /// First-bid order, no duplicates.
    pub bidders: Vec<Address>,
    pub ended: bool,
}

impl Auction {
    /// Funds of the current highest bidder held by the auction.
    pub fn live_hold(&self) -> Wei {
        if self.highest_bidder.is_some() && !self.ended {
            self.highest_bid
        } else {
            Wei::ZERO
        }
    }

    pub fn pending_total(&self) -> Wei {
        checked_sum(self.pending_returns.values().copied()).expect("pending returns bounded by issuance")
    }

    /// Everything this auction currently holds on behalf of bidders.
    pub fn escrow(&self) -> Wei {
        self.live_hold()
            .checked_add(self.pending_total())
            .expect("escrow bounded by issuance")
    }

    pub fn pending_for(&self, bidder: Address) -> Wei {
        self.pending_returns.get(&bidder).copied().unwrap_or_default()
    }

    pub fn view(&self) -> AuctionView {
        AuctionView {
            token_id: self.token_id,
            beneficiary: self.beneficiary,
            starting_price: self.starting_price,
            end_time: self.end_time,
            lease_duration: self.lease_duration,
            highest_bid: self.highest_bid,
            highest_bidder: self.highest_bidder,
            ended: self.ended,
        }
    }

    /// Smallest acceptable next bid and whether it must be exceeded.
    fn minimum_bid(&self) -> (Wei, bool) {
        match self.highest_bidder {
            None => (self.starting_price, false),
            Some(_) => (self.highest_bid, true),
        }
    }

    fn accepts(&self, amount: Wei) -> bool {
        if amount.is_zero() {
            return false;
        }
        match self.minimum_bid() {
            (min, false) => amount >= min,
            (min, true) => amount > min,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AuctionView {
    pub token_id: TokenId,
    pub beneficiary: Address,
    pub starting_price: Wei,
    pub end_time: Timestamp,
    pub lease_duration: u64,
    pub highest_bid: Wei,
    pub highest_bidder: Option<Address>,
    pub ended: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Settlement {
    pub winner: Option<Address>,
    pub paid: Wei,
    pub refunds: BTreeMap<Address, Wei>,
}

impl LedgerState {
    pub(crate) fn decide_start_auction(
        &self,
        caller: Address,
        token_id: TokenId,
        auction_duration: u64,
        lease_duration: u64,
        beneficiary: Address,
        starting_price: Wei,
    ) -> Result<Vec<LedgerEvent>, CommandError> {
        let owner = self.owner_of(token_id)?;
        if caller != owner {
            return Err(CommandError::NotAuthorized);
        }
        if auction_duration == 0 || lease_duration == 0 {
            return Err(CommandError::ZeroDuration);
        }
        if beneficiary.is_zero() {
            return Err(CommandError::ZeroAddress);
        }
        if self.open_auction(token_id).is_some() {
            return Err(CommandError::AuctionAlreadyOpen(token_id));
        }
        if self.user_of(token_id)?.is_some() {
            return Err(CommandError::CurrentlyLeased(token_id));
        }
        let end_time = self.clock().checked_add_secs(auction_duration).ok_or(CommandError::Overflow)?;
        Ok(vec![
            LedgerEvent::AuctionStarted {
                token_id,
                end_time,
                lease_duration,
                beneficiary,
                starting_price,
            },
            LedgerEvent::UpdateSpectrumStatus { token_id, status: SpectrumStatus::Idle },
        ])
    }

    pub(crate) fn decide_bid(
        &self,
        caller: Address,
        token_id: TokenId,
        amount: Wei,
    ) -> Result<Vec<LedgerEvent>, CommandError> {
        let owner = self.owner_of(token_id)?;
        let auction = self.open_auction(token_id).ok_or(CommandError::NoOpenAuction(token_id))?;
        if self.clock() > auction.end_time {
            return Err(CommandError::AuctionExpired { token: token_id, end_time: auction.end_time });
        }
        if caller == owner || caller == auction.beneficiary {
            return Err(CommandError::OwnerBid);
        }
        if auction.highest_bidder == Some(caller) {
            return Err(CommandError::SelfOutbid);
        }
        if !auction.accepts(amount) {
            let (minimum, strict) = auction.minimum_bid();
            return Err(CommandError::BidTooLow { minimum, strict });
        }
        let balance = self.balance_of(caller);
        if balance < amount {
            return Err(CommandError::InsufficientFunds { balance, needed: amount });
        }
        if let Some(prev) = auction.highest_bidder {
            auction.pending_for(prev).checked_add(auction.highest_bid).ok_or(CommandError::Overflow)?;
        }
        Ok(vec![LedgerEvent::BidPlaced { token_id, bidder: caller, amount }])
    }

    pub(crate) fn decide_end_auction(
        &self,
        caller: Address,
        token_id: TokenId,
    ) -> Result<Vec<LedgerEvent>, CommandError> {
        let owner = self.owner_of(token_id)?;
        if caller != owner {
            return Err(CommandError::NotAuthorized);
        }
        let auction = self.latest_auction(token_id).ok_or(CommandError::NoOpenAuction(token_id))?;
        if auction.ended {
            return Err(CommandError::AlreadyEnded(token_id));
        }
        if self.clock() <= auction.end_time {
            return Err(CommandError::AuctionStillRunning { token: token_id, end_time: auction.end_time });
        }
        let mut events: Vec<LedgerEvent> = auction
            .bidders
            .iter()
            .filter_map(|&bidder| {
                let amount = auction.pending_for(bidder);
                (!amount.is_zero()).then_some(LedgerEvent::Refund { token_id, bidder, amount })
            })
            .collect();
        let winner = auction.highest_bidder;
        events.push(LedgerEvent::AuctionEnded {
            token_id,
            winner,
            amount: if winner.is_some() { auction.highest_bid } else { Wei::ZERO },
        });
        if let Some(user) = winner {
            let expires = self
                .clock()
                .checked_add_secs(auction.lease_duration)
                .ok_or(CommandError::Overflow)?;
            events.push(LedgerEvent::UpdateUser { token_id, user, expires });
        }
        events.push(LedgerEvent::UpdateSpectrumStatus { token_id, status: SpectrumStatus::Occupied });
        Ok(events)
    }

    pub(crate) fn decide_withdraw(
        &self,
        caller: Address,
        token_id: TokenId,
    ) -> Result<Vec<LedgerEvent>, CommandError> {
        self.owner_of(token_id)?;
        let auction = self.latest_auction(token_id).ok_or(CommandError::NoAuction(token_id))?;
        let amount = auction.pending_for(caller);
        if amount.is_zero() {
            return Err(CommandError::NothingToWithdraw);
        }
        Ok(vec![LedgerEvent::Withdrawal { token_id, bidder: caller, amount }])
    }

    pub(crate) fn apply_auction_started(
        &mut self,
        token_id: TokenId,
        end_time: Timestamp,
        lease_duration: u64,
        beneficiary: Address,
        starting_price: Wei,
    ) -> Result<(), ApplyError> {
        if !self.tokens.contains_key(&token_id) {
            return Err(ApplyError::new(format!("auction for unknown token {token_id}")));
        }
        if self.open_auction(token_id).is_some() {
            return Err(ApplyError::new(format!("second open auction for token {token_id}")));
        }
        if end_time <= self.clock() || lease_duration == 0 || beneficiary.is_zero() {
            return Err(ApplyError::new("auction parameters out of range"));
        }
        self.auctions.entry(token_id).or_default().push(Auction {
            token_id,
            beneficiary,
            starting_price,
            end_time,
            lease_duration,
            highest_bidder: None,
            highest_bid: starting_price,
            pending_returns: BTreeMap::new(),
            bidders: Vec::new(),
            ended: false,
        });
        Ok(())
    }

    pub(crate) fn apply_bid(&mut self, token_id: TokenId, bidder: Address, amount: Wei) -> Result<(), ApplyError> {
        let now = self.clock();
        let auction = self
            .open_auction(token_id)
            .ok_or_else(|| ApplyError::new(format!("bid without open auction on token {token_id}")))?;
        if now > auction.end_time || !auction.accepts(amount) || auction.highest_bidder == Some(bidder) {
            return Err(ApplyError::new(format!("bid of {amount} wei on token {token_id} violates auction rules")));
        }
        self.debit(bidder, amount)?;
        self.account_mut(bidder).promote(Role::Su);
        let auction = self.open_auction_mut(token_id).expect("checked above");
        if let Some(prev) = auction.highest_bidder {
            let held = auction
                .pending_for(prev)
                .checked_add(auction.highest_bid)
                .ok_or_else(|| ApplyError::new("pending return overflow"))?;
            auction.pending_returns.insert(prev, held);
        }
        auction.highest_bidder = Some(bidder);
        auction.highest_bid = amount;
        if !auction.bidders.contains(&bidder) {
            auction.bidders.push(bidder);
        }
        Ok(())
    }

    /// Shared by the end-of-auction sweep and voluntary withdrawal.
    pub(crate) fn apply_return(&mut self, token_id: TokenId, bidder: Address, amount: Wei) -> Result<(), ApplyError> {
        let auction = self
            .auctions
            .get_mut(&token_id)
            .and_then(|a| a.last_mut())
            .ok_or_else(|| ApplyError::new(format!("refund without auction on token {token_id}")))?;
        if amount.is_zero() || auction.pending_for(bidder) != amount {
            return Err(ApplyError::new(format!(
                "refund of {amount} wei to {bidder} does not match pending returns"
            )));
        }
        auction.pending_returns.remove(&bidder);
        self.credit(bidder, amount)
    }

    pub(crate) fn apply_auction_ended(
        &mut self,
        token_id: TokenId,
        winner: Option<Address>,
        amount: Wei,
    ) -> Result<(), ApplyError> {
        let now = self.clock();
        let auction = self
            .open_auction_mut(token_id)
            .ok_or_else(|| ApplyError::new(format!("end without open auction on token {token_id}")))?;
        let expected = if winner.is_some() { auction.highest_bid } else { Wei::ZERO };
        if now <= auction.end_time
            || !auction.pending_returns.is_empty()
            || auction.highest_bidder != winner
            || amount != expected
        {
            return Err(ApplyError::new(format!("settlement of token {token_id} does not match auction state")));
        }
        auction.ended = true;
        let beneficiary = auction.beneficiary;
        if winner.is_some() {
            self.credit(beneficiary, amount)?;
        }
        Ok(())
    }

    pub fn latest_auction(&self, token_id: TokenId) -> Option<&Auction> {
        self.auctions.get(&token_id).and_then(|a| a.last())
    }

    pub fn open_auction(&self, token_id: TokenId) -> Option<&Auction> {
        self.latest_auction(token_id).filter(|a| !a.ended)
    }

    fn open_auction_mut(&mut self, token_id: TokenId) -> Option<&mut Auction> {
        self.auctions
            .get_mut(&token_id)
            .and_then(|a| a.last_mut())
            .filter(|a| !a.ended)
    }

    /// All auctions ever held for a token, oldest first.
    pub fn auction_history(&self, token_id: TokenId) -> &[Auction] {
        self.auctions.get(&token_id).map(Vec::as_slice).unwrap_or_default()
    }

    pub fn auctions(&self) -> impl Iterator<Item = &Auction> {
        self.auctions.values().flatten()
    }

    pub fn auction_info(&self, token_id: TokenId) -> Result<AuctionView, CommandError> {
        self.owner_of(token_id)?;
        self.latest_auction(token_id)
            .map(Auction::view)
            .ok_or(CommandError::NoAuction(token_id))
    }

    /// Σ of every auction's escrow.
    pub fn total_escrow(&self) -> Wei {
        checked_sum(self.auctions().map(Auction::escrow)).expect("escrow bounded by issuance")
    }
}
