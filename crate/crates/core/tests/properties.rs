//! Invariants over random command sequences, checked after every command
//! against bookkeeping kept by the test itself.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use spectrum_core::{
    Address, Command, FrequencyMhz, Ledger, Outcome, SpectrumStatus, TokenId, Wei,
};

use common::*;

const ACCOUNTS: u8 = 8;
const TOKENS: u64 = 6;
const TENTH: u128 = 100_000_000_000_000_000;

fn actor(i: u8) -> Address {
    match i {
        0 => sma(),
        1 => owner(),
        2 => addr(0xB0),
        n => addr(n),
    }
}

#[derive(Clone, Debug)]
enum Spec {
    Faucet { to: u8, tenths: u128 },
    Advance { seconds: u64 },
    Mint { owner: u8, start: u64, units: u64 },
    SetUser { caller: u8, token: u64, user: u8, duration: u64 },
    Start { caller: u8, token: u64, duration: u64, lease: u64, price_tenths: u128 },
    Bid { caller: u8, token: u64, tenths: u128 },
    End { caller: u8, token: u64 },
    Withdraw { caller: u8, token: u64 },
}

fn spec_strategy() -> impl Strategy<Value = Spec> {
    let who = 0..ACCOUNTS + 3;
    let token = 1..=TOKENS + 1;
    prop_oneof![
        2 => (who.clone(), 0u128..60).prop_map(|(to, tenths)| Spec::Faucet { to, tenths }),
        2 => (0u64..40).prop_map(|seconds| Spec::Advance { seconds }),
        1 => (0u8..3, 0u64..50, 0u64..4).prop_map(|(owner, start, units)| Spec::Mint { owner, start: start * 10, units }),
        1 => (who.clone(), token.clone(), who.clone(), 0u64..30)
            .prop_map(|(caller, token, user, duration)| Spec::SetUser { caller, token, user, duration }),
        2 => (0u8..3, token.clone(), 0u64..20, 0u64..30, 0u128..20)
            .prop_map(|(caller, token, duration, lease, price_tenths)| Spec::Start { caller, token, duration, lease, price_tenths }),
        5 => (who.clone(), token.clone(), 0u128..60).prop_map(|(caller, token, tenths)| Spec::Bid { caller, token, tenths }),
        2 => (0u8..3, token.clone()).prop_map(|(caller, token)| Spec::End { caller, token }),
        2 => (who, token).prop_map(|(caller, token)| Spec::Withdraw { caller, token }),
    ]
}

fn to_command(spec: &Spec) -> Command {
    match *spec {
        Spec::Faucet { to, tenths } => Command::Faucet { caller: sma(), to: actor(to), amount: Wei::new(tenths * TENTH) },
        Spec::Advance { seconds } => Command::AdvanceTime { caller: sma(), seconds },
        Spec::Mint { owner, start, units } => Command::Mint {
            caller: sma(),
            owner: actor(owner),
            start_freq: FrequencyMhz(3000 + start),
            end_freq: FrequencyMhz(3000 + start + units * 20),
            geo_location: "loc".into(),
        },
        Spec::SetUser { caller, token, user, duration } => Command::SetUser {
            caller: actor(caller),
            token_id: TokenId(token),
            user: actor(user),
            lease_duration: duration,
        },
        Spec::Start { caller, token, duration, lease, price_tenths } => Command::StartAuction {
            caller: actor(caller),
            token_id: TokenId(token),
            auction_duration: duration,
            lease_duration: lease,
            beneficiary: actor(2),
            starting_price: Wei::new(price_tenths * TENTH),
        },
        Spec::Bid { caller, token, tenths } => {
            Command::Bid { caller: actor(caller), token_id: TokenId(token), amount: Wei::new(tenths * TENTH) }
        }
        Spec::End { caller, token } => Command::EndAuction { caller: actor(caller), token_id: TokenId(token) },
        Spec::Withdraw { caller, token } => Command::Withdraw { caller: actor(caller), token_id: TokenId(token) },
    }
}

/// Money flows observed from command results, per (token, auction index).
#[derive(Default)]
struct Books {
    issued: u128,
    debited: BTreeMap<(TokenId, usize), u128>,
    returned: BTreeMap<(TokenId, usize), u128>,
    settled: BTreeMap<(TokenId, usize), u128>,
    net_by_bidder: BTreeMap<(TokenId, usize), BTreeMap<Address, i128>>,
    last_bid: BTreeMap<(TokenId, usize), u128>,
    owners: BTreeMap<TokenId, Address>,
}

struct Harness {
    ledger: Ledger,
    books: Books,
}

impl Harness {
    fn new() -> Self {
        let mut h = Harness { ledger: fresh(), books: Books::default() };
        // Enough tokens and money to make auctions likely.
        for (i, owner_ix) in [1u8, 1, 1, 2, 2].into_iter().enumerate() {
            h.step(&Command::Mint {
                caller: sma(),
                owner: actor(owner_ix),
                start_freq: FrequencyMhz(2000 + 20 * i as u64),
                end_freq: FrequencyMhz(2020 + 20 * i as u64),
                geo_location: "seed".into(),
            })
            .unwrap();
        }
        for i in 3..ACCOUNTS + 3 {
            h.step(&Command::Faucet { caller: sma(), to: actor(i), amount: Wei::ether(3) }).unwrap();
        }
        h
    }

    /// Applies one command and checks every invariant afterwards.
    fn step(&mut self, cmd: &Command) -> Result<Outcome, String> {
        let before = std::sync::Arc::clone(self.ledger.state());
        let before_events = self.ledger.events().len();
        let before_clock = self.ledger.now();
        let result = self.ledger.execute(cmd);
        let outcome = match result {
            Err(e) => {
                let after = self.ledger.state();
                assert!(
                    std::sync::Arc::ptr_eq(&before, after) || before.state_hash() == after.state_hash(),
                    "rejected {cmd:?} ({e}) changed state"
                );
                assert_eq!(self.ledger.events().len(), before_events);
                return Err(e.code().to_string());
            }
            Ok(applied) => applied.outcome,
        };
        assert!(self.ledger.now() >= before_clock, "clock went backwards");
        self.record(cmd, &outcome);
        self.check();
        Ok(outcome)
    }

    fn record(&mut self, cmd: &Command, outcome: &Outcome) {
        let b = &mut self.books;
        match (cmd, outcome) {
            (Command::Faucet { amount, .. }, _) => b.issued += amount.get(),
            (Command::Mint { owner, .. }, Outcome::Minted(ids)) => {
                for id in ids {
                    assert!(b.owners.insert(*id, *owner).is_none(), "token id reused");
                }
            }
            (Command::Bid { caller, token_id, amount }, _) => {
                let key = (*token_id, self.ledger.state().auction_history(*token_id).len() - 1);
                *b.debited.entry(key).or_default() += amount.get();
                *b.net_by_bidder.entry(key).or_default().entry(*caller).or_default() += amount.get() as i128;
                let prev = b.last_bid.insert(key, amount.get());
                assert!(prev.is_none_or(|p| amount.get() > p), "highest bid did not strictly increase");
            }
            (Command::Withdraw { caller, token_id }, Outcome::Refunded(w)) => {
                let key = (*token_id, self.ledger.state().auction_history(*token_id).len() - 1);
                *b.returned.entry(key).or_default() += w.get();
                *b.net_by_bidder.entry(key).or_default().entry(*caller).or_default() -= w.get() as i128;
            }
            (Command::EndAuction { token_id, .. }, Outcome::Settlement(s)) => {
                let key = (*token_id, self.ledger.state().auction_history(*token_id).len() - 1);
                for (bidder, w) in &s.refunds {
                    *b.returned.entry(key).or_default() += w.get();
                    *b.net_by_bidder.entry(key).or_default().entry(*bidder).or_default() -= w.get() as i128;
                }
                *b.settled.entry(key).or_default() += s.paid.get();
            }
            _ => {}
        }
    }

    fn check(&self) {
        let state = self.ledger.state();
        // Conservation against the test's own issuance count.
        assert_eq!(state.total_issuance().get(), self.books.issued);
        let balances: u128 = state.accounts().map(|(_, a)| a.balance.get()).sum();
        let escrow: u128 = state.auctions().map(|a| a.escrow().get()).sum();
        assert_eq!(balances + escrow, self.books.issued, "conservation broken");

        for token in state.token_ids() {
            // Owner never changes.
            assert_eq!(state.owner_of(token).unwrap(), self.books.owners[&token]);
            // Status is derived from auction existence only.
            let open = state.auction_history(token).iter().any(|a| !a.ended);
            let expected = if open { SpectrumStatus::Idle } else { SpectrumStatus::Occupied };
            assert_eq!(state.status_of(token).unwrap(), expected);
            // An open auction and an effective lease never coexist.
            if open {
                assert_eq!(state.user_of(token).unwrap(), None);
            }
            for (i, auction) in state.auction_history(token).iter().enumerate() {
                let key = (token, i);
                let get = |m: &BTreeMap<(TokenId, usize), u128>| m.get(&key).copied().unwrap_or(0);
                // Escrow identity.
                assert_eq!(
                    get(&self.books.debited) - get(&self.books.returned) - get(&self.books.settled),
                    auction.escrow().get(),
                    "escrow identity broken for {key:?}"
                );
                assert!(auction.highest_bid >= auction.starting_price);
                assert_eq!(auction.highest_bidder.is_none(), get(&self.books.debited) == 0);
                for bidder in auction.pending_returns.keys() {
                    assert!(auction.bidders.contains(bidder));
                }
                if auction.ended {
                    assert!(auction.pending_returns.is_empty());
                    // Losers are whole, the winner paid exactly the highest bid.
                    for (bidder, net) in self.books.net_by_bidder.get(&key).into_iter().flatten() {
                        let expect = if auction.highest_bidder == Some(*bidder) { auction.highest_bid.get() as i128 } else { 0 };
                        assert_eq!(*net, expect, "net debit of {bidder} in {key:?}");
                    }
                }
            }
        }
    }

    fn check_replay(&self) {
        let replayed = Ledger::replay(self.ledger.genesis().clone(), self.ledger.events().to_vec()).unwrap();
        assert_eq!(replayed.state_hash(), self.ledger.state_hash());
        assert_eq!(replayed.state().as_ref(), self.ledger.state().as_ref());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn invariants_hold_over_random_sequences(specs in prop::collection::vec(spec_strategy(), 1..80)) {
        let mut h = Harness::new();
        for spec in &specs {
            let _ = h.step(&to_command(spec));
        }
        h.check_replay();
    }

    #[test]
    fn owner_never_changes(specs in prop::collection::vec(spec_strategy(), 1..40)) {
        let mut h = Harness::new();
        let owners: Vec<Address> = (1..=5).map(|t| h.ledger.state().owner_of(TokenId(t)).unwrap()).collect();
        for spec in &specs {
            let _ = h.step(&to_command(spec));
        }
        for (i, o) in owners.iter().enumerate() {
            prop_assert_eq!(h.ledger.state().owner_of(TokenId(i as u64 + 1)).unwrap(), *o);
        }
    }

    #[test]
    fn equal_bids_never_take_the_lead(first in 1u128..50, second_offset in 0u128..1) {
        let mut h = Harness::new();
        h.step(&Command::StartAuction {
            caller: owner(), token_id: TokenId(1), auction_duration: 100, lease_duration: 100,
            beneficiary: owner(), starting_price: Wei::ZERO,
        }).unwrap();
        h.step(&Command::Bid { caller: actor(3), token_id: TokenId(1), amount: Wei::new(first * TENTH / 20) }).unwrap();
        let tie = Command::Bid { caller: actor(4), token_id: TokenId(1), amount: Wei::new(first * TENTH / 20 - second_offset) };
        prop_assert_eq!(h.step(&tie).unwrap_err(), "BidTooLow");
        prop_assert_eq!(h.ledger.state().auction_info(TokenId(1)).unwrap().highest_bidder, Some(actor(3)));
    }

    #[test]
    fn no_second_effective_grant(d1 in 1u64..50, gap in 0u64..60, d2 in 1u64..50) {
        let mut h = Harness::new();
        h.step(&Command::SetUser { caller: owner(), token_id: TokenId(1), user: actor(3), lease_duration: d1 }).unwrap();
        if gap > 0 {
            h.step(&Command::AdvanceTime { caller: sma(), seconds: gap }).unwrap();
        }
        let second = h.step(&Command::SetUser { caller: owner(), token_id: TokenId(1), user: actor(4), lease_duration: d2 });
        if gap <= d1 {
            prop_assert_eq!(second.unwrap_err(), "AlreadyLeased");
        } else {
            prop_assert!(second.is_ok());
        }
    }
}

#[test]
fn replay_matches_after_a_thousand_applied_commands() {
    let mut h = Harness::new();
    let strategy = spec_strategy();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let mut applied = 0;
    while applied < 1000 {
        let spec = strategy.new_tree(&mut runner).unwrap().current();
        if h.step(&to_command(&spec)).is_ok() {
            applied += 1;
        }
    }
    h.check_replay();
    let journal = spectrum_core::journal::encode_records(h.ledger.events());
    let parsed = spectrum_core::journal::parse_journal(&journal).unwrap();
    let replayed = Ledger::replay(h.ledger.genesis().clone(), parsed).unwrap();
    assert_eq!(replayed.state_hash(), h.ledger.state_hash());
}
