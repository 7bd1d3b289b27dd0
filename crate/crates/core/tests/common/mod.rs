#![allow(dead_code)]

use spectrum_core::fixtures;
use spectrum_core::{Address, Applied, Command, FrequencyMhz, Ledger, TokenId, Wei};

pub fn sma() -> Address {
    fixtures::sma()
}

pub fn owner() -> Address {
    fixtures::band_owner()
}

pub fn addr(byte: u8) -> Address {
    Address::from_bytes([byte; 20])
}

pub fn ether(s: &str) -> Wei {
    Wei::parse_ether(s).unwrap()
}

pub fn fresh() -> Ledger {
    Ledger::new(fixtures::genesis()).unwrap()
}

pub fn mint(ledger: &mut Ledger, owner: Address, start: u64, end: u64) -> Vec<TokenId> {
    let applied = ledger
        .execute(&Command::Mint {
            caller: sma(),
            owner,
            start_freq: FrequencyMhz(start),
            end_freq: FrequencyMhz(end),
            geo_location: fixtures::BAND_LOCATION.into(),
        })
        .unwrap();
    match applied.outcome {
        spectrum_core::Outcome::Minted(ids) => ids,
        other => panic!("unexpected outcome {other:?}"),
    }
}

pub fn fund(ledger: &mut Ledger, to: Address, amount: Wei) {
    ledger.execute(&Command::Faucet { caller: sma(), to, amount }).unwrap();
}

pub fn advance(ledger: &mut Ledger, seconds: u64) -> Applied {
    ledger.execute(&Command::AdvanceTime { caller: sma(), seconds }).unwrap()
}

pub fn start(ledger: &mut Ledger, token_id: TokenId, starting_price: Wei) -> Applied {
    ledger
        .execute(&Command::StartAuction {
            caller: owner(),
            token_id,
            auction_duration: fixtures::AUCTION_DURATION,
            lease_duration: fixtures::LEASE_DURATION,
            beneficiary: owner(),
            starting_price,
        })
        .unwrap()
}

/// Mints the reference band, funds the six bidders and opens the auction.
pub fn reference_setup() -> Ledger {
    let mut ledger = fresh();
    let ids = mint(&mut ledger, owner(), fixtures::BAND_START_MHZ, fixtures::BAND_END_MHZ);
    assert_eq!(ids, vec![TokenId(1)]);
    for (_, bidder, _) in fixtures::bidders() {
        fund(&mut ledger, bidder, Wei::ether(fixtures::FAUCET_ETHER));
    }
    start(&mut ledger, TokenId(1), Wei::ether(1));
    ledger
}

pub fn place_reference_bids(ledger: &mut Ledger) {
    for (_, bidder, amount) in fixtures::bidders() {
        ledger
            .execute(&Command::Bid { caller: bidder, token_id: TokenId(1), amount })
            .unwrap();
    }
}
