mod common;

use common::*;
use spectrum_core::fixtures;
use spectrum_core::{Command, CommandError, FrequencyMhz, GenesisConfig, Ledger, SpectrumStatus, Timestamp, TokenId};

#[test]
fn mint_of_reference_band_yields_token_one() {
    let mut ledger = fresh();
    assert_eq!(mint(&mut ledger, owner(), 3350, 3370), vec![TokenId(1)]);
    let mint_event = ledger.events().iter().find(|r| r.event == "NFSTMint").unwrap();
    let args: Vec<(&str, &str)> = mint_event.args.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    assert_eq!(
        args,
        vec![
            ("startFreq", "3350MHz"),
            ("endFreq", "3370MHz"),
            ("location", "location1"),
            ("leaseDuration", "0"),
            ("NFSTID", "1"),
            ("status", "Occupied"),
        ]
    );
    assert_eq!(
        ledger.state().owner_of(TokenId(1)).unwrap().to_string(),
        "0xdd870fa1b7c4700f2bd7f44238821c26f7392148"
    );
}

/// Direct transcription of the minting loop: emit chunks while below the end.
fn minting_loop_oracle(start: u64, end: u64, min_alloc: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut freq = start;
    while freq < end {
        out.push((freq, freq + min_alloc));
        freq += min_alloc;
    }
    out
}

#[test]
fn wide_band_splits_like_the_minting_loop() {
    let mut ledger = fresh();
    let ids = mint(&mut ledger, owner(), 3350, 3410);
    assert_eq!(ids, vec![TokenId(1), TokenId(2), TokenId(3)]);
    let bands: Vec<(u64, u64)> = ids
        .iter()
        .map(|&id| {
            let b = ledger.state().band_of(id).unwrap();
            (b.start_freq.0, b.end_freq.0)
        })
        .collect();
    assert_eq!(bands, minting_loop_oracle(3350, 3410, 20));
    assert_eq!(bands, vec![(3350, 3370), (3370, 3390), (3390, 3410)]);
}

#[test]
fn mint_guards() {
    let mut ledger = fresh();
    let su1 = fixtures::bidders()[0].1;
    let cmd = |caller, start, end, loc: &str| Command::Mint {
        caller,
        owner: owner(),
        start_freq: FrequencyMhz(start),
        end_freq: FrequencyMhz(end),
        geo_location: loc.into(),
    };
    assert_eq!(ledger.execute(&cmd(su1, 3350, 3370, "l")).unwrap_err(), CommandError::NotAuthorized);
    assert!(matches!(ledger.execute(&cmd(sma(), 3370, 3350, "l")), Err(CommandError::InvalidBand(_))));
    assert!(matches!(ledger.execute(&cmd(sma(), 3350, 3380, "l")), Err(CommandError::MisalignedBand { .. })));
    assert!(matches!(ledger.execute(&cmd(sma(), 3350, 3370, " ")), Err(CommandError::InvalidBand(_))));
    let zero_owner = Command::Mint {
        caller: sma(),
        owner: spectrum_core::Address::ZERO,
        start_freq: FrequencyMhz(3350),
        end_freq: FrequencyMhz(3370),
        geo_location: "l".into(),
    };
    assert_eq!(ledger.execute(&zero_owner).unwrap_err(), CommandError::ZeroAddress);
    assert!(ledger.events().is_empty());
}

#[test]
fn owner_of_unknown_token() {
    let ledger = fresh();
    assert_eq!(ledger.state().owner_of(TokenId(999)), Err(CommandError::UnknownToken(TokenId(999))));
    assert!(ledger.state().user_of(TokenId(999)).is_err());
    assert!(ledger.state().status_of(TokenId(999)).is_err());
    assert!(ledger.state().token_info(TokenId(999)).is_err());
}

#[test]
fn fresh_token_view() {
    let mut ledger = fresh();
    mint(&mut ledger, owner(), 3350, 3370);
    let info = ledger.state().token_info(TokenId(1)).unwrap();
    assert_eq!(info.band.start_freq, FrequencyMhz(3350));
    assert_eq!(info.band.end_freq, FrequencyMhz(3370));
    assert_eq!(info.owner, owner());
    assert_eq!(info.issuer, sma());
    assert_eq!(info.user, None);
    assert_eq!(info.user_expires, None);
    assert_eq!(info.status, SpectrumStatus::Occupied);
}

#[test]
fn set_user_grants_until_expiry_inclusive() {
    let mut ledger = fresh();
    mint(&mut ledger, owner(), 3350, 3370);
    let winner = fixtures::winner();
    let now = ledger.now().0;
    let duration = fixtures::LEASE_EXPIRES - now;
    let applied = ledger
        .execute(&Command::SetUser { caller: owner(), token_id: TokenId(1), user: winner, lease_duration: duration })
        .unwrap();
    let names: Vec<&str> = applied.records.iter().map(|r| r.event.as_str()).collect();
    assert_eq!(names, vec!["UpdateUser", "UpdateSpectrumStatus"]);
    assert_eq!(applied.records[0].args["expires"], "1703136913");
    assert_eq!(applied.records[0].args["user"], "0x17f6ad8ef982297579c203069c1dbffe4348c372");

    advance(&mut ledger, duration);
    assert_eq!(ledger.now(), Timestamp(fixtures::LEASE_EXPIRES));
    assert_eq!(ledger.state().user_of(TokenId(1)).unwrap(), Some(winner));
    advance(&mut ledger, 1);
    assert_eq!(ledger.state().user_of(TokenId(1)).unwrap(), None);
    // The record survives; only the effective user lapses.
    assert_eq!(ledger.state().user_expires(TokenId(1)).unwrap(), Some(Timestamp(fixtures::LEASE_EXPIRES)));
    assert_eq!(ledger.state().status_of(TokenId(1)).unwrap(), SpectrumStatus::Occupied);
}

#[test]
fn set_user_guards() {
    let mut ledger = fresh();
    mint(&mut ledger, owner(), 3350, 3370);
    let u = addr(0x11);
    let u2 = addr(0x12);
    let set = |caller, user, d| Command::SetUser { caller, token_id: TokenId(1), user, lease_duration: d };
    assert_eq!(ledger.execute(&set(u, u, 10)).unwrap_err(), CommandError::NotAuthorized);
    assert_eq!(ledger.execute(&set(owner(), u, 0)).unwrap_err(), CommandError::ZeroDuration);
    assert_eq!(
        ledger
            .execute(&Command::SetUser { caller: owner(), token_id: TokenId(7), user: u, lease_duration: 1 })
            .unwrap_err(),
        CommandError::UnknownToken(TokenId(7))
    );
    ledger.execute(&set(owner(), u, 10)).unwrap();
    assert_eq!(ledger.execute(&set(owner(), u2, 10)).unwrap_err(), CommandError::AlreadyLeased(TokenId(1)));
    advance(&mut ledger, 11);
    ledger.execute(&set(owner(), u2, 10)).unwrap();
    assert_eq!(ledger.state().user_of(TokenId(1)).unwrap(), Some(u2));
}

#[test]
fn status_and_idle_listing_follow_the_auction() {
    let mut ledger = fresh();
    mint(&mut ledger, owner(), 3350, 3410);
    assert!(ledger.state().list_idle().is_empty());
    start(&mut ledger, TokenId(1), ether("1"));
    assert_eq!(ledger.state().status_of(TokenId(1)).unwrap(), SpectrumStatus::Idle);
    let idle = ledger.state().list_idle();
    assert_eq!(idle.len(), 1);
    assert_eq!(idle[0].token_id, TokenId(1));
    assert_eq!(idle[0].beneficiary, owner());
    assert_eq!(idle[0].highest_bid, ether("1"));

    // Listing equals a brute-force filter of every token by status.
    let brute: Vec<TokenId> = ledger
        .state()
        .token_ids()
        .filter(|&t| ledger.state().status_of(t).unwrap() == SpectrumStatus::Idle)
        .collect();
    assert_eq!(idle.iter().map(|e| e.token_id).collect::<Vec<_>>(), brute);

    advance(&mut ledger, fixtures::AUCTION_DURATION + 1);
    ledger.execute(&Command::EndAuction { caller: owner(), token_id: TokenId(1) }).unwrap();
    assert_eq!(ledger.state().status_of(TokenId(1)).unwrap(), SpectrumStatus::Occupied);
    assert!(ledger.state().list_idle().is_empty());
}

#[test]
fn custom_allocation_unit() {
    let mut ledger = Ledger::new(GenesisConfig::sim(sma(), 0).with_min_alloc(5)).unwrap();
    let ids = mint(&mut ledger, owner(), 100, 120);
    assert_eq!(ids.len(), 4);
}
