//! Reference data for the six-bidder lease auction used throughout the tests,
//! the CLI scenario and the acceptance suite.

use crate::address::Address;
use crate::genesis::GenesisConfig;
use crate::money::Wei;

fn addr(s: &str) -> Address {
    s.parse().expect("fixture address is valid")
}

pub fn sma() -> Address {
    addr("0x03C6FcED478cBbC9a4FAB34eF9f40767739D1Ff7")
}

/// Licence holder of the 3350-3370 MHz band.
pub fn band_owner() -> Address {
    addr("0xDD870fA1b7C4700F2BD7f44238821C26f7392148")
}

pub const BAND_START_MHZ: u64 = 3350;
pub const BAND_END_MHZ: u64 = 3370;
pub const BAND_LOCATION: &str = "location1";

pub const AUCTION_DURATION: u64 = 3600;
pub const LEASE_DURATION: u64 = 7 * 24 * 3600;
/// Expiry of the winning lease when the auction is ended one second after
/// it closes.
pub const LEASE_EXPIRES: u64 = 1_703_136_913;
/// Genesis time chosen so that `LEASE_EXPIRES` comes out exactly.
pub const GENESIS_TIME: u64 = LEASE_EXPIRES - LEASE_DURATION - AUCTION_DURATION - 1;
pub const FAUCET_ETHER: u128 = 5;

/// Bidders in bidding order, with their bids in ether.
pub const BIDS: [(&str, &str, &str); 6] = [
    ("SU1", "0x5B38Da6a701c568545dCfcB03FcB875f56beddC4", "2.0"),
    ("SU2", "0xAb8483F64d9C6d1EcF9b849Ae677dD3315835cb2", "2.5"),
    ("SU3", "0x4B20993Bc481177ec7E8f571ceCaE8A9e22C02db", "2.8"),
    ("PuBuyer1", "0x78731D3Ca6b7E34aC0F824c42a7cC18A495cabaB", "3.0"),
    ("PuBuyer2", "0x617F2E2fD72FD9D5503197092aC168c91465E7f2", "3.1"),
    ("PuBuyer3", "0x17F6AD8Ef982297579C203069C1DbfFE4348c372", "3.5"),
];

pub fn bidders() -> Vec<(&'static str, Address, Wei)> {
    BIDS.iter()
        .map(|(name, a, amount)| (*name, addr(a), Wei::parse_ether(amount).expect("fixture amount")))
        .collect()
}

pub fn winner() -> Address {
    addr(BIDS[5].1)
}

pub fn genesis() -> GenesisConfig {
    GenesisConfig::sim(sma(), GENESIS_TIME)
}
