use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::address::Address;
use crate::clock::{ClockMode, Timestamp};

pub const DEFAULT_MIN_ALLOC_MHZ: u64 = 20;

/// Parameters fixed for the lifetime of a ledger.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenesisConfig {
    pub sma_address: Address,
    pub clock_mode: ClockMode,
    pub genesis_time: Timestamp,
    #[serde(default = "default_min_alloc")]
    pub min_alloc_mhz: u64,
}

fn default_min_alloc() -> u64 {
    DEFAULT_MIN_ALLOC_MHZ
}

impl GenesisConfig {
    pub fn sim(sma_address: Address, genesis_time: u64) -> Self {
        GenesisConfig {
            sma_address,
            clock_mode: ClockMode::Sim,
            genesis_time: Timestamp(genesis_time),
            min_alloc_mhz: DEFAULT_MIN_ALLOC_MHZ,
        }
    }

    pub fn with_min_alloc(mut self, mhz: u64) -> Self {
        self.min_alloc_mhz = mhz;
        self
    }

    /// Hex SHA-256 of the canonical JSON encoding. Journals and snapshots
    /// produced under one genesis are only valid under the same fingerprint.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("genesis config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_file_shape() {
        let cfg: GenesisConfig = serde_json::from_str(
            r#"{"sma_address":"0x03C6FcED478cBbC9a4FAB34eF9f40767739D1Ff7",
                "clock_mode":"sim","genesis_time":1000,"min_alloc_mhz":20}"#,
        )
        .unwrap();
        assert_eq!(cfg.clock_mode, ClockMode::Sim);
        assert_eq!(cfg.genesis_time, Timestamp(1000));
    }

    #[test]
    fn min_alloc_defaults_to_twenty() {
        let cfg: GenesisConfig = serde_json::from_str(
            r#"{"sma_address":"0x03C6FcED478cBbC9a4FAB34eF9f40767739D1Ff7",
                "clock_mode":"wall","genesis_time":0}"#,
        )
        .unwrap();
        assert_eq!(cfg.min_alloc_mhz, 20);
    }

    #[test]
    fn fingerprint_tracks_every_field() {
        let a = GenesisConfig::sim(Address::from_bytes([1; 20]), 1000);
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_ne!(a.fingerprint(), a.clone().with_min_alloc(10).fingerprint());
        assert_ne!(a.fingerprint(), GenesisConfig::sim(Address::from_bytes([1; 20]), 1001).fingerprint());
    }
}
