use std::net::IpAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spectrum_core::GenesisConfig;

use crate::StartupError;

pub const DEFAULT_PORT: u16 = 8545;

/// Service configuration file: the genesis parameters plus where and how
/// to run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceConfig {
    #[serde(flatten)]
    pub genesis: GenesisConfig,
    #[serde(default = "default_bind")]
    pub bind: IpAddr,
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    /// Write a snapshot each time the event count crosses a multiple of this.
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: u64,
    /// Directory of a built web client, served under `/ui` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ui_dir: Option<PathBuf>,
}

fn default_bind() -> IpAddr {
    IpAddr::from([127, 0, 0, 1])
}

fn default_port() -> u16 {
    DEFAULT_PORT
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

fn default_snapshot_every() -> u64 {
    100
}

impl ServiceConfig {
    pub fn new(genesis: GenesisConfig, data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            genesis,
            bind: default_bind(),
            port: default_port(),
            data_dir: data_dir.into(),
            snapshot_every: default_snapshot_every(),
            ui_dir: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, StartupError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StartupError::Config(format!("{}: {e}", path.display())))?;
        let config: ServiceConfig = serde_json::from_str(&text)
            .map_err(|e| StartupError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), StartupError> {
        if self.snapshot_every == 0 {
            return Err(StartupError::Config("snapshot_every must be at least 1".into()));
        }
        Ok(())
    }
}
