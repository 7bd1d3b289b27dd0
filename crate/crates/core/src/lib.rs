//! Deterministic ledger for rentable spectrum tokens.
//!
//! Tokens carry a spectrum band and separate the permanent owner from a
//! time-limited user. Owners sell lease terms through English auctions whose
//! bids are escrowed in integer wei. All state changes are recorded as events
//! in an append-only journal from which the ledger can be rebuilt exactly.

pub mod address;
pub mod api;
pub mod auction;
pub mod clock;
pub mod error;
pub mod event;
pub mod fixtures;
pub mod genesis;
pub mod journal;
pub mod ledger;
pub mod money;
pub mod registry;

pub use address::Address;
pub use auction::{Auction, AuctionView, Settlement};
pub use clock::{ClockMode, SystemClock, Timestamp, WallClock};
pub use error::{CommandError, ReplayError};
pub use event::{EventRecord, LedgerEvent};
pub use genesis::GenesisConfig;
pub use ledger::{Account, Applied, Command, Ledger, LedgerState, Outcome, Role, Snapshot, Staged};
pub use money::Wei;
pub use registry::{FrequencyMhz, IdleSpectrum, SpectrumBand, SpectrumStatus, TokenId, TokenInfo, UserGrant};
