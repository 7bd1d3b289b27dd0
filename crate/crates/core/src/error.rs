use thiserror::Error;

use crate::clock::Timestamp;
use crate::money::Wei;
use crate::registry::TokenId;

/// Why a command was rejected. A rejected command leaves the ledger untouched.
///
/// [`CommandError::code`] yields the stable identifier used on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommandError {
    #[error("caller is not authorized for this operation")]
    NotAuthorized,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("amount must be positive")]
    ZeroAmount,
    #[error("time can only be advanced on a simulated clock")]
    NotSimMode,
    #[error("time delta must be positive")]
    ZeroDelta,
    #[error("invalid band: {0}")]
    InvalidBand(String),
    #[error("band width {width} MHz is not a multiple of the {min_alloc} MHz allocation unit")]
    MisalignedBand { width: u64, min_alloc: u64 },
    #[error("band would split into {tokens} tokens, more than the {limit} allowed per mint")]
    MintTooLarge { tokens: u64, limit: u64 },
    #[error("the zero address is not allowed here")]
    ZeroAddress,
    #[error("unknown token {0}")]
    UnknownToken(TokenId),
    #[error("token {0} is already leased")]
    AlreadyLeased(TokenId),
    #[error("duration must be positive")]
    ZeroDuration,
    #[error("token {0} is under an active lease")]
    CurrentlyLeased(TokenId),
    #[error("an auction is already open for token {0}")]
    AuctionAlreadyOpen(TokenId),
    #[error("no open auction for token {0}")]
    NoOpenAuction(TokenId),
    #[error("auction for token {token} closed at {end_time}")]
    AuctionExpired { token: TokenId, end_time: Timestamp },
    #[error("caller already holds the highest bid")]
    SelfOutbid,
    #[error("bid must be at least {minimum} wei{}", if *.strict { " (exclusive)" } else { "" })]
    BidTooLow { minimum: Wei, strict: bool },
    #[error("balance {balance} wei is below {needed} wei")]
    InsufficientFunds { balance: Wei, needed: Wei },
    #[error("the token owner and the auction beneficiary cannot bid")]
    OwnerBid,
    #[error("auction for token {token} runs until {end_time}")]
    AuctionStillRunning { token: TokenId, end_time: Timestamp },
    #[error("auction for token {0} has already ended")]
    AlreadyEnded(TokenId),
    #[error("no auction has been held for token {0}")]
    NoAuction(TokenId),
    #[error("nothing to withdraw")]
    NothingToWithdraw,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl CommandError {
    pub fn code(&self) -> &'static str {
        match self {
            CommandError::NotAuthorized => "NotAuthorized",
            CommandError::Overflow => "Overflow",
            CommandError::ZeroAmount => "ZeroAmount",
            CommandError::NotSimMode => "NotSimMode",
            CommandError::ZeroDelta => "ZeroDelta",
            CommandError::InvalidBand(_) => "InvalidBand",
            CommandError::MisalignedBand { .. } => "MisalignedBand",
            CommandError::MintTooLarge { .. } => "MintTooLarge",
            CommandError::ZeroAddress => "ZeroAddress",
            CommandError::UnknownToken(_) => "UnknownToken",
            CommandError::AlreadyLeased(_) => "AlreadyLeased",
            CommandError::ZeroDuration => "ZeroDuration",
            CommandError::CurrentlyLeased(_) => "CurrentlyLeased",
            CommandError::AuctionAlreadyOpen(_) => "AuctionAlreadyOpen",
            CommandError::NoOpenAuction(_) => "NoOpenAuction",
            CommandError::AuctionExpired { .. } => "AuctionExpired",
            CommandError::SelfOutbid => "SelfOutbid",
            CommandError::BidTooLow { .. } => "BidTooLow",
            CommandError::InsufficientFunds { .. } => "InsufficientFunds",
            CommandError::OwnerBid => "OwnerBid",
            CommandError::AuctionStillRunning { .. } => "AuctionStillRunning",
            CommandError::AlreadyEnded(_) => "AlreadyEnded",
            CommandError::NoAuction(_) => "NoAuction",
            CommandError::NothingToWithdraw => "NothingToWithdraw",
            CommandError::Internal(_) => "InternalError",
        }
    }
}

/// Failure to rebuild a ledger from a journal or snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("corrupt journal: {0}")]
    CorruptJournal(String),
    #[error("genesis mismatch: {0}")]
    GenesisMismatch(String),
    #[error("invalid genesis config: {0}")]
    InvalidGenesis(String),
}

impl ReplayError {
    pub fn code(&self) -> &'static str {
        match self {
            ReplayError::CorruptJournal(_) => "CorruptJournal",
            ReplayError::GenesisMismatch(_) => "GenesisMismatch",
            ReplayError::InvalidGenesis(_) => "InvalidGenesis",
        }
    }
}
