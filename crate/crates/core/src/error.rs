use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuctionError {
    #[error("number of items k must be at least 1")]
    NoItems,
    #[error("bidder `{id}`: demand {demand} outside [1, {k}]")]
    DemandOutOfRange { id: String, demand: u32, k: u32 },
    #[error("bidder `{id}`: negative valuation {valuation}")]
    NegativeValuation { id: String, valuation: Rational },
    #[error("duplicate bidder id `{0}`")]
    DuplicateBidder(String),
    #[error("duplicate group id `{0}`")]
    DuplicateGroup(String),
    #[error("unknown bidder `{0}`")]
    UnknownBidder(String),
    #[error("total low-side demand {total} is below k = {k}")]
    InsufficientLowDemand { total: u64, k: u32 },
    #[error("invalid augmentation: {0}")]
    InvalidAugmentation(String),
    #[error("brute-force welfare supports at most {max} bidders, got {n}")]
    TooManyBidders { n: usize, max: usize },
    #[error("mechanism is nondeterministic: two allocations of the same profile differ")]
    Nondeterministic,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = AuctionError> = std::result::Result<T, E>;
