//! Randomized revenue-monotone, truthful auctions for `k` identical items.
//!
//! * [`caii`]: single-pool mechanism with expected welfare at least a third
//!   of the optimum.
//! * [`mcaii`]: multi-group mechanism where all winners come from one group.
//! * [`welfare`]: exact knapsack welfare oracles and VCG.
//! * [`verify`]: exact checks of truthfulness, revenue monotonicity and
//!   welfare ratios over generated instances.

pub mod caii;
pub mod error;
pub mod mcaii;
pub mod model;
pub mod rational;
pub mod rng;
pub mod verify;
pub mod welfare;

pub use error::{AuctionError, Result};
pub use mcaii::{Case, McaiiDecision};
pub use model::{
    Bidder, Branch, ClassifiedProfile, Group, GroupedProfile, OutcomeDistribution, SampledOutcome,
    TypeProfile,
};
pub use rational::Rational;
pub use welfare::{VcgResult, WelfareResult};
