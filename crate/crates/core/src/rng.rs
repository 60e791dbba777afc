//! The seeded random source used by every sampler in this crate.
//!
//! Generator: ChaCha20 (`rand_chacha`), seeded with `seed_from_u64`. Each
//! random decision consumes exactly one `u64` draw, and a Bernoulli trial
//! with probability `p = n/d` succeeds iff `x * d < n * 2^64`, so outcomes
//! are reproducible by any implementation of the same stream.
//!
//! Stream-split rule for the mechanisms:
//! * caii: draw 1 is the branch coin (high branch iff it succeeds with
//!   probability 1/3); draws 2..r are the Bernoulli selections of the
//!   low-side candidates at positions 1..r-1, in ranking order, and are only
//!   consumed when the low branch is taken.
//! * mcaii: only the LOW_FULL case draws; draws 1..a select the candidates
//!   at positions 1..a.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::rational::Rational;

pub const RNG_NAME: &str = "chacha20-v1";

pub type AuctionRng = ChaCha20Rng;

pub fn seeded(seed: u64) -> AuctionRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent sub-stream `stream` of `seed` (used to shard campaigns).
pub fn seeded_stream(seed: u64, stream: u64) -> AuctionRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One Bernoulli trial with probability `p` (clamped to `[0, 1]`), using a
/// single `u64` draw.
pub fn bernoulli<R: RngCore + ?Sized>(rng: &mut R, p: &Rational) -> bool {
    let x = rng.next_u64();
    if !p.is_positive() {
        return false;
    }
    match (p.numer().to_u64(), p.denom().to_u64()) {
        (Some(n), Some(d)) => (u128::from(x) * u128::from(d)) < (u128::from(n) << 64),
        _ => BigInt::from(x) * p.denom() < (p.numer() << 64u32),
    }
}

/// Uniform rational in `[0, 1)` on the grid `1/2^32`, for probe generation.
pub fn unit_rational<R: RngCore + ?Sized>(rng: &mut R) -> Rational {
    let x = rng.next_u32();
    Rational::from_bigints(BigInt::from(x), BigInt::from(1u64 << 32))
}
