//! Social-welfare oracles: an exact 0/1 knapsack over capacity `k`, a
//! brute-force cross-check, the group-constrained optimum, and VCG with
//! Clarke pivot payments.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{AuctionError, Result};
use crate::model::{Bidder, GroupedProfile, TypeProfile};
use crate::rational::Rational;

pub const BRUTE_FORCE_MAX_BIDDERS: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WelfareResult {
    pub value: Rational,
    pub winners: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VcgResult {
    pub winners: BTreeSet<String>,
    pub payment: BTreeMap<String, Rational>,
    pub revenue: Rational,
    pub welfare: Rational,
}

/// Optimal value and the lexicographically smallest optimal index set.
fn knapsack<T>(values: &[T], demands: &[u32], k: u32) -> (T, Vec<usize>)
where
    T: Clone + Ord + Zero + for<'a> Add<&'a T, Output = T>,
    for<'a> &'a T: std::ops::Sub<&'a T, Output = T>,
{
    let n = values.len();
    let cap = k as usize;
    let width = cap + 1;
    // dp over suffixes: after processing item i, `next[c]` is the best value
    // of items i.. with capacity c. `take[i * width + c]` records whether
    // taking item i is optimal there.
    let mut next = vec![T::zero(); width];
    let mut take = vec![false; n * width];
    for i in (0..n).rev() {
        let d = demands[i] as usize;
        let mut cur = next.clone();
        for c in d..width {
            let with = next[c - d].clone() + &values[i];
            if with >= next[c] {
                take[i * width + c] = true;
                if with > cur[c] {
                    cur[c] = with;
                }
            }
        }
        next = cur;
    }
    let best = next[cap].clone();

    let mut winners = Vec::new();
    let mut target = best.clone();
    let mut c = cap;
    for i in 0..n {
        if target.is_zero() {
            break;
        }
        if take[i * width + c] {
            winners.push(i);
            target = &target - &values[i];
            c -= demands[i] as usize;
        }
    }
    (best, winners)
}

/// Scales rational valuations to integers by the lcm of their denominators.
fn scaled(bidders: &[&Bidder]) -> (Vec<BigInt>, BigInt) {
    let lcm = bidders
        .iter()
        .fold(BigInt::one(), |acc, b| acc.lcm(b.valuation.denom()));
    let values = bidders
        .iter()
        .map(|b| b.valuation.numer() * (&lcm / b.valuation.denom()))
        .collect();
    (values, lcm)
}

fn max_welfare_of(k: u32, bidders: &[&Bidder]) -> WelfareResult {
    let demands: Vec<u32> = bidders.iter().map(|b| b.demand).collect();
    let (values, lcm) = scaled(bidders);
    let total: BigInt = values.iter().sum();
    let (best, idx) = if total.bits() < 126 {
        let small: Vec<i128> = values.iter().map(|v| v.to_i128().unwrap()).collect();
        let (best, idx) = knapsack(&small, &demands, k);
        (BigInt::from(best), idx)
    } else {
        knapsack(&values, &demands, k)
    };
    WelfareResult {
        value: Rational::from_bigints(best, lcm),
        winners: idx.into_iter().map(|i| bidders[i].id.clone()).collect(),
    }
}

/// Exact maximum social welfare: `max sum v_i` subject to `sum d_i <= k`.
/// Among optima the lexicographically smallest index set is reported.
pub fn max_welfare(profile: &TypeProfile) -> WelfareResult {
    let bidders: Vec<&Bidder> = profile.bidders().iter().collect();
    max_welfare_of(profile.k(), &bidders)
}

/// Exhaustive enumeration in Gray-code order; independent of the DP.
pub fn max_welfare_bruteforce(profile: &TypeProfile) -> Result<Rational> {
    let bidders = profile.bidders();
    let n = bidders.len();
    if n > BRUTE_FORCE_MAX_BIDDERS {
        return Err(AuctionError::TooManyBidders {
            n,
            max: BRUTE_FORCE_MAX_BIDDERS,
        });
    }
    let k = u64::from(profile.k());
    let mut best = Rational::zero();
    let mut value = Rational::zero();
    let mut demand: u64 = 0;
    let mut gray: u32 = 0;
    for step in 1u32..(1u32 << n) {
        let next = step ^ (step >> 1);
        let flipped = (gray ^ next).trailing_zeros() as usize;
        let b = &bidders[flipped];
        if next & (1 << flipped) != 0 {
            value += &b.valuation;
            demand += u64::from(b.demand);
        } else {
            value = value - &b.valuation;
            demand -= u64::from(b.demand);
        }
        gray = next;
        if demand <= k && value > best {
            best = value.clone();
        }
    }
    Ok(best)
}

/// Best welfare when all winners must come from one group.
pub fn group_max_welfare(profile: &GroupedProfile) -> WelfareResult {
    profile
        .groups()
        .iter()
        .map(|g| {
            let bidders: Vec<&Bidder> = g.bidders.iter().collect();
            max_welfare_of(profile.k(), &bidders)
        })
        .fold(None, |best: Option<WelfareResult>, w| match best {
            Some(b) if b.value >= w.value => Some(b),
            _ => Some(w),
        })
        .unwrap_or(WelfareResult {
            value: Rational::zero(),
            winners: BTreeSet::new(),
        })
}

/// VCG on the raw profile (no dummy padding): efficient allocation and
/// payments `W(N \ i) - (W(N) - v_i)`.
pub fn vcg(profile: &TypeProfile) -> VcgResult {
    let all: Vec<&Bidder> = profile.bidders().iter().collect();
    let efficient = max_welfare_of(profile.k(), &all);
    let mut payment = BTreeMap::new();
    for b in all.iter().filter(|b| efficient.winners.contains(&b.id)) {
        let others: Vec<&Bidder> = all.iter().copied().filter(|o| o.id != b.id).collect();
        let without = max_welfare_of(profile.k(), &others).value;
        let p = without - (&efficient.value - &b.valuation);
        payment.insert(b.id.clone(), p);
    }
    VcgResult {
        revenue: payment.values().sum(),
        winners: efficient.winners,
        payment,
        welfare: efficient.value,
    }
}
