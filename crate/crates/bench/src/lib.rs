//! Fixtures shared by the benchmarks.

use rm_auctions::verify::generator::{gen_grouped_instance, gen_instance};
use rm_auctions::verify::GenParams;
use rm_auctions::{Bidder, GroupedProfile, Rational, TypeProfile};

pub const SEED: u64 = 7;

/// The small k = 4 instance used throughout the examples.
pub fn golden() -> TypeProfile {
    let rows = [(2, 10), (1, 4), (2, 6), (1, 1), (3, 9), (4, 6)];
    let bidders = rows
        .iter()
        .enumerate()
        .map(|(i, &(d, v))| Bidder::new(format!("b{}", i + 1), d, Rational::from_integer(v)))
        .collect();
    TypeProfile::new(4, bidders).expect("valid profile")
}

/// `count` generated flat instances with the default generator bounds.
pub fn flat_suite(count: usize) -> Vec<TypeProfile> {
    let p = GenParams::new(count, SEED);
    (0..count).map(|i| gen_instance(&p, i)).collect()
}

pub fn grouped_suite(count: usize) -> Vec<GroupedProfile> {
    let p = GenParams::new(count, SEED);
    (0..count).map(|i| gen_grouped_instance(&p, i)).collect()
}

/// One flat instance with `n` bidders and `k` items, values spread over ppi ties.
pub fn sized(n: usize, k: u32) -> TypeProfile {
    let bidders = (0..n)
        .map(|i| {
            let demand = 1 + (i as u32 * 7) % k;
            let value = Rational::new(((i * 37) % 101 + 1) as i64 * i64::from(demand), 2);
            Bidder::new(format!("b{i}"), demand, value)
        })
        .collect();
    TypeProfile::new(k, bidders).expect("valid profile")
}
