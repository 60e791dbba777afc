//! Reproducible random instances.
//!
//! Instance `i` of a stream is drawn from sub-stream `i` of the seed, so any
//! single instance can be regenerated without replaying the others. Fixed
//! ratios inject edge cases: every fifth instance carries a cluster of equal
//! ppi values, every 25th has a single bidder, and a tenth of all
//! valuations are zero.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{AnyProfile, Augmentation};
use crate::error::{AuctionError, Result};
use crate::model::{low_threshold, Bidder, Group, GroupedProfile, TypeProfile};
use crate::rational::Rational;
use crate::rng::{seeded_stream, AuctionRng};

const DENOMINATORS: [i64; 5] = [1, 2, 3, 4, 6];
pub const MAX_GROUPS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenParams {
    pub count: usize,
    pub seed: u64,
    pub n_max: usize,
    pub k_max: u32,
    pub value_max: u32,
}

impl GenParams {
    pub fn new(count: usize, seed: u64) -> Self {
        GenParams {
            count,
            seed,
            n_max: 20,
            k_max: 64,
            value_max: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AuctionError::InvalidParameter(m.into()));
        if self.count == 0 {
            return bad("instance count must be at least 1");
        }
        if self.n_max == 0 {
            return bad("n_max must be at least 1");
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1");
        }
        if self.value_max == 0 {
            return bad("value_max must be at least 1");
        }
        Ok(())
    }

    pub fn rng_for(&self, index: usize) -> AuctionRng {
        seeded_stream(self.seed, index as u64)
    }
}

fn random_value(rng: &mut AuctionRng, value_max: u32) -> Rational {
    let den = DENOMINATORS[rng.random_range(0..DENOMINATORS.len())];
    let num = rng.random_range(0..=i64::from(value_max) * den);
    Rational::new(num, den)
}

fn positive_value(rng: &mut AuctionRng, value_max: u32) -> Rational {
    let den = DENOMINATORS[rng.random_range(0..DENOMINATORS.len())];
    let num = rng.random_range(1..=i64::from(value_max) * den);
    Rational::new(num, den)
}

fn random_demand(rng: &mut AuctionRng, k: u32, high: bool) -> u32 {
    let t = low_threshold(k);
    if high || t == 0 {
        rng.random_range(t + 1..=k)
    } else {
        rng.random_range(1..=t)
    }
}

/// One bidder from the generator distribution: low or high demand with
/// equal odds, zero valuation with probability 1/10.
pub fn random_bidder(rng: &mut AuctionRng, id: String, k: u32, value_max: u32) -> Bidder {
    let high = rng.random_range(0..2) == 1;
    let demand = random_demand(rng, k, high);
    let valuation = if rng.random_range(0..10) == 0 {
        Rational::zero()
    } else {
        random_value(rng, value_max)
    };
    Bidder::new(id, demand, valuation)
}

fn instance_bidders(params: &GenParams, index: usize, rng: &mut AuctionRng, k: u32) -> Vec<Bidder> {
    let tie_cluster = index.is_multiple_of(5);
    let n = if index % 25 == 1 {
        1
    } else if tie_cluster {
        rng.random_range(2..=params.n_max.max(2))
    } else {
        rng.random_range(0..=params.n_max)
    };
    let mut bidders: Vec<Bidder> = (0..n)
        .map(|j| random_bidder(rng, format!("b{j}"), k, params.value_max))
        .collect();
    if tie_cluster {
        let ppi = random_value(rng, params.value_max);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let size = rng.random_range(2..=4).min(n);
        for &j in &order[..size] {
            let d = Rational::from(u64::from(bidders[j].demand));
            bidders[j].valuation = &ppi * d;
        }
    }
    bidders
}

pub fn gen_instance(params: &GenParams, index: usize) -> TypeProfile {
    let mut rng = params.rng_for(index);
    let k = rng.random_range(1..=params.k_max);
    let bidders = instance_bidders(params, index, &mut rng, k);
    TypeProfile::new(k, bidders).expect("generator emits valid profiles")
}

/// Grouped instance with 1..=5 groups. Some instances get a group holding
/// only high-demand bidders or a group with no bidders at all.
pub fn gen_grouped_instance(params: &GenParams, index: usize) -> GroupedProfile {
    let mut rng = params.rng_for(index);
    let k = rng.random_range(1..=params.k_max);
    let n_groups = rng.random_range(1..=MAX_GROUPS);
    let mut groups: Vec<Group> = (0..n_groups)
        .map(|g| Group {
            id: format!("g{g}"),
            bidders: Vec::new(),
        })
        .collect();
    for b in instance_bidders(params, index, &mut rng, k) {
        let g = rng.random_range(0..n_groups);
        groups[g].bidders.push(b);
    }
    if index % 7 == 3 {
        let last = groups.last_mut().unwrap();
        let count = rng.random_range(1..=2);
        last.bidders = (0..count)
            .map(|j| {
                let demand = random_demand(&mut rng, k, true);
                Bidder::new(format!("h{j}"), demand, random_value(&mut rng, params.value_max))
            })
            .collect();
    }
    if index % 11 == 4 {
        if groups.len() < MAX_GROUPS {
            groups.push(Group {
                id: format!("g{}", groups.len()),
                bidders: Vec::new(),
            });
        } else {
            groups.last_mut().unwrap().bidders.clear();
        }
    }
    GroupedProfile::new(k, groups).expect("generator emits valid profiles")
}

pub fn gen_instances(params: &GenParams) -> Result<Vec<TypeProfile>> {
    params.validate()?;
    Ok((0..params.count).map(|i| gen_instance(params, i)).collect())
}

pub fn gen_grouped(params: &GenParams) -> Result<Vec<GroupedProfile>> {
    params.validate()?;
    Ok((0..params.count).map(|i| gen_grouped_instance(params, i)).collect())
}

/// Augmentations drawn from the instance distribution: new bidders are
/// generator bidders, raises are positive generator values.
pub fn gen_augmentations(
    profile: &AnyProfile,
    count: usize,
    value_max: u32,
    rng: &mut AuctionRng,
) -> Vec<Augmentation> {
    let (k, ids, group_ids): (u32, Vec<String>, Vec<String>) = match profile {
        AnyProfile::Flat(p) => (p.k(), p.bidders().iter().map(|b| b.id.clone()).collect(), vec![]),
        AnyProfile::Grouped(p) => (
            p.k(),
            p.bidders().map(|b| b.id.clone()).collect(),
            p.groups().iter().map(|g| g.id.clone()).collect(),
        ),
    };
    let grouped = matches!(profile, AnyProfile::Grouped(_));
    let kinds = if grouped { 3 } else { 2 };
    (0..count)
        .map(|j| {
            let mut kind = rng.random_range(0..kinds);
            if kind == 1 && ids.is_empty() {
                kind = 0;
            }
            match kind {
                0 => {
                    let bidder = random_bidder(rng, format!("aug{j}"), k, value_max);
                    let group = grouped.then(|| {
                        if group_ids.is_empty() {
                            "aug-group".to_string()
                        } else {
                            group_ids[rng.random_range(0..group_ids.len())].clone()
                        }
                    });
                    Augmentation::AddBidder { bidder, group }
                }
                1 => Augmentation::RaiseBid {
                    id: ids[rng.random_range(0..ids.len())].clone(),
                    delta: positive_value(rng, value_max),
                },
                _ => {
                    let size = rng.random_range(0..=3);
                    let bidders = (0..size)
                        .map(|t| random_bidder(rng, format!("aug{j}-{t}"), k, value_max))
                        .collect();
                    Augmentation::AddGroup {
                        group: Group {
                            id: format!("aug-g{j}"),
                            bidders,
                        },
                    }
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caii;
    use crate::model::classify;

    #[test]
    fn same_seed_same_stream() {
        let p = GenParams::new(50, 9);
        assert_eq!(gen_instances(&p).unwrap(), gen_instances(&p).unwrap());
        assert_eq!(gen_grouped(&p).unwrap(), gen_grouped(&p).unwrap());
        let other = GenParams::new(50, 10);
        assert_ne!(gen_instances(&p).unwrap(), gen_instances(&other).unwrap());
    }

    #[test]
    fn instance_is_independent_of_count() {
        let small = GenParams::new(5, 3);
        let big = GenParams::new(500, 3);
        assert_eq!(gen_instances(&small).unwrap()[..], gen_instances(&big).unwrap()[..5]);
    }

    #[test]
    fn at_least_ten_percent_have_ppi_ties() {
        let all = gen_instances(&GenParams::new(1000, 1)).unwrap();
        let ties = all
            .iter()
            .filter(|p| {
                let c = classify(p);
                let mut ppis: Vec<_> = p.bidders().iter().map(|b| b.ppi()).collect();
                ppis.sort();
                c.low.len() > 1 && ppis.windows(2).any(|w| w[0] == w[1])
            })
            .count();
        assert!(ties >= 100, "{ties}");
        assert!(all.iter().any(|p| p.bidders().len() == 1));
        assert!(all.iter().any(|p| p.bidders().iter().any(|b| b.valuation.is_zero())));
        assert!(all.iter().any(|p| caii::analyze(p).candidate_demand > 0));
    }

    #[test]
    fn grouped_mode_shapes() {
        let all = gen_grouped(&GenParams::new(500, 2)).unwrap();
        assert!(all.iter().all(|p| (1..=MAX_GROUPS).contains(&p.groups().len())));
        assert!(all.iter().any(|p| p.groups().iter().any(|g| g.bidders.is_empty())));
        assert!(all.iter().any(|p| p.groups().len() == 1));
        assert!(all.iter().any(|p| p.groups().len() == MAX_GROUPS));
        assert!(all.iter().any(|p| p.groups().iter().any(|g| {
            !g.bidders.is_empty() && g.bidders.iter().all(|b| b.demand > low_threshold(p.k()))
        })));
    }

    #[test]
    fn bad_params_rejected() {
        assert!(gen_instances(&GenParams::new(0, 1)).is_err());
        let mut p = GenParams::new(3, 1);
        p.k_max = 0;
        assert!(gen_instances(&p).is_err());
    }

    #[test]
    fn augmentations_are_valid() {
        use crate::verify::AuctionProfile;
        let params = GenParams::new(100, 4);
        for i in 0..100 {
            let flat = gen_instance(&params, i);
            let grouped = gen_grouped_instance(&params, i);
            let mut rng = params.rng_for(10_000 + i);
            for aug in gen_augmentations(&flat.dump(), 5, 100, &mut rng) {
                flat.augment(&aug).unwrap();
            }
            for aug in gen_augmentations(&grouped.dump(), 5, 100, &mut rng) {
                grouped.augment(&aug).unwrap();
            }
        }
    }
}
