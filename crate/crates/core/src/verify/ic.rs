//! Truthfulness probing.
//!
//! A single-parameter mechanism is truthful iff each bidder's win
//! probability is nondecreasing in her bid and her expected payment is
//! `v * w(v) - integral_0^v w(t) dt`. Both mechanisms here produce curves
//! with at most one step, so the integral is evaluated from the probed step
//! and any second step is reported as a violation.

use serde::Serialize;

use super::{AuctionProfile, Mechanism};
use crate::error::{AuctionError, Result};
use crate::rational::Rational;
use crate::rng::{seeded, unit_rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BidderIc {
    pub id: String,
    pub critical_bid: Option<Rational>,
    pub monotone: bool,
    pub single_step: bool,
    pub payment_identity_holds: bool,
    pub reported_payment: Rational,
    pub identity_payment: Rational,
    /// `(bid, win probability)` in increasing bid order.
    pub probed_points: Vec<(Rational, Rational)>,
    pub violations: Vec<String>,
}

impl BidderIc {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IcReport {
    pub bidders: Vec<BidderIc>,
    pub overall: bool,
}

impl IcReport {
    pub fn failures(&self) -> impl Iterator<Item = &BidderIc> {
        self.bidders.iter().filter(|b| !b.ok())
    }
}

fn probe_bids<R: rand::RngCore>(anchor: &Rational, value: &Rational, extra: usize, rng: &mut R) -> Vec<Rational> {
    let eps = if anchor.is_zero() {
        Rational::new(1, 1000)
    } else {
        anchor * Rational::new(1, 1000)
    };
    let two = Rational::from_integer(2);
    let mut bids = vec![
        Rational::zero(),
        anchor.clone(),
        anchor + &eps,
        &two * anchor + Rational::one(),
        value.clone(),
    ];
    let below = anchor - &eps;
    if !below.is_negative() {
        bids.push(below);
    }
    let span = &two * anchor + &two;
    for _ in 0..extra {
        bids.push(unit_rational(rng) * &span);
    }
    bids.sort();
    bids.dedup();
    bids
}

/// Probes every real bidder's allocation curve. Violations are reported in
/// the result; only a nondeterministic mechanism is an error.
pub fn check_ic<M: Mechanism>(
    mech: &M,
    profile: &M::Profile,
    probes_per_bidder: usize,
    seed: u64,
) -> Result<IcReport> {
    if probes_per_bidder < 4 {
        return Err(AuctionError::InvalidParameter(format!(
            "probes_per_bidder must be at least 4, got {probes_per_bidder}"
        )));
    }
    let base = mech.allocate(profile);
    if mech.allocate(profile) != base {
        return Err(AuctionError::Nondeterministic);
    }
    let critical = mech.critical_bids(profile);
    let mut rng = seeded(seed);
    let mut bidders = Vec::new();

    for b in profile.real_bidders() {
        let v = &b.valuation;
        let c = critical.get(&b.id);
        let anchor = c.unwrap_or(v);
        let bids = probe_bids(anchor, v, probes_per_bidder, &mut rng);
        let mut points = Vec::with_capacity(bids.len());
        for bid in bids {
            let probed = profile.with_valuation(&b.id, bid.clone())?;
            let w = mech.allocate(&probed).win_prob_of(&b.id);
            points.push((bid, w));
        }

        let mut violations = Vec::new();
        let monotone = points.windows(2).all(|p| p[0].1 <= p[1].1);
        if !monotone {
            let (x, y) = points
                .windows(2)
                .find(|p| p[0].1 > p[1].1)
                .map(|p| (&p[0], &p[1]))
                .unwrap();
            violations.push(format!(
                "win probability drops from {} at bid {} to {} at bid {}",
                x.1, x.0, y.1, y.0
            ));
        }
        let mut levels: Vec<&Rational> = points.iter().map(|p| &p.1).collect();
        levels.dedup();
        let single_step = levels.len() <= 2;
        if !single_step {
            violations.push(format!("allocation curve has {} distinct levels", levels.len()));
        }

        let w_v = base.win_prob_of(&b.id);
        let reported = base.payment_of(&b.id);
        let identity = match c {
            Some(c) => {
                let below: Vec<&Rational> = points.iter().filter(|p| &p.0 < c).map(|p| &p.1).collect();
                let above: Vec<&Rational> = points.iter().filter(|p| &p.0 > c).map(|p| &p.1).collect();
                let low = below.first().map(|l| (*l).clone()).unwrap_or_default();
                let high = above.first().map(|l| (*l).clone()).unwrap_or_default();
                if below.iter().any(|l| **l != low) || above.iter().any(|l| **l != high) {
                    violations.push(format!("curve is not a single step at the critical bid {c}"));
                }
                if let Some(at) = points.iter().find(|p| &p.0 == c) {
                    if at.1 != low && at.1 != high {
                        violations.push(format!("level {} at the critical bid {c} matches neither side", at.1));
                    }
                }
                let integral = v.clone().min(c.clone()) * &low
                    + (v - c).max(Rational::zero()) * &high;
                v * &w_v - integral
            }
            None => {
                if w_v.is_positive() {
                    violations.push(format!("wins with probability {w_v} but no critical bid is reported"));
                }
                if let Some(p) = points.iter().find(|p| &p.0 <= v && p.1.is_positive()) {
                    violations.push(format!("loser wins with probability {} at bid {}", p.1, p.0));
                }
                Rational::zero()
            }
        };
        let payment_identity_holds = reported == identity;
        if !payment_identity_holds {
            violations.push(format!(
                "expected payment {reported} differs from the payment identity value {identity}"
            ));
        }
        bidders.push(BidderIc {
            id: b.id.clone(),
            critical_bid: c.cloned(),
            monotone,
            single_step,
            payment_identity_holds,
            reported_payment: reported,
            identity_payment: identity,
            probed_points: points,
            violations,
        });
    }
    let overall = bidders.iter().all(BidderIc::ok);
    Ok(IcReport { bidders, overall })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bidder, TypeProfile};
    use crate::verify::{Caii, FirstPrice, Mechanism, Overcharge};
    use crate::OutcomeDistribution;
    use std::collections::BTreeMap;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn golden() -> TypeProfile {
        let rows = [(2, 10), (1, 4), (2, 6), (1, 1), (3, 9), (4, 6)];
        let bidders = rows
            .iter()
            .enumerate()
            .map(|(i, &(d, v))| Bidder::new(format!("b{}", i + 1), d, q(v)))
            .collect();
        TypeProfile::new(4, bidders).unwrap()
    }

    #[test]
    fn caii_golden_is_truthful() {
        let r = check_ic(&Caii, &golden(), 8, 1).unwrap();
        assert!(r.overall, "{:#?}", r.failures().collect::<Vec<_>>());
        let b1 = &r.bidders[0];
        assert_eq!(b1.critical_bid, Some(q(6)));
        let just_above = b1.probed_points.iter().find(|p| p.0 > q(6)).unwrap();
        assert_eq!(just_above.1, Rational::new(4, 9));
        let just_below = b1.probed_points.iter().rev().find(|p| p.0 < q(6)).unwrap();
        assert_eq!(just_below.1, q(0));
    }

    #[test]
    fn loser_curve_is_flat_zero_up_to_value() {
        let r = check_ic(&Caii, &golden(), 4, 2).unwrap();
        let b4 = r.bidders.iter().find(|b| b.id == "b4").unwrap();
        assert!(b4.ok());
        assert_eq!(b4.critical_bid, None);
        assert!(b4.probed_points.iter().filter(|p| p.0 <= q(1)).all(|p| p.1.is_zero()));
    }

    #[test]
    fn first_price_is_flagged() {
        let r = check_ic(&FirstPrice(Caii), &golden(), 4, 3).unwrap();
        assert!(!r.overall);
        let b1 = r.bidders.iter().find(|b| b.id == "b1").unwrap();
        assert!(!b1.payment_identity_holds);
    }

    #[test]
    fn overcharge_is_flagged() {
        let r = check_ic(&Overcharge::new(Caii, Rational::new(1, 1_000_000)), &golden(), 4, 3).unwrap();
        assert!(!r.overall);
    }

    #[test]
    fn too_few_probes_rejected() {
        assert!(check_ic(&Caii, &golden(), 3, 0).is_err());
    }

    struct Flaky(std::sync::atomic::AtomicU64);

    impl Mechanism for Flaky {
        type Profile = TypeProfile;
        type Plan = ();

        fn name(&self) -> &'static str {
            "flaky"
        }

        fn plan(&self, _: &TypeProfile) {}

        fn distribution(&self, _: &()) -> OutcomeDistribution {
            let n = self.0.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            let b = Bidder::new("x", 1, q(1));
            OutcomeDistribution::from_rows([(&b, Rational::zero(), Rational::from(n))])
        }

        fn plan_critical_bids(&self, _: &()) -> BTreeMap<String, Rational> {
            BTreeMap::new()
        }

        fn draw(&self, _: &(), _: &mut dyn rand::RngCore) -> crate::SampledOutcome {
            unreachable!()
        }
    }

    #[test]
    fn nondeterminism_is_an_error() {
        let m = Flaky(Default::default());
        assert_eq!(check_ic(&m, &golden(), 4, 0), Err(AuctionError::Nondeterministic));
    }
}
