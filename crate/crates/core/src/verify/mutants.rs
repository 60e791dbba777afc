//! Deliberately broken payment rules, used to confirm the harness catches bugs.

use std::collections::BTreeMap;

use rand::RngCore;

use super::{AuctionProfile, Mechanism};
use crate::model::{Bidder, OutcomeDistribution, SampledOutcome};
use crate::rational::Rational;

fn rebuild(
    dist: &OutcomeDistribution,
    bidders: &[Bidder],
    payment: impl Fn(&Bidder, &Rational, &Rational) -> Rational,
) -> OutcomeDistribution {
    OutcomeDistribution::from_rows(bidders.iter().map(|b| {
        let w = dist.win_prob_of(&b.id);
        let p = payment(b, &w, &dist.payment_of(&b.id));
        (b, w, p)
    }))
}

/// Same allocation, but every winner pays her own bid.
#[derive(Debug, Clone, Copy)]
pub struct FirstPrice<M>(pub M);

impl<M: Mechanism> Mechanism for FirstPrice<M> {
    type Profile = M::Profile;
    type Plan = (M::Plan, Vec<Bidder>);

    fn name(&self) -> &'static str {
        "first-price-mutant"
    }

    fn plan(&self, profile: &M::Profile) -> Self::Plan {
        let bidders = profile.real_bidders().into_iter().cloned().collect();
        (self.0.plan(profile), bidders)
    }

    fn distribution(&self, (plan, bidders): &Self::Plan) -> OutcomeDistribution {
        rebuild(&self.0.distribution(plan), bidders, |b, w, _| w * &b.valuation)
    }

    fn plan_critical_bids(&self, (plan, _): &Self::Plan) -> BTreeMap<String, Rational> {
        self.0.plan_critical_bids(plan)
    }

    fn draw(&self, (plan, bidders): &Self::Plan, rng: &mut dyn RngCore) -> SampledOutcome {
        let mut s = self.0.draw(plan, rng);
        for (id, charge) in s.charge.iter_mut() {
            if let Some(b) = bidders.iter().find(|b| &b.id == id) {
                *charge = b.valuation.clone();
            }
        }
        s
    }
}

/// Same allocation, but every bidder with positive win probability pays
/// `eps` more in expectation.
#[derive(Debug, Clone)]
pub struct Overcharge<M> {
    pub inner: M,
    pub eps: Rational,
}

impl<M> Overcharge<M> {
    pub fn new(inner: M, eps: Rational) -> Self {
        assert!(eps.is_positive(), "overcharge must be positive");
        Overcharge { inner, eps }
    }
}

impl<M: Mechanism> Mechanism for Overcharge<M> {
    type Profile = M::Profile;
    type Plan = (M::Plan, Vec<Bidder>);

    fn name(&self) -> &'static str {
        "overcharge-mutant"
    }

    fn plan(&self, profile: &M::Profile) -> Self::Plan {
        let bidders = profile.real_bidders().into_iter().cloned().collect();
        (self.inner.plan(profile), bidders)
    }

    fn distribution(&self, (plan, bidders): &Self::Plan) -> OutcomeDistribution {
        rebuild(&self.inner.distribution(plan), bidders, |_, w, p| {
            if w.is_positive() {
                p + &self.eps
            } else {
                p.clone()
            }
        })
    }

    fn plan_critical_bids(&self, (plan, _): &Self::Plan) -> BTreeMap<String, Rational> {
        self.inner.plan_critical_bids(plan)
    }

    fn draw(&self, (plan, _): &Self::Plan, rng: &mut dyn RngCore) -> SampledOutcome {
        self.inner.draw(plan, rng)
    }
}
