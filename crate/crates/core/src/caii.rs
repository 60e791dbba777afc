//! The randomized revenue-monotone mechanism for `k` identical items.
//!
//! With probability 1/3 the most valuable high-demand bidder wins and pays
//! the second-highest high-demand valuation. With probability 2/3 the
//! low-demand bidders ranked strictly above the runner-up are candidates;
//! each is selected independently with probability `ceil(k/2) / A` and pays
//! `demand * ppi_r`. Expected revenue is
//! `(2 * ceil(k/2) / 3) * ppi_r + v_second_high / 3`.

use std::collections::{BTreeMap, BTreeSet};

use rand::RngCore;

use crate::error::{AuctionError, Result};
use crate::model::{
    classify, half_up, Branch, ClassifiedProfile, OutcomeDistribution, Ranked, SampledOutcome,
    TypeProfile,
};
use crate::rational::Rational;
use crate::rng::bernoulli;

/// Everything the mechanism derives from a profile before randomizing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaiiAnalysis {
    pub classified: ClassifiedProfile,
    /// 1-based position `r` of the runner-up in the sorted low list.
    pub runner_up_pos: usize,
    pub ppi_r: Rational,
    /// `A`: total demand of the low positions `1..r`.
    pub candidate_demand: u64,
    /// Overall win probability of each candidate, `2 * ceil(k/2) / (3A)`
    /// (zero when there are no candidates, which only happens for `k = 1`).
    pub low_win_prob: Rational,
    /// Bidder at position `l + 1`: the most valuable high-demand bidder.
    pub top_high: Ranked,
    /// `v_{l+2}`: the second-highest high-demand valuation.
    pub second_high_value: Rational,
}

impl CaiiAnalysis {
    pub fn k(&self) -> u32 {
        self.classified.k
    }

    pub fn candidates(&self) -> &[Ranked] {
        self.classified.low_prefix(self.runner_up_pos - 1)
    }

    /// Per-candidate selection probability inside the low branch, `ceil(k/2)/A`.
    pub fn selection_prob(&self) -> Rational {
        if self.candidate_demand == 0 {
            Rational::zero()
        } else {
            Rational::from(u64::from(half_up(self.k()))) / Rational::from(self.candidate_demand)
        }
    }

    /// Closed-form expected revenue.
    pub fn closed_form_revenue(&self) -> Rational {
        let third = Rational::new(1, 3);
        let low = Rational::from(u64::from(2 * half_up(self.k()))) * &third * &self.ppi_r;
        low + &self.second_high_value * third
    }

    /// Threshold bid of every real winner: `v_{l+2}` for the top high bidder
    /// and `demand * ppi_r` for each low candidate.
    pub fn critical_bids(&self) -> BTreeMap<String, Rational> {
        let mut out = BTreeMap::new();
        for c in self.candidates().iter().filter(|c| !c.bidder.dummy) {
            let bid = Rational::from(u64::from(c.bidder.demand)) * &self.ppi_r;
            out.insert(c.bidder.id.clone(), bid);
        }
        if !self.top_high.bidder.dummy {
            out.insert(
                self.top_high.bidder.id.clone(),
                self.second_high_value.clone(),
            );
        }
        out
    }

    pub fn distribution(&self) -> OutcomeDistribution {
        let third = Rational::new(1, 3);
        // Keyed by tie-breaking index, which is unique across real and dummy bidders.
        let mut rows: BTreeMap<usize, (Rational, Rational)> = BTreeMap::new();
        for c in self.candidates() {
            let pay = &self.low_win_prob * Rational::from(u64::from(c.bidder.demand)) * &self.ppi_r;
            rows.insert(c.index, (self.low_win_prob.clone(), pay));
        }
        rows.insert(
            self.top_high.index,
            (third.clone(), &self.second_high_value * &third),
        );
        let ranked = self.classified.low.iter().chain(&self.classified.high);
        OutcomeDistribution::from_rows(ranked.map(|r| {
            let (w, p) = rows
                .remove(&r.index)
                .unwrap_or_else(|| (Rational::zero(), Rational::zero()));
            (&r.bidder, w, p)
        }))
    }

    /// One realization. Consumes draw 1 for the branch coin and, on the low
    /// branch, one draw per candidate.
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> SampledOutcome {
        let mut winners = BTreeSet::new();
        let mut charge = BTreeMap::new();
        let mut items_sold = 0;
        if bernoulli(rng, &Rational::new(1, 3)) {
            let top = &self.top_high.bidder;
            if !top.dummy {
                winners.insert(top.id.clone());
                charge.insert(top.id.clone(), self.second_high_value.clone());
                items_sold += top.demand;
            }
            return SampledOutcome {
                branch: Branch::High,
                winners,
                charge,
                items_sold,
            };
        }
        let p = self.selection_prob();
        for c in self.candidates() {
            if bernoulli(rng, &p) && !c.bidder.dummy {
                winners.insert(c.bidder.id.clone());
                let price = Rational::from(u64::from(c.bidder.demand)) * &self.ppi_r;
                charge.insert(c.bidder.id.clone(), price);
                items_sold += c.bidder.demand;
            }
        }
        SampledOutcome {
            branch: Branch::Low,
            winners,
            charge,
            items_sold,
        }
    }
}

/// Least 1-based `r` whose prefix demand reaches `k`.
pub fn runner_up(low_sorted: &[Ranked], k: u32) -> Result<usize> {
    let mut total: u64 = 0;
    for (i, r) in low_sorted.iter().enumerate() {
        total += u64::from(r.bidder.demand);
        if total >= u64::from(k) {
            return Ok(i + 1);
        }
    }
    Err(AuctionError::InsufficientLowDemand { total, k })
}

pub fn analyze(profile: &TypeProfile) -> CaiiAnalysis {
    let classified = classify(profile);
    let k = profile.k();
    let runner_up_pos =
        runner_up(&classified.low, k).expect("classification pads the low side to demand k");
    let ppi_r = classified.low[runner_up_pos - 1].ppi.clone();
    let candidate_demand: u64 = classified.low[..runner_up_pos - 1]
        .iter()
        .map(|r| u64::from(r.bidder.demand))
        .sum();
    let low_win_prob = if candidate_demand == 0 {
        Rational::zero()
    } else {
        Rational::from(u64::from(2 * half_up(k))) / Rational::from(3 * candidate_demand)
    };
    let top_high = classified.high[0].clone();
    let second_high_value = classified.high[1].bidder.valuation.clone();
    CaiiAnalysis {
        classified,
        runner_up_pos,
        ppi_r,
        candidate_demand,
        low_win_prob,
        top_high,
        second_high_value,
    }
}

pub fn allocate(profile: &TypeProfile) -> OutcomeDistribution {
    analyze(profile).distribution()
}

pub fn expected_revenue(profile: &TypeProfile) -> Rational {
    analyze(profile).closed_form_revenue()
}

pub fn critical_bids(profile: &TypeProfile) -> BTreeMap<String, Rational> {
    analyze(profile).critical_bids()
}

pub fn sample<R: RngCore + ?Sized>(profile: &TypeProfile, rng: &mut R) -> SampledOutcome {
    analyze(profile).draw(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Bidder;
    use crate::rng::seeded;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn golden() -> TypeProfile {
        TypeProfile::new(
            4,
            vec![
                Bidder::new("b1", 2, q(10)),
                Bidder::new("b2", 1, q(4)),
                Bidder::new("b3", 2, q(6)),
                Bidder::new("b4", 1, q(1)),
                Bidder::new("b5", 3, q(9)),
                Bidder::new("b6", 4, q(6)),
            ],
        )
        .unwrap()
    }

    fn ranked_demands(ds: &[u32]) -> Vec<Ranked> {
        let bidders: Vec<_> = ds
            .iter()
            .enumerate()
            .map(|(i, &d)| Bidder::new(format!("x{i}"), d, q(1)))
            .collect();
        let p = TypeProfile::new(100, bidders).unwrap();
        let mut c = classify(&p).low;
        c.retain(|r| !r.bidder.dummy);
        c.sort_by_key(|r| r.index);
        c
    }

    #[test]
    fn runner_up_examples() {
        assert_eq!(runner_up(&ranked_demands(&[2, 1, 2, 1]), 4), Ok(3));
        assert_eq!(runner_up(&ranked_demands(&[1, 1, 1, 1]), 4), Ok(4));
        assert_eq!(runner_up(&ranked_demands(&[1, 1, 1]), 2), Ok(2));
        assert_eq!(
            runner_up(&ranked_demands(&[1, 1]), 4),
            Err(AuctionError::InsufficientLowDemand { total: 2, k: 4 })
        );
    }

    #[test]
    fn analyze_golden() {
        let a = analyze(&golden());
        assert_eq!(a.runner_up_pos, 3);
        assert_eq!(a.ppi_r, q(3));
        assert_eq!(a.candidate_demand, 3);
        assert_eq!(a.low_win_prob, Rational::new(4, 9));
        assert_eq!(a.top_high.bidder.id, "b5");
        assert_eq!(a.second_high_value, q(6));
    }

    #[test]
    fn analyze_single_high_bidder_k2() {
        let p = TypeProfile::new(2, vec![Bidder::new("h", 2, q(5))]).unwrap();
        let a = analyze(&p);
        assert_eq!(a.runner_up_pos, 2);
        assert_eq!(a.ppi_r, q(0));
        assert_eq!(a.candidate_demand, 1);
        assert_eq!(a.low_win_prob, Rational::new(2, 3));
        assert_eq!(a.second_high_value, q(0));
    }

    #[test]
    fn analyze_identical_low_bidders() {
        let bidders = (0..4).map(|i| Bidder::new(format!("b{i}"), 2, q(6))).collect();
        let a = analyze(&TypeProfile::new(4, bidders).unwrap());
        assert_eq!(a.runner_up_pos, 2);
        assert_eq!(a.candidate_demand, 2);
        assert_eq!(a.low_win_prob, Rational::new(2, 3));
        assert_eq!(a.candidates()[0].bidder.id, "b0");
    }

    #[test]
    fn allocate_golden() {
        let d = allocate(&golden());
        assert_eq!(d.win_prob_of("b1"), Rational::new(4, 9));
        assert_eq!(d.win_prob_of("b2"), Rational::new(4, 9));
        assert_eq!(d.win_prob_of("b5"), Rational::new(1, 3));
        for loser in ["b3", "b4", "b6"] {
            assert_eq!(d.win_prob_of(loser), q(0));
            assert_eq!(d.payment_of(loser), q(0));
        }
        assert_eq!(d.payment_of("b1"), Rational::new(8, 3));
        assert_eq!(d.payment_of("b2"), Rational::new(4, 3));
        assert_eq!(d.payment_of("b5"), q(2));
        assert_eq!(d.expected_revenue, q(6));
        assert_eq!(d.expected_welfare, Rational::new(83, 9));
        assert_eq!(d.expected_items_sold, Rational::new(7, 3));
        assert_eq!(d.win_prob.len(), 6);
    }

    #[test]
    fn allocate_zero_valuations() {
        let p = TypeProfile::new(
            3,
            vec![Bidder::new("a", 1, q(0)), Bidder::new("b", 3, q(0))],
        )
        .unwrap();
        let d = allocate(&p);
        assert!(d.expected_payment.values().all(Rational::is_zero));
        assert_eq!(d.expected_revenue, q(0));
    }

    #[test]
    fn allocate_intro_instance() {
        let p = TypeProfile::new(
            2,
            vec![
                Bidder::new("a", 1, q(2)),
                Bidder::new("b", 2, q(2)),
                Bidder::new("c", 1, q(2)),
            ],
        )
        .unwrap();
        let a = analyze(&p);
        assert_eq!(a.candidate_demand, 1);
        let d = a.distribution();
        assert_eq!(d.win_prob_of("a"), Rational::new(2, 3));
        assert_eq!(d.win_prob_of("c"), q(0));
        assert_eq!(d.expected_revenue, Rational::new(4, 3));
        assert_eq!(a.closed_form_revenue(), Rational::new(4, 3));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(expected_revenue(&golden()), q(6));
        assert_eq!(expected_revenue(&TypeProfile::new(5, vec![]).unwrap()), q(0));
        let lone = TypeProfile::new(2, vec![Bidder::new("a", 1, q(7))]).unwrap();
        assert_eq!(expected_revenue(&lone), q(0));
    }

    #[test]
    fn k1_is_a_one_third_second_price_sale() {
        let p = TypeProfile::new(
            1,
            vec![Bidder::new("a", 1, q(9)), Bidder::new("b", 1, q(4))],
        )
        .unwrap();
        let a = analyze(&p);
        assert_eq!(a.candidate_demand, 0);
        assert_eq!(a.low_win_prob, q(0));
        let d = a.distribution();
        assert_eq!(d.win_prob_of("a"), Rational::new(1, 3));
        assert_eq!(d.payment_of("a"), Rational::new(4, 3));
        assert_eq!(d.expected_revenue, a.closed_form_revenue());
        assert_eq!(d.expected_items_sold, Rational::new(1, 3));
    }

    #[test]
    fn critical_bids_golden() {
        let c = critical_bids(&golden());
        assert_eq!(c.get("b1"), Some(&q(6)));
        assert_eq!(c.get("b2"), Some(&q(3)));
        assert_eq!(c.get("b5"), Some(&q(6)));
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn sampling_is_seeded_and_never_oversells() {
        let p = golden();
        let a = analyze(&p);
        let x = a.draw(&mut seeded(11));
        let y = a.draw(&mut seeded(11));
        assert_eq!(x, y);
        let mut rng = seeded(12);
        for _ in 0..2000 {
            let s = a.draw(&mut rng);
            assert!(s.items_sold <= 4);
            assert!(s.items_sold as u64 <= a.candidate_demand.max(3));
            for (id, c) in &s.charge {
                assert!(c <= &p.bidder(id).unwrap().valuation);
            }
        }
    }

    #[test]
    fn dummy_top_high_sells_nothing() {
        let p = TypeProfile::new(4, vec![Bidder::new("a", 1, q(5))]).unwrap();
        let a = analyze(&p);
        assert!(a.top_high.bidder.dummy);
        let mut rng = seeded(0);
        for _ in 0..200 {
            let s = a.draw(&mut rng);
            if s.branch == Branch::High {
                assert!(s.winners.is_empty());
            }
            assert!(s.winners.iter().all(|w| w == "a"));
        }
    }
}
