//! The multi-group mechanism: winners must all come from one group.
//!
//! Every group is scored by its maximum possible revenue (MPRG),
//! `max(V, max_{j <= ceil(k/2)} j * u_j)`, where `V` is its highest
//! high-demand valuation and `u_j` the per-item price at which `j` items can
//! be sold to its low-demand bidders. The top-scoring group wins; the
//! second-highest score `R` acts as a reserve. Inside the winning group, with
//! `X = max(R, V)`:
//!
//! * HIGH: the top high-demand bidder wins and pays `max(R, M, V2)`, where
//!   `M = max_j j * u_j`.
//! * LOW_PARTIAL: `j*` (the largest `j <= ceil(k/2)` with `j * u_j >= X`) is
//!   below `ceil(k/2)`; every low bidder with `ppi >= u_{j*}` wins and pays
//!   `demand * X / j*`.
//! * LOW_FULL: `j* = ceil(k/2)`; each of the first `a` low bidders (those
//!   above the runner-up with `ppi >= X / ceil(k/2)`) wins independently with
//!   probability `ceil(k/2) / A` and pays `demand * max(ppi_r, X / ceil(k/2))`.
//!
//! The low cases apply whenever `M >= X`; otherwise the high case applies.

use std::collections::{BTreeMap, BTreeSet};

use rand::RngCore;
use serde::Serialize;

use crate::caii::runner_up;
use crate::model::{
    classify_bidders, half_up, Bidder, Branch, ClassifiedProfile, GroupedProfile,
    OutcomeDistribution, Ranked, SampledOutcome,
};
use crate::rational::Rational;
use crate::rng::bernoulli;

/// Per-group quantities used for group selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAnalysis {
    pub group_id: String,
    pub classified: ClassifiedProfile,
    /// `V`: highest high-demand valuation (0 if the group has none).
    pub top_value: Rational,
    /// `V2`: second-highest high-demand valuation.
    pub second_value: Rational,
    /// `u_1..u_k`, stored at indices `0..k`.
    pub item_values: Vec<Rational>,
    /// `M = max_{j <= ceil(k/2)} j * u_j`.
    pub best_low_revenue: Rational,
    pub mprg: Rational,
    pub runner_up_pos: usize,
    pub ppi_r: Rational,
}

impl GroupAnalysis {
    pub fn top_high(&self) -> &Ranked {
        &self.classified.high[0]
    }

    /// `u_j` for 1-based `j`.
    pub fn item_value(&self, j: u32) -> &Rational {
        &self.item_values[j as usize - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Case {
    High,
    LowPartial,
    LowFull,
}

impl Case {
    pub fn as_str(self) -> &'static str {
        match self {
            Case::High => "HIGH",
            Case::LowPartial => "LOW_PARTIAL",
            Case::LowFull => "LOW_FULL",
        }
    }

    fn branch(self) -> Branch {
        match self {
            Case::High => Branch::High,
            Case::LowPartial => Branch::LowPartial,
            Case::LowFull => Branch::LowFull,
        }
    }
}

/// A winner (or LOW_FULL candidate) of the chosen group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McaiiWinner {
    pub bidder: Bidder,
    pub win_prob: Rational,
    /// Charge upon winning; also the bidder's critical bid.
    pub critical_bid: Rational,
}

impl McaiiWinner {
    pub fn expected_payment(&self) -> Rational {
        &self.win_prob * &self.critical_bid
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McaiiDecision {
    pub k: u32,
    pub groups: Vec<GroupAnalysis>,
    /// Position of `g*` in `groups`.
    pub winning_pos: usize,
    /// `R`: second-highest MPRG, or 0 with a single group.
    pub reserve: Rational,
    pub case: Case,
    pub jstar: Option<u32>,
    /// 1-based position `a` (LOW_FULL only; absent when no candidate exists).
    pub a: Option<usize>,
    /// `A`: total demand of positions `1..=a` (LOW_FULL only).
    pub a_total: Option<u64>,
    /// Winners in ranking order; dummies included so draws follow the stream rule.
    pub winners: Vec<McaiiWinner>,
}

impl McaiiDecision {
    pub fn winning_group(&self) -> &GroupAnalysis {
        &self.groups[self.winning_pos]
    }

    /// `X = max(R, V)` for the winning group.
    pub fn threshold(&self) -> Rational {
        self.reserve
            .clone()
            .max(self.winning_group().top_value.clone())
    }

    /// Expected revenue from the case formula (independent of the winner list).
    pub fn closed_form_revenue(&self) -> Rational {
        let g = self.winning_group();
        match self.case {
            Case::High => self
                .reserve
                .clone()
                .max(g.best_low_revenue.clone())
                .max(g.second_value.clone()),
            Case::LowPartial => self.threshold(),
            Case::LowFull => {
                let c = Rational::from(u64::from(half_up(self.k)));
                (c * &g.ppi_r).max(self.threshold())
            }
        }
    }

    pub fn critical_bids(&self) -> BTreeMap<String, Rational> {
        self.winners
            .iter()
            .filter(|w| !w.bidder.dummy)
            .map(|w| (w.bidder.id.clone(), w.critical_bid.clone()))
            .collect()
    }

    pub fn distribution(&self) -> OutcomeDistribution {
        let mut rows: BTreeMap<(usize, usize), (Rational, Rational)> = BTreeMap::new();
        let g = self.winning_group();
        for w in &self.winners {
            let index = g
                .classified
                .low
                .iter()
                .chain(&g.classified.high)
                .find(|r| r.bidder.id == w.bidder.id && r.bidder.dummy == w.bidder.dummy)
                .map(|r| r.index)
                .expect("winner comes from the winning group");
            rows.insert(
                (self.winning_pos, index),
                (w.win_prob.clone(), w.expected_payment()),
            );
        }
        let all = self.groups.iter().enumerate().flat_map(|(gi, g)| {
            g.classified
                .low
                .iter()
                .chain(&g.classified.high)
                .map(move |r| (gi, r))
        });
        OutcomeDistribution::from_rows(all.map(|(gi, r)| {
            let (w, p) = rows
                .remove(&(gi, r.index))
                .unwrap_or_else(|| (Rational::zero(), Rational::zero()));
            (&r.bidder, w, p)
        }))
    }

    /// One realization; only LOW_FULL consumes draws (one per candidate).
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> SampledOutcome {
        let mut winners = BTreeSet::new();
        let mut charge = BTreeMap::new();
        let mut items_sold = 0;
        for w in &self.winners {
            let won = match self.case {
                Case::LowFull => bernoulli(rng, &w.win_prob),
                _ => true,
            };
            if won && !w.bidder.dummy {
                winners.insert(w.bidder.id.clone());
                charge.insert(w.bidder.id.clone(), w.critical_bid.clone());
                items_sold += w.bidder.demand;
            }
        }
        SampledOutcome {
            branch: self.case.branch(),
            winners,
            charge,
            items_sold,
        }
    }
}

/// `u_1..u_k` for a ppi-sorted, padded low list: `u_j` is the ppi of the
/// bidder whose prefix demand first reaches `j`.
pub fn item_values(low_sorted: &[Ranked], k: u32) -> Vec<Rational> {
    let mut out = Vec::with_capacity(k as usize);
    let mut covered: u64 = 0;
    for r in low_sorted {
        covered += u64::from(r.bidder.demand);
        while (out.len() as u64) < covered.min(u64::from(k)) {
            out.push(r.ppi.clone());
        }
        if out.len() as u64 >= u64::from(k) {
            break;
        }
    }
    assert_eq!(out.len(), k as usize, "low side must be padded to demand k");
    out
}

/// `max_{j <= ceil(k/2)} j * u_j`.
fn best_low_revenue(item_values: &[Rational], k: u32) -> Rational {
    (1..=half_up(k))
        .map(|j| Rational::from(u64::from(j)) * &item_values[j as usize - 1])
        .max()
        .unwrap_or_default()
}

pub fn analyze_group(group_id: &str, bidders: &[Bidder], k: u32) -> GroupAnalysis {
    let classified = classify_bidders(k, bidders);
    let item_values = item_values(&classified.low, k);
    let best = best_low_revenue(&item_values, k);
    let top_value = classified.high[0].bidder.valuation.clone();
    let second_value = classified.high[1].bidder.valuation.clone();
    let mprg = top_value.clone().max(best.clone());
    let runner_up_pos = runner_up(&classified.low, k).expect("padded low side");
    let ppi_r = classified.low[runner_up_pos - 1].ppi.clone();
    GroupAnalysis {
        group_id: group_id.to_string(),
        classified,
        top_value,
        second_value,
        item_values,
        best_low_revenue: best,
        mprg,
        runner_up_pos,
        ppi_r,
    }
}

/// MPRG of one group's bidder list.
pub fn mprg(bidders: &[Bidder], k: u32) -> Rational {
    analyze_group("", bidders, k).mprg
}

/// `(position of g*, R)`: highest MPRG with ties to the lowest position, and
/// the second-highest MPRG (0 when there is a single group).
pub fn select_group(scores: &[Rational]) -> (usize, Rational) {
    assert!(!scores.is_empty(), "at least one group required");
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if s > &scores[best] {
            best = i;
        }
    }
    let reserve = scores
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, s)| s.clone())
        .max()
        .unwrap_or_default();
    (best, reserve)
}

pub fn decide(profile: &GroupedProfile) -> McaiiDecision {
    let k = profile.k();
    let c = half_up(k);
    let mut groups: Vec<GroupAnalysis> = profile
        .groups()
        .iter()
        .map(|g| analyze_group(&g.id, &g.bidders, k))
        .collect();
    if groups.is_empty() {
        groups.push(analyze_group("", &[], k));
    }
    let scores: Vec<Rational> = groups.iter().map(|g| g.mprg.clone()).collect();
    let (winning_pos, reserve) = select_group(&scores);
    let g = &groups[winning_pos];
    let x = reserve.clone().max(g.top_value.clone());

    let mut decision = McaiiDecision {
        k,
        winning_pos,
        reserve: reserve.clone(),
        case: Case::High,
        jstar: None,
        a: None,
        a_total: None,
        winners: Vec::new(),
        groups: Vec::new(),
    };

    if g.best_low_revenue < x {
        let critical = reserve
            .max(g.best_low_revenue.clone())
            .max(g.second_value.clone());
        decision.winners.push(McaiiWinner {
            bidder: g.top_high().bidder.clone(),
            win_prob: Rational::one(),
            critical_bid: critical,
        });
    } else {
        let jstar = (1..=c)
            .rev()
            .find(|&j| Rational::from(u64::from(j)) * g.item_value(j) >= x)
            .expect("M >= X guarantees some j qualifies");
        decision.jstar = Some(jstar);
        if jstar < c {
            decision.case = Case::LowPartial;
            let cutoff = g.item_value(jstar);
            let per_item = &x / Rational::from(u64::from(jstar));
            for r in g.classified.low.iter().filter(|r| &r.ppi >= cutoff) {
                decision.winners.push(McaiiWinner {
                    bidder: r.bidder.clone(),
                    win_prob: Rational::one(),
                    critical_bid: Rational::from(u64::from(r.bidder.demand)) * &per_item,
                });
            }
        } else {
            decision.case = Case::LowFull;
            let per_item_floor = &x / Rational::from(u64::from(c));
            let above_runner_up = &g.classified.low[..g.runner_up_pos - 1];
            let a = above_runner_up
                .iter()
                .take_while(|r| r.ppi >= per_item_floor)
                .count();
            if a > 0 {
                let a_total: u64 = above_runner_up[..a]
                    .iter()
                    .map(|r| u64::from(r.bidder.demand))
                    .sum();
                let prob = Rational::from(u64::from(c)) / Rational::from(a_total);
                let price = g.ppi_r.clone().max(per_item_floor);
                for r in &above_runner_up[..a] {
                    decision.winners.push(McaiiWinner {
                        bidder: r.bidder.clone(),
                        win_prob: prob.clone(),
                        critical_bid: Rational::from(u64::from(r.bidder.demand)) * &price,
                    });
                }
                decision.a = Some(a);
                decision.a_total = Some(a_total);
            } else {
                decision.a_total = Some(0);
            }
        }
    }
    decision.groups = groups;
    decision
}

pub fn allocate(profile: &GroupedProfile) -> (McaiiDecision, OutcomeDistribution) {
    let d = decide(profile);
    let dist = d.distribution();
    (d, dist)
}

pub fn expected_revenue(profile: &GroupedProfile) -> Rational {
    decide(profile).closed_form_revenue()
}

pub fn critical_bids(profile: &GroupedProfile) -> BTreeMap<String, Rational> {
    decide(profile).critical_bids()
}

pub fn sample<R: RngCore + ?Sized>(profile: &GroupedProfile, rng: &mut R) -> SampledOutcome {
    decide(profile).draw(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Group;
    use crate::rng::seeded;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn caii_bidders() -> Vec<Bidder> {
        vec![
            Bidder::new("b1", 2, q(10)),
            Bidder::new("b2", 1, q(4)),
            Bidder::new("b3", 2, q(6)),
            Bidder::new("b4", 1, q(1)),
            Bidder::new("b5", 3, q(9)),
            Bidder::new("b6", 4, q(6)),
        ]
    }

    fn group(id: &str, bidders: Vec<Bidder>) -> Group {
        Group {
            id: id.into(),
            bidders,
        }
    }

    fn two_group() -> GroupedProfile {
        GroupedProfile::new(
            4,
            vec![
                group("g1", caii_bidders()),
                group("g2", vec![Bidder::new("h", 4, q(7))]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn item_values_examples() {
        let g = analyze_group("g", &caii_bidders(), 4);
        assert_eq!(g.item_values, vec![q(5), q(5), q(4), q(3)]);
        assert_eq!(analyze_group("e", &[], 4).item_values, vec![q(0); 4]);
        let lone_high = analyze_group("h", &[Bidder::new("x", 4, q(8))], 4);
        assert_eq!(lone_high.item_values, vec![q(0); 4]);
    }

    #[test]
    fn mprg_examples() {
        assert_eq!(mprg(&caii_bidders(), 4), q(10));
        assert_eq!(mprg(&[Bidder::new("h", 4, q(7))], 4), q(7));
        assert_eq!(mprg(&[], 4), q(0));
    }

    #[test]
    fn select_group_examples() {
        assert_eq!(select_group(&[q(10), q(7)]), (0, q(7)));
        assert_eq!(select_group(&[q(3)]), (0, q(0)));
        assert_eq!(select_group(&[q(5), q(5)]), (0, q(5)));
        assert_eq!(select_group(&[q(1), q(9), q(4), q(9)]), (1, q(9)));
    }

    #[test]
    fn two_group_low_full() {
        let (d, dist) = allocate(&two_group());
        assert_eq!(d.winning_group().group_id, "g1");
        assert_eq!(d.reserve, q(7));
        assert_eq!(d.threshold(), q(9));
        assert_eq!(d.case, Case::LowFull);
        assert_eq!(d.jstar, Some(2));
        assert_eq!(d.a, Some(1));
        assert_eq!(d.a_total, Some(2));
        assert_eq!(dist.win_prob_of("b1"), q(1));
        assert_eq!(dist.payment_of("b1"), q(9));
        assert_eq!(dist.expected_revenue, q(9));
        assert_eq!(d.closed_form_revenue(), q(9));
        assert_eq!(dist.expected_welfare, q(10));
        assert_eq!(dist.expected_items_sold, q(2));
        assert_eq!(dist.win_prob.len(), 7);
    }

    #[test]
    fn high_case_pays_max_of_reserve_low_and_second() {
        let p = GroupedProfile::new(
            4,
            vec![
                group(
                    "g1",
                    vec![
                        Bidder::new("top", 3, q(100)),
                        Bidder::new("second", 3, q(15)),
                        Bidder::new("low", 2, q(20)),
                    ],
                ),
                group("g2", vec![Bidder::new("h", 4, q(10))]),
            ],
        )
        .unwrap();
        let (d, dist) = allocate(&p);
        assert_eq!(d.case, Case::High);
        assert_eq!(d.winning_group().best_low_revenue, q(20));
        assert_eq!(dist.win_prob_of("top"), q(1));
        assert_eq!(dist.payment_of("top"), q(20));
        assert_eq!(d.closed_form_revenue(), q(20));
        let s = d.draw(&mut seeded(0));
        assert_eq!(s.winners.len(), 1);
        assert_eq!(s.items_sold, 3);
    }

    #[test]
    fn zero_reserve_low_full_charges_runner_up_ppi() {
        let low: Vec<_> = caii_bidders().into_iter().take(4).collect();
        let p = GroupedProfile::new(4, vec![group("g", low)]).unwrap();
        let (d, dist) = allocate(&p);
        assert_eq!(d.case, Case::LowFull);
        assert_eq!(d.jstar, Some(2));
        assert_eq!(d.a, Some(2));
        assert_eq!(d.a_total, Some(3));
        assert_eq!(dist.win_prob_of("b1"), Rational::new(2, 3));
        assert_eq!(d.critical_bids().get("b1"), Some(&q(6)));
        assert_eq!(d.critical_bids().get("b2"), Some(&q(3)));
        assert_eq!(dist.expected_revenue, q(6));
    }

    #[test]
    fn low_partial_sells_exactly_jstar_items() {
        // k = 6, ceil(k/2) = 3; u = [10, 10, 2, ...], R = 9 from a rival group.
        let p = GroupedProfile::new(
            6,
            vec![
                group(
                    "g1",
                    vec![
                        Bidder::new("a", 1, q(10)),
                        Bidder::new("b", 1, q(10)),
                        Bidder::new("c", 3, q(6)),
                    ],
                ),
                group("g2", vec![Bidder::new("h", 6, q(9))]),
            ],
        )
        .unwrap();
        let (d, dist) = allocate(&p);
        assert_eq!(d.case, Case::LowPartial);
        assert_eq!(d.jstar, Some(2));
        assert_eq!(dist.payment_of("a"), Rational::new(9, 2));
        assert_eq!(dist.payment_of("b"), Rational::new(9, 2));
        assert_eq!(dist.payment_of("c"), q(0));
        assert_eq!(dist.expected_revenue, q(9));
        assert_eq!(d.closed_form_revenue(), q(9));
        assert_eq!(dist.expected_items_sold, q(2));
    }

    #[test]
    fn single_high_bidder_alone_pays_nothing() {
        let p = GroupedProfile::new(4, vec![group("g", vec![Bidder::new("h", 4, q(7))])]).unwrap();
        let (d, dist) = allocate(&p);
        assert_eq!(d.case, Case::High);
        assert_eq!(dist.win_prob_of("h"), q(1));
        assert_eq!(dist.expected_revenue, q(0));
    }

    #[test]
    fn tied_high_and_reserve_goes_high() {
        let p = GroupedProfile::new(
            4,
            vec![
                group("g1", vec![Bidder::new("x", 4, q(5))]),
                group("g2", vec![Bidder::new("y", 4, q(5))]),
            ],
        )
        .unwrap();
        let (d, dist) = allocate(&p);
        assert_eq!(d.winning_group().group_id, "g1");
        assert_eq!(d.case, Case::High);
        assert_eq!(dist.payment_of("x"), q(5));
        assert_eq!(dist.win_prob_of("y"), q(0));
    }

    #[test]
    fn k1_all_zero_has_no_candidates() {
        let p = GroupedProfile::new(1, vec![group("g", vec![Bidder::new("h", 1, q(0))])]).unwrap();
        let (d, dist) = allocate(&p);
        assert_eq!(d.case, Case::LowFull);
        assert_eq!(d.a, None);
        assert_eq!(d.a_total, Some(0));
        assert_eq!(dist.expected_revenue, q(0));
        assert_eq!(d.closed_form_revenue(), q(0));
    }

    #[test]
    fn empty_profile_is_harmless() {
        let p = GroupedProfile::new(3, vec![]).unwrap();
        let (d, dist) = allocate(&p);
        assert_eq!(dist.expected_revenue, q(0));
        assert!(dist.win_prob.is_empty());
        assert_eq!(d.groups.len(), 1);
    }

    #[test]
    fn low_full_sampling_is_seeded() {
        let low: Vec<_> = caii_bidders().into_iter().take(4).collect();
        let p = GroupedProfile::new(4, vec![group("g", low)]).unwrap();
        let d = decide(&p);
        assert_eq!(d.draw(&mut seeded(9)), d.draw(&mut seeded(9)));
        let mut rng = seeded(10);
        for _ in 0..1000 {
            let s = d.draw(&mut rng);
            assert!(s.items_sold <= 3);
            assert_eq!(s.branch, Branch::LowFull);
        }
    }
}
