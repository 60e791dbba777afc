//! Domain types shared by both mechanisms: bidders, type profiles, the
//! low/high classification with dummy padding, and outcome containers.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};
use crate::rational::Rational;

/// A single-parameter bidder: public demand, private valuation for the bundle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bidder {
    pub id: String,
    pub demand: u32,
    pub valuation: Rational,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub dummy: bool,
}

impl Bidder {
    pub fn new(id: impl Into<String>, demand: u32, valuation: Rational) -> Self {
        Bidder {
            id: id.into(),
            demand,
            valuation,
            dummy: false,
        }
    }

    fn dummy(id: String, demand: u32) -> Self {
        Bidder {
            id,
            demand,
            valuation: Rational::zero(),
            dummy: true,
        }
    }

    /// Price per item, `valuation / demand`.
    pub fn ppi(&self) -> Rational {
        ppi(self)
    }
}

pub fn ppi(b: &Bidder) -> Rational {
    debug_assert!(b.demand >= 1);
    &b.valuation / Rational::from(u64::from(b.demand))
}

/// `ceil(k / 2)`: the number of items the low side sells in expectation.
pub fn half_up(k: u32) -> u32 {
    k.div_ceil(2)
}

/// Largest demand that still counts as low-demand, `floor(k / 2)`.
pub fn low_threshold(k: u32) -> u32 {
    k / 2
}

fn validate_bidders<'a>(
    k: u32,
    bidders: impl IntoIterator<Item = &'a Bidder>,
    seen: &mut HashSet<String>,
) -> Result<()> {
    for b in bidders {
        if b.demand == 0 || b.demand > k {
            return Err(AuctionError::DemandOutOfRange {
                id: b.id.clone(),
                demand: b.demand,
                k,
            });
        }
        if b.valuation.is_negative() {
            return Err(AuctionError::NegativeValuation {
                id: b.id.clone(),
                valuation: b.valuation.clone(),
            });
        }
        if !seen.insert(b.id.clone()) {
            return Err(AuctionError::DuplicateBidder(b.id.clone()));
        }
    }
    Ok(())
}

/// An auction instance: `k` identical items and an ordered bidder list.
/// A bidder's position in the list is her tie-breaking index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeProfile {
    k: u32,
    bidders: Vec<Bidder>,
}

impl TypeProfile {
    pub fn new(k: u32, bidders: Vec<Bidder>) -> Result<Self> {
        if k == 0 {
            return Err(AuctionError::NoItems);
        }
        validate_bidders(k, &bidders, &mut HashSet::new())?;
        Ok(TypeProfile { k, bidders })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn bidders(&self) -> &[Bidder] {
        &self.bidders
    }

    pub fn bidder(&self, id: &str) -> Option<&Bidder> {
        self.bidders.iter().find(|b| b.id == id)
    }

    /// Same profile with bidder `id` reporting `valuation` instead.
    pub fn with_valuation(&self, id: &str, valuation: Rational) -> Result<Self> {
        let mut next = self.clone();
        let b = next
            .bidders
            .iter_mut()
            .find(|b| b.id == id)
            .ok_or_else(|| AuctionError::UnknownBidder(id.to_string()))?;
        if valuation.is_negative() {
            return Err(AuctionError::NegativeValuation {
                id: id.to_string(),
                valuation,
            });
        }
        b.valuation = valuation;
        Ok(next)
    }

    /// Appends a bidder (she gets the next tie-breaking index).
    pub fn with_bidder(&self, bidder: Bidder) -> Result<Self> {
        let mut bidders = self.bidders.clone();
        bidders.push(bidder);
        TypeProfile::new(self.k, bidders)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub id: String,
    pub bidders: Vec<Bidder>,
}

/// A multi-group instance: all winners must come from a single group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupedProfile {
    k: u32,
    groups: Vec<Group>,
}

impl GroupedProfile {
    pub fn new(k: u32, groups: Vec<Group>) -> Result<Self> {
        if k == 0 {
            return Err(AuctionError::NoItems);
        }
        let mut group_ids = HashSet::new();
        let mut seen = HashSet::new();
        for g in &groups {
            if !group_ids.insert(g.id.clone()) {
                return Err(AuctionError::DuplicateGroup(g.id.clone()));
            }
            validate_bidders(k, &g.bidders, &mut seen)?;
        }
        Ok(GroupedProfile { k, groups })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn bidders(&self) -> impl Iterator<Item = &Bidder> {
        self.groups.iter().flat_map(|g| g.bidders.iter())
    }

    pub fn bidder(&self, id: &str) -> Option<&Bidder> {
        self.bidders().find(|b| b.id == id)
    }

    pub fn group_of(&self, id: &str) -> Option<&Group> {
        self.groups
            .iter()
            .find(|g| g.bidders.iter().any(|b| b.id == id))
    }

    pub fn with_valuation(&self, id: &str, valuation: Rational) -> Result<Self> {
        if valuation.is_negative() {
            return Err(AuctionError::NegativeValuation {
                id: id.to_string(),
                valuation,
            });
        }
        let mut next = self.clone();
        let b = next
            .groups
            .iter_mut()
            .flat_map(|g| g.bidders.iter_mut())
            .find(|b| b.id == id)
            .ok_or_else(|| AuctionError::UnknownBidder(id.to_string()))?;
        b.valuation = valuation;
        Ok(next)
    }

    /// Appends `bidder` to group `group` (created at the end if missing).
    pub fn with_bidder(&self, group: &str, bidder: Bidder) -> Result<Self> {
        let mut groups = self.groups.clone();
        match groups.iter_mut().find(|g| g.id == group) {
            Some(g) => g.bidders.push(bidder),
            None => groups.push(Group {
                id: group.to_string(),
                bidders: vec![bidder],
            }),
        }
        GroupedProfile::new(self.k, groups)
    }

    pub fn with_group(&self, group: Group) -> Result<Self> {
        let mut groups = self.groups.clone();
        groups.push(group);
        GroupedProfile::new(self.k, groups)
    }
}

/// A bidder placed in a ranking, with her tie-breaking index and cached ppi.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranked {
    pub bidder: Bidder,
    pub index: usize,
    pub ppi: Rational,
}

impl Ranked {
    fn new(bidder: Bidder, index: usize) -> Self {
        let ppi = if bidder.dummy { Rational::zero() } else { bidder.ppi() };
        Ranked { bidder, index, ppi }
    }
}

/// Ordering for low-demand bidders: `Less` means `a` is more valuable
/// (higher ppi, ties broken by lower index).
pub fn low_order(a: &Ranked, b: &Ranked) -> Ordering {
    b.ppi.cmp(&a.ppi).then(a.index.cmp(&b.index))
}

/// Ordering for high-demand bidders: higher valuation first, then lower index.
pub fn high_order(a: &Ranked, b: &Ranked) -> Ordering {
    b.bidder
        .valuation
        .cmp(&a.bidder.valuation)
        .then(a.index.cmp(&b.index))
}

/// `a ≻ b` among low-demand bidders.
pub fn more_valuable_low(a: &Ranked, b: &Ranked) -> bool {
    low_order(a, b) == Ordering::Less
}

/// `a ≻ b` among high-demand bidders.
pub fn more_valuable_high(a: &Ranked, b: &Ranked) -> bool {
    high_order(a, b) == Ordering::Less
}

/// Bidders split at `floor(k/2)`, padded with zero-valued dummies and sorted
/// by the more-valuable order.
///
/// The low side is padded with demand-1 dummies until its total demand
/// reaches `k`; the high side always gets two demand-`k` dummies so a first
/// and second high valuation exist. Dummies are indexed after every real
/// bidder, so a real bidder wins any ppi tie against a dummy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedProfile {
    pub k: u32,
    pub low: Vec<Ranked>,
    pub high: Vec<Ranked>,
}

impl ClassifiedProfile {
    pub fn low_demand_total(&self) -> u64 {
        self.low.iter().map(|r| u64::from(r.bidder.demand)).sum()
    }

    /// Original position of a bidder (real or dummy).
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.low
            .iter()
            .chain(&self.high)
            .find(|r| r.bidder.id == id)
            .map(|r| r.index)
    }

    /// Bidders at 1-based positions `1..=upto` of the sorted low list.
    pub fn low_prefix(&self, upto: usize) -> &[Ranked] {
        &self.low[..upto]
    }
}

pub fn classify(profile: &TypeProfile) -> ClassifiedProfile {
    classify_bidders(profile.k(), profile.bidders())
}

/// Classification of an arbitrary bidder list (one group of a grouped profile).
pub fn classify_bidders(k: u32, bidders: &[Bidder]) -> ClassifiedProfile {
    let threshold = low_threshold(k);
    let mut low = Vec::new();
    let mut high = Vec::new();
    for (index, b) in bidders.iter().enumerate() {
        let ranked = Ranked::new(b.clone(), index);
        if b.demand <= threshold {
            low.push(ranked);
        } else {
            high.push(ranked);
        }
    }

    // Dummies have ppi 0 and the largest indices, so they already sit in
    // more-valuable order after every real bidder.
    low.sort_by(low_order);
    high.sort_by(high_order);

    let mut next_index = bidders.len();
    let mut low_total: u64 = low.iter().map(|r| u64::from(r.bidder.demand)).sum();
    let mut n_low_dummies = 0;
    while low_total < u64::from(k) {
        low.push(Ranked::new(
            Bidder::dummy(format!("~dummy-low-{n_low_dummies}"), 1),
            next_index,
        ));
        next_index += 1;
        n_low_dummies += 1;
        low_total += 1;
    }
    for i in 0..2 {
        high.push(Ranked::new(
            Bidder::dummy(format!("~dummy-high-{i}"), k),
            next_index,
        ));
        next_index += 1;
    }

    debug_assert!(low.windows(2).all(|w| low_order(&w[0], &w[1]).is_lt()));
    debug_assert!(high.windows(2).all(|w| high_order(&w[0], &w[1]).is_lt()));
    ClassifiedProfile { k, low, high }
}

/// Analytic outcome of a randomized mechanism on one profile. Maps cover
/// every real bidder; dummies never appear.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutcomeDistribution {
    pub win_prob: BTreeMap<String, Rational>,
    pub expected_payment: BTreeMap<String, Rational>,
    pub expected_revenue: Rational,
    pub expected_welfare: Rational,
    pub expected_items_sold: Rational,
}

impl OutcomeDistribution {
    /// Builds the distribution from per-bidder `(bidder, win probability,
    /// expected payment)` rows, deriving the instance-level totals.
    pub fn from_rows<'a>(rows: impl IntoIterator<Item = (&'a Bidder, Rational, Rational)>) -> Self {
        let mut out = OutcomeDistribution {
            win_prob: BTreeMap::new(),
            expected_payment: BTreeMap::new(),
            expected_revenue: Rational::zero(),
            expected_welfare: Rational::zero(),
            expected_items_sold: Rational::zero(),
        };
        for (b, w, p) in rows {
            if b.dummy {
                continue;
            }
            if !p.is_zero() {
                out.expected_revenue += &p;
            }
            if !w.is_zero() {
                out.expected_welfare += &w * &b.valuation;
                out.expected_items_sold += &w * Rational::from(u64::from(b.demand));
            }
            out.win_prob.insert(b.id.clone(), w);
            out.expected_payment.insert(b.id.clone(), p);
        }
        out
    }

    pub fn win_prob_of(&self, id: &str) -> Rational {
        self.win_prob.get(id).cloned().unwrap_or_default()
    }

    pub fn payment_of(&self, id: &str) -> Rational {
        self.expected_payment.get(id).cloned().unwrap_or_default()
    }
}

/// Which random branch produced a sampled outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Branch {
    High,
    Low,
    LowPartial,
    LowFull,
}

/// One realization of a randomized mechanism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampledOutcome {
    pub branch: Branch,
    pub winners: BTreeSet<String>,
    pub charge: BTreeMap<String, Rational>,
    pub items_sold: u32,
}

impl SampledOutcome {
    pub fn revenue(&self) -> Rational {
        self.charge.values().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn ranked(d: u32, v: i64, index: usize) -> Ranked {
        Ranked::new(Bidder::new(format!("b{index}"), d, q(v)), index)
    }

    #[test]
    fn ppi_examples() {
        assert_eq!(Bidder::new("a", 2, q(10)).ppi(), q(5));
        assert_eq!(Bidder::new("a", 3, q(1)).ppi(), Rational::new(1, 3));
        assert_eq!(Bidder::new("a", 4, q(0)).ppi(), q(0));
    }

    #[test]
    fn more_valuable_low_examples() {
        assert!(more_valuable_low(&ranked(1, 5, 0), &ranked(2, 8, 1)));
        assert!(!more_valuable_low(&ranked(1, 4, 3), &ranked(2, 8, 1)));
        assert!(more_valuable_low(&ranked(2, 8, 1), &ranked(1, 4, 3)));
        let a = ranked(1, 4, 3);
        assert!(!more_valuable_low(&a, &a));
    }

    #[test]
    fn more_valuable_high_uses_valuation_not_ppi() {
        assert!(more_valuable_high(&ranked(4, 9, 2), &ranked(3, 8, 0)));
        assert!(more_valuable_high(&ranked(3, 9, 0), &ranked(4, 9, 2)));
    }

    #[test]
    fn classify_splits_at_floor_half() {
        let bidders = [2, 1, 2, 1, 3, 4]
            .iter()
            .enumerate()
            .map(|(i, &d)| Bidder::new(format!("b{}", i + 1), d, q(1)))
            .collect();
        let c = classify(&TypeProfile::new(4, bidders).unwrap());
        let low: Vec<_> = c.low.iter().map(|r| r.bidder.id.as_str()).collect();
        let high: Vec<_> = c
            .high
            .iter()
            .filter(|r| !r.bidder.dummy)
            .map(|r| r.bidder.id.as_str())
            .collect();
        assert_eq!(low, ["b2", "b4", "b1", "b3"]);
        assert_eq!(high, ["b5", "b6"]);
        assert_eq!(c.high.len(), 4);
    }

    #[test]
    fn classify_pads_single_high_bidder() {
        let p = TypeProfile::new(4, vec![Bidder::new("h", 3, q(9))]).unwrap();
        let c = classify(&p);
        assert_eq!(c.low.len(), 4);
        assert!(c.low.iter().all(|r| r.bidder.dummy && r.bidder.demand == 1));
        assert_eq!(c.high[0].bidder.id, "h");
        assert!(c.high[1].bidder.dummy && c.high[2].bidder.dummy);
        assert_eq!(c.high[1].bidder.demand, 4);
        assert_eq!(c.index_of("~dummy-low-0"), Some(1));
    }

    #[test]
    fn classify_k1_makes_every_real_bidder_high() {
        let p = TypeProfile::new(1, vec![Bidder::new("a", 1, q(3)), Bidder::new("b", 1, q(2))])
            .unwrap();
        let c = classify(&p);
        assert_eq!(c.low.len(), 1);
        assert!(c.low[0].bidder.dummy);
        assert_eq!(c.high.len(), 4);
        assert_eq!(c.high[0].bidder.id, "a");
    }

    #[test]
    fn real_bidder_beats_dummy_on_ppi_tie() {
        let p = TypeProfile::new(4, vec![Bidder::new("z", 1, q(0))]).unwrap();
        let c = classify(&p);
        assert_eq!(c.low[0].bidder.id, "z");
    }

    #[test]
    fn classify_is_deterministic() {
        let p = TypeProfile::new(
            6,
            vec![
                Bidder::new("a", 2, q(6)),
                Bidder::new("b", 3, q(9)),
                Bidder::new("c", 1, q(3)),
                Bidder::new("d", 5, q(20)),
            ],
        )
        .unwrap();
        assert_eq!(classify(&p), classify(&p));
        let c = classify(&p);
        let order: Vec<_> = c.low.iter().map(|r| r.bidder.id.as_str()).collect();
        assert_eq!(&order[..3], ["a", "b", "c"]);
    }

    #[test]
    fn profile_validation() {
        assert_eq!(TypeProfile::new(0, vec![]), Err(AuctionError::NoItems));
        assert!(matches!(
            TypeProfile::new(2, vec![Bidder::new("a", 3, q(1))]),
            Err(AuctionError::DemandOutOfRange { .. })
        ));
        assert!(matches!(
            TypeProfile::new(2, vec![Bidder::new("a", 1, q(-1))]),
            Err(AuctionError::NegativeValuation { .. })
        ));
        assert!(matches!(
            TypeProfile::new(2, vec![Bidder::new("a", 1, q(1)), Bidder::new("a", 2, q(1))]),
            Err(AuctionError::DuplicateBidder(_))
        ));
        let g = |id: &str, b: Vec<Bidder>| Group {
            id: id.into(),
            bidders: b,
        };
        assert!(matches!(
            GroupedProfile::new(2, vec![g("x", vec![]), g("x", vec![])]),
            Err(AuctionError::DuplicateGroup(_))
        ));
        assert!(matches!(
            GroupedProfile::new(
                2,
                vec![
                    g("x", vec![Bidder::new("a", 1, q(1))]),
                    g("y", vec![Bidder::new("a", 1, q(1))])
                ]
            ),
            Err(AuctionError::DuplicateBidder(_))
        ));
    }
}
