use serde::Serialize;

use super::{AuctionProfile, Mechanism};
use crate::rational::Rational;

/// Welfare ratio of one instance. `ratio` is `None` when the mechanism's
/// expected welfare is zero but the optimum is positive (an infinite ratio).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PormReport {
    pub mech_welfare: Rational,
    pub max_welfare: Rational,
    pub ratio: Option<Rational>,
    pub bound: Rational,
    pub within_bound: bool,
}

pub fn porm_ratio<M: Mechanism>(mech: &M, profile: &M::Profile, bound: &Rational) -> PormReport {
    let mech_welfare = mech.allocate(profile).expected_welfare;
    let max_welfare = profile.max_welfare();
    let ratio = if max_welfare.is_zero() {
        Some(Rational::one())
    } else if mech_welfare.is_zero() {
        None
    } else {
        Some(&max_welfare / &mech_welfare)
    };
    let within_bound = max_welfare.is_zero() || max_welfare <= bound * &mech_welfare;
    PormReport {
        mech_welfare,
        max_welfare,
        ratio,
        bound: bound.clone(),
        within_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bidder, TypeProfile};
    use crate::verify::Caii;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn caii_golden_ratio() {
        let rows = [(2, 10), (1, 4), (2, 6), (1, 1), (3, 9), (4, 6)];
        let bidders = rows
            .iter()
            .enumerate()
            .map(|(i, &(d, v))| Bidder::new(format!("b{}", i + 1), d, q(v)))
            .collect();
        let p = TypeProfile::new(4, bidders).unwrap();
        let r = porm_ratio(&Caii, &p, &q(3));
        assert_eq!(r.ratio, Some(Rational::new(144, 83)));
        assert!(r.within_bound);
    }

    #[test]
    fn single_high_bidder_is_tight() {
        let p = TypeProfile::new(5, vec![Bidder::new("h", 5, q(12))]).unwrap();
        let r = porm_ratio(&Caii, &p, &q(3));
        assert_eq!(r.ratio, Some(q(3)));
        assert!(r.within_bound);
        assert!(!porm_ratio(&Caii, &p, &Rational::new(299, 100)).within_bound);
    }

    #[test]
    fn all_zero_is_within_bound() {
        let p = TypeProfile::new(3, vec![Bidder::new("a", 1, q(0)), Bidder::new("b", 3, q(0))]).unwrap();
        let r = porm_ratio(&Caii, &p, &q(3));
        assert_eq!(r.max_welfare, q(0));
        assert!(r.within_bound);
    }
}
