use serde::Serialize;

use super::{AnyProfile, AuctionProfile, Augmentation, Mechanism};
use crate::error::Result;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RmReport {
    pub base: AnyProfile,
    pub augmentation: Augmentation,
    pub revenue_before: Rational,
    pub revenue_after: Rational,
    pub violated: bool,
}

/// Exact comparison of expected revenue before and after `aug`.
/// Invalid augmentations (unknown bidder, non-positive raise) are errors.
pub fn check_rm<M: Mechanism>(mech: &M, profile: &M::Profile, aug: &Augmentation) -> Result<RmReport> {
    let after = profile.augment(aug)?;
    let revenue_before = mech.expected_revenue(profile);
    let revenue_after = mech.expected_revenue(&after);
    Ok(RmReport {
        base: profile.dump(),
        augmentation: aug.clone(),
        violated: revenue_after < revenue_before,
        revenue_before,
        revenue_after,
    })
}
