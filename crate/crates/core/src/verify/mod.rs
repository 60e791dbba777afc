//! Property-verification harness.
//!
//! Every mechanism is driven through the [`Mechanism`] trait so the same
//! checks (truthfulness probing, revenue monotonicity under augmentation,
//! welfare ratios, Monte Carlo cross-checks) apply to both mechanisms, the
//! VCG baseline and deliberately broken mutants.

use std::collections::BTreeMap;

use rand::RngCore;
use serde::Serialize;

use crate::caii::{self, CaiiAnalysis};
use crate::error::{AuctionError, Result};
use crate::mcaii::{self, McaiiDecision};
use crate::model::{Bidder, Branch, Group, GroupedProfile, OutcomeDistribution, SampledOutcome, TypeProfile};
use crate::rational::Rational;
use crate::welfare::{self, VcgResult};

pub mod campaign;
pub mod generator;
pub mod ic;
pub mod lnbound;
pub mod montecarlo;
pub mod mutants;
pub mod porm;
pub mod rm;

pub use campaign::{run_campaign, CampaignKind, CampaignReport, Violation};
pub use generator::{gen_augmentations, gen_grouped, gen_instances, GenParams};
pub use ic::{check_ic, BidderIc, IcReport};
pub use lnbound::ln_upper_bound;
pub use montecarlo::{monte_carlo_revenue, sample_summary, BranchStats, MonteCarloReport};
pub use mutants::{FirstPrice, Overcharge};
pub use porm::{porm_ratio, PormReport};
pub use rm::{check_rm, RmReport};

/// One step of growing an instance: the cases under which revenue must not drop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Augmentation {
    AddBidder {
        bidder: Bidder,
        #[serde(skip_serializing_if = "Option::is_none")]
        group: Option<String>,
    },
    RaiseBid { id: String, delta: Rational },
    AddGroup { group: Group },
}

/// A profile of either shape, for reports and counterexample dumps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum AnyProfile {
    Flat(TypeProfile),
    Grouped(GroupedProfile),
}

pub trait AuctionProfile: Clone + Send + Sync {
    fn k(&self) -> u32;
    fn real_bidders(&self) -> Vec<&Bidder>;
    fn with_valuation(&self, id: &str, valuation: Rational) -> Result<Self>;
    fn augment(&self, aug: &Augmentation) -> Result<Self>;
    /// Optimal welfare under this profile's feasibility constraints.
    fn max_welfare(&self) -> Rational;
    fn dump(&self) -> AnyProfile;
}

fn raise(profile_bidder: Option<&Bidder>, id: &str, delta: &Rational) -> Result<Rational> {
    if !delta.is_positive() {
        return Err(AuctionError::InvalidAugmentation(format!(
            "bid raise for `{id}` must be strictly positive, got {delta}"
        )));
    }
    let b = profile_bidder.ok_or_else(|| AuctionError::UnknownBidder(id.to_string()))?;
    Ok(&b.valuation + delta)
}

impl AuctionProfile for TypeProfile {
    fn k(&self) -> u32 {
        TypeProfile::k(self)
    }

    fn real_bidders(&self) -> Vec<&Bidder> {
        self.bidders().iter().collect()
    }

    fn with_valuation(&self, id: &str, valuation: Rational) -> Result<Self> {
        TypeProfile::with_valuation(self, id, valuation)
    }

    fn augment(&self, aug: &Augmentation) -> Result<Self> {
        match aug {
            Augmentation::AddBidder { bidder, .. } => self.with_bidder(bidder.clone()),
            Augmentation::RaiseBid { id, delta } => {
                let v = raise(self.bidder(id), id, delta)?;
                TypeProfile::with_valuation(self, id, v)
            }
            Augmentation::AddGroup { .. } => Err(AuctionError::InvalidAugmentation(
                "groups only exist in grouped profiles".into(),
            )),
        }
    }

    fn max_welfare(&self) -> Rational {
        welfare::max_welfare(self).value
    }

    fn dump(&self) -> AnyProfile {
        AnyProfile::Flat(self.clone())
    }
}

impl AuctionProfile for GroupedProfile {
    fn k(&self) -> u32 {
        GroupedProfile::k(self)
    }

    fn real_bidders(&self) -> Vec<&Bidder> {
        self.bidders().collect()
    }

    fn with_valuation(&self, id: &str, valuation: Rational) -> Result<Self> {
        GroupedProfile::with_valuation(self, id, valuation)
    }

    fn augment(&self, aug: &Augmentation) -> Result<Self> {
        match aug {
            Augmentation::AddBidder { bidder, group } => {
                let group = group.as_deref().ok_or_else(|| {
                    AuctionError::InvalidAugmentation("added bidder needs a group".into())
                })?;
                self.with_bidder(group, bidder.clone())
            }
            Augmentation::RaiseBid { id, delta } => {
                let v = raise(self.bidder(id), id, delta)?;
                GroupedProfile::with_valuation(self, id, v)
            }
            Augmentation::AddGroup { group } => self.with_group(group.clone()),
        }
    }

    fn max_welfare(&self) -> Rational {
        welfare::group_max_welfare(self).value
    }

    fn dump(&self) -> AnyProfile {
        AnyProfile::Grouped(self.clone())
    }
}

/// A (possibly randomized) mechanism. `plan` does all deterministic work;
/// `draw` realizes one outcome from a plan.
pub trait Mechanism: Sync {
    type Profile: AuctionProfile;
    type Plan: Send + Sync;

    fn name(&self) -> &'static str;
    fn plan(&self, profile: &Self::Profile) -> Self::Plan;
    fn distribution(&self, plan: &Self::Plan) -> OutcomeDistribution;
    /// Mechanism-reported threshold bid of every real bidder with positive
    /// win probability.
    fn plan_critical_bids(&self, plan: &Self::Plan) -> BTreeMap<String, Rational>;
    fn draw(&self, plan: &Self::Plan, rng: &mut dyn RngCore) -> SampledOutcome;

    fn allocate(&self, profile: &Self::Profile) -> OutcomeDistribution {
        self.distribution(&self.plan(profile))
    }

    fn expected_revenue(&self, profile: &Self::Profile) -> Rational {
        self.allocate(profile).expected_revenue
    }

    fn critical_bids(&self, profile: &Self::Profile) -> BTreeMap<String, Rational> {
        self.plan_critical_bids(&self.plan(profile))
    }

    fn sample(&self, profile: &Self::Profile, rng: &mut dyn RngCore) -> SampledOutcome {
        self.draw(&self.plan(profile), rng)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Caii;

impl Mechanism for Caii {
    type Profile = TypeProfile;
    type Plan = CaiiAnalysis;

    fn name(&self) -> &'static str {
        "caii"
    }

    fn plan(&self, profile: &TypeProfile) -> CaiiAnalysis {
        caii::analyze(profile)
    }

    fn distribution(&self, plan: &CaiiAnalysis) -> OutcomeDistribution {
        plan.distribution()
    }

    fn plan_critical_bids(&self, plan: &CaiiAnalysis) -> BTreeMap<String, Rational> {
        plan.critical_bids()
    }

    fn draw(&self, plan: &CaiiAnalysis, rng: &mut dyn RngCore) -> SampledOutcome {
        plan.draw(rng)
    }

    fn expected_revenue(&self, profile: &TypeProfile) -> Rational {
        caii::expected_revenue(profile)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Mcaii;

impl Mechanism for Mcaii {
    type Profile = GroupedProfile;
    type Plan = McaiiDecision;

    fn name(&self) -> &'static str {
        "mcaii"
    }

    fn plan(&self, profile: &GroupedProfile) -> McaiiDecision {
        mcaii::decide(profile)
    }

    fn distribution(&self, plan: &McaiiDecision) -> OutcomeDistribution {
        plan.distribution()
    }

    fn plan_critical_bids(&self, plan: &McaiiDecision) -> BTreeMap<String, Rational> {
        plan.critical_bids()
    }

    fn draw(&self, plan: &McaiiDecision, rng: &mut dyn RngCore) -> SampledOutcome {
        plan.draw(rng)
    }

    fn expected_revenue(&self, profile: &GroupedProfile) -> Rational {
        mcaii::expected_revenue(profile)
    }
}

/// VCG with Clarke pivot payments, as a deterministic mechanism. Each
/// winner's payment is also her threshold bid.
#[derive(Debug, Clone, Copy, Default)]
pub struct Vcg;

#[derive(Debug, Clone)]
pub struct VcgPlan {
    pub bidders: Vec<Bidder>,
    pub result: VcgResult,
}

impl Mechanism for Vcg {
    type Profile = TypeProfile;
    type Plan = VcgPlan;

    fn name(&self) -> &'static str {
        "vcg"
    }

    fn plan(&self, profile: &TypeProfile) -> VcgPlan {
        VcgPlan {
            bidders: profile.bidders().to_vec(),
            result: welfare::vcg(profile),
        }
    }

    fn distribution(&self, plan: &VcgPlan) -> OutcomeDistribution {
        OutcomeDistribution::from_rows(plan.bidders.iter().map(|b| {
            match plan.result.payment.get(&b.id) {
                Some(p) => (b, Rational::one(), p.clone()),
                None => (b, Rational::zero(), Rational::zero()),
            }
        }))
    }

    fn plan_critical_bids(&self, plan: &VcgPlan) -> BTreeMap<String, Rational> {
        plan.result.payment.clone()
    }

    fn draw(&self, plan: &VcgPlan, _rng: &mut dyn RngCore) -> SampledOutcome {
        let items_sold = plan
            .bidders
            .iter()
            .filter(|b| plan.result.winners.contains(&b.id))
            .map(|b| b.demand)
            .sum();
        SampledOutcome {
            branch: Branch::High,
            winners: plan.result.winners.clone(),
            charge: plan.result.payment.clone(),
            items_sold,
        }
    }
}
