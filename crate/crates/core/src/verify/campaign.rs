//! Verification campaigns over generated instances.
//!
//! Instances are checked in parallel; the report lists violations in
//! instance order, so the same parameters always give the same report.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::generator::{gen_augmentations, gen_grouped_instance, gen_instance, GenParams};
use super::{check_ic, check_rm, ln_upper_bound, porm_ratio, AnyProfile, AuctionProfile, Augmentation, Caii, Mcaii, Mechanism, Vcg};
use crate::caii;
use crate::error::Result;
use crate::mcaii::{self, Case};
use crate::model::{half_up, Bidder, TypeProfile};
use crate::rational::Rational;

pub const AUGMENTATIONS_PER_INSTANCE: usize = 5;
pub const IC_PROBES: usize = 4;
/// Reports embed at most this many counterexamples; `violation_count` has the total.
pub const MAX_REPORTED_VIOLATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignKind {
    Caii,
    Mcaii,
    VcgDemo,
}

impl CampaignKind {
    pub fn name(self) -> &'static str {
        match self {
            CampaignKind::Caii => "caii",
            CampaignKind::Mcaii => "mcaii",
            CampaignKind::VcgDemo => "vcg-demo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Generated instance index; `None` for the fixed introductory example.
    pub instance: Option<usize>,
    pub property: String,
    pub detail: String,
    pub scenario: AnyProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub augmentation: Option<Augmentation>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckCounts {
    pub revenue_identity: u64,
    pub structure: u64,
    pub ic_bidders: u64,
    pub rm_augmentations: u64,
    pub porm: u64,
}

impl CheckCounts {
    fn add(&mut self, o: &CheckCounts) {
        self.revenue_identity += o.revenue_identity;
        self.structure += o.structure;
        self.ic_bidders += o.ic_bidders;
        self.rm_augmentations += o.rm_augmentations;
        self.porm += o.porm;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CampaignReport {
    pub mechanism: String,
    pub instances: usize,
    pub seed: u64,
    pub params: GenParams,
    pub checks: CheckCounts,
    /// Largest exact welfare ratio seen (`None` if infinite).
    pub worst_porm_ratio: Option<Rational>,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

#[derive(Default)]
struct Outcome {
    checks: CheckCounts,
    worst: Option<Option<Rational>>,
    violations: Vec<Violation>,
}

impl Outcome {
    fn violation(&mut self, instance: Option<usize>, property: &str, detail: String, scenario: AnyProfile) {
        self.violations.push(Violation {
            instance,
            property: property.into(),
            detail,
            scenario,
            augmentation: None,
        });
    }

    fn record_ratio(&mut self, ratio: Option<Rational>) {
        self.worst = Some(match (self.worst.take(), ratio) {
            (None, r) => r,
            (Some(None), _) | (_, None) => None,
            (Some(Some(a)), Some(b)) => Some(a.max(b)),
        });
    }
}

/// IC, RM and PoRM checks shared by both mechanisms.
fn common_checks<M: Mechanism>(
    mech: &M,
    profile: &M::Profile,
    index: usize,
    params: &GenParams,
    bound: &Rational,
    out: &mut Outcome,
) -> Result<()> {
    let ic = check_ic(mech, profile, IC_PROBES, params.seed ^ (index as u64).rotate_left(32))?;
    out.checks.ic_bidders += ic.bidders.len() as u64;
    for b in ic.failures() {
        out.violation(Some(index), "ic", format!("bidder `{}`: {}", b.id, b.violations.join("; ")), profile.dump());
    }

    let mut rng = params.rng_for(params.count + index);
    for aug in gen_augmentations(&profile.dump(), AUGMENTATIONS_PER_INSTANCE, params.value_max, &mut rng) {
        let r = check_rm(mech, profile, &aug)?;
        out.checks.rm_augmentations += 1;
        if r.violated {
            out.violations.push(Violation {
                instance: Some(index),
                property: "rm".into(),
                detail: format!("revenue drops from {} to {}", r.revenue_before, r.revenue_after),
                scenario: profile.dump(),
                augmentation: Some(aug),
            });
        }
    }

    let porm = porm_ratio(mech, profile, bound);
    out.checks.porm += 1;
    out.record_ratio(porm.ratio.clone());
    if !porm.within_bound {
        out.violation(
            Some(index),
            "porm",
            format!(
                "max welfare {} exceeds {} times expected welfare {}",
                porm.max_welfare, porm.bound, porm.mech_welfare
            ),
            profile.dump(),
        );
    }
    Ok(())
}

fn check_caii(params: &GenParams, index: usize) -> Result<Outcome> {
    let profile = gen_instance(params, index);
    let mut out = Outcome::default();
    let a = caii::analyze(&profile);
    let k = profile.k();

    out.checks.revenue_identity += 1;
    let dist = a.distribution();
    if dist.expected_revenue != a.closed_form_revenue() {
        out.violation(
            Some(index),
            "revenue-identity",
            format!("sum of payments {} != closed form {}", dist.expected_revenue, a.closed_form_revenue()),
            profile.dump(),
        );
    }

    out.checks.structure += 1;
    let c = u64::from(half_up(k));
    let bounds_ok = if k >= 2 {
        c <= a.candidate_demand && a.candidate_demand < u64::from(k)
    } else {
        a.candidate_demand == 0
    };
    if !bounds_ok {
        out.violation(
            Some(index),
            "candidate-demand-bounds",
            format!("A = {} outside [{c}, {k})", a.candidate_demand),
            profile.dump(),
        );
    }

    common_checks(&Caii, &profile, index, params, &Rational::from_integer(3), &mut out)?;
    Ok(out)
}

fn check_mcaii(params: &GenParams, index: usize, bound: &Rational) -> Result<Outcome> {
    let profile = gen_grouped_instance(params, index);
    let mut out = Outcome::default();
    let d = mcaii::decide(&profile);

    out.checks.revenue_identity += 1;
    let dist = d.distribution();
    let closed = d.closed_form_revenue();
    if dist.expected_revenue != closed {
        out.violation(
            Some(index),
            "revenue-identity",
            format!("sum of payments {} != case formula {}", dist.expected_revenue, closed),
            profile.dump(),
        );
    }

    out.checks.structure += 1;
    let top = &d.winning_group().mprg;
    if !(d.reserve <= dist.expected_revenue && &dist.expected_revenue <= top) {
        out.violation(
            Some(index),
            "revenue-sandwich",
            format!("revenue {} outside [{}, {}]", dist.expected_revenue, d.reserve, top),
            profile.dump(),
        );
    }
    if d.case == Case::LowFull && profile.k() >= 2 {
        let c = u64::from(half_up(profile.k()));
        let a_total = d.a_total.unwrap_or(0);
        if a_total < c {
            out.violation(Some(index), "low-full-demand", format!("A = {a_total} < {c}"), profile.dump());
        }
    }
    if dist.expected_items_sold > Rational::from(u64::from(profile.k())) {
        out.violation(
            Some(index),
            "oversell",
            format!("expected items sold {}", dist.expected_items_sold),
            profile.dump(),
        );
    }

    common_checks(&Mcaii, &profile, index, params, bound, &mut out)?;
    Ok(out)
}

/// The two-item example where adding a bidder drops VCG revenue from 2 to 0.
pub fn vcg_intro_profiles() -> (TypeProfile, Bidder) {
    let q = Rational::from_integer;
    let before = TypeProfile::new(2, vec![Bidder::new("x", 1, q(2)), Bidder::new("y", 2, q(2))])
        .expect("valid example");
    (before, Bidder::new("z", 1, q(2)))
}

fn check_vcg(params: &GenParams, index: usize) -> Result<Outcome> {
    let profile = gen_instance(params, index);
    let mut out = Outcome::default();
    let mut rng = params.rng_for(params.count + index);
    for aug in gen_augmentations(&profile.dump(), AUGMENTATIONS_PER_INSTANCE, params.value_max, &mut rng) {
        let r = check_rm(&Vcg, &profile, &aug)?;
        out.checks.rm_augmentations += 1;
        if r.violated {
            out.violations.push(Violation {
                instance: Some(index),
                property: "rm".into(),
                detail: format!("revenue drops from {} to {}", r.revenue_before, r.revenue_after),
                scenario: profile.dump(),
                augmentation: Some(aug),
            });
        }
    }
    Ok(out)
}

pub fn run_campaign(kind: CampaignKind, params: &GenParams) -> Result<CampaignReport> {
    params.validate()?;
    let bounds: BTreeMap<u32, Rational> = (1..=params.k_max)
        .map(|k| (k, Rational::from_integer(2) + ln_upper_bound(k)))
        .collect();

    let mut intro = Outcome::default();
    if kind == CampaignKind::VcgDemo {
        let (before, added) = vcg_intro_profiles();
        let aug = Augmentation::AddBidder { bidder: added, group: None };
        let r = check_rm(&Vcg, &before, &aug)?;
        intro.checks.rm_augmentations += 1;
        if r.violated {
            intro.violations.push(Violation {
                instance: None,
                property: "rm".into(),
                detail: format!("revenue drops from {} to {}", r.revenue_before, r.revenue_after),
                scenario: before.dump(),
                augmentation: Some(aug),
            });
        }
    }

    let outcomes: Vec<Outcome> = (0..params.count)
        .into_par_iter()
        .map(|i| match kind {
            CampaignKind::Caii => check_caii(params, i),
            CampaignKind::Mcaii => {
                let k = gen_grouped_instance(params, i).k();
                check_mcaii(params, i, &bounds[&k])
            }
            CampaignKind::VcgDemo => check_vcg(params, i),
        })
        .collect::<Result<_>>()?;

    let mut report = CampaignReport {
        mechanism: kind.name().into(),
        instances: params.count,
        seed: params.seed,
        params: params.clone(),
        checks: CheckCounts::default(),
        worst_porm_ratio: None,
        violation_count: 0,
        violations: Vec::new(),
    };
    let mut worst = Outcome::default();
    for o in std::iter::once(intro).chain(outcomes) {
        report.checks.add(&o.checks);
        if let Some(r) = o.worst {
            worst.record_ratio(r);
        }
        report.violation_count += o.violations.len();
        let room = MAX_REPORTED_VIOLATIONS - report.violations.len();
        report.violations.extend(o.violations.into_iter().take(room));
    }
    report.worst_porm_ratio = worst.worst.flatten();
    Ok(report)
}
