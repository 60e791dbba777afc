use std::collections::BTreeMap;

use rand::RngCore;
use serde::Serialize;

use super::Mechanism;
use crate::error::{AuctionError, Result};
use crate::model::{Branch, SampledOutcome};
use crate::rational::Rational;

pub const MIN_TRIALS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchStats {
    pub trials: u64,
    pub items_sold_mean: f64,
    pub items_sold_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub trials: u64,
    /// Exact empirical mean of realized revenue.
    pub mean: Rational,
    pub stderr: f64,
    pub analytic: Rational,
    /// `|mean - analytic| / stderr`; zero when both the gap and the stderr are zero.
    pub z: f64,
    pub items_sold_mean: f64,
    pub max_items_sold: u32,
    pub branches: BTreeMap<Branch, BranchStats>,
}

#[derive(Default)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Draws `trials` seeded realizations and compares the empirical revenue
/// against the analytic expectation.
pub fn monte_carlo_revenue<M: Mechanism>(
    mech: &M,
    profile: &M::Profile,
    trials: u64,
    rng: &mut dyn RngCore,
) -> Result<MonteCarloReport> {
    if trials < MIN_TRIALS {
        return Err(AuctionError::InvalidParameter(format!(
            "Monte Carlo needs at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    Ok(sample_summary(mech, profile, trials, rng, 0).0)
}

/// Like [`monte_carlo_revenue`] for any `trials >= 1`, also returning the
/// first `keep` realizations.
pub fn sample_summary<M: Mechanism>(
    mech: &M,
    profile: &M::Profile,
    trials: u64,
    rng: &mut dyn RngCore,
    keep: usize,
) -> (MonteCarloReport, Vec<SampledOutcome>) {
    assert!(trials >= 1, "at least one trial");
    let plan = mech.plan(profile);
    let analytic = mech.distribution(&plan).expected_revenue;
    let mut total = Rational::zero();
    let mut revenue = Moments::default();
    let mut items = Moments::default();
    let mut max_items_sold = 0;
    let mut by_branch: BTreeMap<Branch, Moments> = BTreeMap::new();
    let mut kept = Vec::with_capacity(keep.min(trials as usize));
    for _ in 0..trials {
        let s = mech.draw(&plan, rng);
        let r = s.revenue();
        revenue.push(r.to_f64());
        total += r;
        items.push(f64::from(s.items_sold));
        by_branch.entry(s.branch).or_default().push(f64::from(s.items_sold));
        max_items_sold = max_items_sold.max(s.items_sold);
        if kept.len() < keep {
            kept.push(s);
        }
    }
    let mean = total / Rational::from(trials);
    let stderr = revenue.stderr();
    let gap = (&mean - &analytic).to_f64().abs();
    let z = if gap == 0.0 { 0.0 } else { gap / stderr };
    let report = MonteCarloReport {
        trials,
        mean,
        stderr,
        analytic,
        z,
        items_sold_mean: items.mean(),
        max_items_sold,
        branches: by_branch
            .into_iter()
            .map(|(b, m)| {
                let stats = BranchStats {
                    trials: m.n,
                    items_sold_mean: m.mean(),
                    items_sold_stderr: m.stderr(),
                };
                (b, stats)
            })
            .collect(),
    };
    (report, kept)
}
