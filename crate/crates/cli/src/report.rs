//! Serializable reports and their plain-text renderings.

use std::fmt::Write as _;

use serde::Serialize;

use rm_auctions::caii::CaiiAnalysis;
use rm_auctions::mcaii::McaiiDecision;
use rm_auctions::model::{half_up, Ranked};
use rm_auctions::verify::{BranchStats, CampaignReport, MonteCarloReport, Violation};
use rm_auctions::{Branch, Rational, SampledOutcome, VcgResult};

use crate::scenario::{profile_to_file, ScenarioFile};

pub const DECIMAL_DIGITS: usize = 12;

/// A number as an exact rational string plus a derived decimal rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Num {
    pub exact: String,
    pub decimal: String,
}

impl From<&Rational> for Num {
    fn from(q: &Rational) -> Self {
        Num {
            exact: q.to_string(),
            decimal: q.to_decimal(DECIMAL_DIGITS),
        }
    }
}

impl From<Rational> for Num {
    fn from(q: Rational) -> Self {
        Num::from(&q)
    }
}

impl Num {
    fn cell(&self) -> String {
        if self.exact == self.decimal {
            self.exact.clone()
        } else {
            format!("{} (~{})", self.exact, self.decimal)
        }
    }
}

fn opt_cell(n: &Option<Num>) -> String {
    n.as_ref().map_or_else(|| "inf".to_string(), Num::cell)
}

#[derive(Debug, Clone, Serialize)]
pub struct BidderRow {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub demand: u32,
    pub valuation: Num,
    pub win_prob: Num,
    pub expected_payment: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaiiMeta {
    /// 1-based runner-up position in the sorted low list.
    pub r: usize,
    pub runner_up: Option<String>,
    pub ppi_r: Num,
    #[serde(rename = "A")]
    pub a_total: u64,
    pub ceil_half_k: u32,
    pub low_selection_prob: Num,
    pub top_high: Option<String>,
    pub second_high_value: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupMeta {
    pub id: String,
    pub mprg: Num,
    #[serde(rename = "V")]
    pub top_value: Num,
    #[serde(rename = "M")]
    pub best_low_revenue: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct McaiiMeta {
    pub g_star: String,
    #[serde(rename = "R")]
    pub reserve: Num,
    #[serde(rename = "X")]
    pub threshold: Num,
    pub case: String,
    pub j_star: Option<u32>,
    pub a: Option<usize>,
    #[serde(rename = "A")]
    pub a_total: Option<u64>,
    pub groups: Vec<GroupMeta>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Decision {
    Caii(CaiiMeta),
    Mcaii(McaiiMeta),
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub mechanism: String,
    pub k: u32,
    pub bidders: Vec<BidderRow>,
    pub expected_revenue: Num,
    pub expected_welfare: Num,
    pub expected_items_sold: Num,
    pub max_welfare: Num,
    /// `null` when the mechanism has zero welfare but the optimum is positive.
    pub porm_ratio: Option<Num>,
    pub decision: Decision,
}

fn real_id(r: &Ranked) -> Option<String> {
    (!r.bidder.dummy).then(|| r.bidder.id.clone())
}

impl CaiiMeta {
    pub fn new(a: &CaiiAnalysis) -> Self {
        let runner = &a.classified.low[a.runner_up_pos - 1];
        CaiiMeta {
            r: a.runner_up_pos,
            runner_up: real_id(runner),
            ppi_r: (&a.ppi_r).into(),
            a_total: a.candidate_demand,
            ceil_half_k: half_up(a.k()),
            low_selection_prob: a.selection_prob().into(),
            top_high: real_id(&a.top_high),
            second_high_value: (&a.second_high_value).into(),
        }
    }
}

impl McaiiMeta {
    pub fn new(d: &McaiiDecision) -> Self {
        McaiiMeta {
            g_star: d.winning_group().group_id.clone(),
            reserve: (&d.reserve).into(),
            threshold: d.threshold().into(),
            case: d.case.as_str().to_string(),
            j_star: d.jstar,
            a: d.a,
            a_total: d.a_total,
            groups: d
                .groups
                .iter()
                .map(|g| GroupMeta {
                    id: g.group_id.clone(),
                    mprg: (&g.mprg).into(),
                    top_value: (&g.top_value).into(),
                    best_low_revenue: (&g.best_low_revenue).into(),
                })
                .collect(),
        }
    }
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    writeln!(out, "{}", line(header.to_vec())).unwrap();
    for row in rows {
        writeln!(out, "{}", line(row.iter().map(String::as_str).collect())).unwrap();
    }
}

fn kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    writeln!(out, "{key}: {value}").unwrap();
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::High => "HIGH",
        Branch::Low => "LOW",
        Branch::LowPartial => "LOW_PARTIAL",
        Branch::LowFull => "LOW_FULL",
    }
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

impl RunReport {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        kv(&mut out, "mechanism", &self.mechanism);
        kv(&mut out, "k", self.k);
        out.push('\n');
        let grouped = self.bidders.iter().any(|b| b.group.is_some());
        let mut header = vec!["id"];
        if grouped {
            header.push("group");
        }
        header.extend(["demand", "valuation", "win_prob", "expected_payment"]);
        let rows: Vec<Vec<String>> = self
            .bidders
            .iter()
            .map(|b| {
                let mut row = vec![b.id.clone()];
                if let Some(g) = &b.group {
                    row.push(g.clone());
                }
                row.extend([
                    b.demand.to_string(),
                    b.valuation.cell(),
                    b.win_prob.cell(),
                    b.expected_payment.cell(),
                ]);
                row
            })
            .collect();
        table(&mut out, &header, &rows);
        out.push('\n');
        kv(&mut out, "expected_revenue", self.expected_revenue.cell());
        kv(&mut out, "expected_welfare", self.expected_welfare.cell());
        kv(&mut out, "expected_items_sold", self.expected_items_sold.cell());
        kv(&mut out, "max_welfare", self.max_welfare.cell());
        kv(&mut out, "porm_ratio", opt_cell(&self.porm_ratio));
        out.push('\n');
        match &self.decision {
            Decision::Caii(m) => {
                kv(&mut out, "runner_up_position (r)", m.r);
                kv(&mut out, "runner_up", opt(&m.runner_up));
                kv(&mut out, "ppi_r", m.ppi_r.cell());
                kv(&mut out, "A", m.a_total);
                kv(&mut out, "ceil(k/2)", m.ceil_half_k);
                kv(&mut out, "low_selection_prob", m.low_selection_prob.cell());
                kv(&mut out, "top_high", opt(&m.top_high));
                kv(&mut out, "second_high_value", m.second_high_value.cell());
            }
            Decision::Mcaii(m) => {
                kv(&mut out, "winning_group (g*)", &m.g_star);
                kv(&mut out, "reserve (R)", m.reserve.cell());
                kv(&mut out, "threshold (X)", m.threshold.cell());
                kv(&mut out, "case", &m.case);
                kv(&mut out, "j*", opt(&m.j_star));
                kv(&mut out, "a", opt(&m.a));
                kv(&mut out, "A", opt(&m.a_total));
                out.push('\n');
                let rows: Vec<Vec<String>> = m
                    .groups
                    .iter()
                    .map(|g| vec![g.id.clone(), g.mprg.cell(), g.top_value.cell(), g.best_low_revenue.cell()])
                    .collect();
                table(&mut out, &["group", "mprg", "V", "M"], &rows);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchSummary {
    pub branch: Branch,
    pub trials: u64,
    pub items_sold_mean: f64,
    pub items_sold_stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleSummary {
    pub trials: u64,
    pub revenue_mean: Num,
    pub revenue_stderr: f64,
    pub analytic_revenue: Num,
    pub z: f64,
    pub items_sold_mean: f64,
    pub max_items_sold: u32,
    pub ceil_half_k: u32,
    pub branches: Vec<BranchSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub trial: u64,
    pub branch: Branch,
    pub winners: Vec<String>,
    pub charges: Vec<(String, Num)>,
    pub revenue: Num,
    pub items_sold: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub mechanism: String,
    pub rng: String,
    pub seed: u64,
    pub k: u32,
    /// The first realizations, in draw order.
    pub samples: Vec<SampleRecord>,
    pub summary: SampleSummary,
}

impl SampleReport {
    pub fn new(
        mechanism: &str,
        seed: u64,
        k: u32,
        mc: &MonteCarloReport,
        kept: &[SampledOutcome],
    ) -> Self {
        let samples = kept
            .iter()
            .enumerate()
            .map(|(i, s)| SampleRecord {
                trial: i as u64 + 1,
                branch: s.branch,
                winners: s.winners.iter().cloned().collect(),
                charges: s.charge.iter().map(|(id, c)| (id.clone(), c.into())).collect(),
                revenue: s.revenue().into(),
                items_sold: s.items_sold,
            })
            .collect();
        let branches = mc
            .branches
            .iter()
            .map(|(b, s): (&Branch, &BranchStats)| BranchSummary {
                branch: *b,
                trials: s.trials,
                items_sold_mean: s.items_sold_mean,
                items_sold_stderr: s.items_sold_stderr,
            })
            .collect();
        SampleReport {
            mechanism: mechanism.to_string(),
            rng: rm_auctions::rng::RNG_NAME.to_string(),
            seed,
            k,
            samples,
            summary: SampleSummary {
                trials: mc.trials,
                revenue_mean: (&mc.mean).into(),
                revenue_stderr: mc.stderr,
                analytic_revenue: (&mc.analytic).into(),
                z: mc.z,
                items_sold_mean: mc.items_sold_mean,
                max_items_sold: mc.max_items_sold,
                ceil_half_k: half_up(k),
                branches,
            },
        }
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        kv(&mut out, "mechanism", &self.mechanism);
        kv(&mut out, "rng", &self.rng);
        kv(&mut out, "seed", self.seed);
        kv(&mut out, "k", self.k);
        out.push('\n');
        let rows: Vec<Vec<String>> = self
            .samples
            .iter()
            .map(|s| {
                let charges: Vec<String> = s.charges.iter().map(|(id, c)| format!("{id}={}", c.exact)).collect();
                vec![
                    s.trial.to_string(),
                    branch_name(s.branch).to_string(),
                    s.winners.join(","),
                    charges.join(","),
                    s.revenue.exact.clone(),
                    s.items_sold.to_string(),
                ]
            })
            .collect();
        table(&mut out, &["trial", "branch", "winners", "charges", "revenue", "items_sold"], &rows);
        if self.summary.trials as usize > self.samples.len() {
            writeln!(out, "({} more trials not shown)", self.summary.trials as usize - self.samples.len()).unwrap();
        }
        out.push('\n');
        let s = &self.summary;
        kv(&mut out, "trials", s.trials);
        kv(&mut out, "revenue_mean", s.revenue_mean.cell());
        kv(&mut out, "revenue_stderr", format!("{:.6}", s.revenue_stderr));
        kv(&mut out, "analytic_revenue", s.analytic_revenue.cell());
        kv(&mut out, "z", format!("{:.4}", s.z));
        kv(&mut out, "items_sold_mean", format!("{:.6}", s.items_sold_mean));
        kv(&mut out, "max_items_sold", s.max_items_sold);
        kv(&mut out, "ceil(k/2)", s.ceil_half_k);
        for b in &s.branches {
            writeln!(
                out,
                "branch {}: trials={} items_sold_mean={:.6} stderr={:.6}",
                branch_name(b.branch),
                b.trials,
                b.items_sold_mean,
                b.items_sold_stderr
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationOut {
    pub instance: Option<usize>,
    pub property: String,
    pub detail: String,
    pub scenario: ScenarioFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub augmentation: Option<rm_auctions::verify::Augmentation>,
}

impl From<&Violation> for ViolationOut {
    fn from(v: &Violation) -> Self {
        ViolationOut {
            instance: v.instance,
            property: v.property.clone(),
            detail: v.detail.clone(),
            scenario: profile_to_file(&v.scenario),
            augmentation: v.augmentation.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub mechanism: String,
    pub instances: usize,
    pub seed: u64,
    pub n_max: usize,
    pub k_max: u32,
    pub value_max: u32,
    pub checks: rm_auctions::verify::campaign::CheckCounts,
    pub worst_porm_ratio: Option<Num>,
    pub passed: bool,
    pub violation_count: usize,
    pub violations: Vec<ViolationOut>,
}

impl From<&CampaignReport> for VerifyReport {
    fn from(r: &CampaignReport) -> Self {
        VerifyReport {
            mechanism: r.mechanism.clone(),
            instances: r.instances,
            seed: r.seed,
            n_max: r.params.n_max,
            k_max: r.params.k_max,
            value_max: r.params.value_max,
            checks: r.checks.clone(),
            worst_porm_ratio: r.worst_porm_ratio.as_ref().map(Num::from),
            passed: r.passed(),
            violation_count: r.violation_count,
            violations: r.violations.iter().map(ViolationOut::from).collect(),
        }
    }
}

impl VerifyReport {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        kv(&mut out, "mechanism", &self.mechanism);
        kv(&mut out, "instances", self.instances);
        kv(&mut out, "seed", self.seed);
        kv(&mut out, "n_max", self.n_max);
        kv(&mut out, "k_max", self.k_max);
        kv(&mut out, "value_max", self.value_max);
        let c = &self.checks;
        kv(&mut out, "revenue_identity_checks", c.revenue_identity);
        kv(&mut out, "structure_checks", c.structure);
        kv(&mut out, "ic_bidders_checked", c.ic_bidders);
        kv(&mut out, "rm_augmentations_checked", c.rm_augmentations);
        kv(&mut out, "porm_checks", c.porm);
        if c.porm > 0 {
            kv(&mut out, "worst_porm_ratio", opt_cell(&self.worst_porm_ratio));
        }
        kv(&mut out, "violations", self.violation_count);
        kv(&mut out, "result", if self.passed { "PASS" } else { "FAIL" });
        if let Some(v) = self.violations.first() {
            out.push('\n');
            kv(&mut out, "first counterexample", format!("{} ({})", v.property, v.detail));
            kv(&mut out, "instance", opt(&v.instance));
            if let Some(a) = &v.augmentation {
                kv(&mut out, "augmentation", serde_json::to_string(a).unwrap());
            }
            writeln!(out, "scenario:\n{}", crate::scenario::to_json(&v.scenario)).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VcgSide {
    pub scenario: ScenarioFile,
    pub result: VcgResultOut,
}

#[derive(Debug, Clone, Serialize)]
pub struct VcgResultOut {
    pub winners: Vec<String>,
    pub payments: Vec<(String, Num)>,
    pub revenue: Num,
    pub welfare: Num,
}

impl From<&VcgResult> for VcgResultOut {
    fn from(r: &VcgResult) -> Self {
        VcgResultOut {
            winners: r.winners.iter().cloned().collect(),
            payments: r.payment.iter().map(|(id, p)| (id.clone(), p.into())).collect(),
            revenue: (&r.revenue).into(),
            welfare: (&r.welfare).into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VcgDemoReport {
    pub added_bidder: String,
    pub before: VcgSide,
    pub after: VcgSide,
    pub revenue_before: Num,
    pub revenue_after: Num,
}

impl VcgDemoReport {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let side = |out: &mut String, title: &str, s: &VcgSide| {
            writeln!(out, "{title} (k = {})", s.scenario.k).unwrap();
            let rows: Vec<Vec<String>> = s
                .scenario
                .bidders
                .iter()
                .map(|b| {
                    let won = s.result.winners.contains(&b.id);
                    let pay = s
                        .result
                        .payments
                        .iter()
                        .find(|(id, _)| id == &b.id)
                        .map_or_else(|| "0".to_string(), |(_, p)| p.exact.clone());
                    vec![
                        b.id.clone(),
                        b.demand.to_string(),
                        b.valuation.to_string(),
                        if won { "yes" } else { "no" }.to_string(),
                        pay,
                    ]
                })
                .collect();
            table(out, &["id", "demand", "valuation", "wins", "payment"], &rows);
            writeln!(out, "welfare={} revenue={}", s.result.welfare.exact, s.result.revenue.exact).unwrap();
        };
        side(&mut out, "before", &self.before);
        out.push('\n');
        side(&mut out, &format!("after adding {}", self.added_bidder), &self.after);
        out.push('\n');
        writeln!(out, "revenue_before={}", self.revenue_before.exact).unwrap();
        writeln!(out, "revenue_after={}", self.revenue_after.exact).unwrap();
        out
    }
}
