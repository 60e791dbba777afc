use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rm_auctions::caii;
use rm_auctions::mcaii;
use rm_auctions::rng::seeded;
use rm_auctions::verify::campaign::vcg_intro_profiles;
use rm_auctions::verify::{
    ln_upper_bound, porm_ratio, run_campaign, sample_summary, Caii, CampaignKind, GenParams, Mcaii, Mechanism,
};
use rm_auctions::welfare::{self, vcg};
use rm_auctions::{GroupedProfile, OutcomeDistribution, Rational, TypeProfile};

use crate::error::CliError;
use crate::report::{
    BidderRow, CaiiMeta, Decision, McaiiMeta, Num, RunReport, SampleReport, VcgDemoReport, VcgResultOut, VcgSide,
    VerifyReport,
};
use crate::scenario::{load_scenario, profile_to_file, Scenario};

/// Realizations listed individually by `sample`.
pub const SHOWN_SAMPLES: usize = 10;
pub const SEED_ENV: &str = "RM_AUCTIONS_SEED";

#[derive(Debug, Parser)]
#[command(name = "rm-auctions", version, about = "Revenue-monotone truthful auctions for identical items")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Table)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RunMechanism {
    /// `mcaii` if the scenario has groups, else `caii`.
    Auto,
    Caii,
    Mcaii,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyMechanism {
    Caii,
    Mcaii,
    VcgDemo,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the exact outcome distribution of a scenario.
    Run {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = RunMechanism::Auto)]
        mechanism: RunMechanism,
    },
    /// Draw seeded realizations and summarize them.
    Sample {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = RunMechanism::Auto)]
        mechanism: RunMechanism,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
    },
    /// Check truthfulness, revenue monotonicity and welfare bounds on generated instances.
    Verify {
        #[arg(long, value_enum)]
        mechanism: VerifyMechanism,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        instances: u64,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
        k_max: u32,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        n_max: u64,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        value_max: u32,
    },
    /// Show the two-item example where adding a bidder drops VCG revenue to zero.
    VcgDemo,
}

/// Rendered output plus the process exit code.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

fn emit<T: Serialize>(format: Format, report: &T, table: impl FnOnce(&T) -> String) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Table => table(report),
    }
}

enum Routed {
    Caii(TypeProfile),
    Mcaii(GroupedProfile),
}

fn route(scenario: &Scenario, mechanism: RunMechanism) -> Routed {
    match (mechanism, scenario) {
        (RunMechanism::Caii, s) | (RunMechanism::Auto, s @ Scenario::Flat(_)) => Routed::Caii(s.flattened()),
        (RunMechanism::Mcaii, s) | (RunMechanism::Auto, s @ Scenario::Grouped(_)) => Routed::Mcaii(s.grouped()),
    }
}

fn caii_bound() -> Rational {
    Rational::from_integer(3)
}

fn mcaii_bound(k: u32) -> Rational {
    Rational::from_integer(2) + ln_upper_bound(k)
}

fn rows(
    dist: &OutcomeDistribution,
    bidders: impl Iterator<Item = (Option<String>, rm_auctions::Bidder)>,
) -> Vec<BidderRow> {
    bidders
        .map(|(group, b)| BidderRow {
            group,
            demand: b.demand,
            valuation: (&b.valuation).into(),
            win_prob: dist.win_prob_of(&b.id).into(),
            expected_payment: dist.payment_of(&b.id).into(),
            id: b.id,
        })
        .collect()
}

fn report_totals(
    mechanism: &str,
    k: u32,
    dist: &OutcomeDistribution,
    bidders: Vec<BidderRow>,
    max_welfare: Rational,
    ratio: Option<Rational>,
    decision: Decision,
) -> RunReport {
    RunReport {
        mechanism: mechanism.to_string(),
        k,
        bidders,
        expected_revenue: (&dist.expected_revenue).into(),
        expected_welfare: (&dist.expected_welfare).into(),
        expected_items_sold: (&dist.expected_items_sold).into(),
        max_welfare: max_welfare.into(),
        porm_ratio: ratio.map(Num::from),
        decision,
    }
}

pub fn build_run_report(scenario: &Scenario, mechanism: RunMechanism) -> RunReport {
    match route(scenario, mechanism) {
        Routed::Caii(p) => {
            let analysis = caii::analyze(&p);
            let dist = analysis.distribution();
            let porm = porm_ratio(&Caii, &p, &caii_bound());
            let bidders = rows(&dist, p.bidders().iter().map(|b| (None, b.clone())));
            report_totals(
                "caii",
                p.k(),
                &dist,
                bidders,
                porm.max_welfare,
                porm.ratio,
                Decision::Caii(CaiiMeta::new(&analysis)),
            )
        }
        Routed::Mcaii(p) => {
            let (decision, dist) = mcaii::allocate(&p);
            let porm = porm_ratio(&Mcaii, &p, &mcaii_bound(p.k()));
            let bidders = rows(
                &dist,
                p.groups()
                    .iter()
                    .flat_map(|g| g.bidders.iter().map(move |b| (Some(g.id.clone()), b.clone()))),
            );
            report_totals(
                "mcaii",
                p.k(),
                &dist,
                bidders,
                porm.max_welfare,
                porm.ratio,
                Decision::Mcaii(McaiiMeta::new(&decision)),
            )
        }
    }
}

pub fn build_sample_report(scenario: &Scenario, mechanism: RunMechanism, seed: u64, trials: u64) -> SampleReport {
    let mut rng = seeded(seed);
    match route(scenario, mechanism) {
        Routed::Caii(p) => {
            let (mc, kept) = sample_summary(&Caii, &p, trials, &mut rng, SHOWN_SAMPLES);
            SampleReport::new(Caii.name(), seed, p.k(), &mc, &kept)
        }
        Routed::Mcaii(p) => {
            let (mc, kept) = sample_summary(&Mcaii, &p, trials, &mut rng, SHOWN_SAMPLES);
            SampleReport::new(Mcaii.name(), seed, p.k(), &mc, &kept)
        }
    }
}

pub fn build_vcg_demo() -> VcgDemoReport {
    let (before, added) = vcg_intro_profiles();
    let after = before.with_bidder(added.clone()).expect("added bidder is valid");
    let side = |p: &TypeProfile| {
        let result = vcg(p);
        debug_assert_eq!(result.welfare, welfare::max_welfare(p).value);
        VcgSide {
            scenario: profile_to_file(&rm_auctions::verify::AnyProfile::Flat(p.clone())),
            result: VcgResultOut::from(&result),
        }
    };
    let before = side(&before);
    let after = side(&after);
    VcgDemoReport {
        added_bidder: added.id,
        revenue_before: before.result.revenue.clone(),
        revenue_after: after.result.revenue.clone(),
        before,
        after,
    }
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let format = cli.format;
    match &cli.command {
        Command::Run { scenario, mechanism } => {
            let s = load_scenario(scenario)?;
            let report = build_run_report(&s, *mechanism);
            Ok(Output {
                text: emit(format, &report, RunReport::render_table),
                code: 0,
            })
        }
        Command::Sample {
            scenario,
            mechanism,
            seed,
            trials,
        } => {
            let s = load_scenario(scenario)?;
            let report = build_sample_report(&s, *mechanism, *seed, *trials);
            Ok(Output {
                text: emit(format, &report, SampleReport::render_table),
                code: 0,
            })
        }
        Command::Verify {
            mechanism,
            instances,
            seed,
            k_max,
            n_max,
            value_max,
        } => {
            let kind = match mechanism {
                VerifyMechanism::Caii => CampaignKind::Caii,
                VerifyMechanism::Mcaii => CampaignKind::Mcaii,
                VerifyMechanism::VcgDemo => CampaignKind::VcgDemo,
            };
            let params = GenParams {
                count: usize::try_from(*instances).map_err(|_| CliError::Usage("--instances too large".into()))?,
                seed: *seed,
                n_max: usize::try_from(*n_max).map_err(|_| CliError::Usage("--n-max too large".into()))?,
                k_max: *k_max,
                value_max: *value_max,
            };
            let campaign = run_campaign(kind, &params)?;
            let report = VerifyReport::from(&campaign);
            Ok(Output {
                text: emit(format, &report, VerifyReport::render_table),
                code: if report.passed { 0 } else { 1 },
            })
        }
        Command::VcgDemo => {
            let report = build_vcg_demo();
            Ok(Output {
                text: emit(format, &report, VcgDemoReport::render_table),
                code: 0,
            })
        }
    }
}
