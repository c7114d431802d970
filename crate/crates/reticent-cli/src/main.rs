//! `reticent`: scenario-driven auction runs, incentive verification, bundled
//! example reproduction, and virtual-value export.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use reticent_core::mechanisms::VirtualValueTable;
use reticent_core::meta::ReticentMechanism;
use reticent_core::scenario::{builtin, builtin_names, Scenario};
use reticent_core::verify::{
    expected_revenue, expected_utility, run_verification, welfare_metrics, BidderStrategy,
    CheckConfig, DeviationFamily, Property, WelfareMetrics,
};

#[derive(Parser)]
#[command(
    name = "reticent",
    version,
    about = "single-item auctions with bidders who may misreport their type but can only \
             truthfully (and partially) reveal their information"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Expected utilities, welfare, and revenue for one strategy profile
    Run(RunArgs),
    /// Search a deviation family and check incentive, rationality, and
    /// structural properties; exits nonzero if any requested check fails
    Verify(VerifyArgs),
    /// Recompute a bundled example's figures and compare against the
    /// reference values; exits nonzero on any mismatch beyond 1e-9
    Reproduce(ReproduceArgs),
    /// Dump every bidder's raw and ironed virtual values per information
    /// profile
    ExportVirtualValues(ExportArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    /// bundled scenario name or path to a scenario JSON file
    #[arg(long)]
    scenario: String,
    /// mechanism id, e.g. expected-vickrey, simulated-myerson,
    /// regulated(expected-vickrey)
    #[arg(long, default_value = "expected-vickrey")]
    mechanism: String,
    /// apply information regulation on top of --mechanism
    #[arg(long)]
    regulated: bool,
    /// per-bidder scheme override, repeatable: BIDDER=truthful|no-info|
    /// pool:0,1;2|random:SEED (bidders are 1-based; default truthful)
    #[arg(long = "strategy")]
    strategies: Vec<String>,
    /// elicitation mask for the revenue metric: all, none, or a 1-based
    /// bidder list like 1,3
    #[arg(long, default_value = "all")]
    mask: String,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value = "expected-vickrey")]
    mechanism: String,
    #[arg(long)]
    regulated: bool,
    /// comma-separated checks (expost-iic, bayesian-iic, dominant-iic,
    /// expost-ir, interim-ir, fd, convex-utility, monotone-allocation);
    /// default all
    #[arg(long)]
    properties: Option<String>,
    /// random schemes per bidder in the deviation family
    #[arg(long, default_value_t = 64)]
    family_k: usize,
    /// seed for the deviation family's random schemes
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// bundled example number: 1 (silence), 2 (elicitation), 3 (correlated)
    example: u8,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Reproduce(args) => cmd_reproduce(args),
        Cmd::ExportVirtualValues(args) => cmd_export(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}

fn load_scenario(spec: &str) -> Result<Scenario> {
    if builtin_names().contains(&spec) {
        return Ok(builtin(spec).expect("bundled scenario"));
    }
    let text = fs::read_to_string(spec)
        .with_context(|| format!("cannot read scenario file '{}'", spec))?;
    Scenario::from_json(&text).with_context(|| format!("scenario '{}' failed to load", spec))
}

fn load_mechanism(id: &str, regulated: bool) -> Result<ReticentMechanism> {
    let mech = ReticentMechanism::from_id(id)?;
    Ok(if regulated { mech.regulate() } else { mech })
}

fn parse_mask(spec: &str, n: usize) -> Result<Vec<bool>> {
    match spec {
        "all" => Ok(vec![true; n]),
        "none" => Ok(vec![false; n]),
        _ => {
            let mut mask = vec![false; n];
            for part in spec.split(',') {
                let b: usize = part
                    .trim()
                    .parse()
                    .map_err(|_| anyhow!("bad mask entry '{}'", part))?;
                if b == 0 || b > n {
                    bail!("mask bidder {} out of range 1..={}", b, n);
                }
                mask[b - 1] = true;
            }
            Ok(mask)
        }
    }
}

fn parse_strategies(scenario: &Scenario, specs: &[String]) -> Result<Vec<BidderStrategy>> {
    let n = scenario.num_bidders();
    let mut strategies: Vec<BidderStrategy> = (0..n)
        .map(|i| BidderStrategy::truthful(scenario, i))
        .collect();
    for spec in specs {
        let (bidder, scheme_spec) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("strategy '{}' is not BIDDER=SPEC", spec))?;
        let b: usize = bidder.trim().parse().context("strategy bidder index")?;
        if b == 0 || b > n {
            bail!("strategy bidder {} out of range 1..={}", b, n);
        }
        let i = b - 1;
        strategies[i].scheme = scenario.scheme_from_spec(i, scheme_spec.trim())?;
    }
    Ok(strategies)
}

#[derive(Serialize)]
struct RunReport {
    scenario: String,
    mechanism: String,
    strategies: Vec<String>,
    expected_utilities: Vec<f64>,
    welfare: WelfareMetrics,
    elicitation_mask: Vec<bool>,
    masked_revenue: f64,
    warnings: Vec<String>,
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let scenario = load_scenario(&args.scenario)?;
    let mech = load_mechanism(&args.mechanism, args.regulated)?;
    let strategies = parse_strategies(&scenario, &args.strategies)?;
    let mask = parse_mask(&args.mask, scenario.num_bidders())?;
    let labels: Vec<String> = (0..scenario.num_bidders())
        .map(|i| {
            args.strategies
                .iter()
                .rev()
                .find_map(|s| s.strip_prefix(&format!("{}=", i + 1)).map(str::to_string))
                .unwrap_or_else(|| "truthful".into())
        })
        .collect();
    let report = RunReport {
        scenario: scenario.name().to_string(),
        mechanism: mech.id(),
        strategies: labels,
        expected_utilities: expected_utility(&scenario, &mech, &strategies)?,
        welfare: welfare_metrics(&scenario, &mech)?,
        elicitation_mask: mask.clone(),
        masked_revenue: expected_revenue(&scenario, &mech, &mask)?,
        warnings: mech.warnings(&scenario),
    };
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&report)?,
        Format::Table => render_run_table(&report),
        Format::Csv => render_run_csv(&report),
    };
    emit(&text, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn render_run_table(r: &RunReport) -> String {
    let mut out = format!("scenario: {}\nmechanism: {}\n\n", r.scenario, r.mechanism);
    out.push_str(&format!(
        "{:<8} {:<24} {:>18}\n",
        "bidder", "scheme", "expected utility"
    ));
    for (i, (s, u)) in r.strategies.iter().zip(&r.expected_utilities).enumerate() {
        out.push_str(&format!("{:<8} {:<24} {:>18.6}\n", i + 1, s, u));
    }
    out.push_str(&format!(
        "\nwelfare: {:.6} of {:.6} achievable (efficiency {:.4})\n",
        r.welfare.expected_welfare, r.welfare.max_welfare, r.welfare.efficiency
    ));
    let elicited: Vec<String> = r
        .elicitation_mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| (i + 1).to_string())
        .collect();
    out.push_str(&format!(
        "revenue: {:.6} (eliciting {})\n",
        r.masked_revenue,
        if elicited.is_empty() {
            "nobody".to_string()
        } else {
            format!("bidders {}", elicited.join(", "))
        }
    ));
    for w in &r.warnings {
        out.push_str(&format!("warning: {}\n", w));
    }
    out
}

fn render_run_csv(r: &RunReport) -> String {
    let mut out = String::from("metric,bidder,value\n");
    for (i, u) in r.expected_utilities.iter().enumerate() {
        out.push_str(&format!("expected_utility,{},{}\n", i + 1, u));
    }
    out.push_str(&format!("expected_welfare,,{}\n", r.welfare.expected_welfare));
    out.push_str(&format!("max_welfare,,{}\n", r.welfare.max_welfare));
    out.push_str(&format!("masked_revenue,,{}\n", r.masked_revenue));
    out
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let scenario = load_scenario(&args.scenario)?;
    let mech = load_mechanism(&args.mechanism, args.regulated)?;
    let properties: Vec<Property> = match &args.properties {
        None => Property::all().to_vec(),
        Some(list) => list
            .split(',')
            .map(|p| p.trim().parse::<Property>())
            .collect::<reticent_core::Result<_>>()?,
    };
    let family = DeviationFamily::standard(&scenario, args.family_k, args.seed)?;
    let report = run_verification(
        &scenario,
        &mech,
        &family,
        &properties,
        &CheckConfig::default(),
    )?;
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&report)?,
        Format::Table => report.render_table(),
        Format::Csv => {
            let mut out = String::from("check,result,worst_gain,tolerance\n");
            for c in &report.checks {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    c.name,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.worst_gain,
                    c.tolerance
                ));
            }
            out
        }
    };
    emit(&text, args.out.as_deref())?;
    Ok(if report.all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

#[derive(Serialize)]
struct Figure {
    label: String,
    reference: f64,
    computed: f64,
}

#[derive(Serialize)]
struct ReproduceReport {
    example: u8,
    scenario: String,
    figures: Vec<Figure>,
    tolerance: f64,
    matched: bool,
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<ExitCode> {
    const TOL: f64 = 1e-9;
    let mech = ReticentMechanism::expected_vickrey();
    let (scenario, figures) = match args.example {
        1 => {
            let s = builtin("silence").expect("bundled scenario");
            let truthful: Vec<BidderStrategy> = (0..3)
                .map(|i| BidderStrategy::truthful(&s, i))
                .collect();
            let mut silent = truthful.clone();
            silent[0].scheme = s.no_info_scheme(0);
            let figures = vec![
                Figure {
                    label: "bidder 1 expected utility, full revelation".into(),
                    reference: 0.0,
                    computed: expected_utility(&s, &mech, &truthful)?[0],
                },
                Figure {
                    label: "bidder 1 expected utility, silence".into(),
                    reference: 0.4,
                    computed: expected_utility(&s, &mech, &silent)?[0],
                },
            ];
            (s, figures)
        }
        2 => {
            let s = builtin("elicitation").expect("bundled scenario");
            let figures = vec![
                Figure {
                    label: "revenue, eliciting everyone".into(),
                    reference: 0.082,
                    computed: expected_revenue(&s, &mech, &[true, true, true])?,
                },
                Figure {
                    label: "revenue, eliciting nobody".into(),
                    reference: 0.1,
                    computed: expected_revenue(&s, &mech, &[false, false, false])?,
                },
                Figure {
                    label: "revenue, eliciting bidder 3 only".into(),
                    reference: 0.13,
                    computed: expected_revenue(&s, &mech, &[false, false, true])?,
                },
            ];
            (s, figures)
        }
        3 => {
            let s = builtin("correlated").expect("bundled scenario");
            let mut rivals_silent: Vec<BidderStrategy> = (0..3)
                .map(|i| BidderStrategy::truthful(&s, i))
                .collect();
            for strategy in rivals_silent.iter_mut().skip(1) {
                strategy.scheme = s.no_info_scheme(strategy.scheme.bidder);
            }
            let revealing = expected_utility(&s, &mech, &rivals_silent)?[0];
            rivals_silent[0].scheme = s.no_info_scheme(0);
            let silent = expected_utility(&s, &mech, &rivals_silent)?[0];
            let figures = vec![
                Figure {
                    label: "bidder 1 expected utility, silent vs silent rivals".into(),
                    reference: 49.5,
                    computed: silent,
                },
                Figure {
                    label: "bidder 1 expected utility, revealing vs silent rivals".into(),
                    reference: 49.25,
                    computed: revealing,
                },
            ];
            (s, figures)
        }
        n => bail!("no bundled example {} (want 1, 2, or 3)", n),
    };
    let matched = figures
        .iter()
        .all(|f| (f.reference - f.computed).abs() < TOL);
    let report = ReproduceReport {
        example: args.example,
        scenario: scenario.name().to_string(),
        figures,
        tolerance: TOL,
        matched,
    };
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&report)?,
        _ => {
            let mut out = format!(
                "example {} ({})\n{:<55} {:>10} {:>12}\n",
                report.example, report.scenario, "figure", "reference", "computed"
            );
            for f in &report.figures {
                out.push_str(&format!(
                    "{:<55} {:>10} {:>12.6}\n",
                    f.label, f.reference, f.computed
                ));
            }
            out.push_str(if report.matched {
                "all figures match\n"
            } else {
                "MISMATCH beyond tolerance\n"
            });
            out
        }
    };
    emit(&text, args.out.as_deref())?;
    Ok(if matched {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_export(args: ExportArgs) -> Result<ExitCode> {
    let scenario = load_scenario(&args.scenario)?;
    let table = VirtualValueTable::build(&scenario);
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&table)?,
        _ => {
            let space = scenario.space();
            let mut out = String::from("bidder,type,profile,value,phi,phi_ironed\n");
            for (bidder, per_bidder) in table.columns.iter().enumerate() {
                for (profile_idx, col) in per_bidder {
                    let profile = space
                        .index_to_profile(*profile_idx)
                        .iter()
                        .enumerate()
                        .map(|(coord, &k)| space.labels(coord)[k].clone())
                        .collect::<Vec<_>>()
                        .join("|");
                    for (t, ((&v, &phi), &ironed)) in col
                        .values
                        .iter()
                        .zip(&col.phi)
                        .zip(&col.phi_ironed)
                        .enumerate()
                    {
                        out.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            bidder + 1,
                            scenario.type_priors()[bidder].label(t),
                            profile,
                            v,
                            phi,
                            ironed
                        ));
                    }
                }
            }
            out
        }
    };
    emit(&text, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn emit(text: &str, out: Option<&std::path::Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write to {}", path.display()))?,
        None => print!("{}{}", text, if text.ends_with('\n') { "" } else { "\n" }),
    }
    Ok(())
}
