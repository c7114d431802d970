//! Verification toolkit: searches a finite deviation family for profitable
//! misreports and scheme deviations, checks rationality and structural
//! properties, and measures welfare and revenue against exhaustive oracles.

mod checks;
mod eval;
mod family;
mod metrics;
mod report;

pub use checks::{
    check_convex_utility, check_dominant_iic, check_fd, check_iic, check_ir,
    check_monotone_allocation, CheckConfig, CheckResult, Witness, PROFITABILITY_TOL,
    STRUCTURAL_TOL,
};
pub use family::DeviationFamily;
pub use metrics::{bruteforce_optimal_revenue, expected_revenue, welfare_metrics, WelfareMetrics};
pub use report::{run_verification, FamilySummary, Tolerances, VerificationReport};

use crate::error::{Error, Result};
use crate::mechanisms::Outcome;
use crate::meta::ReticentMechanism;
use crate::model::{Signal, SignalingScheme};
use crate::scenario::Scenario;

/// The checkable properties, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    ExpostIic,
    BayesianIic,
    DominantIic,
    ExpostIr,
    InterimIr,
    /// full disclosure as a dominant scheme choice, reports held truthful
    Fd,
    ConvexUtility,
    MonotoneAllocation,
}

impl Property {
    pub fn all() -> &'static [Property] {
        &[
            Property::ExpostIic,
            Property::BayesianIic,
            Property::DominantIic,
            Property::ExpostIr,
            Property::InterimIr,
            Property::Fd,
            Property::ConvexUtility,
            Property::MonotoneAllocation,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Property::ExpostIic => "expost-iic",
            Property::BayesianIic => "bayesian-iic",
            Property::DominantIic => "dominant-iic",
            Property::ExpostIr => "expost-ir",
            Property::InterimIr => "interim-ir",
            Property::Fd => "fd",
            Property::ConvexUtility => "convex-utility",
            Property::MonotoneAllocation => "monotone-allocation",
        }
    }
}

impl std::str::FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::all()
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Scenario {
                location: "property".into(),
                message: format!(
                    "unknown property '{}', expected one of: {}",
                    s,
                    Property::all()
                        .iter()
                        .map(|p| p.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            })
    }
}

/// One bidder's full strategy: a committed scheme and a reporting rule
/// mapping every true type to a reported type.
#[derive(Debug, Clone)]
pub struct BidderStrategy {
    pub report: Vec<usize>,
    pub scheme: SignalingScheme,
}

impl BidderStrategy {
    pub fn truthful(scenario: &Scenario, bidder: usize) -> Self {
        Self {
            report: (0..scenario.type_priors()[bidder].len()).collect(),
            scheme: scenario.truthful_scheme(bidder),
        }
    }
}

/// Outcome and realized utilities at one fully specified configuration:
/// realized signals, reported types, and the bidders' true types and states.
pub fn utility(
    scenario: &Scenario,
    mech: &ReticentMechanism,
    signals: &[Signal],
    reports: &[usize],
    true_types: &[usize],
    states: &[usize],
) -> Result<(Outcome, Vec<f64>)> {
    let ev = eval::Evaluator::new(scenario, mech);
    let ctx = ev.context(signals)?;
    let out = ev.outcome(&ctx, reports);
    let utilities = (0..scenario.num_bidders())
        .map(|i| {
            out.allocation[i] * scenario.vbar_state(i, true_types[i], states[i]) - out.payment[i]
        })
        .collect();
    Ok((out, utilities))
}

/// Ex-ante expected utility of every bidder under a strategy profile,
/// integrating over states, signal realizations, and type profiles.
pub fn expected_utility(
    scenario: &Scenario,
    mech: &ReticentMechanism,
    strategies: &[BidderStrategy],
) -> Result<Vec<f64>> {
    use itertools::Itertools;
    assert_eq!(strategies.len(), scenario.num_bidders());
    let ev = eval::Evaluator::new(scenario, mech);
    let n = scenario.num_bidders();
    let rest = scenario.prior().rest_marginal();
    let space = scenario.space();
    let mut acc = vec![0.0; n];
    for combo in strategies
        .iter()
        .map(|s| s.scheme.atoms().iter())
        .multi_cartesian_product()
    {
        let signals: Vec<Signal> = combo.iter().map(|(_, s)| s.clone()).collect();
        // signal combos inconsistent with a correlated prior have zero
        // probability of occurring together
        if crate::model::profile_normalizer(scenario.prior(), &signals)? <= 0.0 {
            continue;
        }
        let ctx = ev.context(&signals)?;
        for (ridx, &rp) in rest.iter().enumerate() {
            if rp <= 0.0 {
                continue;
            }
            let mut rem = ridx;
            let mut states = vec![0usize; n];
            for j in (0..n).rev() {
                states[j] = rem % space.bidder_size(j);
                rem /= space.bidder_size(j);
            }
            // joint weight of (state profile, signal realization):
            // Pr(theta) * prod_j Pr(s_j | theta_j), with
            // Pr(s_j | theta_j) = lambda_j * s_j(theta_j) / g_j(theta_j)
            let mut w = rp;
            for (j, (lambda, sig)) in combo.iter().enumerate() {
                let g = scenario.bidder_marginal(j)[states[j]];
                w *= if g > 0.0 {
                    lambda * sig.probs()[states[j]] / g
                } else {
                    0.0
                };
                if w == 0.0 {
                    break;
                }
            }
            if w == 0.0 {
                continue;
            }
            for t in scenario.type_profiles() {
                let h = scenario.type_profile_prob(&t);
                if h <= 0.0 {
                    continue;
                }
                let reports: Vec<usize> =
                    t.iter().zip(strategies).map(|(&ti, s)| s.report[ti]).collect();
                let out = ev.outcome(&ctx, &reports);
                for i in 0..n {
                    acc[i] += w
                        * h
                        * (out.allocation[i] * scenario.vbar_state(i, t[i], states[i])
                            - out.payment[i]);
                }
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin;

    fn truthful_profile(s: &Scenario) -> Vec<BidderStrategy> {
        (0..s.num_bidders())
            .map(|i| BidderStrategy::truthful(s, i))
            .collect()
    }

    #[test]
    fn silence_utilities_under_silence_and_revelation() {
        let s = builtin("silence").unwrap();
        let mech = ReticentMechanism::expected_vickrey();
        // bidder 1 silent: wins at price 0.5, expected utility 0.4
        let mut strategies = truthful_profile(&s);
        strategies[0].scheme = s.no_info_scheme(0);
        let u = expected_utility(&s, &mech, &strategies).unwrap();
        assert!((u[0] - 0.4).abs() < 1e-12);
        // fully revealing, the informed rival prices bidder 1 out
        let u = expected_utility(&s, &mech, &truthful_profile(&s)).unwrap();
        assert!(u[0].abs() < 1e-12);
    }

    #[test]
    fn correlated_silence_beats_revelation_for_the_strong_bidder() {
        let s = builtin("correlated").unwrap();
        let mech = ReticentMechanism::expected_vickrey();
        let truthful = expected_utility(&s, &mech, &truthful_profile(&s)).unwrap();
        // against silent rivals, staying silent keeps the price at the
        // rivals' prior mean 0.5 instead of the revealed 0.75
        let mut all_silent = truthful_profile(&s);
        for (i, strategy) in all_silent.iter_mut().enumerate() {
            strategy.scheme = s.no_info_scheme(i);
        }
        let silent = expected_utility(&s, &mech, &all_silent).unwrap();
        assert!((truthful[0] - 49.25).abs() < 1e-9);
        assert!((silent[0] - 49.5).abs() < 1e-9);
    }

    #[test]
    fn property_names_round_trip() {
        for p in Property::all() {
            let back: Property = p.name().parse().unwrap();
            assert_eq!(back, *p);
        }
        assert!("nope".parse::<Property>().is_err());
    }
}
