//! Incentive, rationality, and structural checks. Every PASS is relative to
//! the deviation family searched; every FAIL carries a certified
//! counterexample witness.

use itertools::Itertools;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::eval::Evaluator;
use super::family::DeviationFamily;
use crate::error::Result;
use crate::mechanisms::ClassicMechanism;
use crate::meta::{MetaKind, ReticentMechanism};
use crate::model::{PosteriorOverProfiles, Signal};
use crate::scenario::Scenario;

/// A deviation gain above this threshold certifies a violation.
pub const PROFITABILITY_TOL: f64 = 1e-7;
/// Numeric slack for structural identities (covariances, Jensen gaps).
pub const STRUCTURAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub profitability_tol: f64,
    /// condition the deviating bidder's own state on the opponents' realized
    /// states in the ex-post check (matters under correlated priors)
    pub condition_own_on_others: bool,
    pub convexity_samples: usize,
    pub convexity_seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            profitability_tol: PROFITABILITY_TOL,
            condition_own_on_others: true,
            convexity_samples: 64,
            convexity_seed: 2024,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    /// 1-based, matching the scenario file convention
    pub bidder: usize,
    pub description: String,
    pub truthful_utility: f64,
    pub deviation_utility: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// largest gain (or violation magnitude) found across the search
    pub worst_gain: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
}

pub(crate) struct Tracker {
    name: &'static str,
    tol: f64,
    worst: f64,
    witness: Option<Witness>,
}

impl Tracker {
    pub fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            worst: 0.0,
            witness: None,
        }
    }

    pub fn observe(
        &mut self,
        bidder: usize,
        truthful: f64,
        deviation: f64,
        describe: impl FnOnce() -> String,
    ) {
        let gain = deviation - truthful;
        if gain > self.worst {
            self.worst = gain;
            if gain > self.tol {
                self.witness = Some(Witness {
                    bidder: bidder + 1,
                    description: describe(),
                    truthful_utility: truthful,
                    deviation_utility: deviation,
                    gain,
                });
            }
        }
    }

    pub fn result(self) -> CheckResult {
        CheckResult {
            name: self.name.to_string(),
            passed: self.worst <= self.tol,
            worst_gain: self.worst,
            tolerance: self.tol,
            witness: self.witness,
        }
    }
}

/// Opponent state profiles of one bidder: (states of the others in bidder
/// order, probability, conditional distribution of the bidder's own state).
fn opponent_profiles(scenario: &Scenario, bidder: usize) -> Vec<(Vec<usize>, f64, Vec<f64>)> {
    let space = scenario.space();
    let n = space.num_bidders();
    let m = space.bidder_size(bidder);
    let rest = scenario.prior().rest_marginal();
    let others_len: usize = (0..n)
        .filter(|&j| j != bidder)
        .map(|j| space.bidder_size(j))
        .product();
    let mut weights = vec![vec![0.0; m]; others_len];
    for (ridx, &p) in rest.iter().enumerate() {
        // rest profiles are row-major over bidder coordinates
        let mut rem = ridx;
        let mut states = vec![0usize; n];
        for j in (0..n).rev() {
            let mj = space.bidder_size(j);
            states[j] = rem % mj;
            rem /= mj;
        }
        let mut oidx = 0;
        for j in 0..n {
            if j == bidder {
                continue;
            }
            oidx = oidx * space.bidder_size(j) + states[j];
        }
        weights[oidx][states[bidder]] += p;
    }
    let mut out = Vec::new();
    for (oidx, w) in weights.into_iter().enumerate() {
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let mut rem = oidx;
        let mut others = vec![0usize; n - 1];
        let mut pos = n - 1;
        for j in (0..n).rev() {
            if j == bidder {
                continue;
            }
            pos -= 1;
            others[pos] = rem % space.bidder_size(j);
            rem /= space.bidder_size(j);
        }
        out.push((others, total, w.iter().map(|x| x / total).collect()));
    }
    out
}

fn signals_with_own(
    scenario: &Scenario,
    bidder: usize,
    others: &[usize],
    own: Signal,
) -> Vec<Signal> {
    let n = scenario.num_bidders();
    let mut signals = Vec::with_capacity(n);
    let mut pos = 0;
    for j in 0..n {
        if j == bidder {
            signals.push(own.clone());
        } else {
            signals.push(scenario.point_signal(j, others[pos]));
            pos += 1;
        }
    }
    signals
}

fn bids_with_own(bidder: usize, own: usize, others: &[usize]) -> Vec<usize> {
    let mut bids = Vec::with_capacity(others.len() + 1);
    let mut pos = 0;
    for j in 0..=others.len() {
        if j == bidder {
            bids.push(own);
        } else {
            bids.push(others[pos]);
            pos += 1;
        }
    }
    bids
}

/// Opponent type profiles with probabilities.
fn opponent_type_profiles(scenario: &Scenario, bidder: usize) -> Vec<(Vec<usize>, f64)> {
    scenario
        .type_priors()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != bidder)
        .map(|(_, tp)| 0..tp.len())
        .multi_cartesian_product()
        .map(|profile| {
            let p = scenario
                .type_priors()
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != bidder)
                .zip(&profile)
                .map(|((_, tp), &t)| tp.prob(t))
                .product();
            (profile, p)
        })
        .collect()
}

/// Ex-post and Bayesian incentive compatibility in one sweep: the Bayesian
/// sides are the prior-weighted aggregates of the ex-post configurations.
pub fn check_iic(
    scenario: &Scenario,
    mech: &ReticentMechanism,
    family: &DeviationFamily,
    cfg: &CheckConfig,
) -> Result<(CheckResult, CheckResult)> {
    let ev = Evaluator::new(scenario, mech);
    let mut expost = Tracker::new("expost-iic", cfg.profitability_tol);
    let mut bayes = Tracker::new("bayesian-iic", cfg.profitability_tol);
    let n = scenario.num_bidders();
    for i in 0..n {
        let m = scenario.space().bidder_size(i);
        let g = scenario.bidder_marginal(i);
        let num_types = scenario.type_priors()[i].len();
        let own_schemes = family.schemes(i);
        let opp_types = opponent_type_profiles(scenario, i);

        let mut bay_truth = vec![0.0; num_types];
        // [true type][report][scheme]
        let mut bay_dev = vec![vec![vec![0.0; own_schemes.len()]; num_types]; num_types];

        for (others, oprob, own_cond) in opponent_profiles(scenario, i) {
            // truthful contexts: own state fully revealed
            let mut truth_ctx = Vec::with_capacity(m);
            for k in 0..m {
                if own_cond[k] > 0.0 {
                    let signals = signals_with_own(scenario, i, &others, scenario.point_signal(i, k));
                    truth_ctx.push(Some(ev.context(&signals)?));
                } else {
                    truth_ctx.push(None);
                }
            }
            // deviation contexts per (scheme, atom): the per-state weights
            // m_k of the joint (signal, own state) measure, their sum, the
            // value part per true type, and the evaluation context
            let mut atom_data = Vec::with_capacity(own_schemes.len());
            for (_, scheme) in own_schemes {
                let mut atoms = Vec::new();
                for (w, sig) in scheme.atoms() {
                    let mk: Vec<f64> = (0..m)
                        .map(|k| {
                            if cfg.condition_own_on_others {
                                if g[k] > 0.0 {
                                    w * sig.probs()[k] * own_cond[k] / g[k]
                                } else {
                                    0.0
                                }
                            } else {
                                w * sig.probs()[k]
                            }
                        })
                        .collect();
                    let wsum: f64 = mk.iter().sum();
                    if wsum <= 1e-15 {
                        continue;
                    }
                    let signals = signals_with_own(scenario, i, &others, sig.clone());
                    let ctx = match ev.context(&signals) {
                        Ok(ctx) => ctx,
                        // only reachable in the unconditional reading, where
                        // a signal can contradict the opponents' states
                        Err(_) => continue,
                    };
                    let valpart: Vec<f64> = (0..num_types)
                        .map(|t| {
                            mk.iter()
                                .enumerate()
                                .map(|(k, &w)| w * scenario.vbar_state(i, t, k))
                                .sum()
                        })
                        .collect();
                    atoms.push((wsum, ctx, valpart));
                }
                atom_data.push(atoms);
            }

            for (t_opp, topp_prob) in &opp_types {
                // truthful utility per own true type
                let mut truth_u = vec![0.0; num_types];
                for (k, ctx) in truth_ctx.iter().enumerate() {
                    let Some(ctx) = ctx else { continue };
                    for (t, u) in truth_u.iter_mut().enumerate() {
                        let bids = bids_with_own(i, t, t_opp);
                        let out = ev.outcome(ctx, &bids);
                        *u += own_cond[k]
                            * (out.allocation[i] * scenario.vbar_state(i, t, k) - out.payment[i]);
                    }
                }
                for (scheme_idx, atoms) in atom_data.iter().enumerate() {
                    // [true type][report]
                    let mut dev_u = vec![vec![0.0; num_types]; num_types];
                    for (wsum, ctx, valpart) in atoms {
                        for b in 0..num_types {
                            let bids = bids_with_own(i, b, t_opp);
                            let out = ev.outcome(ctx, &bids);
                            for (t, row) in dev_u.iter_mut().enumerate() {
                                row[b] += out.allocation[i] * valpart[t] - wsum * out.payment[i];
                            }
                        }
                    }
                    for t in 0..num_types {
                        for b in 0..num_types {
                            expost.observe(i, truth_u[t], dev_u[t][b], || {
                                format!(
                                    "true type {}, report {}, scheme {}, opponents at states {:?} with types {:?}",
                                    scenario.type_priors()[i].label(t),
                                    scenario.type_priors()[i].label(b),
                                    own_schemes[scheme_idx].0,
                                    others,
                                    t_opp
                                )
                            });
                            bay_dev[t][b][scheme_idx] += oprob * topp_prob * dev_u[t][b];
                        }
                    }
                }
                for t in 0..num_types {
                    bay_truth[t] += oprob * topp_prob * truth_u[t];
                }
            }
        }

        for t in 0..num_types {
            for b in 0..num_types {
                for (scheme_idx, (label, _)) in own_schemes.iter().enumerate() {
                    bayes.observe(i, bay_truth[t], bay_dev[t][b][scheme_idx], || {
                        format!(
                            "true type {}, report {}, scheme {}",
                            scenario.type_priors()[i].label(t),
                            scenario.type_priors()[i].label(b),
                            label
                        )
                    });
                }
            }
        }
    }
    Ok((expost.result(), bayes.result()))
}

/// Dominant-strategy incentive compatibility: truthfulness must be optimal
/// against every fixed opponent report and scheme profile from the family.
pub fn check_dominant_iic(
    scenario: &Scenario,
    mech: &ReticentMechanism,
    family: &DeviationFamily,
    cfg: &CheckConfig,
) -> Result<CheckResult> {
    dominant_search(scenario, mech, family, cfg, true, "dominant-iic")
}

/// Scheme truthfulness (full disclosure) as a dominant strategy: reports stay
/// truthful on both sides, only the signaling schemes deviate.
pub fn check_fd(
    scenario: &Scenario,
    mech: &ReticentMechanism,
    family: &DeviationFamily,
    cfg: &CheckConfig,
) -> Result<CheckResult> {
    dominant_search(scenario, mech, family, cfg, false, "fd")
}

fn dominant_search(
    scenario: &Scenario,
    mech: &ReticentMechanism,
    family: &DeviationFamily,
    cfg: &CheckConfig,
    allow_own_misreport: bool,
    name: &'static str,
) -> Result<CheckResult> {
    let ev = Evaluator::new(scenario, mech);
    let mut tracker = Tracker::new(name, cfg.profitability_tol);
    let n = scenario.num_bidders();
    for i in 0..n {
        let num_types = scenario.type_priors()[i].len();
        let own_schemes = family.schemes(i);
        let truthful_idx = own_schemes
            .iter()
            .position(|(label, _)| label == "full-revelation")
            .expect("standard family always contains full revelation");
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let opp_report_combos: Vec<Vec<usize>> = others
            .iter()
            .map(|&j| 0..scenario.type_priors()[j].len())
            .multi_cartesian_product()
            .pad_using(1, |_| Vec::new())
            .collect();
        let num_reps = opp_report_combos.len();

        // reusable buffers: coef[scheme][rep][b][t] folds lambda * x * vals[t]
        // over the signal atoms, pay[scheme][rep][b] the expected payment
        let mut scratch = ev.scratch();
        let mut signals: Vec<&Signal> = Vec::with_capacity(n);
        let mut bids = vec![0usize; n];
        let mut vals = vec![0.0; num_types];
        let mut coef = vec![0.0; own_schemes.len() * num_reps * num_types * num_types];
        let mut pay = vec![0.0; own_schemes.len() * num_reps * num_types];

        // opponent scheme profiles
        for opp_scheme_profile in others
            .iter()
            .map(|&j| family.schemes(j).iter())
            .multi_cartesian_product()
            .pad_using(1, |_| Vec::new())
        {
            coef.fill(0.0);
            pay.fill(0.0);
            for (scheme_idx, (_, own_scheme)) in own_schemes.iter().enumerate() {
                let opp_atoms = opp_scheme_profile
                    .iter()
                    .map(|(_, s)| s.atoms().iter())
                    .multi_cartesian_product()
                    .pad_using(1, |_| Vec::new());
                for opp_combo in opp_atoms {
                    for (w_own, sig_own) in own_scheme.atoms() {
                        signals.clear();
                        let mut weight = *w_own;
                        let mut pos = 0;
                        for j in 0..n {
                            if j == i {
                                signals.push(sig_own);
                            } else {
                                let (w, sig) = opp_combo[pos];
                                weight *= w;
                                signals.push(sig);
                                pos += 1;
                            }
                        }
                        let Some(z) = ev.refill(&signals, i, &mut scratch) else {
                            continue;
                        };
                        let lambda = weight * z;
                        if lambda <= 1e-15 {
                            continue;
                        }
                        for (t, v) in vals.iter_mut().enumerate() {
                            *v = ev.expected_own_value(&scratch.ctx, i, t);
                        }
                        for (rep_idx, opp_reports) in opp_report_combos.iter().enumerate() {
                            let mut pos = 0;
                            for j in 0..n {
                                if j != i {
                                    bids[j] = opp_reports[pos];
                                    pos += 1;
                                }
                            }
                            for b in 0..num_types {
                                bids[i] = b;
                                let out = ev.outcome(&scratch.ctx, &bids);
                                let row = (scheme_idx * num_reps + rep_idx) * num_types + b;
                                let a = lambda * out.allocation[i];
                                pay[row] += lambda * out.payment[i];
                                for (c, v) in coef[row * num_types..].iter_mut().zip(&vals) {
                                    *c += a * v;
                                }
                            }
                        }
                    }
                }
            }

            for (rep_idx, opp_reports) in opp_report_combos.iter().enumerate() {
                let eu = |scheme_idx: usize, b: usize, t: usize| -> f64 {
                    let row = (scheme_idx * num_reps + rep_idx) * num_types + b;
                    coef[row * num_types + t] - pay[row]
                };
                for t in 0..num_types {
                    let truth = eu(truthful_idx, t, t);
                    let reports: Vec<usize> = if allow_own_misreport {
                        (0..num_types).collect()
                    } else {
                        vec![t]
                    };
                    for (scheme_idx, (label, _)) in own_schemes.iter().enumerate() {
                        for &b in &reports {
                            if scheme_idx == truthful_idx && b == t {
                                continue;
                            }
                            tracker.observe(i, truth, eu(scheme_idx, b, t), || {
                                format!(
                                    "true type {}, report {}, scheme {}, opponent reports {:?}, opponent schemes {:?}",
                                    scenario.type_priors()[i].label(t),
                                    scenario.type_priors()[i].label(b),
                                    label,
                                    opp_reports,
                                    opp_scheme_profile
                                        .iter()
                                        .map(|(l, _)| l.as_str())
                                        .collect::<Vec<_>>()
                                )
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(tracker.result())
}

/// Individual rationality under truthful behavior. Ex-post quantifies over
/// realized state and type profiles; interim integrates the opponents out.
pub fn check_ir(
    scenario: &Scenario,
    mech: &ReticentMechanism,
    cfg: &CheckConfig,
    interim: bool,
) -> Result<CheckResult> {
    let ev = Evaluator::new(scenario, mech);
    let name = if interim { "interim-ir" } else { "expost-ir" };
    let mut tracker = Tracker::new(name, cfg.profitability_tol);
    let n = scenario.num_bidders();
    if interim {
        for i in 0..n {
            let g = scenario.bidder_marginal(i);
            let num_types = scenario.type_priors()[i].len();
            let opp_types = opponent_type_profiles(scenario, i);
            for k in 0..scenario.space().bidder_size(i) {
                if g[k] <= 0.0 {
                    continue;
                }
                let mut eu = vec![0.0; num_types];
                for (others, oprob, own_cond) in opponent_profiles(scenario, i) {
                    let w = own_cond[k] * oprob / g[k]; // Pr(others | own state k)
                    if w <= 0.0 {
                        continue;
                    }
                    let signals = signals_with_own(scenario, i, &others, scenario.point_signal(i, k));
                    let ctx = ev.context(&signals)?;
                    for (t_opp, topp_prob) in &opp_types {
                        for (t, acc) in eu.iter_mut().enumerate() {
                            let out = ev.outcome(&ctx, &bids_with_own(i, t, t_opp));
                            *acc += w
                                * topp_prob
                                * (out.allocation[i] * scenario.vbar_state(i, t, k)
                                    - out.payment[i]);
                        }
                    }
                }
                for (t, &u) in eu.iter().enumerate() {
                    tracker.observe(i, 0.0, -u, || {
                        format!(
                            "type {}, own state {}: interim utility {}",
                            scenario.type_priors()[i].label(t),
                            scenario.space().labels(i + 1)[k],
                            u
                        )
                    });
                }
            }
        }
    } else {
        for (rest, rprob) in rest_profiles(scenario) {
            if rprob <= 0.0 {
                continue;
            }
            let signals: Vec<Signal> = rest
                .iter()
                .enumerate()
                .map(|(j, &k)| scenario.point_signal(j, k))
                .collect();
            let ctx = ev.context(&signals)?;
            for t in scenario.type_profiles() {
                let out = ev.outcome(&ctx, &t);
                for i in 0..n {
                    let u = out.allocation[i] * scenario.vbar_state(i, t[i], rest[i])
                        - out.payment[i];
                    tracker.observe(i, 0.0, -u, || {
                        format!(
                            "types {:?}, states {:?}: ex-post utility {}",
                            t, rest, u
                        )
                    });
                }
            }
        }
    }
    Ok(tracker.result())
}

/// Bidder state profiles (no shared coordinate) with their probabilities.
pub(crate) fn rest_profiles(scenario: &Scenario) -> Vec<(Vec<usize>, f64)> {
    let space = scenario.space();
    let n = space.num_bidders();
    let rest = scenario.prior().rest_marginal();
    rest.iter()
        .enumerate()
        .map(|(ridx, &p)| {
            let mut rem = ridx;
            let mut states = vec![0usize; n];
            for j in (0..n).rev() {
                states[j] = rem % space.bidder_size(j);
                rem /= space.bidder_size(j);
            }
            (states, p)
        })
        .collect()
}

/// Jensen test of the expected transform's utility along the one slice that
/// matters for scheme deviations: each bidder's posterior over his own state
/// varies while the opponents stay fully revealed. Convexity here makes full
/// disclosure dominant; interdependent values or nonlinear payments break it.
pub fn check_convex_utility(
    scenario: &Scenario,
    base: &ClassicMechanism,
    cfg: &CheckConfig,
) -> Result<CheckResult> {
    let mech = ReticentMechanism {
        base: *base,
        kind: MetaKind::Expected,
        regulated: false,
    };
    let ev = Evaluator::new(scenario, &mech);
    let mut tracker = Tracker::new("convex-utility", STRUCTURAL_TOL);
    let space = scenario.space();
    let n = space.num_bidders();
    let shared = scenario.prior().shared_marginal();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.convexity_seed);
    for i in 0..n {
        let g = scenario.bidder_marginal(i);
        let own_support: Vec<usize> = (0..space.bidder_size(i))
            .filter(|&k| g[k] > 0.0)
            .collect();
        if own_support.len() < 2 {
            continue;
        }
        let opp_types = opponent_type_profiles(scenario, i);
        for (others, oprob, _) in opponent_profiles(scenario, i) {
            if oprob <= 0.0 {
                continue;
            }
            // full posterior: prior shared marginal x revealed opponents x
            // a free distribution over the bidder's own state
            let full_posterior = |own: &[f64]| -> Result<PosteriorOverProfiles> {
                let probs = (0..space.num_profiles())
                    .map(|idx| {
                        let mut pos = 0;
                        for j in 0..n {
                            if j == i {
                                continue;
                            }
                            if space.coord_of_index(idx, j + 1) != others[pos] {
                                return 0.0;
                            }
                            pos += 1;
                        }
                        shared[space.coord_of_index(idx, 0)]
                            * own[space.coord_of_index(idx, i + 1)]
                    })
                    .collect();
                PosteriorOverProfiles::from_probs(space, probs)
            };
            let sample_own = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                let mut own = vec![0.0; space.bidder_size(i)];
                let mut total = 0.0;
                for &k in &own_support {
                    let draw = -f64::ln(rng.random_range(1e-12..1.0));
                    own[k] = draw;
                    total += draw;
                }
                own.iter_mut().for_each(|x| *x /= total);
                own
            };
            for sample in 0..cfg.convexity_samples {
                let own_a = sample_own(&mut rng);
                let own_b = sample_own(&mut rng);
                let alpha: f64 = rng.random_range(0.0..1.0);
                let own_m: Vec<f64> = own_a
                    .iter()
                    .zip(&own_b)
                    .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                    .collect();
                let qs = [
                    full_posterior(&own_a)?,
                    full_posterior(&own_b)?,
                    full_posterior(&own_m)?,
                ];
                for (t_opp, _) in &opp_types {
                    for t in 0..scenario.type_priors()[i].len() {
                        let bids = bids_with_own(i, t, t_opp);
                        let mut u = [0.0; 3];
                        for (q, slot) in qs.iter().zip(&mut u) {
                            let ctx = ev.context_of_posterior(q)?;
                            let out = ev.outcome(&ctx, &bids);
                            let val: f64 = q
                                .probs()
                                .iter()
                                .enumerate()
                                .map(|(idx, &p)| p * scenario.kernel().value(i, t, idx))
                                .sum();
                            *slot = out.allocation[i] * val - out.payment[i];
                        }
                        let chord = alpha * u[0] + (1.0 - alpha) * u[1];
                        tracker.observe(i, chord, u[2], || {
                            format!(
                                "Jensen gap at sample {} (alpha {:.4}), type {}, opponents at states {:?}",
                                sample,
                                alpha,
                                scenario.type_priors()[i].label(t),
                                others
                            )
                        });
                    }
                }
            }
        }
    }
    Ok(tracker.result())
}

/// Per-state allocation monotonicity in own value, plus the covariance
/// witness: under family posteriors, a bidder's allocation must not
/// anti-correlate with his expected value.
pub fn check_monotone_allocation(
    scenario: &Scenario,
    base: &ClassicMechanism,
    family: &DeviationFamily,
    _cfg: &CheckConfig,
) -> Result<CheckResult> {
    let mut tracker = Tracker::new("monotone-allocation", STRUCTURAL_TOL);
    let space = scenario.space();
    let n = space.num_bidders();

    // part 1: fixing the opponents' types and bidder states, the allocation
    // must be non-decreasing in the bidder's own value across (type, own
    // state, shared state)
    for i in 0..n {
        let opp_types = opponent_type_profiles(scenario, i);
        for others in space
            .sizes()
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(c, _)| *c != i + 1)
            .map(|(_, &m)| 0..m)
            .multi_cartesian_product()
            .pad_using(1, |_| Vec::new())
        {
            for (t_opp, _) in &opp_types {
                let mut points: Vec<(f64, f64, usize, usize, usize)> = Vec::new();
                for t in 0..scenario.type_priors()[i].len() {
                    let bids = bids_with_own(i, t, t_opp);
                    for k in 0..space.bidder_size(i) {
                        for s0 in 0..space.shared_size() {
                            let mut profile = vec![0usize; n + 1];
                            profile[0] = s0;
                            let mut pos = 0;
                            for j in 0..n {
                                profile[j + 1] = if j == i {
                                    k
                                } else {
                                    let s = others[pos];
                                    pos += 1;
                                    s
                                };
                            }
                            // recount for next iteration of k/s0
                            let idx = space.profile_to_index(&profile);
                            if scenario.prior().prob(idx) <= 0.0 {
                                continue;
                            }
                            let out = base.outcome(&bids, scenario.state_dists(idx));
                            points.push((
                                scenario.kernel().value(i, t, idx),
                                out.allocation[i],
                                t,
                                k,
                                s0,
                            ));
                        }
                    }
                }
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                for w in points.windows(2) {
                    let (lo, hi) = (&w[0], &w[1]);
                    if hi.0 > lo.0 + 1e-12 {
                        tracker.observe(i, hi.1, lo.1, || {
                            format!(
                                "allocation drops from {} to {} while own value rises from {} to {} (types {} -> {}, opponents {:?})",
                                lo.1, hi.1, lo.0, hi.0,
                                scenario.type_priors()[i].label(lo.2),
                                scenario.type_priors()[i].label(hi.2),
                                t_opp
                            )
                        });
                    }
                }
            }
        }
    }

    // part 2: covariance witness over the family's posteriors
    for i in 0..n {
        for (label, scheme) in family.schemes(i) {
            for (_, sig) in scheme.atoms() {
                let signals: Vec<Signal> = (0..n)
                    .map(|j| {
                        if j == i {
                            sig.clone()
                        } else {
                            scenario.no_info_signal(j)
                        }
                    })
                    .collect();
                let posterior = crate::model::joint_posterior(scenario.prior(), &signals)?;
                for t in scenario.type_profiles() {
                    let mut mean_x = 0.0;
                    let mut mean_v = 0.0;
                    let mut mean_xv = 0.0;
                    for (idx, &p) in posterior.probs().iter().enumerate() {
                        if p <= 0.0 {
                            continue;
                        }
                        let out = base.outcome(&t, scenario.state_dists(idx));
                        let x = out.allocation[i];
                        let v =
                            scenario.vbar_state(i, t[i], space.coord_of_index(idx, i + 1));
                        mean_x += p * x;
                        mean_v += p * v;
                        mean_xv += p * x * v;
                    }
                    let cov = mean_xv - mean_x * mean_v;
                    tracker.observe(i, 0.0, -cov, || {
                        format!(
                            "negative value-allocation covariance {} under scheme {} at types {:?}",
                            cov, label, t
                        )
                    });
                }
            }
        }
    }

    Ok(tracker.result())
}
