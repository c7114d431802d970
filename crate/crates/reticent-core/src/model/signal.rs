use super::prior::{JointPrior, PROB_TOL};
use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A signal is a posterior distribution over one bidder's state coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    probs: Vec<f64>,
}

impl Signal {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        for (index, &p) in probs.iter().enumerate() {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::NegativeProbability { value: p, index });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::NotNormalized { sum, tol: PROB_TOL });
        }
        Ok(Self { probs })
    }

    pub fn point_mass(size: usize, state: usize) -> Self {
        let mut probs = vec![0.0; size];
        probs[state] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// The state this signal reveals, if it is (numerically) a point mass.
    pub fn as_point_mass(&self) -> Option<usize> {
        let mut state = None;
        for (k, &p) in self.probs.iter().enumerate() {
            if p > 1.0 - PROB_TOL {
                state = Some(k);
            } else if p > PROB_TOL {
                return None;
            }
        }
        state
    }
}

/// A bidder's committed partial-revelation policy: a finite mixture of
/// posteriors whose mean is the bidder's prior marginal (Bayes plausibility).
#[derive(Debug, Clone, PartialEq)]
pub struct SignalingScheme {
    pub bidder: usize,
    atoms: Vec<(f64, Signal)>,
}

/// Verdict of `validate_scheme`, carrying the worst violation magnitude.
#[derive(Debug, Clone)]
pub struct SchemeValidation {
    pub valid: bool,
    pub max_violation: f64,
    pub detail: Option<String>,
}

impl SignalingScheme {
    pub fn new(bidder: usize, atoms: Vec<(f64, Signal)>) -> Self {
        Self { bidder, atoms }
    }

    pub fn atoms(&self) -> &[(f64, Signal)] {
        &self.atoms
    }

    pub fn full_revelation(bidder: usize, prior: &JointPrior) -> Result<Self> {
        let marginal = prior.bidder_marginal(bidder)?;
        let m = marginal.len();
        let atoms = marginal
            .iter()
            .enumerate()
            .filter(|(_, &g)| g > 0.0)
            .map(|(k, &g)| (g, Signal::point_mass(m, k)))
            .collect();
        Ok(Self { bidder, atoms })
    }

    pub fn no_information(bidder: usize, prior: &JointPrior) -> Result<Self> {
        let marginal = prior.bidder_marginal(bidder)?;
        Ok(Self {
            bidder,
            atoms: vec![(1.0, Signal::new(marginal)?)],
        })
    }

    /// One signal per partition cell, posterior = marginal restricted to the
    /// cell and renormalized. Zero-mass cells are dropped.
    pub fn pooling(bidder: usize, prior: &JointPrior, cells: &[Vec<usize>]) -> Result<Self> {
        let marginal = prior.bidder_marginal(bidder)?;
        let m = marginal.len();
        let mut seen = vec![false; m];
        for cell in cells {
            if cell.is_empty() {
                return Err(Error::EmptyPartitionCell);
            }
            for &state in cell {
                if state >= m || seen[state] {
                    return Err(Error::InvalidPartition);
                }
                seen[state] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidPartition);
        }
        let mut atoms = Vec::with_capacity(cells.len());
        for cell in cells {
            let weight: f64 = cell.iter().map(|&s| marginal[s]).sum();
            if weight <= 0.0 {
                continue;
            }
            let mut probs = vec![0.0; m];
            for &s in cell {
                probs[s] = marginal[s] / weight;
            }
            atoms.push((weight, Signal { probs }));
        }
        Ok(Self { bidder, atoms })
    }

    /// Seeded Bayes-plausible scheme with `count` signals: random positive
    /// weights and posteriors for the first `count - 1` signals, the last
    /// posterior solved so the plausibility equality holds exactly. Redraws
    /// when the solved posterior goes negative.
    pub fn random(bidder: usize, prior: &JointPrior, seed: u64, count: usize) -> Result<Self> {
        let marginal = prior.bidder_marginal(bidder)?;
        let m = marginal.len();
        if count <= 1 || m == 1 {
            return Self::no_information(bidder, prior);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (bidder as u64).wrapping_mul(0x9e3779b97f4a7c15));
        const MAX_ATTEMPTS: usize = 500;
        for _ in 0..MAX_ATTEMPTS {
            let mut weights: Vec<f64> = (0..count).map(|_| rng.random_range(0.2..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            let mut residual = marginal.clone();
            let mut atoms: Vec<(f64, Signal)> = Vec::with_capacity(count);
            for &w in weights.iter().take(count - 1) {
                // mix between the prior marginal and a fresh simplex point so
                // the solved final posterior stays feasible often enough
                let mut draw: Vec<f64> = (0..m).map(|_| -f64::ln(rng.random_range(1e-12..1.0))).collect();
                let d_total: f64 = draw.iter().sum();
                let beta: f64 = rng.random_range(0.0..1.0);
                for (k, d) in draw.iter_mut().enumerate() {
                    *d = (1.0 - beta) * marginal[k] + beta * (*d / d_total);
                }
                for (k, r) in residual.iter_mut().enumerate() {
                    *r -= w * draw[k];
                }
                atoms.push((w, Signal { probs: draw }));
            }
            let w_last = weights[count - 1];
            let last: Vec<f64> = residual.iter().map(|r| r / w_last).collect();
            if last.iter().any(|&p| p < 0.0) {
                continue;
            }
            atoms.push((w_last, Signal { probs: last }));
            return Ok(Self { bidder, atoms });
        }
        Err(Error::RandomSchemeFailed {
            attempts: MAX_ATTEMPTS,
            seed,
        })
    }
}

/// Checks a scheme's weight normalization, posterior validity, and the
/// Bayes-plausibility equality against the prior marginal.
pub fn validate_scheme(scheme: &SignalingScheme, prior: &JointPrior) -> Result<SchemeValidation> {
    let marginal = prior.bidder_marginal(scheme.bidder)?;
    let m = marginal.len();
    let mut max_violation: f64 = 0.0;
    let mut detail = None;

    let mut weight_sum = 0.0;
    let mut mean = vec![0.0; m];
    for (i, (w, signal)) in scheme.atoms.iter().enumerate() {
        if *w <= 0.0 || !w.is_finite() {
            return Ok(SchemeValidation {
                valid: false,
                max_violation: f64::INFINITY,
                detail: Some(format!("signal {i} has non-positive weight {w}")),
            });
        }
        weight_sum += w;
        if signal.len() != m {
            return Ok(SchemeValidation {
                valid: false,
                max_violation: f64::INFINITY,
                detail: Some(format!("signal {i} has {} entries, expected {m}", signal.len())),
            });
        }
        let mut sig_sum = 0.0;
        for (k, &p) in signal.probs().iter().enumerate() {
            if p < 0.0 {
                return Ok(SchemeValidation {
                    valid: false,
                    max_violation: -p,
                    detail: Some(format!("signal {i} has negative mass on state {k}")),
                });
            }
            sig_sum += p;
            mean[k] += w * p;
        }
        if (sig_sum - 1.0).abs() > max_violation {
            max_violation = (sig_sum - 1.0).abs();
            if max_violation > PROB_TOL {
                detail = Some(format!("signal {i} sums to {sig_sum}"));
            }
        }
    }
    if (weight_sum - 1.0).abs() > max_violation {
        max_violation = (weight_sum - 1.0).abs();
        if max_violation > PROB_TOL {
            detail = Some(format!("weights sum to {weight_sum}"));
        }
    }
    for (k, (&avg, &g)) in mean.iter().zip(&marginal).enumerate() {
        let gap = (avg - g).abs();
        if gap > max_violation {
            max_violation = gap;
            if gap > PROB_TOL {
                detail = Some(format!(
                    "average posterior on state {k} is {avg}, prior marginal is {g}"
                ));
            }
        }
    }
    Ok(SchemeValidation {
        valid: max_violation <= PROB_TOL,
        max_violation,
        detail,
    })
}

/// Posterior over full profiles conditioned on a signal profile, together
/// with the conditioning signals. This is the only informational input a
/// mechanism receives.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorOverProfiles {
    probs: Vec<f64>,
    signals: Vec<Signal>,
}

impl PosteriorOverProfiles {
    /// Builds a posterior directly from profile probabilities, with the
    /// per-bidder conditioning signals derived as the coordinate marginals.
    pub fn from_probs(space: &super::space::StateSpace, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.num_profiles() {
            return Err(Error::Scenario {
                location: "posterior".into(),
                message: format!(
                    "expected {} profile probabilities, got {}",
                    space.num_profiles(),
                    probs.len()
                ),
            });
        }
        for (index, &p) in probs.iter().enumerate() {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::NegativeProbability { value: p, index });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::NotNormalized { sum, tol: PROB_TOL });
        }
        let n = space.num_bidders();
        let mut marginals: Vec<Vec<f64>> =
            (0..n).map(|b| vec![0.0; space.bidder_size(b)]).collect();
        for (idx, &p) in probs.iter().enumerate() {
            for (b, marginal) in marginals.iter_mut().enumerate() {
                marginal[space.coord_of_index(idx, b + 1)] += p;
            }
        }
        let signals = marginals.into_iter().map(|m| Signal { probs: m }).collect();
        Ok(Self { probs, signals })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Posterior marginal of one bidder's state coordinate. With correlated
    /// priors this differs from the bidder's own signal.
    pub fn bidder_marginal(&self, space: &super::space::StateSpace, bidder: usize) -> Vec<f64> {
        let mut out = vec![0.0; space.bidder_size(bidder)];
        for (idx, &p) in self.probs.iter().enumerate() {
            out[space.coord_of_index(idx, bidder + 1)] += p;
        }
        out
    }

    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn signal(&self, bidder: usize) -> &Signal {
        &self.signals[bidder]
    }
}

/// Bayes update of the joint prior on a signal profile:
/// Pr(theta | s) proportional to g(theta) * prod_i s_i(theta_i) / g_i(theta_i).
/// A zero normalizer (signals jointly inconsistent with a correlated prior)
/// is an error, never a silent renormalization.
pub fn joint_posterior(prior: &JointPrior, signals: &[Signal]) -> Result<PosteriorOverProfiles> {
    let (probs, z) = posterior_unnormalized(prior, signals)?;
    if z <= 0.0 {
        return Err(Error::InconsistentSignals);
    }
    let probs = probs.into_iter().map(|p| p / z).collect();
    Ok(PosteriorOverProfiles {
        probs,
        signals: signals.to_vec(),
    })
}

/// Unnormalized posterior weights and their sum (the normalizer `Z(s)`).
fn posterior_unnormalized(prior: &JointPrior, signals: &[Signal]) -> Result<(Vec<f64>, f64)> {
    let space = prior.space();
    let n = space.num_bidders();
    assert_eq!(signals.len(), n, "one signal per bidder");
    let mut ratios: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (bidder, signal) in signals.iter().enumerate() {
        let marginal = prior.bidder_marginal(bidder)?;
        let mut row = vec![0.0; marginal.len()];
        for (state, (&s, &g)) in signal.probs().iter().zip(&marginal).enumerate() {
            if s > 0.0 && g <= 0.0 {
                return Err(Error::SignalOutsidePriorSupport {
                    bidder,
                    state,
                    mass: s,
                });
            }
            row[state] = if g > 0.0 { s / g } else { 0.0 };
        }
        ratios.push(row);
    }
    let mut probs = vec![0.0; space.num_profiles()];
    let mut z = 0.0;
    for (idx, p) in probs.iter_mut().enumerate() {
        let mut w = prior.prob(idx);
        if w == 0.0 {
            continue;
        }
        for (bidder, row) in ratios.iter().enumerate() {
            w *= row[space.coord_of_index(idx, bidder + 1)];
            if w == 0.0 {
                break;
            }
        }
        *p = w;
        z += w;
    }
    Ok((probs, z))
}

/// Probability of one signal profile under committed schemes:
/// lambda(s) = prod_i lambda_i(s_i) * Z(s).
pub fn signal_profile_probability(
    prior: &JointPrior,
    schemes: &[SignalingScheme],
    profile: &[Signal],
) -> Result<f64> {
    let mut weight = 1.0;
    for (bidder, (scheme, signal)) in schemes.iter().zip(profile).enumerate() {
        let atom = scheme
            .atoms()
            .iter()
            .find(|(_, s)| s == signal)
            .ok_or(Error::SignalNotInScheme { bidder })?;
        weight *= atom.0;
    }
    let (_, z) = posterior_unnormalized(prior, profile)?;
    Ok(weight * z)
}

/// Normalizer Z(s) for a signal profile; `lambda(s) = Z(s) * prod lambda_i`.
pub fn profile_normalizer(prior: &JointPrior, signals: &[Signal]) -> Result<f64> {
    posterior_unnormalized(prior, signals).map(|(_, z)| z)
}

/// Constructors for the deviation family used by verification.
#[derive(Debug, Clone)]
pub enum SchemeKind {
    FullRevelation,
    NoInformation,
    Pooling(Vec<Vec<usize>>),
    Random { seed: u64, count: usize },
}

pub fn make_scheme(kind: &SchemeKind, bidder: usize, prior: &JointPrior) -> Result<SignalingScheme> {
    match kind {
        SchemeKind::FullRevelation => SignalingScheme::full_revelation(bidder, prior),
        SchemeKind::NoInformation => SignalingScheme::no_information(bidder, prior),
        SchemeKind::Pooling(cells) => SignalingScheme::pooling(bidder, prior, cells),
        SchemeKind::Random { seed, count } => SignalingScheme::random(bidder, prior, *seed, *count),
    }
}
