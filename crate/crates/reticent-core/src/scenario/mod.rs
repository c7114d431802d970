//! Scenario bundle: state space, joint prior, type priors, value kernel, and
//! any committed signaling schemes shipped with the instance, plus the
//! precomputed tables the mechanisms and checks lean on. Scenarios load from
//! JSON or from the built-in fixtures.

mod fixtures;
mod loader;
mod random;

pub use fixtures::{builtin, builtin_names};
pub use random::{random_scenario, RandomScenarioConfig};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::mechanisms::ValueDist;
use crate::model::{
    expected_value_given_state, validate_scheme, JointPrior, Signal, SignalingScheme, StateSpace,
    TypePrior, ValueKernel,
};

#[derive(Debug, Clone)]
pub struct Scenario {
    name: String,
    prior: JointPrior,
    type_priors: Vec<TypePrior>,
    kernel: ValueKernel,
    schemes: Vec<SignalingScheme>,
    /// `vbar_state[bidder][type][own state]`, zero on zero-mass states
    vbar_state: Vec<Vec<Vec<f64>>>,
    /// `state_dists[profile][bidder]`: value distribution at a fixed profile
    state_dists: Vec<Vec<ValueDist>>,
    marginals: Vec<Vec<f64>>,
}

impl Scenario {
    pub fn new(
        prior: JointPrior,
        type_priors: Vec<TypePrior>,
        kernel: ValueKernel,
        schemes: Vec<SignalingScheme>,
    ) -> Result<Self> {
        Self::with_name("unnamed", prior, type_priors, kernel, schemes)
    }

    pub fn with_name(
        name: impl Into<String>,
        prior: JointPrior,
        type_priors: Vec<TypePrior>,
        kernel: ValueKernel,
        schemes: Vec<SignalingScheme>,
    ) -> Result<Self> {
        let space = prior.space().clone();
        let n = space.num_bidders();
        if type_priors.len() != n || kernel.num_bidders() != n {
            return Err(Error::Scenario {
                location: "scenario".into(),
                message: format!(
                    "{} bidders in the state space, {} type priors, {} value tables",
                    n,
                    type_priors.len(),
                    kernel.num_bidders()
                ),
            });
        }
        for (bidder, tp) in type_priors.iter().enumerate() {
            if kernel.num_types(bidder) != tp.len() {
                return Err(Error::Scenario {
                    location: format!("values[{}]", bidder),
                    message: format!(
                        "value table has {} type rows, type prior has {}",
                        kernel.num_types(bidder),
                        tp.len()
                    ),
                });
            }
        }
        for (i, scheme) in schemes.iter().enumerate() {
            space.check_bidder(scheme.bidder)?;
            let validation = validate_scheme(scheme, &prior)?;
            if !validation.valid {
                return Err(Error::Scenario {
                    location: format!("schemes[{}]", i),
                    message: validation
                        .detail
                        .unwrap_or_else(|| "scheme fails Bayes plausibility".into()),
                });
            }
        }

        let marginals: Vec<Vec<f64>> = (0..n)
            .map(|b| prior.bidder_marginal(b))
            .collect::<Result<_>>()?;
        let mut vbar_state = Vec::with_capacity(n);
        for (bidder, tp) in type_priors.iter().enumerate() {
            let m = space.bidder_size(bidder);
            let mut per_type = Vec::with_capacity(tp.len());
            for t in 0..tp.len() {
                let mut row = Vec::with_capacity(m);
                for k in 0..m {
                    if marginals[bidder][k] > 0.0 {
                        row.push(expected_value_given_state(&kernel, bidder, t, k, &prior)?);
                    } else {
                        row.push(0.0);
                    }
                }
                per_type.push(row);
            }
            vbar_state.push(per_type);
        }
        let state_dists = (0..space.num_profiles())
            .map(|idx| {
                (0..n)
                    .map(|b| ValueDist {
                        values: (0..type_priors[b].len())
                            .map(|t| kernel.value(b, t, idx))
                            .collect(),
                        masses: type_priors[b].probs().to_vec(),
                    })
                    .collect()
            })
            .collect();

        Ok(Self {
            name: name.into(),
            prior,
            type_priors,
            kernel,
            schemes,
            vbar_state,
            state_dists,
            marginals,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &StateSpace {
        self.prior.space()
    }

    pub fn num_bidders(&self) -> usize {
        self.space().num_bidders()
    }

    pub fn prior(&self) -> &JointPrior {
        &self.prior
    }

    pub fn type_priors(&self) -> &[TypePrior] {
        &self.type_priors
    }

    pub fn kernel(&self) -> &ValueKernel {
        &self.kernel
    }

    /// Schemes bundled with the scenario file, fed into deviation families.
    pub fn schemes(&self) -> &[SignalingScheme] {
        &self.schemes
    }

    pub fn bidder_marginal(&self, bidder: usize) -> &[f64] {
        &self.marginals[bidder]
    }

    /// vbar_i(t | theta_i): opponents and the shared state integrated out
    /// under the prior conditioned on the bidder's own state.
    pub fn vbar_state(&self, bidder: usize, type_idx: usize, state: usize) -> f64 {
        self.vbar_state[bidder][type_idx][state]
    }

    /// Value distributions of all bidders at one fixed information profile.
    pub fn state_dists(&self, profile_idx: usize) -> &[ValueDist] {
        &self.state_dists[profile_idx]
    }

    /// Every type-index profile, row-major over bidders.
    pub fn type_profiles(&self) -> Vec<Vec<usize>> {
        self.type_priors
            .iter()
            .map(|tp| 0..tp.len())
            .multi_cartesian_product()
            .collect()
    }

    /// Prior mass of a type profile (types are independent across bidders).
    pub fn type_profile_prob(&self, profile: &[usize]) -> f64 {
        self.type_priors
            .iter()
            .zip(profile)
            .map(|(tp, &t)| tp.prob(t))
            .product()
    }

    pub fn point_signal(&self, bidder: usize, state: usize) -> Signal {
        Signal::point_mass(self.space().bidder_size(bidder), state)
    }

    pub fn no_info_signal(&self, bidder: usize) -> Signal {
        Signal::new(self.marginals[bidder].clone()).expect("marginal is a distribution")
    }

    pub fn truthful_scheme(&self, bidder: usize) -> SignalingScheme {
        SignalingScheme::full_revelation(bidder, &self.prior).expect("bidder index in range")
    }

    pub fn no_info_scheme(&self, bidder: usize) -> SignalingScheme {
        SignalingScheme::no_information(bidder, &self.prior).expect("bidder index in range")
    }

    /// Bundled schemes committed by one bidder.
    pub fn schemes_for(&self, bidder: usize) -> Vec<&SignalingScheme> {
        self.schemes.iter().filter(|s| s.bidder == bidder).collect()
    }

    /// Parses a textual scheme spec: `truthful`, `no-info`, `pool:0,1;2`
    /// (cells of states separated by `;`), or `random:SEED`.
    pub fn scheme_from_spec(&self, bidder: usize, spec: &str) -> Result<SignalingScheme> {
        let bad = |message: String| Error::Scenario {
            location: format!("scheme spec for bidder {}", bidder + 1),
            message,
        };
        match spec {
            "truthful" => Ok(self.truthful_scheme(bidder)),
            "no-info" => Ok(self.no_info_scheme(bidder)),
            _ => {
                if let Some(seed) = spec.strip_prefix("random:") {
                    let seed: u64 = seed
                        .parse()
                        .map_err(|_| bad(format!("bad random seed '{}'", seed)))?;
                    return SignalingScheme::random(bidder, &self.prior, seed, 2);
                }
                if let Some(cells) = spec.strip_prefix("pool:") {
                    let cells: Vec<Vec<usize>> = cells
                        .split(';')
                        .map(|cell| {
                            cell.split(',')
                                .map(|s| {
                                    s.trim()
                                        .parse::<usize>()
                                        .map_err(|_| bad(format!("bad state index '{}'", s)))
                                })
                                .collect()
                        })
                        .collect::<Result<_>>()?;
                    return SignalingScheme::pooling(bidder, &self.prior, &cells);
                }
                Err(bad(format!(
                    "unknown scheme spec '{}' (want truthful, no-info, pool:..., random:SEED)",
                    spec
                )))
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        loader::parse(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SeparableValue, StateSpace};

    #[test]
    fn vbar_state_integrates_out_opponents() {
        // bidder 1's value rides on bidder 2's state through correlation
        let space = StateSpace::new(vec![1, 2, 2]).unwrap();
        let probs = vec![0.4, 0.1, 0.1, 0.4];
        let prior = JointPrior::new(space.clone(), probs).unwrap();
        let type_priors = vec![TypePrior::singleton("t"), TypePrior::singleton("t")];
        // v_1 = 1 when theta_2 = 1, else 0; v_2 = 0
        let tables = vec![
            vec![vec![0.0, 1.0, 0.0, 1.0]],
            vec![vec![0.0; 4]],
        ];
        let kernel = ValueKernel::new(&space, tables).unwrap();
        let scenario = Scenario::new(prior, type_priors, kernel, vec![]).unwrap();
        assert!((scenario.vbar_state(0, 0, 0) - 0.2).abs() < 1e-12);
        assert!((scenario.vbar_state(0, 0, 1) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn type_profiles_cover_the_grid() {
        let space = StateSpace::new(vec![1, 1, 1]).unwrap();
        let prior = JointPrior::new(space.clone(), vec![1.0]).unwrap();
        let type_priors = vec![
            TypePrior::new(vec!["a".into(), "b".into()], vec![0.5, 0.5]).unwrap(),
            TypePrior::new(vec!["x".into(), "y".into(), "z".into()], vec![0.2, 0.3, 0.5]).unwrap(),
        ];
        let kernel = ValueKernel::from_separable(
            &space,
            &type_priors,
            vec![
                SeparableValue { base: vec![1.0, 2.0], cvr: vec![1.0] },
                SeparableValue { base: vec![1.0, 2.0, 3.0], cvr: vec![1.0] },
            ],
        )
        .unwrap();
        let scenario = Scenario::new(prior, type_priors, kernel, vec![]).unwrap();
        let profiles = scenario.type_profiles();
        assert_eq!(profiles.len(), 6);
        let total: f64 = profiles.iter().map(|p| scenario.type_profile_prob(p)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_type_priors() {
        let space = StateSpace::new(vec![1, 1, 1]).unwrap();
        let prior = JointPrior::new(space.clone(), vec![1.0]).unwrap();
        let type_priors = vec![TypePrior::singleton("t")];
        let kernel = ValueKernel::new(&space, vec![vec![vec![0.0]], vec![vec![0.0]]]).unwrap();
        assert!(Scenario::new(prior, type_priors, kernel, vec![]).is_err());
    }
}
