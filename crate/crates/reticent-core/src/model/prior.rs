use super::space::StateSpace;
use crate::error::{Error, Result};

pub const PROB_TOL: f64 = 1e-9;

/// Joint prior `g` over full information profiles. The shared coordinate is
/// required to be independent of the bidders' coordinates, which the
/// constructor validates exhaustively.
#[derive(Debug, Clone)]
pub struct JointPrior {
    space: StateSpace,
    probs: Vec<f64>,
}

impl JointPrior {
    pub fn new(space: StateSpace, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.num_profiles() {
            return Err(Error::Scenario {
                location: "joint_prior".into(),
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
        let prior = Self { space, probs };
        prior.check_shared_independence()?;
        Ok(prior)
    }

    fn check_shared_independence(&self) -> Result<()> {
        let shared = self.marginal(0)?;
        let rest = self.rest_marginal();
        let m0 = self.space.shared_size();
        for (idx, &p) in self.probs.iter().enumerate() {
            let s0 = self.space.coord_of_index(idx, 0);
            // profiles are row-major with the shared coordinate leading, so
            // idx = s0 * |rest| + rest_idx
            let rest_idx = idx - s0 * rest.len();
            debug_assert!(m0 == 0 || rest_idx < rest.len());
            let product = shared[s0] * rest[rest_idx];
            if (p - product).abs() > PROB_TOL {
                return Err(Error::SharedStateNotIndependent {
                    joint: p,
                    product,
                    gap: (p - product).abs(),
                    profile: self.space.index_to_profile(idx),
                });
            }
        }
        Ok(())
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, profile_idx: usize) -> f64 {
        self.probs[profile_idx]
    }

    /// Marginal distribution of one coordinate.
    pub fn marginal(&self, coord: usize) -> Result<Vec<f64>> {
        self.space.check_coord(coord)?;
        let mut out = vec![0.0; self.space.sizes()[coord]];
        for (idx, &p) in self.probs.iter().enumerate() {
            out[self.space.coord_of_index(idx, coord)] += p;
        }
        Ok(out)
    }

    /// Marginal of a bidder's own state coordinate.
    pub fn bidder_marginal(&self, bidder: usize) -> Result<Vec<f64>> {
        self.space.check_bidder(bidder)?;
        self.marginal(bidder + 1)
    }

    pub fn shared_marginal(&self) -> Vec<f64> {
        self.marginal(0).expect("coordinate 0 always exists")
    }

    /// Marginal over the bidders' coordinates (shared state summed out),
    /// indexed row-major over coordinates `1..=n`.
    pub fn rest_marginal(&self) -> Vec<f64> {
        let m0 = self.space.shared_size();
        let rest_len = self.space.num_profiles() / m0;
        let mut out = vec![0.0; rest_len];
        for (idx, &p) in self.probs.iter().enumerate() {
            out[idx % rest_len] += p;
        }
        out
    }

    /// Pr(theta_i = k | theta_{-i}) for a fixed profile of the other bidders'
    /// states (shared state summed out). `others` lists the states of every
    /// bidder except `bidder`, in bidder order.
    pub fn own_given_others(&self, bidder: usize, others: &[usize]) -> Result<Vec<f64>> {
        self.space.check_bidder(bidder)?;
        let n = self.space.num_bidders();
        debug_assert_eq!(others.len(), n - 1);
        let m = self.space.bidder_size(bidder);
        let mut weights = vec![0.0; m];
        for (idx, &p) in self.probs.iter().enumerate() {
            let mut matches = true;
            let mut j = 0;
            for b in 0..n {
                if b == bidder {
                    continue;
                }
                if self.space.coord_of_index(idx, b + 1) != others[j] {
                    matches = false;
                    break;
                }
                j += 1;
            }
            if matches {
                weights[self.space.coord_of_index(idx, bidder + 1)] += p;
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InconsistentSignals);
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn uniform_prior(sizes: Vec<usize>) -> JointPrior {
        let space = StateSpace::new(sizes).unwrap();
        let n = space.num_profiles();
        JointPrior::new(space, vec![1.0 / n as f64; n]).unwrap()
    }

    #[test]
    fn marginal_of_uniform_is_uniform() {
        let prior = uniform_prior(vec![1, 2, 2]);
        assert_eq!(prior.marginal(1).unwrap(), vec![0.5, 0.5]);
        assert_eq!(prior.marginal(2).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn point_mass_marginal_is_point_mass() {
        let space = StateSpace::new(vec![1, 2, 2]).unwrap();
        let mut probs = vec![0.0; 4];
        probs[3] = 1.0;
        let prior = JointPrior::new(space, probs).unwrap();
        assert_eq!(prior.marginal(1).unwrap(), vec![0.0, 1.0]);
        assert_eq!(prior.marginal(2).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn rejects_correlated_shared_state() {
        let space = StateSpace::new(vec![2, 2]).unwrap();
        // shared state perfectly correlated with the bidder state
        let probs = vec![0.5, 0.0, 0.0, 0.5];
        assert!(matches!(
            JointPrior::new(space, probs),
            Err(Error::SharedStateNotIndependent { .. })
        ));
    }

    #[test]
    fn rejects_unnormalized() {
        let space = StateSpace::new(vec![1, 2]).unwrap();
        assert!(matches!(
            JointPrior::new(space, vec![0.5, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn conditional_on_others_tracks_correlation() {
        // theta_1 = theta_2 with probability 1
        let space = StateSpace::new(vec![1, 2, 2]).unwrap();
        let probs = vec![0.5, 0.0, 0.0, 0.5];
        let prior = JointPrior::new(space, probs).unwrap();
        assert_eq!(prior.own_given_others(0, &[1]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(prior.own_given_others(1, &[0]).unwrap(), vec![1.0, 0.0]);
    }
}
