//! Seeded random scenario generation for property tests and cross-checks
//! against the brute-force revenue oracle.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Scenario;
use crate::error::Result;
use crate::model::{JointPrior, SeparableValue, StateSpace, TypePrior, ValueKernel};

#[derive(Debug, Clone)]
pub struct RandomScenarioConfig {
    pub num_bidders: usize,
    /// states per bidder are drawn from 1..=max_states
    pub max_states: usize,
    /// types per bidder are drawn from 1..=max_types
    pub max_types: usize,
    pub shared_states: usize,
    /// values factor as base(type) * cvr(own state)
    pub separable: bool,
    /// values depend only on (type, own state, shared state)
    pub private: bool,
    /// joint distribution over bidder states instead of a product
    pub correlated_states: bool,
}

impl Default for RandomScenarioConfig {
    fn default() -> Self {
        Self {
            num_bidders: 2,
            max_states: 3,
            max_types: 3,
            shared_states: 1,
            separable: false,
            private: true,
            correlated_states: false,
        }
    }
}

fn random_simplex(rng: &mut ChaCha8Rng, len: usize, floor: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (0..len).map(|_| rng.random_range(floor..1.0)).collect();
    let total: f64 = out.iter().sum();
    for p in &mut out {
        *p /= total;
    }
    out
}

/// Ascending, well-separated positive values.
fn increasing_values(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut acc = 0.0;
    (0..len)
        .map(|_| {
            acc += rng.random_range(0.1..1.0);
            acc
        })
        .collect()
}

pub fn random_scenario(seed: u64, cfg: &RandomScenarioConfig) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.num_bidders;
    let mut sizes = Vec::with_capacity(n + 1);
    sizes.push(cfg.shared_states);
    for _ in 0..n {
        sizes.push(rng.random_range(1..=cfg.max_states));
    }
    let space = StateSpace::new(sizes)?;

    let shared = random_simplex(&mut rng, space.shared_size(), 0.1);
    let rest_len: usize = (0..n).map(|b| space.bidder_size(b)).product();
    let rest = if cfg.correlated_states {
        random_simplex(&mut rng, rest_len, 0.05)
    } else {
        let marginals: Vec<Vec<f64>> = (0..n)
            .map(|b| random_simplex(&mut rng, space.bidder_size(b), 0.1))
            .collect();
        (0..rest_len)
            .map(|idx| {
                let mut p = 1.0;
                let mut rem = idx;
                for b in (0..n).rev() {
                    let m = space.bidder_size(b);
                    p *= marginals[b][rem % m];
                    rem /= m;
                }
                p
            })
            .collect()
    };
    let probs: Vec<f64> = shared
        .iter()
        .flat_map(|&g0| rest.iter().map(move |&r| g0 * r))
        .collect();
    let prior = JointPrior::new(space.clone(), probs)?;

    let mut type_priors = Vec::with_capacity(n);
    for _ in 0..n {
        let len = rng.random_range(1..=cfg.max_types);
        let support = (0..len).map(|t| format!("t{}", t)).collect();
        type_priors.push(TypePrior::new(support, random_simplex(&mut rng, len, 0.1))?);
    }

    let kernel = if cfg.separable {
        let factors = (0..n)
            .map(|b| SeparableValue {
                base: increasing_values(&mut rng, type_priors[b].len()),
                cvr: increasing_values(&mut rng, space.bidder_size(b)),
            })
            .collect();
        ValueKernel::from_separable(&space, &type_priors, factors)?
    } else {
        let mut tables = Vec::with_capacity(n);
        for (b, tp) in type_priors.iter().enumerate() {
            let mut table = vec![vec![0.0; space.num_profiles()]; tp.len()];
            if cfg.private {
                // draw per (type, shared state, own state) and broadcast
                let m0 = space.shared_size();
                let m = space.bidder_size(b);
                let draws: Vec<Vec<Vec<f64>>> = (0..tp.len())
                    .map(|_| {
                        (0..m0)
                            .map(|_| (0..m).map(|_| rng.random_range(0.0..1.0)).collect())
                            .collect()
                    })
                    .collect();
                for (t, row) in table.iter_mut().enumerate() {
                    for (idx, v) in row.iter_mut().enumerate() {
                        let s0 = space.coord_of_index(idx, 0);
                        let si = space.coord_of_index(idx, b + 1);
                        *v = draws[t][s0][si];
                    }
                }
            } else {
                for row in table.iter_mut() {
                    for v in row.iter_mut() {
                        *v = rng.random_range(0.0..1.0);
                    }
                }
            }
            tables.push(table);
        }
        ValueKernel::new(&space, tables)?
    };

    Scenario::with_name(
        format!("random-{}", seed),
        prior,
        type_priors,
        kernel,
        vec![],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let cfg = RandomScenarioConfig::default();
        let a = random_scenario(7, &cfg).unwrap();
        let b = random_scenario(7, &cfg).unwrap();
        assert_eq!(a.prior().probs(), b.prior().probs());
        assert_eq!(a.space(), b.space());
    }

    #[test]
    fn private_flag_is_respected() {
        let mut cfg = RandomScenarioConfig {
            num_bidders: 3,
            shared_states: 2,
            correlated_states: true,
            ..Default::default()
        };
        for seed in 0..5 {
            cfg.private = true;
            let s = random_scenario(seed, &cfg).unwrap();
            assert!(s.kernel().all_private(), "seed {}", seed);
        }
    }

    #[test]
    fn separable_scenarios_carry_their_factorization() {
        let cfg = RandomScenarioConfig {
            separable: true,
            ..Default::default()
        };
        let s = random_scenario(3, &cfg).unwrap();
        for b in 0..s.num_bidders() {
            assert!(s.kernel().separable(b).is_some());
            assert!(s.kernel().private_value(b));
        }
    }
}
