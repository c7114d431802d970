//! Classic (misreport-only) base mechanisms consumed by the meta transforms:
//! second-price and discrete Myerson with virtual values and ironing, plus
//! the regularity and indicative-state checkers attached to them.

mod classic;
mod virtual_values;

pub use classic::{myerson, vickrey, ClassicMechanism, Outcome, ValueDist};
pub use virtual_values::{
    discrete_virtual_values, iron, strong_regularity_check, RegularityVerdict,
    VirtualValueColumn, VirtualValueTable,
};

use crate::scenario::Scenario;

/// Verdict of the indicative-states check: the shared coordinate must never
/// move the allocation.
#[derive(Debug, Clone)]
pub struct IndicativeVerdict {
    pub holds: bool,
    pub violation: Option<String>,
}

/// For every bidder, type profile and bidder-state profile, the allocation
/// must be identical across realizations of the shared state.
pub fn indicative_states_check(mechanism: &ClassicMechanism, scenario: &Scenario) -> IndicativeVerdict {
    const TOL: f64 = 1e-12;
    let space = scenario.space();
    let m0 = space.shared_size();
    if m0 == 1 {
        return IndicativeVerdict {
            holds: true,
            violation: None,
        };
    }
    let n = space.num_bidders();
    for bids in scenario.type_profiles() {
        for rest in space.profiles_excluding(0) {
            let mut reference: Option<Vec<f64>> = None;
            for s0 in 0..m0 {
                let mut profile = Vec::with_capacity(n + 1);
                profile.push(s0);
                profile.extend_from_slice(&rest);
                let idx = space.profile_to_index(&profile);
                let outcome = mechanism.outcome(&bids, scenario.state_dists(idx));
                match &reference {
                    None => reference = Some(outcome.allocation),
                    Some(base) => {
                        for (i, (&a, &b)) in outcome.allocation.iter().zip(base).enumerate() {
                            if (a - b).abs() > TOL {
                                return IndicativeVerdict {
                                    holds: false,
                                    violation: Some(format!(
                                        "bidder {} allocation moves from {} to {} across the shared state at types {:?}, states {:?}",
                                        i + 1,
                                        b,
                                        a,
                                        bids,
                                        rest
                                    )),
                                };
                            }
                        }
                    }
                }
            }
        }
    }
    IndicativeVerdict {
        holds: true,
        violation: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;
    use crate::model::{JointPrior, SeparableValue, StateSpace, TypePrior, ValueKernel};

    fn shared_state_scenario(values_follow_shared: bool) -> Scenario {
        // two bidders, bidder 1 value depends on the shared state when
        // `values_follow_shared`, sizes: shared 2, each bidder 1 state
        let space = StateSpace::new(vec![2, 1, 1]).unwrap();
        let prior = JointPrior::new(space.clone(), vec![0.5, 0.5]).unwrap();
        let type_priors = vec![TypePrior::singleton("t"), TypePrior::singleton("t")];
        let v1 = if values_follow_shared {
            vec![vec![0.2, 2.0]]
        } else {
            vec![vec![0.8, 0.8]]
        };
        let kernel = ValueKernel::new(&space, vec![v1, vec![vec![1.0, 1.0]]]).unwrap();
        Scenario::new(prior, type_priors, kernel, vec![]).unwrap()
    }

    #[test]
    fn trivial_shared_state_always_holds() {
        let space = StateSpace::new(vec![1, 2, 2]).unwrap();
        let prior = JointPrior::new(space.clone(), vec![0.25; 4]).unwrap();
        let type_priors = vec![TypePrior::singleton("t"), TypePrior::singleton("t")];
        let kernel = ValueKernel::from_separable(
            &space,
            &type_priors,
            vec![
                SeparableValue { base: vec![1.0], cvr: vec![0.0, 1.0] },
                SeparableValue { base: vec![1.0], cvr: vec![0.0, 1.0] },
            ],
        )
        .unwrap();
        let scenario = Scenario::new(prior, type_priors, kernel, vec![]).unwrap();
        assert!(indicative_states_check(&ClassicMechanism::Vickrey, &scenario).holds);
    }

    #[test]
    fn shared_state_flipping_the_winner_is_reported() {
        let scenario = shared_state_scenario(true);
        let verdict = indicative_states_check(&ClassicMechanism::Vickrey, &scenario);
        assert!(!verdict.holds);
        assert!(verdict.violation.is_some());
    }

    #[test]
    fn shared_state_that_never_flips_the_argmax_holds() {
        let scenario = shared_state_scenario(false);
        assert!(indicative_states_check(&ClassicMechanism::Vickrey, &scenario).holds);
    }
}
