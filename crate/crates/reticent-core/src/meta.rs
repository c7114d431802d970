//! Meta transforms lifting a classic base mechanism to signal inputs. The
//! expected transform runs the base once on posterior-expected values; the
//! simulated transform runs it per information profile and averages the
//! outcomes. Regulation restricts what each bidder's signal may influence:
//! his own estimated value only, which restores dominant-strategy
//! truthfulness at some cost in expressiveness.

use crate::error::{Error, Result};
use crate::mechanisms::{
    indicative_states_check, strong_regularity_check, ClassicMechanism, Outcome, ValueDist,
    VirtualValueTable,
};
use crate::model::PosteriorOverProfiles;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetaKind {
    Expected,
    Simulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReticentMechanism {
    pub base: ClassicMechanism,
    pub kind: MetaKind,
    pub regulated: bool,
}

impl ReticentMechanism {
    pub fn expected_vickrey() -> Self {
        Self {
            base: ClassicMechanism::Vickrey,
            kind: MetaKind::Expected,
            regulated: false,
        }
    }

    pub fn simulated_myerson() -> Self {
        Self {
            base: ClassicMechanism::Myerson { ironed: true },
            kind: MetaKind::Simulated,
            regulated: false,
        }
    }

    pub fn regulate(self) -> Self {
        Self {
            regulated: true,
            ..self
        }
    }

    pub fn id(&self) -> String {
        let kind = match self.kind {
            MetaKind::Expected => "expected",
            MetaKind::Simulated => "simulated",
        };
        let inner = format!("{}-{}", kind, self.base.id());
        if self.regulated {
            format!("regulated({})", inner)
        } else {
            inner
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        let (regulated, inner) = match id.strip_prefix("regulated(").and_then(|s| s.strip_suffix(')')) {
            Some(inner) => (true, inner),
            None => (false, id),
        };
        let (kind, base_id) = inner
            .split_once('-')
            .ok_or_else(|| Error::UnknownMechanism(id.to_string()))?;
        let kind = match kind {
            "expected" => MetaKind::Expected,
            "simulated" => MetaKind::Simulated,
            _ => {
                return Err(Error::UnknownMechanism(id.to_string()));
            }
        };
        let base = match base_id {
            "vickrey" => ClassicMechanism::Vickrey,
            "myerson" => ClassicMechanism::Myerson { ironed: true },
            "myerson-raw" => ClassicMechanism::Myerson { ironed: false },
            _ => {
                return Err(Error::UnknownMechanism(id.to_string()));
            }
        };
        Ok(Self {
            base,
            kind,
            regulated,
        })
    }

    pub fn outcome(
        &self,
        scenario: &Scenario,
        bids: &[usize],
        posterior: &PosteriorOverProfiles,
    ) -> Outcome {
        match self.kind {
            MetaKind::Expected => expected_meta(&self.base, scenario, bids, posterior, self.regulated),
            MetaKind::Simulated => {
                simulated_meta(&self.base, scenario, bids, posterior, self.regulated)
            }
        }
    }

    /// Precondition diagnostics: the theorems backing this mechanism may not
    /// apply to the given scenario. Outcomes still compute either way.
    pub fn warnings(&self, scenario: &Scenario) -> Vec<String> {
        let mut out = Vec::new();
        if let ClassicMechanism::Myerson { ironed } = self.base {
            let table = VirtualValueTable::build(scenario);
            let regularity = strong_regularity_check(&table);
            if !regularity.holds {
                let suffix = if ironed
                    && (0..scenario.num_bidders()).all(|b| scenario.kernel().separable(b).is_some())
                {
                    " (separable values: per-state ironing restores it)"
                } else {
                    ""
                };
                out.push(format!(
                    "strong regularity fails: {}{}",
                    regularity.violation.unwrap_or_default(),
                    suffix
                ));
            }
            if self.kind == MetaKind::Expected {
                out.push(
                    "expected transform of a non-convex-utility base: scheme truthfulness is not guaranteed"
                        .to_string(),
                );
            }
        }
        if self.kind == MetaKind::Simulated {
            let verdict = indicative_states_check(&self.base, scenario);
            if !verdict.holds {
                out.push(format!(
                    "indicative states fail: {}",
                    verdict.violation.unwrap_or_default()
                ));
            }
        }
        if !self.regulated && !scenario.kernel().all_private() {
            if let ClassicMechanism::Myerson { .. } = self.base {
                out.push("interdependent values: optimality analysis assumes private values".into());
            }
        }
        out
    }
}

/// Runs the base mechanism once on posterior-expected values. Regulated,
/// each bidder's estimate conditions only on his own signal.
pub fn expected_meta(
    base: &ClassicMechanism,
    scenario: &Scenario,
    bids: &[usize],
    posterior: &PosteriorOverProfiles,
    regulated: bool,
) -> Outcome {
    let n = scenario.num_bidders();
    let kernel = scenario.kernel();
    let dists: Vec<ValueDist> = (0..n)
        .map(|i| {
            let values = (0..scenario.type_priors()[i].len())
                .map(|t| {
                    if regulated {
                        posterior
                            .signal(i)
                            .probs()
                            .iter()
                            .enumerate()
                            .map(|(k, &s)| s * scenario.vbar_state(i, t, k))
                            .sum()
                    } else {
                        posterior
                            .probs()
                            .iter()
                            .enumerate()
                            .map(|(idx, &p)| p * kernel.value(i, t, idx))
                            .sum()
                    }
                })
                .collect();
            ValueDist {
                values,
                masses: scenario.type_priors()[i].probs().to_vec(),
            }
        })
        .collect();
    base.outcome(bids, &dists)
}

/// Runs the base mechanism at every information profile and averages the
/// outcomes. Unregulated the weights are the joint posterior; regulated they
/// are the product measure of the bidders' own signals and the shared prior.
pub fn simulated_meta(
    base: &ClassicMechanism,
    scenario: &Scenario,
    bids: &[usize],
    posterior: &PosteriorOverProfiles,
    regulated: bool,
) -> Outcome {
    let space = scenario.space();
    let n = space.num_bidders();
    let mut acc = Outcome::zero(n);
    let shared = scenario.prior().shared_marginal();
    for idx in 0..space.num_profiles() {
        let w = if regulated {
            let mut w = shared[space.coord_of_index(idx, 0)];
            for i in 0..n {
                if w == 0.0 {
                    break;
                }
                w *= posterior.signal(i).probs()[space.coord_of_index(idx, i + 1)];
            }
            w
        } else {
            posterior.probs()[idx]
        };
        if w == 0.0 {
            continue;
        }
        acc.add_scaled(w, &base.outcome(bids, scenario.state_dists(idx)));
    }
    acc
}

/// Welfare-optimal default: expected transform of the second-price auction.
pub fn expected_vickrey(
    scenario: &Scenario,
    bids: &[usize],
    posterior: &PosteriorOverProfiles,
) -> Outcome {
    ReticentMechanism::expected_vickrey().outcome(scenario, bids, posterior)
}

/// Revenue-optimal default under strong regularity and indicative states:
/// simulated transform of the (ironed) optimal auction.
pub fn simulated_myerson(
    scenario: &Scenario,
    bids: &[usize],
    posterior: &PosteriorOverProfiles,
) -> Outcome {
    ReticentMechanism::simulated_myerson().outcome(scenario, bids, posterior)
}

pub fn regulate(mechanism: ReticentMechanism) -> ReticentMechanism {
    mechanism.regulate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{joint_posterior, Signal};
    use crate::scenario::builtin;

    fn posterior_at(scenario: &Scenario, signals: &[Signal]) -> PosteriorOverProfiles {
        joint_posterior(scenario.prior(), signals).unwrap()
    }

    #[test]
    fn silence_lets_the_informed_bidder_win() {
        let s = builtin("silence").unwrap();
        let signals = vec![
            s.no_info_signal(0),
            s.no_info_signal(1),
            s.no_info_signal(2),
        ];
        let out = expected_vickrey(&s, &[0, 0, 0], &posterior_at(&s, &signals));
        assert_eq!(out.allocation, vec![1.0, 0.0, 0.0]);
        assert!((out.payment[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn full_revelation_prices_the_informed_bidder_out() {
        let s = builtin("silence").unwrap();
        for state in 0..2 {
            let signals = vec![
                s.point_signal(0, state),
                s.no_info_signal(1),
                s.no_info_signal(2),
            ];
            let out = expected_vickrey(&s, &[0, 0, 0], &posterior_at(&s, &signals));
            assert_eq!(out.allocation[0], 0.0);
            let winner = if state == 1 { 1 } else { 2 };
            assert_eq!(out.allocation[winner], 1.0);
            assert!((out.payment[winner] - 0.9).abs() < 1e-12);
        }
    }

    #[test]
    fn correlated_revelation_keeps_the_price_at_the_high_rival() {
        let s = builtin("correlated").unwrap();
        for state in 0..2 {
            let signals = vec![
                s.point_signal(0, state),
                s.no_info_signal(1),
                s.no_info_signal(2),
            ];
            let out = expected_vickrey(&s, &[0, 0, 0], &posterior_at(&s, &signals));
            assert_eq!(out.allocation, vec![1.0, 0.0, 0.0]);
            // one of the rivals always sits at 0.75 thanks to the correlation
            assert!((out.payment[0] - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_and_simulated_agree_at_full_information() {
        let s = builtin("elicitation").unwrap();
        let signals = vec![
            s.point_signal(0, 1),
            s.point_signal(1, 0),
            s.point_signal(2, 1),
        ];
        let posterior = posterior_at(&s, &signals);
        let expected = expected_meta(&ClassicMechanism::Vickrey, &s, &[0, 0, 0], &posterior, false);
        let simulated =
            simulated_meta(&ClassicMechanism::Vickrey, &s, &[0, 0, 0], &posterior, false);
        for i in 0..3 {
            assert!((expected.allocation[i] - simulated.allocation[i]).abs() < 1e-12);
            assert!((expected.payment[i] - simulated.payment[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn regulation_is_inert_on_independent_private_values() {
        let s = builtin("elicitation").unwrap();
        let signals = vec![
            s.point_signal(0, 1),
            s.no_info_signal(1),
            s.point_signal(2, 0),
        ];
        let posterior = posterior_at(&s, &signals);
        for mech in [
            ReticentMechanism::expected_vickrey(),
            ReticentMechanism::simulated_myerson(),
        ] {
            let plain = mech.outcome(&s, &[0, 0, 0], &posterior);
            let reg = mech.regulate().outcome(&s, &[0, 0, 0], &posterior);
            for i in 0..3 {
                assert!((plain.allocation[i] - reg.allocation[i]).abs() < 1e-12);
                assert!((plain.payment[i] - reg.payment[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn id_round_trips() {
        for id in [
            "expected-vickrey",
            "simulated-myerson",
            "expected-myerson",
            "simulated-vickrey",
            "regulated(expected-vickrey)",
            "regulated(simulated-myerson)",
        ] {
            let mech = ReticentMechanism::from_id(id).unwrap();
            assert_eq!(mech.id(), id);
        }
        assert!(ReticentMechanism::from_id("slow-english").is_err());
        assert!(ReticentMechanism::from_id("nonsense").is_err());
    }

    #[test]
    fn simulated_myerson_warns_on_interdependent_values() {
        let s = builtin("silence").unwrap();
        let warnings = ReticentMechanism::simulated_myerson().warnings(&s);
        assert!(!warnings.is_empty());
    }
}
