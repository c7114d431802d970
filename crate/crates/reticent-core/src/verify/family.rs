//! The deviation family: the finite set of alternative signaling schemes the
//! checks search over. A PASS is always relative to this family; a FAIL is a
//! certified counterexample.

use crate::error::Result;
use crate::model::SignalingScheme;
use crate::scenario::Scenario;

const MAX_POOLING_STATES: usize = 12;
const DEDUP_TOL: f64 = 1e-12;

fn approx_same(a: &SignalingScheme, b: &SignalingScheme) -> bool {
    a.bidder == b.bidder
        && a.atoms().len() == b.atoms().len()
        && a.atoms().iter().zip(b.atoms()).all(|((wa, sa), (wb, sb))| {
            (wa - wb).abs() <= DEDUP_TOL
                && sa
                    .probs()
                    .iter()
                    .zip(sb.probs())
                    .all(|(x, y)| (x - y).abs() <= DEDUP_TOL)
        })
}

#[derive(Debug, Clone)]
pub struct DeviationFamily {
    /// labeled schemes per bidder
    schemes: Vec<Vec<(String, SignalingScheme)>>,
    pub k_random: usize,
    pub seed: u64,
}

impl DeviationFamily {
    /// Full revelation, no information, every two-cell pooling, every
    /// pairwise merge, `k_random` seeded Bayes-plausible schemes, and any
    /// schemes bundled with the scenario. Exact duplicates are dropped.
    pub fn standard(scenario: &Scenario, k_random: usize, seed: u64) -> Result<Self> {
        let prior = scenario.prior();
        let n = scenario.num_bidders();
        let mut schemes = Vec::with_capacity(n);
        for bidder in 0..n {
            let m = scenario.space().bidder_size(bidder);
            let mut list: Vec<(String, SignalingScheme)> = Vec::new();
            let push = |label: String, scheme: SignalingScheme, list: &mut Vec<(String, SignalingScheme)>| {
                if !list.iter().any(|(_, s)| approx_same(s, &scheme)) {
                    list.push((label, scheme));
                }
            };
            push(
                "full-revelation".into(),
                SignalingScheme::full_revelation(bidder, prior)?,
                &mut list,
            );
            push(
                "no-information".into(),
                SignalingScheme::no_information(bidder, prior)?,
                &mut list,
            );
            if m >= 2 && m <= MAX_POOLING_STATES {
                // two-cell partitions: state 0 always goes to the first cell
                for mask in 0..(1u32 << (m - 1)) {
                    let mut a = vec![0usize];
                    let mut b = Vec::new();
                    for state in 1..m {
                        if mask & (1 << (state - 1)) != 0 {
                            a.push(state);
                        } else {
                            b.push(state);
                        }
                    }
                    if b.is_empty() {
                        continue;
                    }
                    let label = format!("pool({:?}|{:?})", a, b);
                    push(
                        label,
                        SignalingScheme::pooling(bidder, prior, &[a, b])?,
                        &mut list,
                    );
                }
                // merge one pair, reveal the rest
                for x in 0..m {
                    for y in (x + 1)..m {
                        let mut cells = vec![vec![x, y]];
                        cells.extend((0..m).filter(|&s| s != x && s != y).map(|s| vec![s]));
                        push(
                            format!("merge({},{})", x, y),
                            SignalingScheme::pooling(bidder, prior, &cells)?,
                            &mut list,
                        );
                    }
                }
            }
            for j in 0..k_random {
                let scheme_seed = seed
                    .wrapping_add((j as u64).wrapping_mul(0x9e3779b97f4a7c15))
                    .wrapping_add(1);
                let count = m.clamp(2, 3);
                push(
                    format!("random-{}", j),
                    SignalingScheme::random(bidder, prior, scheme_seed, count)?,
                    &mut list,
                );
            }
            for (j, bundled) in scenario.schemes_for(bidder).into_iter().enumerate() {
                push(format!("bundled-{}", j), bundled.clone(), &mut list);
            }
            schemes.push(list);
        }
        Ok(Self {
            schemes,
            k_random,
            seed,
        })
    }

    pub fn schemes(&self, bidder: usize) -> &[(String, SignalingScheme)] {
        &self.schemes[bidder]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.schemes.iter().map(|s| s.len()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_scheme;
    use crate::scenario::builtin;

    #[test]
    fn family_members_are_all_bayes_plausible() {
        let s = builtin("correlated").unwrap();
        let family = DeviationFamily::standard(&s, 8, 42).unwrap();
        for bidder in 0..s.num_bidders() {
            for (label, scheme) in family.schemes(bidder) {
                let v = validate_scheme(scheme, s.prior()).unwrap();
                assert!(v.valid, "bidder {} scheme {} violates by {}", bidder, label, v.max_violation);
            }
        }
    }

    #[test]
    fn binary_state_family_deduplicates() {
        let s = builtin("elicitation").unwrap();
        let family = DeviationFamily::standard(&s, 0, 1).unwrap();
        // with two states, the only distinct deterministic schemes are full
        // revelation and no information
        assert_eq!(family.schemes(0).len(), 2);
    }

    #[test]
    fn bundled_schemes_join_the_family() {
        let s = builtin("nonconvex").unwrap();
        let family = DeviationFamily::standard(&s, 0, 1).unwrap();
        assert!(family
            .schemes(0)
            .iter()
            .any(|(label, _)| label.starts_with("bundled")));
    }

    #[test]
    fn family_is_deterministic_in_the_seed() {
        let s = builtin("correlated").unwrap();
        let a = DeviationFamily::standard(&s, 4, 9).unwrap();
        let b = DeviationFamily::standard(&s, 4, 9).unwrap();
        for bidder in 0..3 {
            assert_eq!(a.schemes(bidder).len(), b.schemes(bidder).len());
            for (x, y) in a.schemes(bidder).iter().zip(b.schemes(bidder)) {
                assert_eq!(x.1, y.1);
            }
        }
    }
}
