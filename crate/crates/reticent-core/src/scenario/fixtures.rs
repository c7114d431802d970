//! Built-in scenarios, shipped as JSON so the files double as format
//! documentation.

use super::Scenario;
use crate::error::{Error, Result};

const SILENCE: &str = include_str!("../../fixtures/silence.json");
const ELICITATION: &str = include_str!("../../fixtures/elicitation.json");
const CORRELATED: &str = include_str!("../../fixtures/correlated.json");
const NONCONVEX: &str = include_str!("../../fixtures/nonconvex.json");

pub fn builtin_names() -> &'static [&'static str] {
    &["silence", "elicitation", "correlated", "nonconvex"]
}

pub fn builtin(name: &str) -> Result<Scenario> {
    let text = match name {
        "silence" => SILENCE,
        "elicitation" => ELICITATION,
        "correlated" => CORRELATED,
        "nonconvex" => NONCONVEX,
        _ => {
            return Err(Error::Scenario {
                location: "scenario".into(),
                message: format!(
                    "unknown built-in scenario \"{}\" (available: {})",
                    name,
                    builtin_names().join(", ")
                ),
            })
        }
    };
    Scenario::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_load() {
        for name in builtin_names() {
            let scenario = builtin(name).unwrap();
            assert_eq!(scenario.name(), *name);
        }
    }

    #[test]
    fn silence_has_interdependent_values() {
        let s = builtin("silence").unwrap();
        assert!(s.kernel().private_value(0));
        assert!(!s.kernel().private_value(1));
        assert!(!s.kernel().private_value(2));
        // bidder 2's own coordinate is a singleton, so his conditional
        // expected value integrates over bidder 1's state
        assert!((s.vbar_state(1, 0, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn correlated_prior_couples_bidders() {
        let s = builtin("correlated").unwrap();
        // theta_2 is pinned by theta_1
        assert_eq!(s.prior().own_given_others(1, &[0, 1]).unwrap(), vec![1.0, 0.0]);
        assert!((s.vbar_state(0, 0, 1) - 75.0).abs() < 1e-12);
    }

    #[test]
    fn nonconvex_bundles_a_valid_scheme() {
        let s = builtin("nonconvex").unwrap();
        assert_eq!(s.schemes().len(), 1);
        assert_eq!(s.schemes()[0].bidder, 0);
    }

    #[test]
    fn unknown_builtin_is_an_error() {
        assert!(builtin("nope").is_err());
    }
}
