use super::prior::PROB_TOL;
use crate::error::{Error, Result};

/// Distribution of one bidder's misreportable type over a finite ordered
/// support. Zero-mass types must be removed before construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TypePrior {
    support: Vec<String>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl TypePrior {
    pub fn new(support: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() || support.is_empty() {
            return Err(Error::Scenario {
                location: "type_priors".into(),
                message: "support and probability lists must be nonempty and equal length".into(),
            });
        }
        for (index, &p) in probs.iter().enumerate() {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::NegativeProbability { value: p, index });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::NotNormalized { sum, tol: PROB_TOL });
        }
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cdf.push(acc);
        }
        Ok(Self {
            support,
            probs,
            cdf,
        })
    }

    pub fn singleton(label: impl Into<String>) -> Self {
        Self {
            support: vec![label.into()],
            probs: vec![1.0],
            cdf: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn label(&self, type_idx: usize) -> &str {
        &self.support[type_idx]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.support.iter().position(|l| l == label)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, type_idx: usize) -> f64 {
        self.probs[type_idx]
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_is_cumulative() {
        let tp = TypePrior::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        assert!((tp.cdf()[0] - 0.2).abs() < 1e-15);
        assert!((tp.cdf()[1] - 0.5).abs() < 1e-15);
        assert!((tp.cdf()[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_mass() {
        assert!(TypePrior::new(vec!["a".into(), "b".into()], vec![1.0, 0.0]).is_err());
    }
}
