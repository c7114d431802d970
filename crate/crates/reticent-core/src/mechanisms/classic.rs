use serde::Serialize;

use super::virtual_values::{discrete_virtual_values_raw, iron_raw};

/// Allocation probabilities and payments, one entry per bidder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub allocation: Vec<f64>,
    pub payment: Vec<f64>,
}

impl Outcome {
    pub fn zero(n: usize) -> Self {
        Self {
            allocation: vec![0.0; n],
            payment: vec![0.0; n],
        }
    }

    /// self += weight * other, the linear aggregation used by simulated runs.
    pub fn add_scaled(&mut self, weight: f64, other: &Outcome) {
        for (a, b) in self.allocation.iter_mut().zip(&other.allocation) {
            *a += weight * b;
        }
        for (p, q) in self.payment.iter_mut().zip(&other.payment) {
            *p += weight * q;
        }
    }

    pub fn revenue(&self) -> f64 {
        self.payment.iter().sum()
    }
}

/// One bidder's value distribution in the eyes of a classic mechanism: the
/// value attached to each reportable type and the prior mass of that type.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueDist {
    pub values: Vec<f64>,
    pub masses: Vec<f64>,
}

/// A misreport-only base mechanism. It sees reported types and the value
/// distributions, never the information variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicMechanism {
    Vickrey,
    Myerson { ironed: bool },
}

impl ClassicMechanism {
    pub fn outcome(&self, bids: &[usize], dists: &[ValueDist]) -> Outcome {
        match self {
            ClassicMechanism::Vickrey => {
                let values: Vec<f64> = bids
                    .iter()
                    .zip(dists)
                    .map(|(&b, d)| d.values[b])
                    .collect();
                vickrey(&values)
            }
            ClassicMechanism::Myerson { ironed } => {
                let mut values = Vec::with_capacity(bids.len());
                let mut virtuals = Vec::with_capacity(bids.len());
                for (&b, d) in bids.iter().zip(dists) {
                    let mut phi = discrete_virtual_values_raw(&d.values, &d.masses);
                    if *ironed {
                        phi = iron_raw(&d.values, &d.masses, &phi);
                    }
                    values.push(d.values[b]);
                    virtuals.push(phi[b]);
                }
                myerson(&values, &virtuals)
            }
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            ClassicMechanism::Vickrey => "vickrey",
            ClassicMechanism::Myerson { .. } => "myerson",
        }
    }

    /// Whether interim utility under this mechanism is convex in the posterior
    /// by construction rather than by luck.
    pub fn declared_convex_utility(&self) -> bool {
        matches!(self, ClassicMechanism::Vickrey)
    }
}

/// Second-price auction over the given values. Ties resolve to the
/// lowest-index bidder so outcomes are deterministic.
pub fn vickrey(values: &[f64]) -> Outcome {
    let n = values.len();
    let mut outcome = Outcome::zero(n);
    let winner = argmax(values);
    let second = values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != winner)
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    outcome.allocation[winner] = 1.0;
    outcome.payment[winner] = second;
    outcome
}

/// Revenue-optimal rule on virtual values: sell to the highest positive
/// virtual value, the winner pays his own virtual value, no sale otherwise.
pub fn myerson(values: &[f64], virtual_values: &[f64]) -> Outcome {
    debug_assert_eq!(values.len(), virtual_values.len());
    let n = values.len();
    let mut outcome = Outcome::zero(n);
    let winner = argmax(virtual_values);
    if virtual_values[winner] > 0.0 {
        outcome.allocation[winner] = 1.0;
        outcome.payment[winner] = virtual_values[winner];
    }
    outcome
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vickrey_charges_second_highest() {
        let out = vickrey(&[3.0, 7.0, 5.0]);
        assert_eq!(out.allocation, vec![0.0, 1.0, 0.0]);
        assert_eq!(out.payment, vec![0.0, 5.0, 0.0]);
    }

    #[test]
    fn vickrey_ties_go_to_lowest_index() {
        let out = vickrey(&[4.0, 4.0]);
        assert_eq!(out.allocation, vec![1.0, 0.0]);
        assert_eq!(out.payment, vec![4.0, 0.0]);
    }

    #[test]
    fn vickrey_single_bidder_pays_nothing() {
        let out = vickrey(&[2.5]);
        assert_eq!(out.allocation, vec![1.0]);
        assert_eq!(out.payment, vec![0.0]);
    }

    #[test]
    fn myerson_withholds_when_all_virtual_values_negative() {
        let out = myerson(&[1.0, 2.0], &[-0.5, -0.1]);
        assert_eq!(out, Outcome::zero(2));
    }

    #[test]
    fn myerson_winner_pays_own_virtual_value() {
        let out = myerson(&[5.0, 4.0], &[3.0, 2.0]);
        assert_eq!(out.allocation, vec![1.0, 0.0]);
        assert_eq!(out.payment, vec![3.0, 0.0]);
    }

    #[test]
    fn classic_myerson_on_two_point_uniform_types() {
        // values 1 and 2 equiprobable: virtual values 0 and 2, so only the
        // high type buys and pays 2
        let dists = vec![
            ValueDist { values: vec![1.0, 2.0], masses: vec![0.5, 0.5] },
            ValueDist { values: vec![0.0], masses: vec![1.0] },
        ];
        let mech = ClassicMechanism::Myerson { ironed: false };
        let low = mech.outcome(&[0, 0], &dists);
        assert_eq!(low, Outcome::zero(2));
        let high = mech.outcome(&[1, 0], &dists);
        assert_eq!(high.allocation, vec![1.0, 0.0]);
        assert_eq!(high.payment, vec![2.0, 0.0]);
    }

    #[test]
    fn outcome_linear_aggregation() {
        let mut acc = Outcome::zero(2);
        acc.add_scaled(0.25, &vickrey(&[1.0, 3.0]));
        acc.add_scaled(0.75, &vickrey(&[5.0, 3.0]));
        assert!((acc.allocation[0] - 0.75).abs() < 1e-15);
        assert!((acc.allocation[1] - 0.25).abs() < 1e-15);
        assert!((acc.payment[0] - 2.25).abs() < 1e-15);
        assert!((acc.payment[1] - 0.25).abs() < 1e-15);
    }
}
