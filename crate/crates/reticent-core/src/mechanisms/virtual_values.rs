use serde::Serialize;

use crate::model::{TypePrior, ValueKernel};
use crate::scenario::Scenario;

const VALUE_MERGE_TOL: f64 = 1e-12;
const REGULARITY_TOL: f64 = 1e-9;

/// Virtual values of one bidder at one information profile, before and after
/// ironing. Entries are indexed by type, not by distinct value.
#[derive(Debug, Clone, Serialize)]
pub struct VirtualValueColumn {
    pub values: Vec<f64>,
    pub masses: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_ironed: Vec<f64>,
    /// true when equal-value types were merged before the hazard computation
    pub merged: bool,
    /// true when ironing actually moved some entry
    pub ironing_active: bool,
}

/// Discrete virtual values of a bidder's value distribution at one fixed
/// information profile. Types with equal values are merged into one mass
/// point first; with distinct values v_1 < ... < v_m, masses h and upper tail
/// 1 - H, the k-th virtual value is
/// v_k - (v_{k+1} - v_k) (1 - H_k) / h_k, and the top one is v_m itself.
pub fn discrete_virtual_values(
    type_prior: &TypePrior,
    kernel: &ValueKernel,
    bidder: usize,
    profile_idx: usize,
) -> VirtualValueColumn {
    let values: Vec<f64> = (0..type_prior.len())
        .map(|t| kernel.value(bidder, t, profile_idx))
        .collect();
    let masses = type_prior.probs().to_vec();
    column_from_dist(values, masses)
}

pub(crate) fn column_from_dist(values: Vec<f64>, masses: Vec<f64>) -> VirtualValueColumn {
    let phi = discrete_virtual_values_raw(&values, &masses);
    let phi_ironed = iron_raw(&values, &masses, &phi);
    let merged = {
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        sorted
            .windows(2)
            .any(|w| (w[1] - w[0]).abs() <= VALUE_MERGE_TOL)
    };
    let ironing_active = phi
        .iter()
        .zip(&phi_ironed)
        .any(|(a, b)| (a - b).abs() > VALUE_MERGE_TOL);
    VirtualValueColumn {
        values,
        masses,
        phi,
        phi_ironed,
        merged,
        ironing_active,
    }
}

/// Groups type indices by value (ascending), merging values closer than the
/// merge tolerance. Returns (member type indices, value, mass) per group.
fn value_groups(values: &[f64], masses: &[f64]) -> Vec<(Vec<usize>, f64, f64)> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut groups: Vec<(Vec<usize>, f64, f64)> = Vec::new();
    for t in order {
        match groups.last_mut() {
            Some((members, v, h)) if (values[t] - *v).abs() <= VALUE_MERGE_TOL => {
                members.push(t);
                *h += masses[t];
            }
            _ => groups.push((vec![t], values[t], masses[t])),
        }
    }
    groups
}

pub(crate) fn discrete_virtual_values_raw(values: &[f64], masses: &[f64]) -> Vec<f64> {
    let groups = value_groups(values, masses);
    let m = groups.len();
    let mut cum = 0.0;
    let mut phi = vec![0.0; values.len()];
    for (k, (members, v, h)) in groups.iter().enumerate() {
        cum += h;
        let phi_k = if k + 1 == m {
            *v
        } else {
            let next_v = groups[k + 1].1;
            v - (next_v - v) * (1.0 - cum) / h
        };
        for &t in members {
            phi[t] = phi_k;
        }
    }
    phi
}

/// Replaces the virtual values by the slopes of the upper concave envelope of
/// the quantile revenue curve, taken over distinct values in descending
/// order. Preserves the mass-weighted total and yields entries that are
/// non-decreasing in value.
pub fn iron(values: &[f64], masses: &[f64], phi: &[f64]) -> Vec<f64> {
    iron_raw(values, masses, phi)
}

pub(crate) fn iron_raw(values: &[f64], masses: &[f64], phi: &[f64]) -> Vec<f64> {
    let groups = value_groups(values, masses);
    // revenue curve in quantile space, walking values from highest to lowest
    let mut points = vec![(0.0_f64, 0.0_f64)];
    for (members, _, h) in groups.iter().rev() {
        let (x, y) = *points.last().unwrap();
        points.push((x + h, y + h * phi[members[0]]));
    }
    let hull = upper_concave_envelope(&points);
    let mut ironed = vec![0.0; values.len()];
    let mut x = 0.0;
    for (members, _, h) in groups.iter().rev() {
        let mid = x + 0.5 * h;
        let slope = hull_slope_at(&hull, mid);
        for &t in members {
            ironed[t] = slope;
        }
        x += h;
    }
    ironed
}

fn upper_concave_envelope(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

fn hull_slope_at(hull: &[(f64, f64)], x: f64) -> f64 {
    let mut slope = 0.0;
    for w in hull.windows(2) {
        slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        if x <= w[1].0 {
            break;
        }
    }
    slope
}

/// Raw and ironed virtual values for every bidder at every positive-mass
/// information profile.
#[derive(Debug, Clone, Serialize)]
pub struct VirtualValueTable {
    /// `columns[bidder]` is a list of (profile index, column)
    pub columns: Vec<Vec<(usize, VirtualValueColumn)>>,
}

impl VirtualValueTable {
    pub fn build(scenario: &Scenario) -> Self {
        let space = scenario.space();
        let n = space.num_bidders();
        let mut columns = vec![Vec::new(); n];
        for idx in 0..space.num_profiles() {
            if scenario.prior().prob(idx) <= 0.0 {
                continue;
            }
            for (bidder, per_bidder) in columns.iter_mut().enumerate() {
                per_bidder.push((
                    idx,
                    discrete_virtual_values(
                        &scenario.type_priors()[bidder],
                        scenario.kernel(),
                        bidder,
                        idx,
                    ),
                ));
            }
        }
        Self { columns }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityVerdict {
    pub holds: bool,
    pub violation: Option<String>,
}

/// Strong regularity: for each bidder, across all (type, profile) pairs in
/// the table, a weakly higher value must come with a weakly higher raw
/// virtual value.
pub fn strong_regularity_check(table: &VirtualValueTable) -> RegularityVerdict {
    for (bidder, per_bidder) in table.columns.iter().enumerate() {
        let mut pairs: Vec<(f64, f64, usize, usize)> = Vec::new();
        for (profile_idx, col) in per_bidder {
            for (t, (&v, &phi)) in col.values.iter().zip(&col.phi).enumerate() {
                pairs.push((v, phi, t, *profile_idx));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pairs.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            let ordered = if (hi.0 - lo.0).abs() <= VALUE_MERGE_TOL {
                (hi.1 - lo.1).abs() <= REGULARITY_TOL
            } else {
                hi.1 >= lo.1 - REGULARITY_TOL
            };
            if !ordered {
                return RegularityVerdict {
                    holds: false,
                    violation: Some(format!(
                        "bidder {}: value {} (type {}, profile {}) has virtual value {} but value {} (type {}, profile {}) has {}",
                        bidder + 1,
                        lo.0, lo.2, lo.3, lo.1,
                        hi.0, hi.2, hi.3, hi.1
                    )),
                };
            }
        }
    }
    RegularityVerdict {
        holds: true,
        violation: None,
    }
}
