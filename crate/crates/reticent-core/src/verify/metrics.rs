//! Welfare and revenue metrics, including an exhaustive optimal-revenue
//! oracle that never touches the virtual-value machinery.

use serde::Serialize;

use super::checks::rest_profiles;
use super::eval::Evaluator;
use crate::error::{Error, Result};
use crate::meta::ReticentMechanism;
use crate::model::Signal;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Serialize)]
pub struct WelfareMetrics {
    /// expected welfare under truthful behavior and full revelation
    pub expected_welfare: f64,
    /// first-best benchmark: always allocate to the highest estimated value
    pub max_welfare: f64,
    pub efficiency: f64,
}

/// Welfare of the mechanism at truthful reports and fully revealing schemes,
/// against the first-best allocation benchmark.
pub fn welfare_metrics(scenario: &Scenario, mech: &ReticentMechanism) -> Result<WelfareMetrics> {
    let ev = Evaluator::new(scenario, mech);
    let n = scenario.num_bidders();
    let mut welfare = 0.0;
    let mut best = 0.0;
    for (rest, rprob) in rest_profiles(scenario) {
        if rprob <= 0.0 {
            continue;
        }
        let signals: Vec<Signal> = rest
            .iter()
            .enumerate()
            .map(|(j, &k)| scenario.point_signal(j, k))
            .collect();
        let ctx = ev.context(&signals)?;
        for t in scenario.type_profiles() {
            let h = scenario.type_profile_prob(&t);
            if h <= 0.0 {
                continue;
            }
            let out = ev.outcome(&ctx, &t);
            let mut top = 0.0f64;
            for i in 0..n {
                let v = scenario.vbar_state(i, t[i], rest[i]);
                welfare += rprob * h * out.allocation[i] * v;
                top = top.max(v);
            }
            best += rprob * h * top;
        }
    }
    let efficiency = if best > 0.0 { welfare / best } else { 1.0 };
    Ok(WelfareMetrics {
        expected_welfare: welfare,
        max_welfare: best,
        efficiency,
    })
}

/// Expected revenue under truthful reports, with each bidder either fully
/// revealing (`elicit[i]`) or committing to silence.
pub fn expected_revenue(
    scenario: &Scenario,
    mech: &ReticentMechanism,
    elicit: &[bool],
) -> Result<f64> {
    assert_eq!(elicit.len(), scenario.num_bidders());
    let ev = Evaluator::new(scenario, mech);
    let mut revenue = 0.0;
    for (rest, rprob) in rest_profiles(scenario) {
        if rprob <= 0.0 {
            continue;
        }
        let signals: Vec<Signal> = rest
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                if elicit[j] {
                    scenario.point_signal(j, k)
                } else {
                    scenario.no_info_signal(j)
                }
            })
            .collect();
        let ctx = ev.context(&signals)?;
        for t in scenario.type_profiles() {
            let h = scenario.type_profile_prob(&t);
            if h <= 0.0 {
                continue;
            }
            revenue += rprob * h * ev.outcome(&ctx, &t).revenue();
        }
    }
    Ok(revenue)
}

const BRUTEFORCE_GUARD: u128 = 5_000_000;

/// Exhaustive optimal expected revenue over deterministic, type-monotone,
/// threshold-payment allocation rules, computed state profile by state
/// profile on the bidders' estimated values. Independent of the
/// virtual-value machinery by construction.
pub fn bruteforce_optimal_revenue(scenario: &Scenario) -> Result<f64> {
    let n = scenario.num_bidders();
    let type_probs: Vec<Vec<f64>> = scenario
        .type_priors()
        .iter()
        .map(|tp| tp.probs().to_vec())
        .collect();
    let mut total = 0.0;
    for (rest, rprob) in rest_profiles(scenario) {
        if rprob <= 0.0 {
            continue;
        }
        let values: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..type_probs[i].len())
                    .map(|t| scenario.vbar_state(i, t, rest[i]))
                    .collect()
            })
            .collect();
        total += rprob * optimal_revenue_once(&values, &type_probs)?;
    }
    Ok(total)
}

/// Optimal expected revenue for one value table by enumerating every winner
/// assignment on the type grid, keeping those monotone in each bidder's own
/// value, and charging threshold payments.
fn optimal_revenue_once(values: &[Vec<f64>], masses: &[Vec<f64>]) -> Result<f64> {
    let n = values.len();
    let dims: Vec<usize> = values.iter().map(|v| v.len()).collect();
    let grid: usize = dims.iter().product();
    let assignments = (n as u128 + 1).checked_pow(grid as u32);
    match assignments {
        Some(a) if a <= BRUTEFORCE_GUARD => {}
        _ => {
            return Err(Error::SizeGuard {
                detail: format!(
                    "{} winner assignments on a {}-cell type grid exceed the {} limit",
                    assignments.map_or("overflowing".to_string(), |a| a.to_string()),
                    grid,
                    BRUTEFORCE_GUARD
                ),
            })
        }
    }

    // cell index -> type profile (row-major) and its probability
    let mut cells = Vec::with_capacity(grid);
    for c in 0..grid {
        let mut rem = c;
        let mut t = vec![0usize; n];
        for i in (0..n).rev() {
            t[i] = rem % dims[i];
            rem /= dims[i];
        }
        let h: f64 = (0..n).map(|i| masses[i][t[i]]).product();
        cells.push((t, h));
    }

    // per bidder: lines of cells sharing the opponents' types, sorted by the
    // bidder's own value ascending
    let mut lines: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut by_line: std::collections::HashMap<Vec<usize>, Vec<usize>> = Default::default();
        for (c, (t, _)) in cells.iter().enumerate() {
            let mut key = t.clone();
            key.remove(i);
            by_line.entry(key).or_default().push(c);
        }
        let mut sorted: Vec<Vec<usize>> = by_line.into_values().collect();
        for line in &mut sorted {
            line.sort_by(|&a, &b| values[i][cells[a].0[i]].total_cmp(&values[i][cells[b].0[i]]));
        }
        lines.push(sorted);
    }

    let mut best = 0.0f64;
    let mut w = vec![0u8; grid];
    loop {
        // a monotone assignment wins on an upper set of each line, with
        // equal-value cells treated all-or-none; revenue is the threshold
        // (lowest winning value) collected from every winning cell
        let mut revenue = 0.0;
        let mut valid = true;
        'scan: for i in 0..n {
            let tag = i as u8 + 1;
            for line in &lines[i] {
                let mut tau = None;
                for (pos, &c) in line.iter().enumerate() {
                    let wins = w[c] == tag;
                    let v = values[i][cells[c].0[i]];
                    match (wins, tau) {
                        (true, None) => {
                            if pos > 0 {
                                let prev = values[i][cells[line[pos - 1]].0[i]];
                                if (v - prev).abs() <= 1e-12 {
                                    valid = false;
                                    break 'scan;
                                }
                            }
                            tau = Some(v);
                            revenue += cells[c].1 * v;
                        }
                        (true, Some(t0)) => revenue += cells[c].1 * t0,
                        (false, Some(_)) => {
                            valid = false;
                            break 'scan;
                        }
                        (false, None) => {}
                    }
                }
            }
        }
        if valid && revenue > best {
            best = revenue;
        }
        // odometer over assignments in base n+1
        let mut pos = 0;
        loop {
            if pos == grid {
                return Ok(best);
            }
            if w[pos] as usize == n {
                w[pos] = 0;
                pos += 1;
            } else {
                w[pos] += 1;
                break;
            }
        }
    }
}
