//! JSON scenario format. Bidders are 1-based in files; dense value entries
//! give the full state profile (shared coordinate first) and default to zero
//! when omitted. Zero-mass types are dropped at load together with their
//! value rows.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::Scenario;
use crate::error::{Error, Result};
use crate::model::{
    JointPrior, SeparableValue, Signal, SignalingScheme, StateSpace, TypePrior, ValueKernel,
};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    #[allow(dead_code)]
    description: Option<String>,
    state_space: StateSpaceFile,
    prior: PriorFile,
    type_priors: Vec<TypePriorFile>,
    values: Vec<ValueSpec>,
    #[serde(default)]
    schemes: Vec<SchemeFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateSpaceFile {
    shared_size: usize,
    bidder_sizes: Vec<usize>,
    #[serde(default)]
    shared_labels: Option<Vec<String>>,
    #[serde(default)]
    bidder_labels: Option<Vec<Vec<String>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorFile {
    shared: Vec<f64>,
    bidders: BiddersPrior,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum BiddersPrior {
    /// independent bidder states, one marginal per bidder
    Product(Vec<Vec<f64>>),
    /// correlated bidder states, sparse over bidder-state profiles
    Table(Vec<TableEntry>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntry {
    states: Vec<usize>,
    prob: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TypePriorFile {
    support: Vec<String>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct ValueSpec {
    bidder: usize,
    #[serde(flatten)]
    form: ValueForm,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum ValueForm {
    Separable(SeparableSpec),
    Dense(Vec<DenseEntry>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeparableSpec {
    base: BTreeMap<String, f64>,
    cvr: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DenseEntry {
    #[serde(rename = "type")]
    type_label: String,
    states: Vec<usize>,
    value: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeFile {
    bidder: usize,
    signals: Vec<SignalFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalFile {
    weight: f64,
    posterior: Vec<f64>,
}

fn err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Scenario {
        location: location.into(),
        message: message.into(),
    }
}

pub(super) fn parse(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    let n = file.state_space.bidder_sizes.len();

    let mut sizes = Vec::with_capacity(n + 1);
    sizes.push(file.state_space.shared_size);
    sizes.extend_from_slice(&file.state_space.bidder_sizes);
    let space = match (file.state_space.shared_labels, file.state_space.bidder_labels) {
        (None, None) => StateSpace::new(sizes)?,
        (shared, bidders) => {
            let mut labels = Vec::with_capacity(n + 1);
            labels.push(shared.unwrap_or_else(|| {
                (0..file.state_space.shared_size).map(|k| k.to_string()).collect()
            }));
            match bidders {
                Some(per_bidder) => labels.extend(per_bidder),
                None => {
                    for &m in &sizes[1..] {
                        labels.push((0..m).map(|k| k.to_string()).collect());
                    }
                }
            }
            StateSpace::with_labels(sizes, labels)?
        }
    };

    let prior = build_prior(&space, file.prior)?;

    if file.type_priors.len() != n {
        return Err(err(
            "type_priors",
            format!("expected {} entries, got {}", n, file.type_priors.len()),
        ));
    }
    let mut type_priors = Vec::with_capacity(n);
    let mut kept_labels: Vec<Vec<String>> = Vec::with_capacity(n);
    let mut dropped_labels: Vec<Vec<String>> = Vec::with_capacity(n);
    for (b, tp) in file.type_priors.into_iter().enumerate() {
        let loc = format!("type_priors[{}]", b);
        if tp.support.len() != tp.probs.len() {
            return Err(err(loc, "support and probs lengths differ"));
        }
        let mut support = Vec::new();
        let mut probs = Vec::new();
        let mut dropped = Vec::new();
        for (label, p) in tp.support.into_iter().zip(tp.probs) {
            if p == 0.0 {
                dropped.push(label);
            } else {
                support.push(label);
                probs.push(p);
            }
        }
        kept_labels.push(support.clone());
        dropped_labels.push(dropped);
        type_priors.push(TypePrior::new(support, probs).map_err(|e| match e {
            Error::Scenario { message, .. } => err(loc.clone(), message),
            other => other,
        })?);
    }

    let kernel = build_kernel(&space, &type_priors, &kept_labels, &dropped_labels, file.values)?;

    let mut schemes = Vec::with_capacity(file.schemes.len());
    for (i, sf) in file.schemes.into_iter().enumerate() {
        let loc = format!("schemes[{}]", i);
        if sf.bidder == 0 || sf.bidder > n {
            return Err(err(loc, format!("bidder {} out of range 1..={}", sf.bidder, n)));
        }
        let atoms = sf
            .signals
            .into_iter()
            .map(|s| Ok((s.weight, Signal::new(s.posterior)?)))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| err(loc.clone(), e.to_string()))?;
        schemes.push(SignalingScheme::new(sf.bidder - 1, atoms));
    }

    Scenario::with_name(file.name, prior, type_priors, kernel, schemes)
}

fn build_prior(space: &StateSpace, prior: PriorFile) -> Result<JointPrior> {
    let n = space.num_bidders();
    if prior.shared.len() != space.shared_size() {
        return Err(err(
            "prior.shared",
            format!(
                "expected {} entries, got {}",
                space.shared_size(),
                prior.shared.len()
            ),
        ));
    }
    let rest_len: usize = (0..n).map(|b| space.bidder_size(b)).product();
    let rest = match prior.bidders {
        BiddersPrior::Product(marginals) => {
            if marginals.len() != n {
                return Err(err(
                    "prior.bidders.product",
                    format!("expected {} marginals, got {}", n, marginals.len()),
                ));
            }
            for (b, m) in marginals.iter().enumerate() {
                if m.len() != space.bidder_size(b) {
                    return Err(err(
                        format!("prior.bidders.product[{}]", b),
                        format!("expected {} entries, got {}", space.bidder_size(b), m.len()),
                    ));
                }
            }
            let mut rest = vec![1.0; rest_len];
            for (idx, r) in rest.iter_mut().enumerate() {
                let mut rem = idx;
                for b in (0..n).rev() {
                    let m = space.bidder_size(b);
                    *r *= marginals[b][rem % m];
                    rem /= m;
                }
            }
            rest
        }
        BiddersPrior::Table(entries) => {
            let mut rest = vec![0.0; rest_len];
            for (i, entry) in entries.iter().enumerate() {
                let loc = format!("prior.bidders.table[{}]", i);
                if entry.states.len() != n {
                    return Err(err(loc, format!("expected {} states", n)));
                }
                let mut idx = 0;
                for (b, &s) in entry.states.iter().enumerate() {
                    if s >= space.bidder_size(b) {
                        return Err(err(
                            loc,
                            format!("state {} out of range for bidder {}", s, b + 1),
                        ));
                    }
                    idx = idx * space.bidder_size(b) + s;
                }
                rest[idx] += entry.prob;
            }
            rest
        }
    };
    let probs: Vec<f64> = prior
        .shared
        .iter()
        .flat_map(|&g0| rest.iter().map(move |&r| g0 * r))
        .collect();
    JointPrior::new(space.clone(), probs)
}

fn build_kernel(
    space: &StateSpace,
    type_priors: &[TypePrior],
    kept_labels: &[Vec<String>],
    dropped_labels: &[Vec<String>],
    specs: Vec<ValueSpec>,
) -> Result<ValueKernel> {
    let n = space.num_bidders();
    if specs.len() != n {
        return Err(err(
            "values",
            format!("expected one entry per bidder, got {}", specs.len()),
        ));
    }
    let mut forms: Vec<Option<ValueForm>> = (0..n).map(|_| None).collect();
    for (i, spec) in specs.into_iter().enumerate() {
        let loc = format!("values[{}]", i);
        if spec.bidder == 0 || spec.bidder > n {
            return Err(err(loc, format!("bidder {} out of range 1..={}", spec.bidder, n)));
        }
        if forms[spec.bidder - 1].is_some() {
            return Err(err(loc, format!("bidder {} listed twice", spec.bidder)));
        }
        forms[spec.bidder - 1] = Some(spec.form);
    }

    let mut tables = Vec::with_capacity(n);
    let mut separable_factors: Vec<Option<SeparableValue>> = Vec::with_capacity(n);
    for (b, form) in forms.into_iter().enumerate() {
        let loc = format!("values for bidder {}", b + 1);
        let num_types = type_priors[b].len();
        match form.expect("every bidder assigned above") {
            ValueForm::Separable(spec) => {
                if spec.cvr.len() != space.bidder_size(b) {
                    return Err(err(
                        loc,
                        format!(
                            "cvr has {} entries, bidder has {} states",
                            spec.cvr.len(),
                            space.bidder_size(b)
                        ),
                    ));
                }
                let mut base = Vec::with_capacity(num_types);
                for label in &kept_labels[b] {
                    match spec.base.get(label) {
                        Some(&v) => base.push(v),
                        None => {
                            return Err(err(loc, format!("base is missing type \"{}\"", label)))
                        }
                    }
                }
                let factor = SeparableValue { base, cvr: spec.cvr };
                let table = (0..num_types)
                    .map(|t| {
                        (0..space.num_profiles())
                            .map(|idx| {
                                factor.base[t] * factor.cvr[space.coord_of_index(idx, b + 1)]
                            })
                            .collect()
                    })
                    .collect();
                tables.push(table);
                separable_factors.push(Some(factor));
            }
            ValueForm::Dense(entries) => {
                let mut table = vec![vec![0.0; space.num_profiles()]; num_types];
                let mut filled = vec![vec![false; space.num_profiles()]; num_types];
                for (i, entry) in entries.iter().enumerate() {
                    let eloc = format!("{} dense[{}]", loc, i);
                    let Some(t) = kept_labels[b].iter().position(|l| *l == entry.type_label)
                    else {
                        // rows of dropped zero-mass types are skipped
                        if dropped_labels[b].contains(&entry.type_label) {
                            continue;
                        }
                        return Err(err(eloc, format!("unknown type \"{}\"", entry.type_label)));
                    };
                    if entry.states.len() != space.sizes().len() {
                        return Err(err(
                            eloc,
                            format!(
                                "profile has {} coordinates, expected {} (shared state first)",
                                entry.states.len(),
                                space.sizes().len()
                            ),
                        ));
                    }
                    for (c, (&s, &m)) in entry.states.iter().zip(space.sizes()).enumerate() {
                        if s >= m {
                            return Err(err(
                                eloc,
                                format!("state {} out of range for coordinate {}", s, c),
                            ));
                        }
                    }
                    let idx = space.profile_to_index(&entry.states);
                    if filled[t][idx] {
                        return Err(err(eloc, "duplicate (type, profile) entry"));
                    }
                    filled[t][idx] = true;
                    table[t][idx] = entry.value;
                }
                tables.push(table);
                separable_factors.push(None);
            }
        }
    }

    let mut kernel = ValueKernel::new(space, tables)?;
    for (b, factor) in separable_factors.into_iter().enumerate() {
        if let Some(f) = factor {
            kernel = kernel.with_separable(space, b, f)?;
        }
    }
    Ok(kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "minimal",
        "state_space": {"shared_size": 1, "bidder_sizes": [2, 1]},
        "prior": {"shared": [1.0], "bidders": {"product": [[0.5, 0.5], [1.0]]}},
        "type_priors": [
            {"support": ["1", "2"], "probs": [0.5, 0.5]},
            {"support": ["1"], "probs": [1.0]}
        ],
        "values": [
            {"bidder": 1, "separable": {"base": {"1": 1.0, "2": 2.0}, "cvr": [0.25, 0.75]}},
            {"bidder": 2, "dense": [
                {"type": "1", "states": [0, 0, 0], "value": 0.3},
                {"type": "1", "states": [0, 1, 0], "value": 0.3}
            ]}
        ]
    }"#;

    #[test]
    fn parses_minimal_scenario() {
        let scenario = parse(MINIMAL).unwrap();
        assert_eq!(scenario.name(), "minimal");
        assert_eq!(scenario.num_bidders(), 2);
        assert!((scenario.kernel().value(0, 1, 1) - 1.5).abs() < 1e-12);
        assert!(scenario.kernel().separable(0).is_some());
        assert!((scenario.kernel().value(1, 0, 0) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn drops_zero_mass_types() {
        let text = MINIMAL.replace(
            r#""support": ["1", "2"], "probs": [0.5, 0.5]"#,
            r#""support": ["1", "2", "dead"], "probs": [0.5, 0.5, 0.0]"#,
        );
        // the dead type has no base entry, which only matters if it survives
        let scenario = parse(&text).unwrap();
        assert_eq!(scenario.type_priors()[0].len(), 2);
    }

    #[test]
    fn reports_location_for_bad_bidder() {
        let text = MINIMAL.replace(r#"{"bidder": 2, "dense""#, r#"{"bidder": 7, "dense""#);
        let e = parse(&text).unwrap_err();
        assert!(e.to_string().contains("values[1]"), "{}", e);
    }

    #[test]
    fn rejects_correlated_table_prior_mismatch() {
        let text = MINIMAL.replace(
            r#"{"product": [[0.5, 0.5], [1.0]]}"#,
            r#"{"table": [{"states": [0, 0], "prob": 0.6}, {"states": [1, 0], "prob": 0.3}]}"#,
        );
        assert!(parse(&text).is_err());
    }

    #[test]
    fn correlated_table_prior_round_trips() {
        let text = MINIMAL.replace(
            r#"{"product": [[0.5, 0.5], [1.0]]}"#,
            r#"{"table": [{"states": [0, 0], "prob": 0.5}, {"states": [1, 0], "prob": 0.5}]}"#,
        );
        let scenario = parse(&text).unwrap();
        assert_eq!(scenario.bidder_marginal(0), &[0.5, 0.5]);
    }
}
