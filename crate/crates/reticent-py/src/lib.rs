//! Python bindings: scenarios, mechanisms, expected utilities and revenue,
//! the verification suite, and the brute-force revenue oracle.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use reticent_core::mechanisms::VirtualValueTable;
use reticent_core::meta::ReticentMechanism;
use reticent_core::scenario;
use reticent_core::verify;
use reticent_core::verify::{BidderStrategy, CheckConfig, DeviationFamily, Property};

fn err(e: reticent_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// serde_json -> Python, for report-shaped results
fn to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        serde_json::Value::Null => py.None().into_bound(py),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.into_any(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let json = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &json)
}

/// A complete auction environment: the state space, the joint prior over
/// information variables, per-bidder type priors, and the value kernel.
#[pyclass(name = "Scenario")]
struct PyScenario {
    inner: scenario::Scenario,
}

#[pymethods]
impl PyScenario {
    /// Load a bundled scenario by name.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: scenario::builtin(name).map_err(err)?,
        })
    }

    /// Names of the bundled scenarios.
    #[staticmethod]
    fn builtin_names() -> Vec<String> {
        scenario::builtin_names().iter().map(|s| s.to_string()).collect()
    }

    /// Parse a scenario from its JSON representation.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: scenario::Scenario::from_json(text).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn num_bidders(&self) -> usize {
        self.inner.num_bidders()
    }

    /// States per bidder, excluding the shared coordinate.
    #[getter]
    fn state_sizes(&self) -> Vec<usize> {
        (0..self.inner.num_bidders())
            .map(|b| self.inner.space().bidder_size(b))
            .collect()
    }

    /// Type labels per bidder.
    #[getter]
    fn type_supports(&self) -> Vec<Vec<String>> {
        self.inner
            .type_priors()
            .iter()
            .map(|tp| tp.support().to_vec())
            .collect()
    }

    /// Expected value of one bidder given a type and that bidder's own state.
    fn value(&self, bidder: usize, type_idx: usize, state: usize) -> f64 {
        self.inner.vbar_state(bidder, type_idx, state)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(name='{}', bidders={})",
            self.inner.name(),
            self.inner.num_bidders()
        )
    }
}

/// A meta mechanism: expected or simulated transform of a classic base,
/// optionally with information regulation.
#[pyclass(name = "Mechanism", skip_from_py_object)]
#[derive(Clone)]
struct PyMechanism {
    inner: ReticentMechanism,
}

#[pymethods]
impl PyMechanism {
    /// Parse an id such as `expected-vickrey`, `simulated-myerson`, or
    /// `regulated(expected-vickrey)`.
    #[new]
    fn new(id: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ReticentMechanism::from_id(id).map_err(err)?,
        })
    }

    /// The same mechanism with information regulation applied.
    fn regulated(&self) -> Self {
        Self {
            inner: self.inner.regulate(),
        }
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.id()
    }

    /// Precondition diagnostics for running this mechanism on a scenario.
    fn warnings(&self, scenario: &PyScenario) -> Vec<String> {
        self.inner.warnings(&scenario.inner)
    }

    fn __repr__(&self) -> String {
        format!("Mechanism('{}')", self.inner.id())
    }
}

fn strategies_from_specs(
    scenario: &scenario::Scenario,
    schemes: Option<Vec<String>>,
) -> PyResult<Vec<BidderStrategy>> {
    let n = scenario.num_bidders();
    let mut strategies: Vec<BidderStrategy> =
        (0..n).map(|i| BidderStrategy::truthful(scenario, i)).collect();
    if let Some(specs) = schemes {
        if specs.len() != n {
            return Err(PyValueError::new_err(format!(
                "expected {} scheme specs, got {}",
                n,
                specs.len()
            )));
        }
        for (i, spec) in specs.iter().enumerate() {
            strategies[i].scheme = scenario.scheme_from_spec(i, spec).map_err(err)?;
        }
    }
    Ok(strategies)
}

/// Ex-ante expected utility of every bidder. `schemes` gives one spec per
/// bidder (`truthful`, `no-info`, `pool:0,1;2`, `random:SEED`); reports stay
/// truthful.
#[pyfunction]
#[pyo3(signature = (scenario, mechanism, schemes=None))]
fn expected_utility(
    scenario: &PyScenario,
    mechanism: &PyMechanism,
    schemes: Option<Vec<String>>,
) -> PyResult<Vec<f64>> {
    let strategies = strategies_from_specs(&scenario.inner, schemes)?;
    verify::expected_utility(&scenario.inner, &mechanism.inner, &strategies).map_err(err)
}

/// Expected revenue under truthful reports; `mask[i]` says whether bidder i
/// fully reveals (otherwise commits to silence).
#[pyfunction]
fn expected_revenue(
    scenario: &PyScenario,
    mechanism: &PyMechanism,
    mask: Vec<bool>,
) -> PyResult<f64> {
    if mask.len() != scenario.inner.num_bidders() {
        return Err(PyValueError::new_err("mask length must equal num_bidders"));
    }
    verify::expected_revenue(&scenario.inner, &mechanism.inner, &mask).map_err(err)
}

/// Welfare at truthful full revelation against the first-best benchmark.
#[pyfunction]
fn welfare<'py>(
    py: Python<'py>,
    scenario: &PyScenario,
    mechanism: &PyMechanism,
) -> PyResult<Bound<'py, PyAny>> {
    let metrics = verify::welfare_metrics(&scenario.inner, &mechanism.inner).map_err(err)?;
    serialize_to_py(py, &metrics)
}

/// Exhaustive optimal expected revenue over deterministic monotone
/// threshold-payment rules.
#[pyfunction]
fn bruteforce_optimal_revenue(scenario: &PyScenario) -> PyResult<f64> {
    verify::bruteforce_optimal_revenue(&scenario.inner).map_err(err)
}

/// Run the verification suite and return the report as a dict. `properties`
/// defaults to all checks; `family_k` and `seed` configure the deviation
/// family's random schemes.
#[pyfunction]
#[pyo3(signature = (scenario, mechanism, properties=None, family_k=64, seed=2024))]
fn run_verification<'py>(
    py: Python<'py>,
    scenario: &PyScenario,
    mechanism: &PyMechanism,
    properties: Option<Vec<String>>,
    family_k: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let properties: Vec<Property> = match properties {
        None => Property::all().to_vec(),
        Some(names) => names
            .iter()
            .map(|name| name.parse::<Property>())
            .collect::<reticent_core::Result<_>>()
            .map_err(err)?,
    };
    let family = DeviationFamily::standard(&scenario.inner, family_k, seed).map_err(err)?;
    let report = verify::run_verification(
        &scenario.inner,
        &mechanism.inner,
        &family,
        &properties,
        &CheckConfig::default(),
    )
    .map_err(err)?;
    serialize_to_py(py, &report)
}

/// Raw and ironed virtual values per bidder and information profile.
#[pyfunction]
fn virtual_values<'py>(py: Python<'py>, scenario: &PyScenario) -> PyResult<Bound<'py, PyAny>> {
    serialize_to_py(py, &VirtualValueTable::build(&scenario.inner))
}

#[pymodule]
fn reticent_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyMechanism>()?;
    m.add_function(wrap_pyfunction!(expected_utility, m)?)?;
    m.add_function(wrap_pyfunction!(expected_revenue, m)?)?;
    m.add_function(wrap_pyfunction!(welfare, m)?)?;
    m.add_function(wrap_pyfunction!(bruteforce_optimal_revenue, m)?)?;
    m.add_function(wrap_pyfunction!(run_verification, m)?)?;
    m.add_function(wrap_pyfunction!(virtual_values, m)?)?;
    Ok(())
}
