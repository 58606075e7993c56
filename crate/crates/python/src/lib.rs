//! Python bindings: models, histories, simulation, fitting and diagnostics.
//!
//! Every core error surfaces as `carp.CarpError` (a `ValueError` subclass)
//! whose first argument is the error kind and second the message.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use carp_core::io::{diagnose as core_diagnose, ingest_csv, report::FitReport, TypeMapping};
use carp_core::{
    CarpError as CoreError, CovariateLaw, EventHistory, EventType, FitConfig, ModelSpec, SimConfig,
    Variant,
};

create_exception!(carp, CarpError, PyValueError);

fn to_py(e: CoreError) -> PyErr {
    CarpError::new_err((e.kind(), e.to_string()))
}

fn variant_of(name: &str) -> PyResult<Variant> {
    name.parse().map_err(to_py)
}

/// A fully specified model: baseline locations, dependence and the 2×2
/// covariate coefficient matrix.
#[pyclass(frozen, skip_from_py_object, name = "Model", module = "carp")]
#[derive(Clone)]
struct PyModel {
    inner: ModelSpec,
}

#[pymethods]
impl PyModel {
    /// Bivariate lognormal with Cholesky factor [[sigma1, 0], [eta, sigma2]].
    #[staticmethod]
    #[pyo3(signature = (mu, sigma1, eta, sigma2, b = [[0.0; 2]; 2]))]
    fn mln(mu: [f64; 2], sigma1: f64, eta: f64, sigma2: f64, b: [[f64; 2]; 2]) -> PyResult<Self> {
        let inner = ModelSpec::mln(mu, sigma1, eta, sigma2, b).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Lognormal marginals joined by a Gumbel copula with alpha ≥ 1.
    #[staticmethod]
    #[pyo3(signature = (mu, sigma, alpha, b = [[0.0; 2]; 2]))]
    fn copula(mu: [f64; 2], sigma: [f64; 2], alpha: f64, b: [[f64; 2]; 2]) -> PyResult<Self> {
        let inner = ModelSpec::copula(mu, sigma, alpha, b).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Build from the nine natural parameters in `param_names` order.
    #[staticmethod]
    fn from_params(variant: &str, params: [f64; 9]) -> PyResult<Self> {
        let inner = ModelSpec::from_natural(variant_of(variant)?, &params).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.inner.variant().name()
    }

    #[getter]
    fn params(&self) -> [f64; 9] {
        self.inner.to_natural()
    }

    #[getter]
    fn param_names(&self) -> [&'static str; 9] {
        self.inner.variant().param_names()
    }

    fn kendall_tau(&self) -> f64 {
        self.inner.kendall_tau()
    }

    /// Pr(W1 > v1, W2 > v2) under covariate snapshot `x`.
    #[pyo3(signature = (v, x = [0.0, 0.0]))]
    fn joint_sf(&self, v: [f64; 2], x: [f64; 2]) -> f64 {
        self.inner.at(x).sf(v)
    }

    fn log_likelihood(&self, history: &PyHistory) -> f64 {
        carp_core::log_likelihood(&self.inner, &history.inner)
    }

    fn __repr__(&self) -> String {
        let body: Vec<String> = self
            .param_names()
            .iter()
            .zip(self.params())
            .map(|(n, v)| format!("{n}={v:.6}"))
            .collect();
        format!("Model.{}({})", self.variant(), body.join(", "))
    }
}

/// A validated, time-ordered two-type event history.
#[pyclass(frozen, skip_from_py_object, name = "History", module = "carp")]
#[derive(Clone)]
struct PyHistory {
    inner: EventHistory,
}

#[pymethods]
impl PyHistory {
    /// `types` holds labels 1 or 2; covariate snapshots are derived from the
    /// durations. `termination` defaults to the last event time.
    #[new]
    #[pyo3(signature = (times, types, durations, termination = None))]
    fn new(
        times: Vec<f64>,
        types: Vec<i64>,
        durations: Vec<f64>,
        termination: Option<f64>,
    ) -> PyResult<Self> {
        if times.len() != types.len() || times.len() != durations.len() {
            return Err(PyValueError::new_err(
                "times, types and durations must have equal length",
            ));
        }
        let rows = times
            .into_iter()
            .zip(types)
            .zip(durations)
            .map(|((t, ty), d)| Ok((t, EventType::try_from(ty)?, d)))
            .collect::<Result<Vec<_>, CoreError>>()
            .map_err(to_py)?;
        let inner = EventHistory::from_timed_durations(rows, termination).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Read an eruption log (`time,duration,geyser`). `mapping` maps source
    /// names to type labels; the default maps West Triplet → 1, Grotto → 2.
    #[staticmethod]
    #[pyo3(signature = (path, mapping = None))]
    fn from_csv(path: &str, mapping: Option<BTreeMap<String, u8>>) -> PyResult<Self> {
        let mapping = mapping.map(TypeMapping).unwrap_or_default();
        let inner = ingest_csv(path, &mapping).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn termination(&self) -> f64 {
        self.inner.termination()
    }

    /// `(time, type, duration, x1, x2)` per event, with the covariate
    /// snapshot in force just before the event.
    fn events(&self) -> Vec<(f64, u8, f64, f64, f64)> {
        self.inner
            .events()
            .iter()
            .map(|e| {
                (
                    e.time,
                    e.event_type.label(),
                    e.duration,
                    e.covariates[0],
                    e.covariates[1],
                )
            })
            .collect()
    }

    fn count(&self, event_type: i64) -> PyResult<usize> {
        let ty = EventType::try_from(event_type).map_err(to_py)?;
        Ok(self.inner.count_of(ty))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "History(n={}, termination={:.4})",
            self.inner.len(),
            self.inner.termination()
        )
    }
}

/// Result of a maximum-likelihood fit.
#[pyclass(frozen, name = "FitResult", module = "carp")]
struct PyFitResult {
    inner: carp_core::FitResult,
}

#[pymethods]
impl PyFitResult {
    #[getter]
    fn model(&self) -> PyModel {
        PyModel {
            inner: self.inner.model,
        }
    }

    #[getter]
    fn estimates(&self) -> BTreeMap<&'static str, f64> {
        self.named(&self.inner.estimates)
    }

    #[getter]
    fn std_errors(&self) -> BTreeMap<&'static str, f64> {
        self.named(&self.inner.std_errors)
    }

    #[getter]
    fn ci95(&self) -> BTreeMap<&'static str, [f64; 2]> {
        self.inner
            .param_names()
            .into_iter()
            .zip(self.inner.ci95)
            .collect()
    }

    #[getter]
    fn covariance(&self) -> Vec<Vec<f64>> {
        self.inner.covariance.clone()
    }

    #[getter]
    fn loglik(&self) -> f64 {
        self.inner.loglik
    }

    #[getter]
    fn aic(&self) -> f64 {
        self.inner.aic
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_params
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau.tau
    }

    #[getter]
    fn tau_ci95(&self) -> [f64; 2] {
        self.inner.tau.ci95
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.convergence.converged
    }

    #[getter]
    fn boundary(&self) -> bool {
        self.inner.flags.boundary
    }

    /// Versioned JSON report, the same document `carp fit` writes.
    #[pyo3(signature = (seed = 0))]
    fn report_json(&self, seed: u64) -> PyResult<String> {
        FitReport::new(&self.inner, self.inner.n_terms, seed, String::new())
            .to_json()
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "FitResult(variant={}, loglik={:.4}, aic={:.4}, converged={})",
            self.inner.variant.name(),
            self.inner.loglik,
            self.inner.aic,
            self.inner.convergence.converged
        )
    }
}

impl PyFitResult {
    fn named(&self, v: &[f64; 9]) -> BTreeMap<&'static str, f64> {
        self.inner.param_names().into_iter().zip(*v).collect()
    }
}

/// Simulate `n_events` events from installation. Covariate durations are
/// lognormal(`covariate_mu`, `covariate_sigma`) per type, or all zero when
/// `covariates` is false.
#[pyfunction]
#[pyo3(signature = (
    model, n_events, seed = 0, covariates = true,
    covariate_mu = [0.0, 0.0], covariate_sigma = [0.5, 0.5]
))]
fn simulate(
    py: Python<'_>,
    model: &PyModel,
    n_events: usize,
    seed: u64,
    covariates: bool,
    covariate_mu: [f64; 2],
    covariate_sigma: [f64; 2],
) -> PyResult<PyHistory> {
    let covariate_law = if covariates {
        CovariateLaw::Lognormal {
            mu_x: covariate_mu,
            sigma_x: covariate_sigma,
        }
    } else {
        CovariateLaw::None
    };
    covariate_law.validate().map_err(to_py)?;
    let config = SimConfig {
        model: model.inner,
        n_events,
        covariate_law,
        seed,
    };
    let inner = py
        .detach(|| carp_core::simulate_history(&config))
        .map_err(to_py)?;
    Ok(PyHistory { inner })
}

/// Maximum-likelihood fit of `variant` ("mln" or "copula") to `history`.
#[pyfunction]
#[pyo3(signature = (history, variant = "mln", starts = 8, seed = 0, zero_b = false))]
fn fit(
    py: Python<'_>,
    history: &PyHistory,
    variant: &str,
    starts: usize,
    seed: u64,
    zero_b: bool,
) -> PyResult<PyFitResult> {
    let variant = variant_of(variant)?;
    let config = FitConfig {
        starts,
        seed,
        zero_b,
        ..FitConfig::default()
    };
    let inner = py
        .detach(|| carp_core::fit(variant, &history.inner, &config))
        .map_err(to_py)?;
    Ok(PyFitResult { inner })
}

/// Cumulative intensity H_j and observed count N_j for both types on the
/// grid 0, step, …, termination. Keys: time, H1, N1, H2, N2.
#[pyfunction]
#[pyo3(signature = (model, history, step = 1.0))]
fn diagnose(
    model: &PyModel,
    history: &PyHistory,
    step: f64,
) -> PyResult<BTreeMap<&'static str, Vec<f64>>> {
    let s = core_diagnose(&model.inner, &history.inner, step).map_err(to_py)?;
    let counts = |n: &[usize]| n.iter().map(|&k| k as f64).collect::<Vec<_>>();
    Ok(BTreeMap::from([
        ("N1", counts(&s.n[0])),
        ("N2", counts(&s.n[1])),
        ("time", s.time),
        ("H1", s.h[0].clone()),
        ("H2", s.h[1].clone()),
    ]))
}

#[pymodule]
fn carp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CarpError", m.py().get_type::<CarpError>())?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyHistory>()?;
    m.add_class::<PyFitResult>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(diagnose, m)?)?;
    Ok(())
}
