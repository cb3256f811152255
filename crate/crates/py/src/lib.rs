//! Python bindings. Spectra are plain lists of floats; omitted spectra are
//! identity, and the model is inferred from which spectra are given unless
//! named explicitly.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mimo_outage::analysis::CheckRecord;
use mimo_outage::asymptotic::{
    asym_scenario, coding_gain as core_coding_gain, diversity_order as core_diversity,
};
use mimo_outage::exact::outage_exact as core_exact;
use mimo_outage::model::{ChannelScenario, EigenSpectrum, Model, OutageResult, SystemConfig};
use mimo_outage::monte_carlo::estimate_outage;
use mimo_outage::verify::{run_suite, VerifyOptions};
use mimo_outage::OutageError;

fn py_err(e: OutageError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

type Spec = Option<Vec<f64>>;

/// Builds and validates a scenario from keyword arguments.
#[allow(clippy::too_many_arguments)]
pub fn build(
    nt: usize,
    nr: usize,
    rate: f64,
    snr_db: f64,
    model: Option<&str>,
    t_eigs: Spec,
    r_eigs: Spec,
    x_eigs: Spec,
) -> mimo_outage::Result<(ChannelScenario, SystemConfig)> {
    let cfg = SystemConfig::new(nt, nr, rate, snr_db)?;
    let spec =
        |v: Spec, n: usize| v.map_or(Ok(EigenSpectrum::identity(n)), |v| EigenSpectrum::new(&v));
    let (t, r) = (spec(t_eigs, nt)?, spec(r_eigs, nr)?);
    let mut s = ChannelScenario {
        model: Model::Full,
        t_spectrum: t,
        r_spectrum: r,
        x_spectrum: EigenSpectrum::identity(nt),
    };
    s.model = match model {
        Some(m) => m.parse()?,
        None => s.implied_model(),
    };
    if let Some(x) = x_eigs {
        s = s.with_power_allocation(EigenSpectrum::power_allocation(&x)?);
    }
    let s = mimo_outage::model::validate_scenario(&s, &cfg)?;
    Ok((s, cfg))
}

fn result_dict<'py>(py: Python<'py>, r: &OutageResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("probability", r.probability)?;
    d.set_item("err_estimate", r.err_estimate)?;
    d.set_item("raw_value", r.raw_value)?;
    d.set_item("method", r.method.as_str())?;
    d.set_item("converged", r.converged)?;
    d.set_item("below_floor", r.below_floor)?;
    Ok(d)
}

/// Exact outage probability as a dict with the value and its error bar.
#[pyfunction]
#[pyo3(signature = (nt, nr, rate, snr_db, *, model=None, t_eigs=None, r_eigs=None, x_eigs=None))]
#[allow(clippy::too_many_arguments)]
fn outage_exact<'py>(
    py: Python<'py>,
    nt: usize,
    nr: usize,
    rate: f64,
    snr_db: f64,
    model: Option<&str>,
    t_eigs: Spec,
    r_eigs: Spec,
    x_eigs: Spec,
) -> PyResult<Bound<'py, PyDict>> {
    let (s, cfg) = build(nt, nr, rate, snr_db, model, t_eigs, r_eigs, x_eigs).map_err(py_err)?;
    let r = py.detach(|| core_exact(&s, &cfg)).map_err(py_err)?;
    result_dict(py, &r)
}

/// High-SNR asymptote, unclamped.
#[pyfunction]
#[pyo3(signature = (nt, nr, rate, snr_db, *, model=None, t_eigs=None, r_eigs=None, x_eigs=None))]
#[allow(clippy::too_many_arguments)]
fn outage_asymptotic(
    nt: usize,
    nr: usize,
    rate: f64,
    snr_db: f64,
    model: Option<&str>,
    t_eigs: Spec,
    r_eigs: Spec,
    x_eigs: Spec,
) -> PyResult<f64> {
    let (s, cfg) = build(nt, nr, rate, snr_db, model, t_eigs, r_eigs, x_eigs).map_err(py_err)?;
    Ok(asym_scenario(&s, &cfg).map_err(py_err)?.raw_value)
}

/// Monte Carlo estimate as (p_hat, std_err).
#[pyfunction]
#[pyo3(signature = (nt, nr, rate, snr_db, *, samples=1_000_000, seed=1, model=None, t_eigs=None, r_eigs=None, x_eigs=None))]
#[allow(clippy::too_many_arguments)]
fn outage_monte_carlo(
    py: Python<'_>,
    nt: usize,
    nr: usize,
    rate: f64,
    snr_db: f64,
    samples: u64,
    seed: u64,
    model: Option<&str>,
    t_eigs: Spec,
    r_eigs: Spec,
    x_eigs: Spec,
) -> PyResult<(f64, f64)> {
    let (s, cfg) = build(nt, nr, rate, snr_db, model, t_eigs, r_eigs, x_eigs).map_err(py_err)?;
    let e = py
        .detach(|| estimate_outage(&s, &cfg, samples, seed))
        .map_err(py_err)?;
    Ok((e.p_hat, e.std_err))
}

/// C(R) for an nt x nr array.
#[pyfunction]
fn coding_gain(nt: usize, nr: usize, rate: f64) -> PyResult<f64> {
    let cfg = SystemConfig::new(nt, nr, rate, 0.0).map_err(py_err)?;
    core_coding_gain(&cfg).map_err(py_err)
}

#[pyfunction]
fn diversity_order(nt: usize, nr: usize) -> PyResult<u32> {
    Ok(core_diversity(
        &SystemConfig::new(nt, nr, 1.0, 0.0).map_err(py_err)?,
    ))
}

/// Runs the property suite; returns a list of {name, passed, detail}.
#[pyfunction]
#[pyo3(signature = (only=None, samples=200_000, seed=7))]
fn verify<'py>(
    py: Python<'py>,
    only: Option<Vec<String>>,
    samples: u64,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let opts = VerifyOptions {
        only: only.unwrap_or_default(),
        inject_fault: None,
        mc_samples: samples,
        seed,
    };
    let records: Vec<CheckRecord> = py.detach(|| run_suite(&opts)).map_err(py_err)?;
    records
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("name", &r.name)?;
            d.set_item("passed", r.passed)?;
            d.set_item("detail", &r.detail)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn mimo_outage_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(outage_exact, m)?)?;
    m.add_function(wrap_pyfunction!(outage_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(outage_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(coding_gain, m)?)?;
    m.add_function(wrap_pyfunction!(diversity_order, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
