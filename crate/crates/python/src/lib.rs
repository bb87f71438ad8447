//! Python bindings: the CLI entry point plus direct access to the period
//! computations.

use std::path::Path;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use toric_mirror_core::gamma_class::{gamma_asymptotic_value, ZetaTable};
use toric_mirror_core::model::{load_model, ModelFile};
use toric_mirror_core::{cohomology::RingPresentation, mellin_barnes, oscillatory, report, Error};

create_exception!(toric_mirror, ToricMirrorError, PyException);

fn to_py(e: Error) -> PyErr {
    ToricMirrorError::new_err(format!("{}: {e}", e.kind()))
}

fn model(path: &str) -> PyResult<ModelFile> {
    load_model(Path::new(path)).map_err(to_py)
}

#[pyfunction]
fn version() -> &'static str {
    report::VERSION
}

/// Runs a CLI command (without the program name) and returns
/// `(report_json, exit_code)`.
#[pyfunction]
#[pyo3(signature = (args, precision=None))]
fn run(args: Vec<String>, precision: Option<String>) -> PyResult<(String, i32)> {
    let argv = std::iter::once("toric-mirror".to_string()).chain(args);
    let outcome = report::run_args(argv, precision.as_deref()).map_err(|e| PyValueError::new_err(e.to_string()))?;
    if let Some((path, text)) = &outcome.csv {
        std::fs::write(path, text).map_err(|e| PyValueError::new_err(format!("{}: {e}", path.display())))?;
    }
    Ok((outcome.to_json(), outcome.exit_code))
}

/// `(value, error_estimate)` of the positive-cycle period.
#[pyfunction]
fn positive_cycle_integral(model_path: &str, q: Vec<f64>, z: f64, tol: f64) -> PyResult<(f64, f64)> {
    let m = model(model_path)?;
    let w = oscillatory::build_potential(&m.variety).map_err(to_py)?;
    let r = oscillatory::positive_cycle_integral(&w, &q, z, tol).map_err(to_py)?;
    Ok((r.value, r.error_estimate))
}

/// `(value, tail_estimate)` of the Mellin-Barnes residue sum.
#[pyfunction]
fn residue_sum(model_path: &str, q: f64, z: f64, terms: usize) -> PyResult<(f64, f64)> {
    let m = model(model_path)?;
    let r = mellin_barnes::residue_sum(m.variety.git(), q, z, terms, ZetaTable::shared()).map_err(to_py)?;
    Ok((r.value, r.tail_estimate))
}

#[pyfunction]
fn gamma_asymptotic(model_path: &str, q: Vec<f64>, z: f64) -> PyResult<f64> {
    let m = model(model_path)?;
    let pres = RingPresentation::build(&m.variety).map_err(to_py)?;
    gamma_asymptotic_value(&pres, ZetaTable::shared(), &q, z).map_err(to_py)
}

#[pymodule]
fn toric_mirror(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds the module contents to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ToricMirrorError", m.py().get_type::<ToricMirrorError>())?;
    m.add_function(wrap_pyfunction!(version, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(positive_cycle_integral, m)?)?;
    m.add_function(wrap_pyfunction!(residue_sum, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_asymptotic, m)?)?;
    Ok(())
}
