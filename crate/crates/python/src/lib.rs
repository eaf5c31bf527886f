//! Python bindings. Structured arguments (recipes, parameters, equations)
//! are plain dicts with the same keys as the TOML configurations and are
//! converted through JSON; reports come back as dicts.

use kdvinv_core::evolve::{evolve as core_evolve, monitors, EvolveConfig};
use kdvinv_core::fit::{fit_travelling_wave, AnsatzFamily, Coefficient, Coefficients, FitOptions, Shape};
use kdvinv_core::operators::{solution_residual, Backend, ResidualOptions};
use kdvinv_core::symmetry::{check_inversion_algebraic_with, CaseSource, InversionCase};
use kdvinv_core::{EquationId, Field, Frame, Grid, MediumParams, SolutionRecipe};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

create_exception!(kdvinv, NumericalAbort, PyRuntimeError);

fn core_err(e: kdvinv_core::Error) -> PyErr {
    match e {
        kdvinv_core::Error::NumericalAbort { .. } => NumericalAbort::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn from_py<T: DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>, what: &str) -> PyResult<T> {
    let text: String = py.import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(format!("{what}: {e}")))
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse_frame(name: &str) -> PyResult<Frame> {
    match name {
        "fixed" => Ok(Frame::Fixed),
        "moving" => Ok(Frame::Moving),
        _ => Err(PyValueError::new_err(format!("frame must be 'fixed' or 'moving', got {name:?}"))),
    }
}

fn parse_backend(name: &str) -> PyResult<Backend> {
    match name {
        "spectral" => Ok(Backend::Spectral),
        "fd8" => Ok(Backend::Fd8),
        _ => Err(PyValueError::new_err(format!("backend must be 'spectral' or 'fd8', got {name:?}"))),
    }
}

#[pyfunction]
fn elliptic_k(m: f64) -> PyResult<f64> {
    kdvinv_core::elliptic_k(m).map_err(core_err)
}

#[pyfunction]
fn elliptic_e(m: f64) -> PyResult<f64> {
    kdvinv_core::elliptic_e(m).map_err(core_err)
}

/// `(sn, cn, dn)` at `u` for parameter `m`.
#[pyfunction]
fn jacobi_sn_cn_dn(u: f64, m: f64) -> PyResult<(f64, f64, f64)> {
    let j = kdvinv_core::jacobi_sn_cn_dn(u, m).map_err(core_err)?;
    Ok((j.sn, j.cn, j.dn))
}

/// Values of a catalog solution at the points `x` and time `t`. With
/// `inverted` the negated recipe is built with `-alpha`.
#[pyfunction]
#[pyo3(signature = (recipe, params, x, t=0.0, inverted=false, frame="fixed"))]
fn sample(
    py: Python<'_>,
    recipe: &Bound<'_, PyAny>,
    params: &Bound<'_, PyAny>,
    x: Vec<f64>,
    t: f64,
    inverted: bool,
    frame: &str,
) -> PyResult<Vec<f64>> {
    let mut recipe: SolutionRecipe = from_py(py, recipe, "recipe")?;
    let mut params: MediumParams = from_py(py, params, "params")?;
    if inverted {
        recipe = recipe.inverted();
        params = params.inverted();
    }
    let sol = recipe.build(&params, parse_frame(frame)?).map_err(core_err)?;
    x.iter().map(|&xi| sol.eval(xi, t).map_err(core_err)).collect()
}

/// Residual report of a catalog solution against `equation` on the
/// solution's natural grid of `n` points.
#[pyfunction]
#[pyo3(signature = (recipe, equation, params, n=1024, t=0.0, backend="spectral", tolerance=1e-8))]
#[allow(clippy::too_many_arguments)]
fn residual(
    py: Python<'_>,
    recipe: &Bound<'_, PyAny>,
    equation: &Bound<'_, PyAny>,
    params: &Bound<'_, PyAny>,
    n: usize,
    t: f64,
    backend: &str,
    tolerance: f64,
) -> PyResult<Py<PyAny>> {
    let recipe: SolutionRecipe = from_py(py, recipe, "recipe")?;
    let eq: EquationId = from_py(py, equation, "equation")?;
    let params: MediumParams = from_py(py, params, "params")?;
    let sol = recipe.build(&params, eq.frame).map_err(core_err)?;
    let grid = sol.natural_grid(n, t).map_err(core_err)?;
    let opts = ResidualOptions {
        backend: parse_backend(backend)?,
        tolerance,
    };
    let report = solution_residual(&sol, &eq, &params, &grid, t, &opts).map_err(core_err)?;
    to_py(py, &report)
}

/// Algebraic inversion defect `R_alpha(u) + R_{-alpha}(-u)` for a seeded
/// random field on `[0, length)`.
#[pyfunction]
#[pyo3(signature = (equation, params, seed, n=256, length=64.0, backend="spectral"))]
fn inversion_defect(
    py: Python<'_>,
    equation: &Bound<'_, PyAny>,
    params: &Bound<'_, PyAny>,
    seed: u64,
    n: usize,
    length: f64,
    backend: &str,
) -> PyResult<Py<PyAny>> {
    let case = InversionCase {
        id: format!("random-{seed}"),
        equation: from_py(py, equation, "equation")?,
        source: CaseSource::RandomField { seed },
        params: from_py(py, params, "params")?,
    };
    let grid = Grid::new(0.0, length, n).map_err(core_err)?;
    let report = check_inversion_algebraic_with(&case, &grid, 0.0, parse_backend(backend)?).map_err(core_err)?;
    to_py(py, &report)
}

/// Fits the `free` coefficients (names such as `"B"`, `"V"`) of `shape`.
#[pyfunction]
#[pyo3(signature = (shape, free, equation, params, init, tol=None, zero_mean=false))]
#[allow(clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    shape: &Bound<'_, PyAny>,
    free: &Bound<'_, PyAny>,
    equation: &Bound<'_, PyAny>,
    params: &Bound<'_, PyAny>,
    init: &Bound<'_, PyAny>,
    tol: Option<f64>,
    zero_mean: bool,
) -> PyResult<Py<PyAny>> {
    let shape: Shape = from_py(py, shape, "shape")?;
    let free: Vec<Coefficient> = from_py(py, free, "free")?;
    let eq: EquationId = from_py(py, equation, "equation")?;
    let params: MediumParams = from_py(py, params, "params")?;
    let init: Coefficients = from_py(py, init, "init")?;
    let mut family = AnsatzFamily::new(shape, &free);
    if zero_mean {
        family = family.zero_mean();
    }
    let d = FitOptions::default();
    let opts = FitOptions {
        tol: tol.unwrap_or(d.tol),
        ..d
    };
    let r = fit_travelling_wave(&family, &eq, &params, &init, &opts).map_err(core_err)?;
    to_py(py, &r)
}

/// Evolves a catalog initial condition. Returns `x`, snapshot `times`,
/// `snapshots` (one list per time) and the monitor summary.
#[pyfunction]
#[pyo3(signature = (recipe, equation, params, n, dt, t_end, output_stride=0, inverted=false, length=None))]
#[allow(clippy::too_many_arguments)]
fn evolve(
    py: Python<'_>,
    recipe: &Bound<'_, PyAny>,
    equation: &Bound<'_, PyAny>,
    params: &Bound<'_, PyAny>,
    n: usize,
    dt: f64,
    t_end: f64,
    output_stride: usize,
    inverted: bool,
    length: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let recipe: SolutionRecipe = from_py(py, recipe, "recipe")?;
    let eq: EquationId = from_py(py, equation, "equation")?;
    let mut params: MediumParams = from_py(py, params, "params")?;
    let sol = recipe.build(&params, eq.frame).map_err(core_err)?;
    let grid = match length {
        Some(l) => Grid::centered(l, n),
        None => sol.natural_grid(n, 0.0),
    }
    .map_err(core_err)?;
    let mut u0 = Field::from_fn(grid, 0.0, |x| sol.eval(x, 0.0).unwrap_or(f64::NAN)).map_err(core_err)?;
    if inverted {
        u0 = u0.negated();
        params = params.inverted();
    }
    let mut cfg = EvolveConfig::new(eq, params, grid, dt, t_end);
    cfg.output_stride = output_stride;
    let traj = core_evolve(&u0, &cfg).map_err(core_err)?;

    #[derive(Serialize)]
    struct Out {
        x: Vec<f64>,
        times: Vec<f64>,
        snapshots: Vec<Vec<f64>>,
        monitors: kdvinv_core::evolve::MonitorSummary,
    }
    let out = Out {
        x: grid.points(),
        times: traj.snapshots.iter().map(|s| s.time).collect(),
        snapshots: traj.snapshots.iter().map(|s| s.values.clone()).collect(),
        monitors: monitors(&traj).map_err(core_err)?,
    };
    to_py(py, &out)
}

#[pymodule]
fn kdvinv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalAbort", m.py().get_type::<NumericalAbort>())?;
    m.add_function(wrap_pyfunction!(elliptic_k, m)?)?;
    m.add_function(wrap_pyfunction!(elliptic_e, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_sn_cn_dn, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(residual, m)?)?;
    m.add_function(wrap_pyfunction!(inversion_defect, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    Ok(())
}
