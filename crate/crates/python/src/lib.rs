//! Python module `pydnls`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dnls::evolve::{self, EvolutionConfig, Monitor};
use dnls::scattering::{self, SpectralParameter};
use dnls::{hierarchy, profiles, sobolev, verify, C64};

fn to_py(e: dnls::Error) -> PyErr {
    match e {
        dnls::Error::InvalidParameter(_) | dnls::Error::InvalidGrid(_) | dnls::Error::Index { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn lambda(lambda_sq: C64) -> PyResult<SpectralParameter> {
    SpectralParameter::from_lambda_sq(lambda_sq).map_err(to_py)
}

/// Samples of a complex function on a periodic grid centred at 0.
#[pyclass(name = "GridFunction", from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: dnls::GridFunction,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(values: Vec<C64>, domain_length: f64) -> PyResult<Self> {
        Ok(PyGrid {
            inner: dnls::GridFunction::new(values, domain_length).map_err(to_py)?,
        })
    }

    /// A built-in profile: gaussian, evolution-gaussian, two-bump, plane-wave.
    #[staticmethod]
    fn profile(name: &str, n: usize, domain_length: f64) -> PyResult<Self> {
        Ok(PyGrid {
            inner: profiles::named(name, n, domain_length).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(PyGrid {
            inner: dnls::GridFunction::read_binary(path.as_ref()).map_err(to_py)?,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        self.inner.write_binary(path.as_ref()).map_err(to_py)
    }

    fn values(&self) -> Vec<C64> {
        self.inner.values().to_vec()
    }

    fn x(&self) -> Vec<f64> {
        (0..self.inner.len()).map(|k| self.inner.x(k)).collect()
    }

    #[getter]
    fn domain_length(&self) -> f64 {
        self.inner.domain_length()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn l2_norm_sq(&self) -> f64 {
        self.inner.l2_norm_sq()
    }

    fn edge_ratio(&self) -> f64 {
        self.inner.edge_ratio()
    }

    fn __repr__(&self) -> String {
        format!(
            "GridFunction(N={}, L={})",
            self.inner.len(),
            self.inner.domain_length()
        )
    }
}

/// `E_j` for `j = 0..=j_max` as `(j, density string)` pairs.
#[pyfunction]
fn energies(j_max: usize) -> PyResult<Vec<(usize, String)>> {
    Ok(hierarchy::energies(j_max)
        .map_err(to_py)?
        .into_iter()
        .map(|e| (e.j, e.density.to_string()))
        .collect())
}

#[pyfunction]
fn evaluate_energy(u: &PyGrid, j: usize) -> PyResult<C64> {
    let e = hierarchy::shared().energy(j).map_err(to_py)?;
    e.evaluate(&u.inner).map_err(to_py)
}

#[pyfunction]
fn jost_transmission(u: &PyGrid, lambda_sq: C64) -> PyResult<C64> {
    scattering::jost_transmission(&u.inner, &lambda(lambda_sq)?).map_err(to_py)
}

#[pyfunction]
fn log_transmission(u: &PyGrid, lambda_sq: C64) -> PyResult<C64> {
    scattering::log_transmission(&u.inner, &lambda(lambda_sq)?).map_err(to_py)
}

/// `det(I - T_u(lambda)^2)` on `modes` Fourier modes (default `N/2`).
#[pyfunction]
#[pyo3(signature = (u, lambda_sq, modes=None))]
fn perturbation_determinant(u: &PyGrid, lambda_sq: C64, modes: Option<usize>) -> PyResult<C64> {
    let p = lambda(lambda_sq)?;
    let m = modes.unwrap_or(u.inner.len() / 2);
    scattering::perturbation_determinant_with(&u.inner, &p, m).map_err(to_py)
}

#[pyfunction]
fn trace_t2(u: &PyGrid, lambda_sq: C64) -> PyResult<C64> {
    Ok(scattering::trace_t2(&u.inner, &lambda(lambda_sq)?))
}

#[pyfunction]
fn trace_t4(u: &PyGrid, lambda_sq: C64) -> PyResult<C64> {
    Ok(scattering::trace_t4(&u.inner, &lambda(lambda_sq)?))
}

#[pyfunction]
fn estimate_r0(u: &PyGrid) -> PyResult<f64> {
    scattering::estimate_r0(&u.inner).map_err(to_py)
}

#[pyfunction]
fn hs_seminorm(u: &PyGrid, s: f64) -> f64 {
    sobolev::hs_seminorm(&u.inner, s)
}

#[pyfunction]
fn phi(u: &PyGrid, rho: f64, l: u32) -> PyResult<f64> {
    sobolev::phi(&u.inner, rho, l).map_err(to_py)
}

#[pyfunction]
fn phi0(u: &PyGrid, rho: f64, l: u32) -> PyResult<f64> {
    sobolev::phi0(&u.inner, rho, l).map_err(to_py)
}

#[pyfunction]
fn comparison_integral(u: &PyGrid, s: f64, r: f64) -> PyResult<f64> {
    sobolev::comparison_integral(&u.inner, s, r).map_err(to_py)
}

#[pyfunction]
fn f_nu_l1_norm(nu: f64) -> PyResult<f64> {
    sobolev::f_nu_l1_norm(nu).map_err(to_py)
}

/// The comparison report at `(s, R)` as a dict.
#[pyfunction]
fn compare_hs<'py>(py: Python<'py>, u: &PyGrid, s: f64, r: f64) -> PyResult<Bound<'py, PyDict>> {
    let rep = sobolev::compare(&u.inner, s, r).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("s", rep.s)?;
    d.set_item("R", rep.r)?;
    d.set_item("integral", rep.integral)?;
    d.set_item("hs_sq", rep.hs_sq)?;
    d.set_item("ratio", rep.ratio)?;
    d.set_item("expected_ratio", rep.expected_ratio)?;
    d.set_item("upper_bound", rep.upper_bound)?;
    d.set_item("pass", rep.passed())?;
    Ok(d)
}

/// One step of the evolution.
#[pyfunction]
#[pyo3(signature = (u, dt, dealias=2.0/3.0))]
fn step(u: &PyGrid, dt: f64, dealias: f64) -> PyResult<PyGrid> {
    Ok(PyGrid {
        inner: evolve::step(&u.inner, dt, dealias).map_err(to_py)?,
    })
}

/// Runs the evolution and returns `{"t": [...], name: [...]}`.
#[pyfunction]
#[pyo3(signature = (u, dt, t_final, monitors, lambda_sq=vec![], rho=vec![], stride=100, dealias=2.0/3.0))]
#[allow(clippy::too_many_arguments)]
fn evolve_monitors<'py>(
    py: Python<'py>,
    u: &PyGrid,
    dt: f64,
    t_final: f64,
    monitors: Vec<String>,
    lambda_sq: Vec<C64>,
    rho: Vec<f64>,
    stride: usize,
    dealias: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let mut ms = Vec::new();
    for m in &monitors {
        ms.extend(Monitor::parse(m, &lambda_sq, &rho).map_err(to_py)?);
    }
    let cfg = EvolutionConfig {
        dt,
        t_final,
        dealias,
        monitor_stride: stride,
        ..Default::default()
    };
    let series = py
        .detach(|| evolve::evolve(&u.inner, &cfg, &ms))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("t", series.times.clone())?;
    for c in &series.monitors {
        if c.is_complex() {
            let v: Vec<C64> = (0..c.re.len()).map(|i| c.value(i)).collect();
            d.set_item(&c.name, v)?;
        } else {
            d.set_item(&c.name, c.re.clone())?;
        }
    }
    Ok(d)
}

/// Runs a property suite and returns the verdict as a JSON string.
#[pyfunction]
#[pyo3(signature = (suite="all", seed=0))]
fn run_verify(py: Python<'_>, suite: &str, seed: u64) -> PyResult<String> {
    let suites = verify::Suite::parse(suite).map_err(to_py)?;
    let verdict = py.detach(|| verify::run(&suites, seed));
    serde_json::to_string(&verdict).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn pydnls(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_function(wrap_pyfunction!(energies, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_energy, m)?)?;
    m.add_function(wrap_pyfunction!(jost_transmission, m)?)?;
    m.add_function(wrap_pyfunction!(log_transmission, m)?)?;
    m.add_function(wrap_pyfunction!(perturbation_determinant, m)?)?;
    m.add_function(wrap_pyfunction!(trace_t2, m)?)?;
    m.add_function(wrap_pyfunction!(trace_t4, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_r0, m)?)?;
    m.add_function(wrap_pyfunction!(hs_seminorm, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(phi0, m)?)?;
    m.add_function(wrap_pyfunction!(comparison_integral, m)?)?;
    m.add_function(wrap_pyfunction!(f_nu_l1_norm, m)?)?;
    m.add_function(wrap_pyfunction!(compare_hs, m)?)?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_monitors, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
