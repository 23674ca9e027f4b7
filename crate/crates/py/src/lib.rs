//! Python bindings. Structured results (reports, sweeps, tables, CRB runs)
//! come back as plain dicts with the same keys as the JSON output of the
//! command-line tool.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use topotherm::analysis;
use topotherm::estimation::{crb_experiment, CrbConfig, MeasurementKind};
use topotherm::spectral::{self, DEFAULT_GROUP_TOL};
use topotherm::thermo;

fn to_py(e: topotherm::Error) -> PyErr {
    match e {
        topotherm::Error::Io(e) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A connected simple graph, built from a descriptor such as `cycle:8`.
#[pyclass(name = "Graph", module = "topotherm_py", frozen)]
struct PyGraph {
    inner: topotherm::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(descriptor: &str) -> PyResult<Self> {
        let family: topotherm::Family = descriptor.parse().map_err(to_py)?;
        Ok(PyGraph { inner: family.build().map_err(to_py)? })
    }

    #[staticmethod]
    fn from_edges(order: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph { inner: topotherm::Graph::from_edges(order, &edges).map_err(to_py)? })
    }

    #[staticmethod]
    fn product(a: &PyGraph, b: &PyGraph) -> Self {
        PyGraph { inner: topotherm::Graph::cartesian_product(&a.inner, &b.inner) }
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn descriptor(&self) -> String {
        self.inner.descriptor()
    }

    fn degrees(&self) -> Vec<usize> {
        (0..self.inner.order()).map(|v| self.inner.degree(v)).collect()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn laplacian(&self) -> Vec<Vec<f64>> {
        let l = self.inner.laplacian();
        l.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Graph('{}')", self.inner.descriptor())
    }
}

/// Laplacian spectrum with degeneracy levels and eigenvectors.
#[pyclass(name = "Spectrum", module = "topotherm_py", frozen)]
struct PySpectrum {
    inner: topotherm::Spectrum,
}

#[pymethods]
impl PySpectrum {
    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().to_vec()
    }

    /// `(energy, degeneracy)` pairs in increasing energy.
    #[getter]
    fn levels(&self) -> Vec<(f64, usize)> {
        self.inner.levels().iter().map(|l| (l.energy, l.degeneracy)).collect()
    }

    #[getter]
    fn source(&self) -> &'static str {
        match self.inner.source() {
            topotherm::SpectrumSource::Analytic => "analytic",
            topotherm::SpectrumSource::Numeric => "numeric",
        }
    }

    #[getter]
    fn max_energy(&self) -> f64 {
        self.inner.max_energy()
    }

    /// `(E_1, g_1)`.
    fn algebraic_connectivity(&self) -> PyResult<(f64, usize)> {
        spectral::algebraic_connectivity(&self.inner).map_err(to_py)
    }

    fn qfi(&self, temperature: f64) -> PyResult<f64> {
        Ok(thermo::ThermalModel::new(&self.inner, temperature).map_err(to_py)?.qfi())
    }

    fn fi_position(&self, temperature: f64) -> PyResult<f64> {
        thermo::ThermalModel::new(&self.inner, temperature)
            .and_then(|m| m.fi_position())
            .map_err(to_py)
    }

    fn coherence(&self, temperature: f64) -> PyResult<f64> {
        thermo::ThermalModel::new(&self.inner, temperature)
            .and_then(|m| m.coherence())
            .map_err(to_py)
    }

    fn position_probabilities(&self, temperature: f64) -> PyResult<Vec<f64>> {
        thermo::ThermalModel::new(&self.inner, temperature)
            .and_then(|m| m.position_probabilities())
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(order={}, levels={})", self.inner.order(), self.inner.levels().len())
    }
}

#[pyfunction]
#[pyo3(signature = (graph, tol = DEFAULT_GROUP_TOL, analytic = false))]
fn spectrum(graph: &PyGraph, tol: f64, analytic: bool) -> PyResult<PySpectrum> {
    let inner = if analytic {
        spectral::analytic_spectrum(&graph.inner, tol)
    } else {
        spectral::spectrum(&graph.inner, tol)
    };
    Ok(PySpectrum { inner: inner.map_err(to_py)? })
}

fn spectrum_of(graph: &PyGraph) -> PyResult<topotherm::Spectrum> {
    spectral::spectrum(&graph.inner, DEFAULT_GROUP_TOL).map_err(to_py)
}

#[pyfunction]
fn fisher_report<'py>(py: Python<'py>, graph: &PyGraph, temperature: f64) -> PyResult<Bound<'py, PyAny>> {
    let s = spectrum_of(graph)?;
    let r = thermo::fisher_report(&graph.inner.degree_stats(), &s, temperature).map_err(to_py)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (graph, t_lo = None, t_hi = None, points = analysis::DEFAULT_POINTS))]
fn sweep<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    t_lo: Option<f64>,
    t_hi: Option<f64>,
    points: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let s = spectrum_of(graph)?;
    let (lo, hi) = analysis::default_range(&s).map_err(to_py)?;
    let r = py
        .detach(|| analysis::sweep(&graph.inner, &s, t_lo.unwrap_or(lo), t_hi.unwrap_or(hi), points))
        .map_err(to_py)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (n = 16, n1 = None))]
fn table1<'py>(py: Python<'py>, n: usize, n1: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let t = py
        .detach(|| analysis::table1_report(n, n1.unwrap_or(n / 3)))
        .map_err(to_py)?;
    to_dict(py, &t)
}

#[pyfunction]
#[pyo3(signature = (graph, temperature, shots, trials, seed, kind = "energy", per_trial = false))]
#[allow(clippy::too_many_arguments)]
fn crb<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    temperature: f64,
    shots: u64,
    trials: usize,
    seed: u64,
    kind: &str,
    per_trial: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let kind: MeasurementKind = kind.parse().map_err(to_py)?;
    let s = spectrum_of(graph)?;
    let config = CrbConfig {
        temperature,
        kind,
        shots,
        trials,
        seed,
        bracket: None,
        keep_estimates: per_trial,
    };
    let r = py
        .detach(|| crb_experiment(&s, Some(graph.inner.descriptor()), &config))
        .map_err(to_py)?;
    to_dict(py, &r)
}

#[pyfunction]
fn solve_xmax(g1: usize) -> PyResult<f64> {
    thermo::solve_xmax(g1).map_err(to_py)
}

#[pyfunction]
fn qfi_complete(n: usize, temperature: f64) -> f64 {
    thermo::qfi_complete(n, temperature)
}

#[pyfunction]
fn qfi_exact_bipartite(n1: usize, n2: usize, temperature: f64) -> f64 {
    thermo::qfi_exact_bipartite(n1, n2, temperature)
}

#[pyfunction]
fn qfi_low_t(e1: f64, g1: usize, temperature: f64) -> f64 {
    thermo::qfi_low_t(e1, g1, temperature)
}

#[pyfunction]
fn coherence_complete(n: usize, temperature: f64) -> f64 {
    thermo::coherence_complete(n, temperature)
}

#[pymodule]
fn topotherm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", analysis::VERSION)?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_report, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(table1, m)?)?;
    m.add_function(wrap_pyfunction!(crb, m)?)?;
    m.add_function(wrap_pyfunction!(solve_xmax, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_complete, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_exact_bipartite, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_low_t, m)?)?;
    m.add_function(wrap_pyfunction!(coherence_complete, m)?)?;
    Ok(())
}
