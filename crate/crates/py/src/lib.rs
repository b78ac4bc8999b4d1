//! Python bindings: rings, sampling, closed-form averages, profiles, knot
//! classification and the two experiments. Structured results come back as
//! plain dicts and lists.

use ideal_rings::experiments::{self, ConvergenceParams, TrefoilStudyParams};
use ideal_rings::knot::{self, Diagram, KnotLengthParams};
use ideal_rings::sampler::{self, MixPolicy};
use ideal_rings::{shape_stats, Error, Ring, RngStream, Vec3};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn arrays(points: &[Vec3]) -> Vec<[f64; 3]> {
    points.iter().map(|p| p.to_array()).collect()
}

fn policy(n: usize, moves: Option<usize>) -> MixPolicy {
    moves.map(MixPolicy::with_moves).unwrap_or_else(|| MixPolicy::standard(n))
}

fn knot_params(closures: usize, tolerance: f64, radius_factor: f64) -> KnotLengthParams {
    KnotLengthParams { closures, tolerance, radius_factor }
}

/// A closed equilateral polygon given by its unit edge vectors.
#[pyclass(name = "Ring", frozen, module = "ideal_rings_py")]
struct PyRing {
    inner: Ring,
}

#[pymethods]
impl PyRing {
    #[new]
    fn new(edges: Vec<[f64; 3]>) -> PyResult<Self> {
        let edges = edges.into_iter().map(Vec3::from).collect();
        Ok(PyRing { inner: Ring::new(edges).map_err(err)? })
    }

    /// Ring through the given vertices, closing back to the first.
    #[staticmethod]
    fn from_vertices(vertices: Vec<[f64; 3]>) -> PyResult<Self> {
        let pts: Vec<Vec3> = vertices.into_iter().map(Vec3::from).collect();
        Ok(PyRing { inner: Ring::from_vertices(&pts).map_err(err)? })
    }

    #[staticmethod]
    fn regular(n: usize) -> PyResult<Self> {
        Ok(PyRing { inner: Ring::regular(n).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Ring(n={})", self.inner.len())
    }

    fn edges(&self) -> Vec<[f64; 3]> {
        arrays(self.inner.edges())
    }

    /// Vertices `v_0..v_n` with `v_0` at the origin and `v_n == v_0`.
    fn vertices(&self) -> Vec<[f64; 3]> {
        arrays(&self.inner.vertices())
    }

    fn closure_defect(&self) -> f64 {
        self.inner.closure_defect()
    }

    fn center_of_mass(&self) -> [f64; 3] {
        self.inner.center_of_mass().to_array()
    }

    fn radius_of_gyration_sq(&self) -> f64 {
        self.inner.radius_of_gyration_sq()
    }

    /// Squared distance spanned by the `k` edges starting at edge `j` (1-based).
    fn squared_end_to_end(&self, k: usize, j: usize) -> PyResult<f64> {
        self.inner.squared_end_to_end(k, j).map_err(err)
    }

    fn subsegment_rg_sq(&self, start: usize, k: usize) -> PyResult<f64> {
        Ok(self.inner.subsegment(start, k).map_err(err)?.radius_of_gyration_sq())
    }

    fn mean_subsegment_rg_sq(&self, k: usize) -> PyResult<f64> {
        self.inner.mean_subsegment_rg_sq(k).map_err(err)
    }

    /// Rotates edges `j` and `k` (1-based) by `theta` about their sum.
    fn crankshaft(&self, j: usize, k: usize, theta: f64) -> PyResult<PyRing> {
        Ok(PyRing { inner: sampler::crankshaft(&self.inner, j, k, theta).map_err(err)? })
    }

    /// Knot class label ("unknot", "trefoil", "det5", ...).
    #[pyo3(signature = (seed=1))]
    fn classify(&self, seed: u64) -> PyResult<String> {
        Ok(knot::classify_ring(&self.inner, &mut RngStream::new(seed)).map_err(err)?.label())
    }

    #[pyo3(signature = (seed=1, closures=100, tolerance=0.5, radius_factor=10.0))]
    fn knot_length<'py>(
        &self,
        py: Python<'py>,
        seed: u64,
        closures: usize,
        tolerance: f64,
        radius_factor: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let params = knot_params(closures, tolerance, radius_factor);
        let ring = self.inner.clone();
        let result = py.detach(|| knot::knot_length(&ring, params, &RngStream::new(seed))).map_err(err)?;
        to_py(py, &result)
    }
}

/// Ring number `index` of the ensemble for `seed` (hedgehog start plus crankshaft mixing).
#[pyfunction]
#[pyo3(signature = (n, seed, index=0, moves=None))]
fn sample_ring(n: usize, seed: u64, index: u64, moves: Option<usize>) -> PyResult<PyRing> {
    Ok(PyRing { inner: sampler::ensemble_ring(seed, n, policy(n, moves), index).map_err(err)? })
}

#[pyfunction]
#[pyo3(signature = (n, count, seed, moves=None))]
fn sample_rings(py: Python<'_>, n: usize, count: u64, seed: u64, moves: Option<usize>) -> PyResult<Vec<PyRing>> {
    let rings = py.detach(|| experiments::sample_rings(seed, n, policy(n, moves), count)).map_err(err)?;
    Ok(rings.into_iter().map(|inner| PyRing { inner }).collect())
}

/// Edges of open chain number `index` for `seed`.
#[pyfunction]
#[pyo3(signature = (n, seed, index=0))]
fn sample_open_chain(n: usize, seed: u64, index: u64) -> PyResult<Vec<[f64; 3]>> {
    Ok(arrays(sampler::ensemble_chain(seed, n, index).map_err(err)?.edges()))
}

#[pyfunction]
fn analytic_edge_product(n: usize) -> PyResult<f64> {
    shape_stats::analytic_edge_product(n).map_err(err)
}

#[pyfunction]
fn analytic_e2e(k: usize, n: usize) -> PyResult<f64> {
    shape_stats::analytic_e2e(k, n).map_err(err)
}

#[pyfunction]
fn analytic_rg(n: usize) -> PyResult<f64> {
    shape_stats::analytic_rg(n).map_err(err)
}

#[pyfunction]
fn analytic_com_sq(n: usize) -> PyResult<f64> {
    shape_stats::analytic_com_sq(n).map_err(err)
}

#[pyfunction]
fn analytic_subseg_rg(k: usize, n: usize) -> PyResult<f64> {
    shape_stats::analytic_subseg_rg(k, n).map_err(err)
}

#[pyfunction]
fn analytic_subseg_com_sq(k: usize, n: usize) -> PyResult<f64> {
    shape_stats::analytic_subseg_com_sq(k, n).map_err(err)
}

#[pyfunction]
fn analytic_open_e2e(k: usize) -> PyResult<f64> {
    shape_stats::analytic_open_e2e(k).map_err(err)
}

#[pyfunction]
fn analytic_open_rg(k: usize) -> PyResult<f64> {
    shape_stats::analytic_open_rg(k).map_err(err)
}

#[pyfunction]
fn effective_length_from_rg(rg_sq: f64) -> f64 {
    shape_stats::effective_length_from_rg(rg_sq)
}

#[pyfunction]
fn effective_length_from_max_e2e(max_e2e: f64) -> PyResult<f64> {
    shape_stats::effective_length_from_max_e2e(max_e2e).map_err(err)
}

/// Ensemble shape profile as a dict of per-`k` lists.
#[pyfunction]
#[pyo3(signature = (n, count, seed, moves=None))]
fn ring_profile<'py>(
    py: Python<'py>,
    n: usize,
    count: u64,
    seed: u64,
    moves: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let profile = py.detach(|| experiments::ring_profile(seed, n, policy(n, moves), count)).map_err(err)?;
    to_py(py, &profile)
}

/// Determinant of the knot given by a signed Gauss code (`+c` over, `-c` under).
#[pyfunction]
fn gauss_determinant(code: Vec<i64>) -> PyResult<u64> {
    Diagram::from_signed_gauss(&code).and_then(|d| d.determinant()).map_err(err)
}

/// Closure spectrum of an open polygonal arc given by its points.
#[pyfunction]
#[pyo3(signature = (points, closures=100, radius_factor=10.0, seed=1))]
fn closure_spectrum<'py>(
    py: Python<'py>,
    points: Vec<[f64; 3]>,
    closures: usize,
    radius_factor: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let pts: Vec<Vec3> = points.into_iter().map(Vec3::from).collect();
    let spectrum = knot::closure_spectrum(&pts, closures, radius_factor, &RngStream::new(seed)).map_err(err)?;
    to_py(py, &spectrum)
}

#[pyfunction]
#[pyo3(signature = (n=50, moves=150, sizes=vec![10, 100, 1_000, 10_000, 100_000], replicates=10, seed=1))]
fn run_convergence<'py>(
    py: Python<'py>,
    n: usize,
    moves: usize,
    sizes: Vec<u64>,
    replicates: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let params = ConvergenceParams { n, moves, sizes, replicates, seed };
    let report = py.detach(|| experiments::run_convergence(&params)).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (n=50, target=200, seed=1, moves=None, budget_factor=100, closures=100, tolerance=0.5, radius_factor=10.0))]
#[allow(clippy::too_many_arguments)]
fn run_trefoil_study<'py>(
    py: Python<'py>,
    n: usize,
    target: usize,
    seed: u64,
    moves: Option<usize>,
    budget_factor: u64,
    closures: usize,
    tolerance: f64,
    radius_factor: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let params = TrefoilStudyParams {
        n,
        moves: moves.unwrap_or(6 * n),
        target_trefoils: target,
        budget_factor,
        knot: knot_params(closures, tolerance, radius_factor),
        seed,
    };
    let report = py.detach(|| experiments::run_trefoil_study(&params)).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn ideal_rings_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BUILD_ID", experiments::BUILD_ID)?;
    m.add_class::<PyRing>()?;
    m.add_function(wrap_pyfunction!(sample_ring, m)?)?;
    m.add_function(wrap_pyfunction!(sample_rings, m)?)?;
    m.add_function(wrap_pyfunction!(sample_open_chain, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_edge_product, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_e2e, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_rg, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_com_sq, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_subseg_rg, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_subseg_com_sq, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_open_e2e, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_open_rg, m)?)?;
    m.add_function(wrap_pyfunction!(effective_length_from_rg, m)?)?;
    m.add_function(wrap_pyfunction!(effective_length_from_max_e2e, m)?)?;
    m.add_function(wrap_pyfunction!(ring_profile, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_determinant, m)?)?;
    m.add_function(wrap_pyfunction!(closure_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_convergence, m)?)?;
    m.add_function(wrap_pyfunction!(run_trefoil_study, m)?)?;
    Ok(())
}
