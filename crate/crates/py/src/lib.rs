//! Python bindings for the hypergraph partitioner.
//!
//! Exposes the hypergraph type, file and generator entry points, both
//! partitioning modes, metrics, and the one-pass baseline. Run statistics
//! come back as a JSON string.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use dhpart::io::{self, FileFormat, GenParams, InstanceKind};
use dhpart::{oracle, Constraints, Error, Mode, PartitionerConfig};

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A weighted directed hypergraph.
#[pyclass(name = "Hypergraph")]
struct PyHypergraph {
    inner: dhpart::Hypergraph,
}

#[pymethods]
impl PyHypergraph {
    /// Builds a hypergraph from `(sources, destinations, weight)` triples.
    #[new]
    fn new(num_nodes: usize, edges: Vec<(Vec<usize>, Vec<usize>, f64)>) -> PyResult<Self> {
        dhpart::Hypergraph::from_edges(num_nodes, &edges)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    /// Reads a hypergraph file; `format` is `"dhgr"` or `"hgr"`.
    #[staticmethod]
    #[pyo3(signature = (path, format = "dhgr"))]
    fn read(path: &str, format: &str) -> PyResult<Self> {
        let format: FileFormat = format.parse().map_err(to_py_err)?;
        io::read_hypergraph(path, format)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    /// Writes the hypergraph in dhgr format.
    fn write(&self, path: &str) -> PyResult<()> {
        io::write_hypergraph(&self.inner, path).map_err(to_py_err)
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn num_pins(&self) -> usize {
        self.inner.num_pins()
    }

    fn __repr__(&self) -> String {
        format!(
            "Hypergraph(nodes={}, edges={}, pins={})",
            self.inner.num_nodes(),
            self.inner.num_edges(),
            self.inner.num_pins()
        )
    }
}

/// Generates a synthetic instance (`kind` is `"layered"` or `"smallworld"`).
#[pyfunction]
#[pyo3(signature = (kind, layers, width, fanout, rewire = 0.0, seed = 0))]
fn generate(
    kind: &str,
    layers: usize,
    width: usize,
    fanout: usize,
    rewire: f64,
    seed: u64,
) -> PyResult<PyHypergraph> {
    let kind: InstanceKind = kind.parse().map_err(to_py_err)?;
    let params = GenParams {
        layers,
        width,
        fanout,
        rewire,
        seed,
    };
    io::generate_instance(kind, &params)
        .map(|inner| PyHypergraph { inner })
        .map_err(to_py_err)
}

/// Partitions under size and distinct-inbound limits. Returns the node
/// assignment and a JSON stats string.
#[pyfunction]
#[pyo3(signature = (hg, omega = None, delta = None, pi = 4, theta = 16, seed = 0))]
fn partition_constrained(
    hg: &PyHypergraph,
    omega: Option<usize>,
    delta: Option<usize>,
    pi: usize,
    theta: usize,
    seed: u64,
) -> PyResult<(Vec<usize>, String)> {
    let cfg = PartitionerConfig {
        mode: Mode::Constrained,
        omega,
        delta,
        pi,
        theta,
        seed,
        ..Default::default()
    };
    let (part, stats) = dhpart::partition_constrained(&hg.inner, &cfg).map_err(to_py_err)?;
    Ok((
        part.assignment().to_vec(),
        serde_json::to_string(&stats).unwrap(),
    ))
}

/// Balanced k-way partitioning. Returns the node assignment and a JSON
/// stats string.
#[pyfunction]
#[pyo3(signature = (hg, k, epsilon = 0.03, pi = 4, theta = 16, seed = 0))]
fn partition_kway(
    hg: &PyHypergraph,
    k: usize,
    epsilon: f64,
    pi: usize,
    theta: usize,
    seed: u64,
) -> PyResult<(Vec<usize>, String)> {
    let cfg = PartitionerConfig {
        mode: Mode::KWay,
        k,
        epsilon,
        pi,
        theta,
        seed,
        ..Default::default()
    };
    let (part, stats) = dhpart::partition_kway(&hg.inner, &cfg).map_err(to_py_err)?;
    Ok((
        part.assignment().to_vec(),
        serde_json::to_string(&stats).unwrap(),
    ))
}

#[pyfunction]
fn connectivity(hg: &PyHypergraph, assignment: Vec<usize>) -> PyResult<f64> {
    check_assignment(hg, &assignment)?;
    Ok(dhpart::connectivity(&hg.inner, &assignment))
}

#[pyfunction]
fn cut_net(hg: &PyHypergraph, assignment: Vec<usize>) -> PyResult<f64> {
    check_assignment(hg, &assignment)?;
    Ok(dhpart::cut_net(&hg.inner, &assignment))
}

fn check_assignment(hg: &PyHypergraph, assignment: &[usize]) -> PyResult<()> {
    if assignment.len() != hg.inner.num_nodes() {
        return Err(PyValueError::new_err(format!(
            "assignment has {} entries for {} nodes",
            assignment.len(),
            hg.inner.num_nodes()
        )));
    }
    Ok(())
}

/// Lists constraint violations as strings; an empty list means valid.
#[pyfunction]
#[pyo3(signature = (hg, assignment, omega = None, delta = None))]
fn validate(
    hg: &PyHypergraph,
    assignment: Vec<usize>,
    omega: Option<usize>,
    delta: Option<usize>,
) -> PyResult<Vec<String>> {
    check_assignment(hg, &assignment)?;
    let cons = Constraints::new(omega, delta);
    let report = dhpart::validate_partitioning(&hg.inner, &assignment, &cons);
    Ok(report.violations.iter().map(|v| format!("{v:?}")).collect())
}

/// Greedy one-pass baseline partitioning.
#[pyfunction]
#[pyo3(signature = (hg, omega = None, delta = None))]
fn one_pass(
    hg: &PyHypergraph,
    omega: Option<usize>,
    delta: Option<usize>,
) -> PyResult<Vec<usize>> {
    let cons = Constraints::new(omega, delta);
    oracle::one_pass(&hg.inner, &cons).map_err(to_py_err)
}

/// Writes a partition file (ids compacted over nonempty partitions).
#[pyfunction]
fn write_partition(assignment: Vec<usize>, path: &str) -> PyResult<()> {
    io::write_partition(&assignment, path).map_err(to_py_err)
}

#[pymodule]
fn dhpart_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHypergraph>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(partition_constrained, m)?)?;
    m.add_function(wrap_pyfunction!(partition_kway, m)?)?;
    m.add_function(wrap_pyfunction!(connectivity, m)?)?;
    m.add_function(wrap_pyfunction!(cut_net, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(one_pass, m)?)?;
    m.add_function(wrap_pyfunction!(write_partition, m)?)?;
    Ok(())
}
