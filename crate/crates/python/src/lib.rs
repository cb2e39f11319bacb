//! Python bindings: circuits, topologies, QUBO models and the kernel entry
//! points. Structured results come back as plain dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use qstack::compiler::{self, CompileOptions, PlacementStrategy};
use qstack::ir;
use qstack::kernels::{self, AlignOptions, AlignmentQuery, Iterations, RbConfig, ReferenceIndex};
use qstack::optimizer::{self, AnnealSchedule, TspInstance};
use qstack::simulator::{self, NoiseModel, RunOptions};

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl ToString) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn from_json<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn noise(spec: &str) -> PyResult<NoiseModel> {
    spec.parse().map_err(value_err)
}

#[pyclass(name = "Circuit", from_py_object)]
#[derive(Clone)]
struct PyCircuit {
    inner: ir::Circuit,
}

#[pymethods]
impl PyCircuit {
    /// Parse assembly text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        ir::parse(text).map(|inner| PyCircuit { inner }).map_err(value_err)
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    #[getter]
    fn gate_count(&self) -> usize {
        self.inner.gate_count()
    }

    #[getter]
    fn num_bundles(&self) -> usize {
        self.inner.bundles().len()
    }

    fn to_text(&self) -> String {
        ir::print(&self.inner)
    }

    fn __str__(&self) -> String {
        self.to_text()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

#[pyclass(name = "Topology", from_py_object)]
#[derive(Clone)]
struct PyTopology {
    inner: compiler::Topology,
}

#[pymethods]
impl PyTopology {
    #[staticmethod]
    fn grid(rows: usize, cols: usize) -> PyResult<Self> {
        compiler::Topology::grid(rows, cols).map(|inner| PyTopology { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn line(n: usize) -> PyResult<Self> {
        compiler::Topology::line(n).map(|inner| PyTopology { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        compiler::Topology::from_json(text).map(|inner| PyTopology { inner }).map_err(value_err)
    }

    #[getter]
    fn num_positions(&self) -> usize {
        self.inner.num_positions()
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.inner.adjacent(a, b)
    }
}

#[pyclass(name = "QuboModel", from_py_object)]
#[derive(Clone)]
struct PyQuboModel {
    inner: optimizer::QuboModel,
}

#[pymethods]
impl PyQuboModel {
    #[new]
    #[pyo3(signature = (n, offset = 0.0))]
    fn new(n: usize, offset: f64) -> Self {
        let mut inner = optimizer::QuboModel::new(n);
        inner.set_offset(offset);
        PyQuboModel { inner }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        optimizer::QuboModel::from_json(text).map(|inner| PyQuboModel { inner }).map_err(value_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Add `c` to the coefficient of `x_i x_j`.
    fn add(&mut self, i: usize, j: usize, c: f64) -> PyResult<()> {
        self.inner.add(i, j, c).map_err(value_err)
    }

    fn evaluate(&self, bits: Vec<u8>) -> PyResult<f64> {
        self.inner.evaluate(&bits).map_err(value_err)
    }

    /// Exhaustive minimum as `(bits, energy)`.
    fn brute_force(&self) -> PyResult<(Vec<u8>, f64)> {
        let a = optimizer::brute_force(&self.inner).map_err(value_err)?;
        Ok((a.bits, a.energy))
    }

    #[pyo3(signature = (restarts = 25, sweeps = 5000, seed = 0))]
    fn anneal(&self, restarts: usize, sweeps: usize, seed: u64) -> PyResult<(Vec<u8>, f64)> {
        let schedule = AnnealSchedule {
            sweeps,
            ..Default::default()
        };
        let r = optimizer::anneal(&self.inner, &schedule, restarts, seed).map_err(value_err)?;
        Ok((r.best.bits, r.best.energy))
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

/// Sample a circuit; returns `{"shots", "seed", "histogram"}`.
#[pyfunction]
#[pyo3(signature = (circuit, noise_spec = "perfect", shots = 1024, seed = 0))]
fn simulate<'py>(
    py: Python<'py>,
    circuit: &PyCircuit,
    noise_spec: &str,
    shots: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let summary = simulator::run_with(&circuit.inner, &noise(noise_spec)?, shots, seed, &RunOptions::from_env())
        .map_err(runtime_err)?;
    from_json(py, &summary.to_json())
}

/// Compile onto a topology; returns `(scheduled_text, report)`.
#[pyfunction]
#[pyo3(signature = (circuit, topology, placement = "identity"))]
fn compile<'py>(
    py: Python<'py>,
    circuit: &PyCircuit,
    topology: &PyTopology,
    placement: &str,
) -> PyResult<(String, Bound<'py, PyAny>)> {
    let placement: PlacementStrategy = placement.parse().map_err(value_err)?;
    let out = compiler::compile(&circuit.inner, &topology.inner, &CompileOptions { placement }).map_err(runtime_err)?;
    let report = serde_json::to_string(&out.report(circuit.inner.num_qubits())).map_err(runtime_err)?;
    Ok((out.to_qasm(), from_json(py, &report)?))
}

/// Exact or annealed TSP over a distance matrix; returns `(tour, cost)`.
#[pyfunction]
#[pyo3(signature = (weights, method = "anneal", restarts = 25, sweeps = 5000, seed = 0))]
fn solve_tsp(
    weights: Vec<Vec<f64>>,
    method: &str,
    restarts: usize,
    sweeps: usize,
    seed: u64,
) -> PyResult<(Vec<usize>, f64)> {
    let instance = TspInstance::new(weights).map_err(value_err)?;
    match method {
        "brute" => instance.exact_tour().map_err(value_err),
        "anneal" => {
            let (model, decoder) =
                optimizer::encode_tsp(&instance, optimizer::default_penalty(&instance)).map_err(value_err)?;
            let schedule = AnnealSchedule {
                sweeps,
                ..Default::default()
            };
            let r = optimizer::anneal(&model, &schedule, restarts, seed).map_err(value_err)?;
            let tour = decoder
                .decode(&r.best.bits)
                .ok_or_else(|| runtime_err("annealer returned an infeasible assignment"))?;
            let cost = instance.tour_cost(&tour);
            Ok((tour, cost))
        }
        other => Err(value_err(format!("unknown method `{other}`; use `brute` or `anneal`"))),
    }
}

/// Grover alignment of `read` against `reference`.
#[pyfunction]
#[pyo3(signature = (reference, read, max_mismatch = 0, noise_spec = "perfect", shots = 1024, seed = 0, exact_iterations = true))]
#[allow(clippy::too_many_arguments)]
fn grover_align<'py>(
    py: Python<'py>,
    reference: &str,
    read: &str,
    max_mismatch: usize,
    noise_spec: &str,
    shots: u64,
    seed: u64,
    exact_iterations: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let query = AlignmentQuery::new(read, max_mismatch).map_err(value_err)?;
    let index = ReferenceIndex::new(reference, query.read().len()).map_err(value_err)?;
    let options = AlignOptions {
        iterations: if exact_iterations {
            Iterations::Exact
        } else {
            Iterations::UnknownCount
        },
        ..Default::default()
    };
    let result = kernels::grover_align(&index, &query, &noise(noise_spec)?, shots, seed, &options).map_err(runtime_err)?;
    from_json(py, &serde_json::to_string(&result).map_err(runtime_err)?)
}

/// Single-qubit randomized benchmarking.
#[pyfunction]
#[pyo3(signature = (p, lengths = vec![2, 4, 8, 16, 32, 64, 128, 256], sequences = 30, shots = 500, seed = 0))]
fn run_rb<'py>(
    py: Python<'py>,
    p: f64,
    lengths: Vec<usize>,
    sequences: usize,
    shots: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let config = RbConfig {
        sequence_lengths: lengths,
        sequences_per_length: sequences,
        shots,
        gate_error_p: p,
    };
    let result = kernels::run_rb(&config, seed).map_err(runtime_err)?;
    from_json(py, &serde_json::to_string(&result).map_err(runtime_err)?)
}

#[pymodule]
fn pyqstack(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyTopology>()?;
    m.add_class::<PyQuboModel>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(solve_tsp, m)?)?;
    m.add_function(wrap_pyfunction!(grover_align, m)?)?;
    m.add_function(wrap_pyfunction!(run_rb, m)?)?;
    Ok(())
}
