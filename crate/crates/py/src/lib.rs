//! Python bindings: `import braidwork`.
//!
//! Circuits cross the boundary as `Circuit` objects; moves and logs travel as
//! their `.moves` text so they stay readable on the Python side.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use braidwork::canonical::{layout_canonical, CanonicalLayoutParams};
use braidwork::geometry::{bounding_volume, occupied_pieces, validate_geometry, TopoCircuit};
use braidwork::icm::{clifford_t_to_icm, parse_gates, parse_icm};
use braidwork::moves::{apply_move, enumerate_moves, replay as replay_log, Move, MoveLog};
use braidwork::optimizer::{optimize as run_optimize, Objective, SearchConfig, Strategy};
use braidwork::resources::{self, Code, ErrorModel};
use braidwork::service::Service as CoreService;
use braidwork::topology::{linking_matrix, signature, signatures_equal};
use braidwork::tqc::{circuit_digest, parse_tqc, to_tqc};

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A defect geometry: strands in a lattice box.
#[pyclass(name = "Circuit", module = "braidwork", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCircuit {
    inner: TopoCircuit,
}

#[pymethods]
impl PyCircuit {
    #[staticmethod]
    fn from_tqc(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_tqc(text).map_err(value_err)? })
    }

    fn to_tqc(&self) -> String {
        to_tqc(&self.inner)
    }

    /// SHA-256 of the canonical `.tqc` bytes.
    fn digest(&self) -> String {
        circuit_digest(&self.inner)
    }

    /// Tight bounding volume in plumbing pieces.
    fn volume(&self) -> i64 {
        bounding_volume(&self.inner)
    }

    fn occupied_cells(&self) -> usize {
        occupied_pieces(&self.inner).len()
    }

    fn extents(&self) -> Option<[i64; 3]> {
        self.inner.tight_extents()
    }

    fn strand_ids(&self) -> Vec<String> {
        self.inner.strands.iter().map(|s| s.id.clone()).collect()
    }

    /// Violation messages; empty when the geometry is valid.
    fn validate(&self) -> Vec<String> {
        validate_geometry(&self.inner).violations.iter().map(|v| v.to_string()).collect()
    }

    /// Nonzero linking numbers keyed by ordered strand-id pairs.
    fn linking(&self) -> PyResult<BTreeMap<(String, String), i64>> {
        let m = linking_matrix(&self.inner).map_err(value_err)?;
        Ok(m.nonzero().map(|(a, b, v)| ((a.to_string(), b.to_string()), v)).collect())
    }

    /// Whether the two circuits carry the same topological signature.
    fn same_signature(&self, other: &PyCircuit) -> PyResult<bool> {
        let a = signature(&self.inner).map_err(value_err)?;
        let b = signature(&other.inner).map_err(value_err)?;
        Ok(signatures_equal(&a, &b).is_equal())
    }

    /// Applies one `.moves` record, e.g. `"slide q0 1 0 -1 0 1"`.
    fn apply(&self, mv: &str) -> PyResult<Self> {
        let m: Move = mv.parse().map_err(value_err)?;
        Ok(Self { inner: apply_move(&self.inner, &m).map_err(value_err)? })
    }

    /// Legal moves as `.moves` records, in enumeration order.
    #[pyo3(signature = (budget = 5000))]
    fn moves(&self, budget: usize) -> Vec<String> {
        enumerate_moves(&self.inner, budget).iter().map(|m| m.to_string()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Circuit(strands={}, volume={})", self.inner.strands.len(), bounding_volume(&self.inner))
    }
}

/// Canonical layout of `.icm` text (or Clifford+T gate text with `gates=True`).
#[pyfunction]
#[pyo3(signature = (text, gates = false))]
fn compile(text: &str, gates: bool) -> PyResult<PyCircuit> {
    let icm = if gates {
        let (n, gs) = parse_gates(text).map_err(value_err)?;
        clifford_t_to_icm(n, &gs).map_err(value_err)?
    } else {
        parse_icm(text).map_err(value_err)?
    };
    let inner = layout_canonical(&icm, &CanonicalLayoutParams::default()).map_err(value_err)?;
    Ok(PyCircuit { inner })
}

/// Runs the optimizer; returns `(final circuit, .moves text, trace CSV)`.
#[pyfunction]
#[pyo3(signature = (circuit, strategy = "greedy", seed = 0, max_steps = 200, objective = "bounding_volume", beam_width = 4))]
fn optimize(
    py: Python<'_>,
    circuit: &PyCircuit,
    strategy: &str,
    seed: u64,
    max_steps: usize,
    objective: &str,
    beam_width: usize,
) -> PyResult<(PyCircuit, String, String)> {
    let strategy = match strategy {
        "greedy" => Strategy::Greedy,
        "anneal" => Strategy::Anneal,
        "beam" => Strategy::Beam,
        other => return Err(value_err(format!("unknown strategy {other}"))),
    };
    let objective = match objective {
        "bounding_volume" => Objective::BoundingVolume,
        "occupied_cells" => Objective::OccupiedCells,
        other => return Err(value_err(format!("unknown objective {other}"))),
    };
    let cfg = SearchConfig { strategy, seed, max_steps, objective, beam_width, ..Default::default() };
    cfg.validate().map_err(value_err)?;
    let c = circuit.inner.clone();
    let r = py.detach(move || run_optimize(&c, &cfg));
    Ok((PyCircuit { inner: r.final_circuit.clone() }, r.log.to_text(), r.trace_csv()))
}

/// Replays `.moves` text against `base`.
#[pyfunction]
fn replay(base: &PyCircuit, moves: &str) -> PyResult<PyCircuit> {
    let log = MoveLog::parse(moves).map_err(value_err)?;
    Ok(PyCircuit { inner: replay_log(&base.inner, &log).map_err(value_err)? })
}

fn parse_code(code: &str) -> PyResult<Code> {
    code.parse().map_err(value_err)
}

#[pyfunction]
fn qubits_per_piece(code: &str, d: u32) -> PyResult<u64> {
    resources::qubits_per_piece(parse_code(code)?, d).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (d, code = "surface"))]
fn steps_per_piece(d: u32, code: &str) -> PyResult<u64> {
    resources::steps_per_piece(parse_code(code)?, d).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (volume, p_phys, eps, p_th = 0.01, prefactor = 0.1))]
fn select_distance(volume: u64, p_phys: f64, eps: f64, p_th: f64, prefactor: f64) -> PyResult<u32> {
    resources::select_distance(volume, &ErrorModel { p_phys, p_th, prefactor }, eps).map_err(value_err)
}

/// Resource report as a `key: value` string.
#[pyfunction]
#[pyo3(signature = (circuit, code = "surface", p_phys = 1e-3, eps = 1e-9, d = None))]
fn estimate(circuit: &PyCircuit, code: &str, p_phys: f64, eps: f64, d: Option<u32>) -> PyResult<String> {
    let model = ErrorModel::new(p_phys);
    let code = parse_code(code)?;
    let r = match d {
        Some(d) => resources::estimate_at(&circuit.inner, code, d, &model, eps),
        None => resources::estimate(&circuit.inner, code, &model, eps),
    };
    Ok(r.map_err(value_err)?.to_text())
}

/// In-process puzzle service speaking the line protocol.
#[pyclass(name = "Service", module = "braidwork", frozen)]
struct PyService {
    inner: CoreService,
}

#[pymethods]
impl PyService {
    #[new]
    fn new(data_dir: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: CoreService::open(&data_dir).map_err(|e| PyIOError::new_err(e.to_string()))? })
    }

    /// One JSON request line in, one JSON response line out.
    fn request(&self, line: &str) -> String {
        self.inner.handle_line(line)
    }
}

#[pymodule]
#[pyo3(name = "braidwork")]
fn braidwork_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyService>()?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(qubits_per_piece, m)?)?;
    m.add_function(wrap_pyfunction!(steps_per_piece, m)?)?;
    m.add_function(wrap_pyfunction!(select_distance, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    Ok(())
}
