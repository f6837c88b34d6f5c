//! Python bindings: `import discord_merge`.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::discord_merge as dm;
use ::discord_merge::linalg::CMatrix;
use ::discord_merge::states::BellState;

create_exception!(discord_merge, DiscordMergeError, PyValueError, "Validation or computation failure; the message starts with the violated invariant.");

/// `(re, im)` parts of a complex matrix as nested lists.
type MatrixLists = (Vec<Vec<f64>>, Vec<Vec<f64>>);

fn err(e: dm::Error) -> PyErr {
    DiscordMergeError::new_err(e.to_string())
}

fn matrix_from_lists(re: Vec<Vec<f64>>, im: Option<Vec<Vec<f64>>>) -> PyResult<CMatrix> {
    let m = dm::io::MatrixJson { dims: None, re, im: im.unwrap_or_default() };
    m.to_matrix().map_err(err)
}

fn matrix_to_lists(m: &CMatrix) -> MatrixLists {
    let rows = |f: fn(&Complex64) -> f64| (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect()).collect();
    (rows(|z| z.re), rows(|z| z.im))
}

/// Validated density matrix on a tensor product of subsystems.
#[pyclass(name = "DensityMatrix", module = "discord_merge", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: dm::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// Builds a state from nested lists of real and (optionally) imaginary
    /// parts. `dims` defaults to a single subsystem.
    #[new]
    #[pyo3(signature = (re, im = None, dims = None))]
    fn new(re: Vec<Vec<f64>>, im: Option<Vec<Vec<f64>>>, dims: Option<Vec<usize>>) -> PyResult<Self> {
        let m = matrix_from_lists(re, im)?;
        let dims = dims.unwrap_or_else(|| vec![m.nrows()]);
        Ok(Self { inner: dm::DensityMatrix::new(m, dims).map_err(err)? })
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    /// Von Neumann entropy in bits.
    fn entropy(&self) -> f64 {
        self.inner.entropy().get()
    }

    fn partial_trace(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.partial_trace(&keep).map_err(err)? })
    }

    fn tensor(&self, other: &PyDensityMatrix) -> Self {
        Self { inner: self.inner.tensor(&other.inner) }
    }

    /// `(re, im)` as nested lists.
    fn to_lists(&self) -> MatrixLists {
        matrix_to_lists(self.inner.data())
    }

    fn to_json(&self) -> String {
        dm::io::density_to_json(&self.inner)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: dm::io::density_from_json(text).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dims={:?}, purity={:.6})", self.inner.dims(), self.inner.purity())
    }
}

/// Measurement on the second subsystem.
#[pyclass(name = "Measurement", module = "discord_merge", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMeasurement {
    inner: dm::Measurement,
}

#[pymethods]
impl PyMeasurement {
    /// Qubit projective measurement along the Bloch direction (theta, phi).
    #[staticmethod]
    fn projective_qubit(theta: f64, phi: f64) -> Self {
        Self { inner: dm::Measurement::projective_qubit(theta, phi) }
    }

    #[staticmethod]
    fn computational(d: usize) -> Self {
        Self { inner: dm::Measurement::computational(d) }
    }

    /// Elements given as `(re, im)` pairs of nested lists.
    #[staticmethod]
    #[pyo3(signature = (elements, projective = false))]
    fn from_elements(elements: Vec<MatrixLists>, projective: bool) -> PyResult<Self> {
        let elements = elements.into_iter().map(|(re, im)| matrix_from_lists(re, Some(im))).collect::<PyResult<Vec<_>>>()?;
        let kind = if projective { dm::MeasurementKind::ProjectiveRank1 } else { dm::MeasurementKind::Povm };
        Ok(Self { inner: dm::Measurement::new(elements, kind).map_err(err)? })
    }

    #[getter]
    fn num_outcomes(&self) -> usize {
        self.inner.num_outcomes()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind() {
            dm::MeasurementKind::ProjectiveRank1 => "projective",
            dm::MeasurementKind::Povm => "povm",
        }
    }

    #[getter]
    fn params(&self) -> Option<Vec<f64>> {
        self.inner.params().map(<[f64]>::to_vec)
    }

    fn elements(&self) -> Vec<MatrixLists> {
        self.inner.elements().iter().map(matrix_to_lists).collect()
    }

    fn __repr__(&self) -> String {
        format!("Measurement(kind={:?}, outcomes={})", self.kind(), self.inner.num_outcomes())
    }
}

fn config(grid_theta: usize, grid_phi: usize, multistarts: usize, seed: u64, povm: bool) -> dm::OptimizerConfig {
    dm::OptimizerConfig { grid_theta, grid_phi, multistarts, seed, povm, ..dm::OptimizerConfig::default() }
}

#[pyfunction]
fn werner(p: f64) -> PyResult<PyDensityMatrix> {
    Ok(PyDensityMatrix { inner: dm::states::werner(p).map_err(err)? })
}

/// One of "phi_plus", "phi_minus", "psi_plus", "psi_minus".
#[pyfunction]
#[pyo3(signature = (which = "phi_plus"))]
fn bell(which: &str) -> PyResult<PyDensityMatrix> {
    let which = match which {
        "phi_plus" => BellState::PhiPlus,
        "phi_minus" => BellState::PhiMinus,
        "psi_plus" => BellState::PsiPlus,
        "psi_minus" => BellState::PsiMinus,
        other => return Err(err(dm::Error::InvalidParams(format!("unknown Bell state {other:?}")))),
    };
    Ok(PyDensityMatrix { inner: dm::states::bell(which) })
}

#[pyfunction]
fn bell_diagonal(probs: [f64; 4]) -> PyResult<PyDensityMatrix> {
    Ok(PyDensityMatrix { inner: dm::states::bell_diagonal(probs).map_err(err)? })
}

/// Hilbert-Schmidt (full rank) or lower-rank Ginibre random state.
#[pyfunction]
#[pyo3(signature = (dims, seed, rank = None))]
fn random_state(dims: Vec<usize>, seed: u64, rank: Option<usize>) -> PyResult<PyDensityMatrix> {
    let spec = dm::StateSpec::seeded(dm::Family::RandomGinibre { dims, rank }, seed);
    Ok(PyDensityMatrix { inner: dm::make(&spec).map_err(err)? })
}

#[pyfunction]
fn random_pure(dims: Vec<usize>, seed: u64) -> PyResult<PyDensityMatrix> {
    Ok(PyDensityMatrix { inner: dm::states::random_pure(&dims, seed).map_err(err)?.density() })
}

#[pyfunction]
fn mutual_information(rho: &PyDensityMatrix) -> PyResult<f64> {
    Ok(dm::mutual_information(&rho.inner).map_err(err)?.get())
}

/// Merging cost `S(A|B)`.
#[pyfunction]
fn merge_cost(rho: &PyDensityMatrix) -> PyResult<f64> {
    Ok(dm::merge_cost(&rho.inner).map_err(err)?.get())
}

/// Discord `D(A|B)` with the optimal measurement on B.
#[pyfunction]
#[pyo3(signature = (rho, grid_theta = 24, grid_phi = 48, multistarts = 8, seed = 0, povm = false))]
fn discord<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    grid_theta: usize,
    grid_phi: usize,
    multistarts: usize,
    seed: u64,
    povm: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config(grid_theta, grid_phi, multistarts, seed, povm);
    let d = dm::discord(&rho.inner, &cfg).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("dims", d.dims.clone())?;
    out.set_item("mutual_info", d.mutual_info.get())?;
    out.set_item("classical_corr", d.classical_corr.get())?;
    out.set_item("discord", d.discord.get())?;
    out.set_item("markup_check", d.markup_check)?;
    out.set_item("converged", d.converged)?;
    out.set_item("povm_classical_corr", d.povm_classical_corr.map(|b| b.get()))?;
    out.set_item("best_measurement", PyMeasurement { inner: d.best_measurement })?;
    Ok(out)
}

/// Merging costs before and after measuring B, their difference, and the
/// ancilla-simulation transcript.
#[pyfunction]
fn merge_markup<'py>(py: Python<'py>, rho: &PyDensityMatrix, measurement: &PyMeasurement) -> PyResult<Bound<'py, PyDict>> {
    let l = dm::merge_markup(&rho.inner, &measurement.inner).map_err(err)?;
    let t = PyDict::new(py);
    t.set_item("ancilla_dim", l.transcript.ancilla_dim)?;
    t.set_item("unitary_sha256", &l.transcript.unitary_sha256)?;
    t.set_item("cond_entropy_with_ancilla", l.transcript.cond_entropy_with_ancilla.get())?;
    t.set_item("mutual_info_with_ancilla", l.transcript.mutual_info_with_ancilla.get())?;
    t.set_item("mutual_info_after", l.transcript.mutual_info_after.get())?;
    t.set_item("outcome_probs", l.transcript.outcome_probs.clone())?;
    let out = PyDict::new(py);
    out.set_item("cost_before", l.cost_before.get())?;
    out.set_item("cost_after", l.cost_after.get())?;
    out.set_item("markup", l.markup.get())?;
    out.set_item("ebits_distillable_before", l.ebits_distillable_before)?;
    out.set_item("transcript", t)?;
    Ok(out)
}

/// `S(A|B) - S(A|BC)` of a tripartite state.
#[pyfunction]
fn check_ssa(rho: &PyDensityMatrix) -> PyResult<f64> {
    dm::check_ssa(&rho.inner).map_err(err)
}

/// Local purity rate report; computes the discord with default settings.
#[pyfunction]
fn local_purity_rate<'py>(py: Python<'py>, rho: &PyDensityMatrix) -> PyResult<Bound<'py, PyDict>> {
    let d = dm::discord(&rho.inner, &dm::OptimizerConfig::default()).map_err(err)?;
    let r = dm::local_purity_rate(&rho.inner, &d).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("log_dim", r.log_dim)?;
    out.set_item("joint_entropy", r.joint_entropy.get())?;
    out.set_item("discord_used", r.discord_used.get())?;
    out.set_item("kappa", r.kappa)?;
    out.set_item("regularization_caveat", r.regularization_caveat)?;
    out.set_item("deficit_note", r.deficit_note)?;
    Ok(out)
}

/// `(zero_discord, residual)` from the structural test.
#[pyfunction]
#[pyo3(signature = (rho, tol = 1e-7))]
fn is_zero_discord(rho: &PyDensityMatrix, tol: f64) -> PyResult<(bool, f64)> {
    let t = dm::is_zero_discord(&rho.inner, tol).map_err(err)?;
    Ok((t.zero_discord, t.residual))
}

#[pymodule]
#[pyo3(name = "discord_merge")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DiscordMergeError", m.py().get_type::<DiscordMergeError>())?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyMeasurement>()?;
    m.add_function(wrap_pyfunction!(werner, m)?)?;
    m.add_function(wrap_pyfunction!(bell, m)?)?;
    m.add_function(wrap_pyfunction!(bell_diagonal, m)?)?;
    m.add_function(wrap_pyfunction!(random_state, m)?)?;
    m.add_function(wrap_pyfunction!(random_pure, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(merge_cost, m)?)?;
    m.add_function(wrap_pyfunction!(discord, m)?)?;
    m.add_function(wrap_pyfunction!(merge_markup, m)?)?;
    m.add_function(wrap_pyfunction!(check_ssa, m)?)?;
    m.add_function(wrap_pyfunction!(local_purity_rate, m)?)?;
    m.add_function(wrap_pyfunction!(is_zero_discord, m)?)?;
    Ok(())
}
