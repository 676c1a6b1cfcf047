//! Python bindings for `oqw`.
//!
//! Matrices cross the boundary as lists of rows of Python `complex`; walk
//! states are opaque `WalkState` objects. Errors from the core crate surface
//! as `ValueError`.

use oqw::analysis::{self, ChainParams, Rounding};
use oqw::channels::{self, ChannelKind};
use oqw::circuit::{self, AncillaPolicy, CostModel, StepOrder};
use oqw::dilation::{self, ResourceMethod};
use oqw::random::{random_chain, SeededRng};
use oqw::{matrixkit, ComplexMatrix, DiagonalState, LinearChainSpec, OqwError, C64};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

type Rows = Vec<Vec<C64>>;

fn err(e: OqwError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: &Rows) -> PyResult<ComplexMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("matrix rows have unequal lengths"));
    }
    Ok(ComplexMatrix::from_rows(rows))
}

fn to_rows(m: &ComplexMatrix) -> Rows {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| m[(r, c)]).collect()).collect()
}

fn params(n_nodes: usize, omega: f64) -> PyResult<ChainParams> {
    ChainParams::new(n_nodes, omega).map_err(err)
}

fn parse_rounding(s: &str) -> PyResult<Rounding> {
    match s {
        "exact" => Ok(Rounding::Exact),
        "ceil" => Ok(Rounding::Ceil),
        "tables" => Ok(Rounding::ResourceTables),
        other => Err(PyValueError::new_err(format!(
            "unknown rounding '{other}' (expected exact, ceil or tables)"
        ))),
    }
}

fn parse_cost_model(s: &str) -> PyResult<CostModel> {
    match s {
        "linear" => Ok(CostModel::linear()),
        "quadratic" => Ok(CostModel::quadratic()),
        other => Err(PyValueError::new_err(format!("unknown cost model '{other}'"))),
    }
}

/// Closed-form steady-state node distribution of the chain.
#[pyfunction]
fn steady_state(n_nodes: usize, omega: f64) -> PyResult<Vec<f64>> {
    analysis::steady_state(&params(n_nodes, omega)?).map_err(err)
}

/// Steady-state probability of the last node.
#[pyfunction]
fn success_probability(n_nodes: usize, omega: f64) -> PyResult<f64> {
    analysis::success_probability(&params(n_nodes, omega)?).map_err(err)
}

/// Smallest ω whose asymptotic success probability reaches `eta`.
#[pyfunction]
fn omega_for_success(eta: f64) -> PyResult<f64> {
    analysis::omega_for_success(eta).map_err(err)
}

/// Steps for the drifting profile to reach the last node.
#[pyfunction]
#[pyo3(signature = (n_nodes, omega, rounding = "tables"))]
fn estimate_steps(n_nodes: usize, omega: f64, rounding: &str) -> PyResult<usize> {
    analysis::estimate_steps(&params(n_nodes, omega)?, parse_rounding(rounding)?).map_err(err)
}

/// Master-equation distribution after `steps` steps from node `start`.
#[pyfunction]
#[pyo3(signature = (n_nodes, omega, steps, start = 0))]
fn master_profile(n_nodes: usize, omega: f64, steps: usize, start: usize) -> PyResult<Vec<f64>> {
    if start >= n_nodes {
        return Err(PyValueError::new_err("start node out of range"));
    }
    let p = params(n_nodes, omega)?;
    analysis::iterate_master(&analysis::delta(n_nodes, start), &p, steps).map_err(err)
}

/// Drift-diffusion Gaussian sampled on the nodes and normalized.
#[pyfunction]
fn gaussian_profile(n_nodes: usize, omega: f64, steps: usize) -> PyResult<Vec<f64>> {
    analysis::discretized_gaussian(steps, &params(n_nodes, omega)?).map_err(err)
}

#[pyfunction]
fn total_variation(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    if a.len() != b.len() {
        return Err(PyValueError::new_err("distributions have different lengths"));
    }
    Ok(analysis::total_variation(&a, &b))
}

#[pyfunction]
fn trace_distance(a: Rows, b: Rows) -> PyResult<f64> {
    matrixkit::trace_distance(&to_matrix(&a)?, &to_matrix(&b)?).map_err(err)
}

#[pyfunction]
fn dephasing_channel(p: f64, rho: Rows) -> PyResult<Rows> {
    Ok(to_rows(&channels::dephasing_channel(p, &to_matrix(&rho)?)))
}

#[pyfunction]
fn depolarizing_channel(strength: f64, rho: Rows) -> PyResult<Rows> {
    Ok(to_rows(&channels::depolarizing_channel(strength, &to_matrix(&rho)?)))
}

/// Realizes a channel with a walk and compares the post-selected limit with
/// the channel applied directly.
#[pyfunction]
#[pyo3(signature = (channel, param, rho, omega = 2.0 / 3.0, max_steps = 10_000, tol = oqw::DEFAULT_TOL))]
fn channel_report<'py>(
    py: Python<'py>,
    channel: &str,
    param: f64,
    rho: Rows,
    omega: f64,
    max_steps: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let kind: ChannelKind = channel.parse().map_err(err)?;
    let r = channels::channel_report(kind, param, omega, &to_matrix(&rho)?, max_steps, tol).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("channel", r.channel)?;
    d.set_item("param", r.param)?;
    d.set_item("trace_distance_to_analytic", r.trace_distance_to_analytic)?;
    d.set_item("steps_to_converge", r.steps_to_converge)?;
    Ok(d)
}

/// Dimension and cost estimates for one dilation method.
#[pyfunction]
fn resource_report<'py>(py: Python<'py>, method: &str, dh: u64, g: u64, n: u64) -> PyResult<Bound<'py, PyDict>> {
    let m: ResourceMethod = method.parse().map_err(err)?;
    let r = dilation::resource_report(m, dh, g, n);
    let d = PyDict::new(py);
    d.set_item("method", r.method)?;
    d.set_item("dH", r.dh)?;
    d.set_item("G", r.g)?;
    d.set_item("n", r.n)?;
    d.set_item("dim_per_step", r.dim_per_step)?;
    d.set_item("dim_total", r.dim_total)?;
    d.set_item("cnot_estimate", r.cnot_estimate)?;
    d.set_item("depth_estimate", r.depth_estimate)?;
    Ok(d)
}

/// Block-diagonal walk state, one walker block per node.
#[pyclass(module = "oqw_py", skip_from_py_object)]
#[derive(Clone)]
struct WalkState {
    inner: DiagonalState,
}

#[pymethods]
impl WalkState {
    #[new]
    fn new(blocks: Vec<Rows>) -> PyResult<Self> {
        let blocks = blocks.iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: DiagonalState::new(blocks).map_err(err)?,
        })
    }

    /// All mass on `node` with walker state `rho`.
    #[staticmethod]
    fn localized(n_nodes: usize, node: usize, rho: Rows) -> PyResult<Self> {
        Ok(Self {
            inner: DiagonalState::localized(n_nodes, node, &to_matrix(&rho)?).map_err(err)?,
        })
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    #[getter]
    fn walker_dim(&self) -> usize {
        self.inner.walker_dim()
    }

    fn blocks(&self) -> Vec<Rows> {
        self.inner.blocks().iter().map(to_rows).collect()
    }

    fn node_distribution(&self) -> Vec<f64> {
        oqw::walk::node_distribution(&self.inner)
    }

    fn total_trace(&self) -> f64 {
        self.inner.total_trace()
    }

    /// Largest trace distance between corresponding blocks.
    fn distance(&self, other: &WalkState) -> PyResult<f64> {
        self.inner.max_block_distance(&other.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "WalkState(n_nodes={}, walker_dim={}, trace={:.6})",
            self.inner.n_nodes(),
            self.inner.walker_dim(),
            self.inner.total_trace()
        )
    }
}

/// Linear chain with step unitaries `U_0..U_{N-2}`.
#[pyclass(module = "oqw_py", skip_from_py_object)]
#[derive(Clone)]
struct Chain {
    inner: LinearChainSpec,
}

impl Chain {
    fn circuit(&self, steps: usize, order: &str) -> PyResult<circuit::Circuit> {
        let order = match order {
            "right" => StepOrder::RightFirst,
            "left" => StepOrder::LeftFirst,
            other => return Err(PyValueError::new_err(format!("unknown step order '{other}'"))),
        };
        Ok(circuit::build_walk(&self.inner, steps, AncillaPolicy::Reuse, order))
    }
}

#[pymethods]
impl Chain {
    #[new]
    fn new(n_nodes: usize, omega: f64, unitaries: Vec<Rows>) -> PyResult<Self> {
        let us = unitaries.iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: LinearChainSpec::new(n_nodes, omega, us).map_err(err)?,
        })
    }

    #[staticmethod]
    fn identity(n_nodes: usize, omega: f64, dh: usize) -> PyResult<Self> {
        Ok(Self {
            inner: LinearChainSpec::identity_chain(n_nodes, omega, dh).map_err(err)?,
        })
    }

    /// Haar-random step unitaries from a seeded generator.
    #[staticmethod]
    #[pyo3(signature = (n_nodes, dh, omega, seed = 0))]
    fn random(n_nodes: usize, dh: usize, omega: f64, seed: u64) -> PyResult<Self> {
        params(n_nodes, omega)?;
        if dh == 0 {
            return Err(PyValueError::new_err("walker dimension must be positive"));
        }
        Ok(Self {
            inner: random_chain(&mut SeededRng::new(seed), n_nodes, dh, omega),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: oqw::io::chain_from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        oqw::io::chain_to_json(&self.inner)
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega()
    }

    #[getter]
    fn walker_dim(&self) -> usize {
        self.inner.walker_dim()
    }

    fn unitaries(&self) -> Vec<Rows> {
        self.inner.unitaries().iter().map(to_rows).collect()
    }

    #[pyo3(signature = (state, steps = 1))]
    fn evolve(&self, state: &WalkState, steps: usize) -> PyResult<WalkState> {
        let spec = oqw::walk::chain_to_spec(&self.inner);
        Ok(WalkState {
            inner: oqw::walk::evolve(&spec, &state.inner, steps).map_err(err)?,
        })
    }

    /// Same evolution, one step at a time through the local dilation unitary.
    #[pyo3(signature = (state, steps = 1))]
    fn evolve_dilated(&self, state: &WalkState, steps: usize) -> PyResult<WalkState> {
        let u = dilation::build_u_loc(&self.inner);
        let mut s = state.inner.clone();
        for _ in 0..steps {
            s = dilation::step_via_dilation(&u, &s).map_err(err)?;
        }
        Ok(WalkState { inner: s })
    }

    /// Same evolution, simulated gate by gate on the compiled circuit.
    #[pyo3(signature = (state, steps = 1, order = "right"))]
    fn evolve_circuit(&self, state: &WalkState, steps: usize, order: &str) -> PyResult<WalkState> {
        let c = self.circuit(steps, order)?;
        Ok(WalkState {
            inner: circuit::simulate_density(&c, &state.inner).map_err(err)?,
        })
    }

    /// Largest deviation of the local dilation from unitarity.
    fn dilation_deviation(&self) -> f64 {
        dilation::build_u_loc(&self.inner).unitarity_deviation()
    }

    #[pyo3(signature = (steps, order = "right"))]
    fn circuit_qasm(&self, steps: usize, order: &str) -> PyResult<String> {
        Ok(circuit::to_qasm(&self.circuit(steps, order)?))
    }

    /// `(cnot, depth)` of the compiled walk under a cost model.
    #[pyo3(signature = (steps, cost_model = "linear"))]
    fn circuit_cost(&self, steps: usize, cost_model: &str) -> PyResult<(u64, u64)> {
        let r = circuit::cost_estimate(&self.circuit(steps, "right")?, parse_cost_model(cost_model)?);
        Ok((r.cnot, r.depth))
    }

    fn __repr__(&self) -> String {
        format!(
            "Chain(n_nodes={}, omega={}, walker_dim={})",
            self.inner.n_nodes(),
            self.inner.omega(),
            self.inner.walker_dim()
        )
    }
}

#[pymodule]
fn oqw_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(success_probability, m)?)?;
    m.add_function(wrap_pyfunction!(omega_for_success, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_steps, m)?)?;
    m.add_function(wrap_pyfunction!(master_profile, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_profile, m)?)?;
    m.add_function(wrap_pyfunction!(total_variation, m)?)?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(dephasing_channel, m)?)?;
    m.add_function(wrap_pyfunction!(depolarizing_channel, m)?)?;
    m.add_function(wrap_pyfunction!(channel_report, m)?)?;
    m.add_function(wrap_pyfunction!(resource_report, m)?)?;
    m.add_class::<WalkState>()?;
    m.add_class::<Chain>()?;
    Ok(())
}
