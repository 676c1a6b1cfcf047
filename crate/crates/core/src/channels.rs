//! Quantum channels realized as linear-chain walks.
//!
//! The walker's state on the last node, post-selected and renormalized,
//! converges to a convex combination of unitary conjugations of the initial
//! blocks. Choosing the blocks and the chain unitaries realizes dephasing,
//! depolarizing and general random-unitary channels.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::ChainParams;
use crate::error::{OqwError, Result};
use crate::matrixkit::{gates, is_unitary, trace_distance, ComplexMatrix, C64};
use crate::walk::{chain_to_spec, step, DiagonalState, LinearChainSpec, OqwSpec};

/// Nodes with less mass than this cannot be post-selected.
pub const MIN_POSTSELECT_MASS: f64 = 1e-14;
/// Consecutive sub-tolerance deltas required before iterate mode stops.
const STABLE_WINDOW: usize = 3;

#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub spec: OqwSpec,
    /// Chain unitaries `U_0 … U_{N−2}`; empty for a single-node walk.
    pub unitaries: Vec<ComplexMatrix>,
    pub initial: DiagonalState,
    pub target_node: usize,
    /// Predicted post-selected state on `target_node`.
    pub analytic_limit: ComplexMatrix,
}

/// Sum of the initial blocks, each pushed to the last node through the
/// remaining chain unitaries.
fn pushed_to_last(unitaries: &[ComplexMatrix], initial: &DiagonalState) -> ComplexMatrix {
    let d = initial.walker_dim();
    let mut acc = ComplexMatrix::zeros(d, d);
    for (j, block) in initial.blocks().iter().enumerate() {
        let mut pushed = block.clone();
        for u in &unitaries[j.min(unitaries.len())..] {
            pushed = pushed.conjugate_by(u);
        }
        acc = &acc + &pushed;
    }
    acc
}

impl ChannelRealization {
    fn from_chain(chain: &LinearChainSpec, initial: DiagonalState) -> Self {
        let unitaries = chain.unitaries().to_vec();
        let analytic_limit = pushed_to_last(&unitaries, &initial);
        Self {
            spec: chain_to_spec(chain),
            target_node: chain.n_nodes() - 1,
            unitaries,
            initial,
            analytic_limit,
        }
    }
}

/// Weights `a[i][j]` of the contribution of initial node `j` to node `i`
/// after `n` steps, by the three-case recursion (left end, interior, right
/// end) started from `a[i][j] = δ_ij`.
pub fn coefficient_evolution(p: &ChainParams, n: usize) -> Vec<Vec<f64>> {
    let size = p.n_nodes;
    let (w, l) = (p.omega, p.lambda());
    let mut a: Vec<Vec<f64>> = (0..size)
        .map(|i| (0..size).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..n {
        let next = (0..size)
            .map(|i| {
                (0..size)
                    .map(|j| {
                        if i == 0 {
                            l * a[0][j] + l * a[1][j]
                        } else if i == size - 1 {
                            w * a[size - 2][j] + w * a[size - 1][j]
                        } else {
                            w * a[i - 1][j] + l * a[i + 1][j]
                        }
                    })
                    .collect()
            })
            .collect();
        a = next;
    }
    a
}

/// State after `n` steps rebuilt from [`coefficient_evolution`]: node `i`
/// holds `Σ_j a[i][j] · T ρ_j T†` with `T` the transport from `j` to `i`.
pub fn coefficient_state(chain: &LinearChainSpec, initial: &DiagonalState, n: usize) -> Result<DiagonalState> {
    if initial.n_nodes() != chain.n_nodes() || initial.walker_dim() != chain.walker_dim() {
        return Err(OqwError::DimensionMismatch(
            "initial state does not match the chain".into(),
        ));
    }
    let params = ChainParams::new(chain.n_nodes(), chain.omega())?;
    let a = coefficient_evolution(&params, n);
    let d = chain.walker_dim();
    let blocks = (0..chain.n_nodes())
        .map(|i| {
            let mut acc = ComplexMatrix::zeros(d, d);
            for (j, rho_j) in initial.blocks().iter().enumerate() {
                if a[i][j] != 0.0 {
                    let moved = rho_j.conjugate_by(&chain.transport(j, i));
                    acc = &acc + &moved.scale_real(a[i][j]);
                }
            }
            acc
        })
        .collect();
    Ok(DiagonalState::from_blocks_unchecked(blocks))
}

/// `ρ_node / Tr ρ_node`.
pub fn postselect(state: &DiagonalState, node: usize) -> Result<ComplexMatrix> {
    if node >= state.n_nodes() {
        return Err(OqwError::InvalidParameter(format!(
            "node {node} out of range for {} nodes",
            state.n_nodes()
        )));
    }
    let block = state.block(node);
    let mass = block.trace().re;
    if mass <= MIN_POSTSELECT_MASS {
        return Err(OqwError::ZeroMass { node, mass });
    }
    Ok(block.scale_real(1.0 / mass))
}

fn check_density(rho: &ComplexMatrix, dim: Option<usize>) -> Result<()> {
    if let Some(d) = dim {
        if rho.dim() != (d, d) {
            return Err(OqwError::DimensionMismatch(format!(
                "expected a {d}x{d} density matrix, got {:?}",
                rho.dim()
            )));
        }
    }
    if (rho.trace().re - 1.0).abs() > 1e-10 {
        return Err(OqwError::InvalidParameter(format!(
            "density matrix has trace {}",
            rho.trace().re
        )));
    }
    let min = crate::matrixkit::eigenvalues_hermitian(rho)?
        .first()
        .copied()
        .unwrap_or(0.0);
    if min < -1e-10 {
        return Err(OqwError::NotPositive { min_eigenvalue: min });
    }
    Ok(())
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(OqwError::InvalidParameter(format!(
            "{name} must lie in [0, 1], got {x}"
        )))
    }
}

/// `(1 − p) ρ + p ZρZ`.
pub fn dephasing_channel(p: f64, rho: &ComplexMatrix) -> ComplexMatrix {
    &rho.scale_real(1.0 - p) + &rho.conjugate_by(&gates::z()).scale_real(p)
}

/// `(1 − 3s/4) ρ + (s/4)(XρX + YρY + ZρZ)`, equal to `(1 − s) ρ + s I/2`.
pub fn depolarizing_channel(strength: f64, rho: &ComplexMatrix) -> ComplexMatrix {
    let q = strength / 4.0;
    let paulis = &(&rho.conjugate_by(&gates::x()) + &rho.conjugate_by(&gates::y()))
        + &rho.conjugate_by(&gates::z());
    &rho.scale_real(1.0 - 3.0 * q) + &paulis.scale_real(q)
}

/// Two-node chain with `U_0 = Z`; mass `p` starts on node 0 and `1 − p` on
/// node 1. Reaches its steady state after one step for every `ω`.
pub fn dephasing_realization(p: f64, omega: f64, rho: &ComplexMatrix) -> Result<ChannelRealization> {
    check_unit_interval("dephasing probability", p)?;
    check_density(rho, Some(2))?;
    let chain = LinearChainSpec::new(2, omega, vec![gates::z()])?;
    let initial = DiagonalState::new(vec![rho.scale_real(p), rho.scale_real(1.0 - p)])?;
    Ok(ChannelRealization::from_chain(&chain, initial))
}

/// Three-node chain with `U_0 = −iY`, `U_1 = X`, exploiting `X(−iY) = Z` so
/// that three Pauli branches fit on three nodes.
pub fn depolarizing_realization(strength: f64, omega: f64, rho: &ComplexMatrix) -> Result<ChannelRealization> {
    check_unit_interval("depolarizing strength", strength)?;
    check_density(rho, Some(2))?;
    let minus_iy = gates::y().scale(C64::new(0.0, -1.0));
    let chain = LinearChainSpec::new(3, omega, vec![minus_iy, gates::x()])?;
    let q = strength / 4.0;
    let initial = DiagonalState::new(vec![
        &rho.scale_real(q) + &rho.conjugate_by(&gates::x()).scale_real(q),
        rho.scale_real(q),
        rho.scale_real(1.0 - 3.0 * q),
    ])?;
    Ok(ChannelRealization::from_chain(&chain, initial))
}

/// Realizes `Σ q_i V_i ρ V_i†` on an identity chain of `len(pairs)` nodes,
/// with `q_j V_j ρ V_j†` placed on node `j`.
pub fn embed_random_unitary(
    pairs: &[(f64, ComplexMatrix)],
    rho: &ComplexMatrix,
    omega: f64,
) -> Result<ChannelRealization> {
    if pairs.is_empty() {
        return Err(OqwError::InvalidParameter("no unitaries to mix".into()));
    }
    let d = rho.rows();
    check_density(rho, None)?;
    let total: f64 = pairs.iter().map(|(q, _)| q).sum();
    if pairs.iter().any(|(q, _)| *q < 0.0) || (total - 1.0).abs() > 1e-10 {
        return Err(OqwError::InvalidParameter(format!(
            "weights must be non-negative and sum to 1 (sum {total})"
        )));
    }
    for (_, v) in pairs {
        if v.dim() != (d, d) {
            return Err(OqwError::DimensionMismatch(format!(
                "unitary is {:?}, state is {d}x{d}",
                v.dim()
            )));
        }
        if !is_unitary(v, 1e-10)? {
            return Err(OqwError::NotUnitary {
                deviation: crate::matrixkit::unitarity_deviation(v)?,
            });
        }
    }
    let blocks: Vec<ComplexMatrix> = pairs
        .iter()
        .map(|(q, v)| rho.conjugate_by(v).scale_real(*q))
        .collect();
    let initial = DiagonalState::new(blocks)?;
    if pairs.len() == 1 {
        let mut jumps = std::collections::BTreeMap::new();
        jumps.insert((0, 0), ComplexMatrix::identity(d));
        let spec = OqwSpec::new(1, d, jumps)?;
        let analytic_limit = pushed_to_last(&[], &initial);
        return Ok(ChannelRealization {
            spec,
            unitaries: Vec::new(),
            initial,
            target_node: 0,
            analytic_limit,
        });
    }
    let chain = LinearChainSpec::identity_chain(pairs.len(), omega, d)?;
    Ok(ChannelRealization::from_chain(&chain, initial))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitMode {
    /// Push every initial block through the remaining chain unitaries.
    Analytic,
    /// Evolve until [`STABLE_WINDOW`] consecutive post-selected states differ
    /// by less than `tol` in trace distance.
    Iterate { max_steps: usize, tol: f64 },
}

#[derive(Debug, Clone)]
pub struct LimitState {
    pub state: ComplexMatrix,
    /// For iterate mode: the first step `n ≥ 1` from which the post-selected
    /// state stays within `tol` for the whole window.
    pub steps: Option<usize>,
}

pub fn limit_state(real: &ChannelRealization, mode: LimitMode) -> Result<LimitState> {
    match mode {
        LimitMode::Analytic => {
            let raw = pushed_to_last(&real.unitaries, &real.initial);
            let tr = raw.trace().re;
            Ok(LimitState {
                state: raw.scale_real(1.0 / tr),
                steps: None,
            })
        }
        LimitMode::Iterate { max_steps, tol } => iterate_limit(real, max_steps, tol),
    }
}

fn iterate_limit(real: &ChannelRealization, max_steps: usize, tol: f64) -> Result<LimitState> {
    let mut state = real.initial.clone();
    let mut prev: Option<ComplexMatrix> = None;
    let mut streak = 0;
    let mut streak_start = 0;
    let mut last_delta = f64::INFINITY;
    for n in 1..=max_steps + STABLE_WINDOW {
        state = step(&real.spec, &state)?;
        let current = match postselect(&state, real.target_node) {
            Ok(c) => Some(c),
            Err(OqwError::ZeroMass { .. }) => None,
            Err(e) => return Err(e),
        };
        match (&prev, &current) {
            (Some(a), Some(b)) => {
                last_delta = trace_distance(a, b)?;
                if last_delta < tol {
                    if streak == 0 {
                        streak_start = n - 1;
                    }
                    streak += 1;
                } else {
                    streak = 0;
                }
            }
            _ => streak = 0,
        }
        if streak == STABLE_WINDOW {
            return Ok(LimitState {
                state: current.expect("streak implies mass"),
                steps: Some(streak_start),
            });
        }
        if streak == 0 && n >= max_steps {
            break;
        }
        prev = current;
    }
    Err(OqwError::NotConverged {
        steps: max_steps,
        last_delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Dephasing,
    Depolarizing,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::Depolarizing => "depolarizing",
        })
    }
}

impl FromStr for ChannelKind {
    type Err = OqwError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dephasing" => Ok(ChannelKind::Dephasing),
            "depolarizing" => Ok(ChannelKind::Depolarizing),
            other => Err(OqwError::InvalidParameter(format!(
                "unknown channel '{other}' (expected dephasing or depolarizing)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelReport {
    pub channel: String,
    pub param: f64,
    pub trace_distance_to_analytic: f64,
    pub steps_to_converge: usize,
}

/// Runs a realization in iterate mode and compares it against the channel
/// applied directly to `rho`.
pub fn channel_report(
    kind: ChannelKind,
    param: f64,
    omega: f64,
    rho: &ComplexMatrix,
    max_steps: usize,
    tol: f64,
) -> Result<ChannelReport> {
    let (real, direct) = match kind {
        ChannelKind::Dephasing => (
            dephasing_realization(param, omega, rho)?,
            dephasing_channel(param, rho),
        ),
        ChannelKind::Depolarizing => (
            depolarizing_realization(param, omega, rho)?,
            depolarizing_channel(param, rho),
        ),
    };
    let limit = limit_state(&real, LimitMode::Iterate { max_steps, tol })?;
    Ok(ChannelReport {
        channel: kind.to_string(),
        param,
        trace_distance_to_analytic: trace_distance(&limit.state, &direct)?,
        steps_to_converge: limit.steps.unwrap_or(0),
    })
}
