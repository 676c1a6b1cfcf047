//! Unitary dilations of walk steps and their resource accounting.
//!
//! Three constructions are provided: Stinespring (one ancilla level per
//! Kraus operator), Sz.-Nagy (one 2d-dimensional unitary per contraction)
//! and the locality-based dilation that exploits the fact that a chain node
//! only talks to its two neighbours. The latter needs a single qubit ancilla
//! prepared as `λ|0⟩⟨0| + ω|1⟩⟨1|`; [`build_generalized`] extends it to walks
//! with `k` equally weighted jumps per node.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{OqwError, Result};
use crate::matrixkit::{
    complete_isometry, kron, operator_norm, partial_trace, psd_sqrt, unitarity_deviation, ComplexMatrix, C64,
};
use crate::walk::{DiagonalState, LinearChainSpec, OqwSpec};

/// Unitarity tolerance for constructed dilations.
pub const UNITARY_TOL: f64 = 1e-10;
/// Slack on the contraction check of the Sz.-Nagy dilation.
const NORM_SLACK: f64 = 1e-10;
/// Tolerance used when comparing jump weights across nodes.
const WEIGHT_TOL: f64 = 1e-10;
/// Largest coherence between distinct nodes tolerated after tracing out the ancilla.
const RESIDUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DilationKind {
    Stinespring,
    SzNagy,
    Local,
    Generalized(usize),
}

#[derive(Debug, Clone)]
pub struct DilationUnitary {
    pub matrix: ComplexMatrix,
    /// Stinespring and Sz.-Nagy: `[ancilla, system]`. Local and generalized:
    /// `[d_H, N, k]` with the ancilla last.
    pub factor_dims: Vec<usize>,
    pub kind: DilationKind,
    /// Diagonal of the ancilla preparation for local and generalized
    /// dilations; empty otherwise (the ancilla starts in `|0⟩`).
    pub ancilla_weights: Vec<f64>,
}

impl DilationUnitary {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix).expect("dilations are square")
    }
}

fn kraus_completeness(kraus: &[ComplexMatrix]) -> Result<f64> {
    let d = kraus[0].cols();
    let mut sum = ComplexMatrix::zeros(d, d);
    for k in kraus {
        if k.dim() != (d, d) {
            return Err(OqwError::DimensionMismatch(format!(
                "Kraus operators must all be {d}x{d}, found {:?}",
                k.dim()
            )));
        }
        sum = &sum + &(&k.adjoint() * k);
    }
    Ok(sum.max_abs_diff(&ComplexMatrix::identity(d)))
}

/// `U(|0⟩⊗|ψ⟩) = Σ_i |i⟩⊗K_i|ψ⟩` on ancilla ⊗ system; the remaining columns
/// come from a deterministic Gram–Schmidt completion.
pub fn stinespring_unitary(kraus: &[ComplexMatrix]) -> Result<DilationUnitary> {
    if kraus.is_empty() {
        return Err(OqwError::InvalidParameter("empty Kraus list".into()));
    }
    let deviation = kraus_completeness(kraus)?;
    if deviation > UNITARY_TOL {
        return Err(OqwError::Incomplete { deviation });
    }
    let d = kraus[0].cols();
    let matrix = complete_isometry(&ComplexMatrix::vstack(kraus)?)?;
    Ok(DilationUnitary {
        matrix,
        factor_dims: vec![kraus.len(), d],
        kind: DilationKind::Stinespring,
        ancilla_weights: Vec::new(),
    })
}

/// `[[K, √(I−KK†)], [√(I−K†K), −K†]]` for a contraction `K`.
pub fn sznagy_unitary(k: &ComplexMatrix) -> Result<DilationUnitary> {
    if !k.is_square() {
        return Err(OqwError::NotSquare {
            rows: k.rows(),
            cols: k.cols(),
        });
    }
    let norm = operator_norm(k);
    if norm > 1.0 + NORM_SLACK {
        return Err(OqwError::NotContraction { norm });
    }
    let d = k.rows();
    let id = ComplexMatrix::identity(d);
    let kd = k.adjoint();
    let mut m = ComplexMatrix::zeros(2 * d, 2 * d);
    m.set_block(0, 0, k);
    m.set_block(0, d, &psd_sqrt(&(&id - &(k * &kd)))?);
    m.set_block(d, 0, &psd_sqrt(&(&id - &(&kd * k)))?);
    m.set_block(d, d, &kd.scale_real(-1.0));
    Ok(DilationUnitary {
        matrix: m,
        factor_dims: vec![2, d],
        kind: DilationKind::SzNagy,
        ancilla_weights: Vec::new(),
    })
}

/// Kraus operators `B[i→j] ⊗ |j⟩⟨i|` of the whole walk on `H ⊗ G`, one per
/// stored jump, in `(from, to)` order.
pub fn walk_kraus(spec: &OqwSpec) -> Vec<ComplexMatrix> {
    let n = spec.n_nodes();
    spec.jumps()
        .iter()
        .map(|(&(from, to), b)| kron(b, &ComplexMatrix::unit(n, to, from)))
        .collect()
}

/// Basis index on `H ⊗ G ⊗ A`.
fn loc_index(w: usize, node: usize, a: usize, n: usize, k: usize) -> usize {
    (w * n + node) * k + a
}

/// Locality dilation of a chain on `H ⊗ G ⊗ A`:
///
/// * `|ψ⟩|i⟩|1⟩ → U_i|ψ⟩|i+1⟩|1⟩` for `i < N−1`
/// * `|ψ⟩|i⟩|0⟩ → U_{i−1}†|ψ⟩|i−1⟩|0⟩` for `i > 0`
/// * `|ψ⟩|N−1⟩|1⟩ → |ψ⟩|N−1⟩|0⟩`
/// * `|ψ⟩|0⟩|0⟩ → |ψ⟩|0⟩|1⟩`
pub fn build_u_loc(chain: &LinearChainSpec) -> DilationUnitary {
    let n = chain.n_nodes();
    let dh = chain.walker_dim();
    let dim = dh * n * 2;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..n {
        for a in 0..2 {
            // (target node, target ancilla, walker operator)
            let (j, b, op) = match a {
                1 if i + 1 < n => (i + 1, 1, chain.unitary(i).clone()),
                0 if i > 0 => (i - 1, 0, chain.unitary(i - 1).adjoint()),
                1 => (i, 0, ComplexMatrix::identity(dh)),
                _ => (i, 1, ComplexMatrix::identity(dh)),
            };
            for w in 0..dh {
                let col = loc_index(w, i, a, n, 2);
                for v in 0..dh {
                    m[(loc_index(v, j, b, n, 2), col)] = op[(v, w)];
                }
            }
        }
    }
    DilationUnitary {
        matrix: m,
        factor_dims: vec![dh, n, 2],
        kind: DilationKind::Local,
        ancilla_weights: vec![chain.lambda(), chain.omega()],
    }
}

/// Scaled-unitary jump `√w U` split into `(w, U)`.
fn split_scaled_unitary(b: &ComplexMatrix) -> Option<(f64, ComplexMatrix)> {
    let d = b.rows();
    let w = (&b.adjoint() * b).trace().re / d as f64;
    if w <= WEIGHT_TOL {
        return None;
    }
    let u = b.scale_real(1.0 / w.sqrt());
    match unitarity_deviation(&u) {
        Ok(dev) if dev <= UNITARY_TOL.max(1e-9) => Some((w, u)),
        _ => None,
    }
}

/// Dilation of a walk with exactly `k` non-zero jumps per node, each a scaled
/// unitary, and the same weight multiset at every node. Every node must also
/// receive exactly `k` jumps, which is what makes the map a bijection on
/// node × ancilla labels.
///
/// Ancilla level `ℓ` picks, at each node, the jump with the `ℓ`-th largest
/// weight (ties by target index). The outgoing ancilla label is the rank of
/// the incoming `(source, ℓ)` pair among all pairs landing on the same node.
pub fn build_generalized(spec: &OqwSpec, k: usize) -> Result<DilationUnitary> {
    let n = spec.n_nodes();
    let dh = spec.walker_dim();
    if k == 0 {
        return Err(OqwError::InvalidParameter("k must be positive".into()));
    }

    // per node: jumps sorted by weight (desc), then target
    let mut plans: Vec<Vec<(usize, f64, ComplexMatrix)>> = Vec::with_capacity(n);
    for node in 0..n {
        let nonzero: Vec<(usize, &ComplexMatrix)> = spec
            .outgoing(node)
            .filter(|(_, b)| b.max_abs() > WEIGHT_TOL)
            .collect();
        if nonzero.len() != k {
            return Err(OqwError::DilationCondition {
                condition: 1,
                detail: format!("node {node} has {} non-zero jumps, expected {k}", nonzero.len()),
            });
        }
        let mut jumps = Vec::with_capacity(k);
        for (to, b) in nonzero {
            let (w, u) = split_scaled_unitary(b).ok_or_else(|| OqwError::DilationCondition {
                condition: 2,
                detail: format!("jump {node}->{to} is not a scaled unitary"),
            })?;
            jumps.push((to, w, u));
        }
        jumps.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        plans.push(jumps);
    }

    let weights: Vec<f64> = plans[0].iter().map(|j| j.1).collect();
    for (node, plan) in plans.iter().enumerate() {
        for (l, j) in plan.iter().enumerate() {
            if (j.1 - weights[l]).abs() > WEIGHT_TOL {
                return Err(OqwError::DilationCondition {
                    condition: 3,
                    detail: format!(
                        "weight {} at node {node} differs from {} at node 0",
                        j.1, weights[l]
                    ),
                });
            }
        }
    }

    let mut incoming: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (node, plan) in plans.iter().enumerate() {
        for (l, j) in plan.iter().enumerate() {
            incoming[j.0].push((node, l));
        }
    }
    for (node, inc) in incoming.iter().enumerate() {
        if inc.len() != k {
            return Err(OqwError::DilationCondition {
                condition: 1,
                detail: format!("node {node} receives {} jumps, expected {k}", inc.len()),
            });
        }
    }

    let dim = dh * n * k;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (target, inc) in incoming.iter().enumerate() {
        for (label, &(source, l)) in inc.iter().enumerate() {
            let u = &plans[source][l].2;
            for w in 0..dh {
                let col = loc_index(w, source, l, n, k);
                for v in 0..dh {
                    m[(loc_index(v, target, label, n, k), col)] = u[(v, w)];
                }
            }
        }
    }
    Ok(DilationUnitary {
        matrix: m,
        factor_dims: vec![dh, n, k],
        kind: DilationKind::Generalized(k),
        ancilla_weights: weights,
    })
}

/// One walk step through a local or generalized dilation: adjoin the
/// ancilla, conjugate, trace the ancilla out and read the node blocks back.
pub fn step_via_dilation(d: &DilationUnitary, state: &DiagonalState) -> Result<DiagonalState> {
    if !matches!(d.kind, DilationKind::Local | DilationKind::Generalized(_)) {
        return Err(OqwError::InvalidParameter(format!(
            "{:?} dilations do not act on node-diagonal states",
            d.kind
        )));
    }
    let (dh, n) = (d.factor_dims[0], d.factor_dims[1]);
    if state.walker_dim() != dh || state.n_nodes() != n {
        return Err(OqwError::DimensionMismatch(format!(
            "dilation acts on {n} nodes of dimension {dh}, state has {} of dimension {}",
            state.n_nodes(),
            state.walker_dim()
        )));
    }
    let ancilla = ComplexMatrix::diag_real(&d.ancilla_weights);
    let joint = kron(&state.to_dense(), &ancilla).conjugate_by(&d.matrix);
    let reduced = partial_trace(&joint, &d.factor_dims, &[0, 1])?;
    blocks_from_dense(&reduced, dh, n)
}

/// Node blocks of a dense state on `H ⊗ G`, rejecting coherences between
/// different nodes.
pub(crate) fn blocks_from_dense(rho: &ComplexMatrix, dh: usize, n: usize) -> Result<DiagonalState> {
    let mut residue: f64 = 0.0;
    for r in 0..dh * n {
        for c in 0..dh * n {
            if r % n != c % n {
                residue = residue.max(rho[(r, c)].norm());
            }
        }
    }
    if residue > RESIDUE_TOL {
        return Err(OqwError::Inconsistent(format!(
            "coherence {residue:e} between distinct nodes after tracing the ancilla"
        )));
    }
    let blocks = (0..n)
        .map(|node| ComplexMatrix::from_fn(dh, dh, |v, w| rho[(v * n + node, w * n + node)]))
        .collect();
    Ok(DiagonalState::from_blocks_unchecked(blocks))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceMethod {
    Stinespring,
    SzNagy,
    Local,
    Generalized(usize),
}

impl fmt::Display for ResourceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceMethod::Stinespring => f.write_str("stinespring"),
            ResourceMethod::SzNagy => f.write_str("sznagy"),
            ResourceMethod::Local => f.write_str("local"),
            ResourceMethod::Generalized(k) => write!(f, "generalized:{k}"),
        }
    }
}

impl FromStr for ResourceMethod {
    type Err = OqwError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stinespring" => Ok(ResourceMethod::Stinespring),
            "sznagy" | "sz-nagy" => Ok(ResourceMethod::SzNagy),
            "local" => Ok(ResourceMethod::Local),
            other => other
                .strip_prefix("generalized:")
                .and_then(|k| k.parse().ok())
                .filter(|&k: &usize| k > 0)
                .map(ResourceMethod::Generalized)
                .ok_or_else(|| {
                    OqwError::Parse(format!(
                        "unknown method '{other}' (stinespring, sznagy, local, generalized:<k>)"
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    pub method: String,
    pub dh: u64,
    pub g: u64,
    pub n: u64,
    pub dim_per_step: u64,
    pub dim_total: u64,
    pub cnot_estimate: u64,
    pub depth_estimate: u64,
}

impl ResourceReport {
    pub const CSV_HEADER: &'static str = "method,dH,G,n,dim_total,cnot_estimate,depth_estimate";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.method, self.dh, self.g, self.n, self.dim_total, self.cnot_estimate, self.depth_estimate
        )
    }
}

/// Dilated dimension per step and asymptotic CNOT count (unit constants).
///
/// With `m = 2|G|` Kraus operators on `d = d_H·|G|`: Stinespring needs `m·d`,
/// Sz.-Nagy `m·2d` (one dilation per operator), the local dilation
/// `4·d_H·|G|` (two ancilla qubits) and the `k`-way one `2k·d_H·|G|`.
pub fn resource_report(method: ResourceMethod, dh: u64, g: u64, n: u64) -> ResourceReport {
    let d = dh * g;
    let m = 2 * g;
    let (dim_per_step, cnot_per_step) = match method {
        ResourceMethod::Stinespring => (m * d, dh * dh * g * g * g),
        ResourceMethod::SzNagy => (m * 2 * d, dh * dh * g * g * g),
        ResourceMethod::Local => (4 * d, dh * dh * g * g),
        ResourceMethod::Generalized(k) => {
            let k = k as u64;
            // (k/2)² d_H² |G|², rounded up for odd k
            (2 * k * d, (k * k * dh * dh * g * g).div_ceil(4))
        }
    };
    let cnot = n * cnot_per_step;
    ResourceReport {
        method: method.to_string(),
        dh,
        g,
        n,
        dim_per_step,
        dim_total: n * dim_per_step,
        cnot_estimate: cnot,
        depth_estimate: cnot,
    }
}

/// Kraus operators of a single-qubit channel expressed as `√q_i V_i`.
pub fn mixed_unitary_kraus(pairs: &[(f64, ComplexMatrix)]) -> Vec<ComplexMatrix> {
    pairs
        .iter()
        .map(|(q, v)| v.scale(C64::new(q.sqrt(), 0.0)))
        .collect()
}
