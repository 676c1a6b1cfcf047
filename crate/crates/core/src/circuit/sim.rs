//! Exact density-matrix simulation of compiled walk circuits.
//!
//! Qubits are allocated lazily: the walker and node registers are live from
//! the start, and every ancilla joins (in `|0⟩`) just before its first gate
//! and is traced out right after its last one. Live qubit `k` in allocation
//! order is bit `k` of the basis index.

use super::{Circuit, Gate};
use crate::error::{OqwError, Result};
use crate::matrixkit::{ComplexMatrix, C64};
use crate::walk::DiagonalState;

/// Largest coherence between distinct node values tolerated at a step end.
const RESIDUE_TOL: f64 = 1e-10;
/// Largest mass tolerated on padded walker levels or padded nodes.
const PADDING_TOL: f64 = 1e-10;

struct Live {
    qubits: Vec<usize>,
    rho: ComplexMatrix,
}

/// Basis index `base` with bit `b` inserted at position `p`.
fn insert_bit(base: usize, p: usize, b: usize) -> usize {
    let low = base & ((1 << p) - 1);
    ((base >> p) << (p + 1)) | (b << p) | low
}

/// `M` applied from the left on the `targets` bits of every row whose
/// `controls` bits match.
fn left_apply(rho: &mut ComplexMatrix, m: &ComplexMatrix, controls: &[(usize, bool)], targets: &[usize]) {
    let dim = rho.rows();
    let cols = rho.cols();
    let cmask: usize = controls.iter().map(|&(p, _)| 1 << p).sum();
    let cval: usize = controls.iter().filter(|c| c.1).map(|&(p, _)| 1 << p).sum();
    let tmask: usize = targets.iter().map(|&p| 1 << p).sum();
    let tdim = 1 << targets.len();
    let offsets: Vec<usize> = (0..tdim)
        .map(|k| {
            targets
                .iter()
                .enumerate()
                .filter(|(j, _)| (k >> j) & 1 == 1)
                .map(|(_, &p)| 1 << p)
                .sum()
        })
        .collect();
    let mut gathered = vec![C64::new(0.0, 0.0); tdim];
    for base in 0..dim {
        if base & tmask != 0 || base & cmask != cval {
            continue;
        }
        for col in 0..cols {
            for (k, off) in offsets.iter().enumerate() {
                gathered[k] = rho[(base | off, col)];
            }
            for (j, off) in offsets.iter().enumerate() {
                rho[(base | off, col)] = (0..tdim).map(|k| m[(j, k)] * gathered[k]).sum();
            }
        }
    }
}

impl Live {
    fn position(&self, q: usize) -> Result<usize> {
        self.qubits
            .iter()
            .position(|&x| x == q)
            .ok_or_else(|| OqwError::Inconsistent(format!("qubit {q} is not live")))
    }

    fn allocate(&mut self, q: usize) {
        let d = self.rho.rows();
        let mut grown = ComplexMatrix::zeros(2 * d, 2 * d);
        grown.set_block(0, 0, &self.rho);
        self.rho = grown;
        self.qubits.push(q);
    }

    fn trace_out(&mut self, q: usize) -> Result<()> {
        let p = self.position(q)?;
        let half = self.rho.rows() / 2;
        self.rho = ComplexMatrix::from_fn(half, half, |r, c| {
            self.rho[(insert_bit(r, p, 0), insert_bit(c, p, 0))]
                + self.rho[(insert_bit(r, p, 1), insert_bit(c, p, 1))]
        });
        self.qubits.remove(p);
        Ok(())
    }

    fn reset(&mut self, q: usize) -> Result<()> {
        let p = self.position(q)?;
        let d = self.rho.rows();
        let bit = 1 << p;
        self.rho = ComplexMatrix::from_fn(d, d, |r, c| {
            if r & bit != 0 || c & bit != 0 {
                C64::new(0.0, 0.0)
            } else {
                self.rho[(r, c)] + self.rho[(r | bit, c | bit)]
            }
        });
        Ok(())
    }

    fn dephase(&mut self, q: usize) -> Result<()> {
        let bit = 1 << self.position(q)?;
        let d = self.rho.rows();
        for r in 0..d {
            for c in 0..d {
                if (r ^ c) & bit != 0 {
                    self.rho[(r, c)] = C64::new(0.0, 0.0);
                }
            }
        }
        Ok(())
    }

    fn apply(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::Apply { kind, controls, targets } => {
                let m = kind.matrix();
                let controls = controls
                    .iter()
                    .map(|&(q, pol)| Ok((self.position(q)?, pol)))
                    .collect::<Result<Vec<_>>>()?;
                let targets = targets.iter().map(|&q| self.position(q)).collect::<Result<Vec<_>>>()?;
                if m.rows() != 1 << targets.len() {
                    return Err(OqwError::DimensionMismatch(format!(
                        "{}x{} gate on {} qubits",
                        m.rows(),
                        m.cols(),
                        targets.len()
                    )));
                }
                // ρ → MρM† as M(Mρ)† for Hermitian ρ
                left_apply(&mut self.rho, &m, &controls, &targets);
                self.rho = self.rho.adjoint();
                left_apply(&mut self.rho, &m, &controls, &targets);
                Ok(())
            }
            Gate::MeasureNonSelective(q) => self.dephase(*q),
            Gate::Reset(q) => self.reset(*q),
        }
    }

    /// Reduced state on the first `sys` live qubits; all later ones are
    /// ancillas and occupy the high bits.
    fn system(&self, sys: usize) -> ComplexMatrix {
        let s = 1 << sys;
        let copies = self.rho.rows() / s;
        ComplexMatrix::from_fn(s, s, |r, c| (0..copies).map(|a| self.rho[(a * s + r, a * s + c)]).sum())
    }
}

/// Node blocks of a system state indexed `w | i << h`.
fn extract(rho: &ComplexMatrix, h: usize, dh: usize, n: usize) -> Result<DiagonalState> {
    let d = rho.rows();
    let mut residue: f64 = 0.0;
    let mut padding: f64 = 0.0;
    for r in 0..d {
        let (wr, ir) = (r & ((1 << h) - 1), r >> h);
        if wr >= dh || ir >= n {
            padding += rho[(r, r)].re.abs();
        }
        for c in 0..d {
            if ir != c >> h {
                residue = residue.max(rho[(r, c)].norm());
            }
        }
    }
    if residue > RESIDUE_TOL {
        return Err(OqwError::Inconsistent(format!(
            "node register coherence {residue:e} after a step"
        )));
    }
    if padding > PADDING_TOL {
        return Err(OqwError::Inconsistent(format!("mass {padding:e} on padded levels")));
    }
    let blocks = (0..n)
        .map(|i| ComplexMatrix::from_fn(dh, dh, |v, w| rho[(v | i << h, w | i << h)]))
        .collect();
    Ok(DiagonalState::from_blocks_unchecked(blocks))
}

/// Walk state after each step of a circuit built by the chain builders.
pub fn simulate_trajectory(c: &Circuit, initial: &DiagonalState) -> Result<Vec<DiagonalState>> {
    let info = c
        .walk
        .ok_or_else(|| OqwError::InvalidParameter("circuit was not compiled from a walk".into()))?;
    if initial.walker_dim() != info.walker_dim || initial.n_nodes() != info.n_nodes {
        return Err(OqwError::DimensionMismatch(format!(
            "circuit walks {} nodes of dimension {}, state has {} of dimension {}",
            info.n_nodes,
            info.walker_dim,
            initial.n_nodes(),
            initial.walker_dim()
        )));
    }
    let qh = c.register("qH").unwrap_or(&[]);
    let qg = c.register("qG").unwrap_or(&[]);
    let h = qh.len();
    let sys = h + qg.len();
    if qh.iter().chain(qg).enumerate().any(|(k, &q)| k != q) {
        return Err(OqwError::Inconsistent("walker and node registers must be qubits 0..h+g".into()));
    }

    let s = 1 << sys;
    let mut rho = ComplexMatrix::zeros(s, s);
    for (i, block) in initial.blocks().iter().enumerate() {
        for v in 0..info.walker_dim {
            for w in 0..info.walker_dim {
                rho[(v | i << h, w | i << h)] = block[(v, w)];
            }
        }
    }
    let mut live = Live {
        qubits: (0..sys).collect(),
        rho,
    };

    let mut first = vec![usize::MAX; c.n_qubits];
    let mut last = vec![0; c.n_qubits];
    for (k, g) in c.gates.iter().enumerate() {
        for q in g.qubits() {
            first[q] = first[q].min(k);
            last[q] = k;
        }
    }

    let mut out = Vec::with_capacity(c.step_ends.len());
    let mut ends = c.step_ends.iter().peekable();
    for (k, gate) in c.gates.iter().enumerate() {
        for q in gate.qubits() {
            if q >= sys && first[q] == k {
                live.allocate(q);
            }
        }
        live.apply(gate)?;
        for q in gate.qubits() {
            if q >= sys && last[q] == k {
                live.trace_out(q)?;
            }
        }
        while ends.peek() == Some(&&(k + 1)) {
            ends.next();
            out.push(extract(&live.system(sys), h, info.walker_dim, info.n_nodes)?);
        }
    }
    Ok(out)
}

/// Final walk state; the initial state for a circuit without steps.
pub fn simulate_density(c: &Circuit, initial: &DiagonalState) -> Result<DiagonalState> {
    let mut traj = simulate_trajectory(c, initial)?;
    Ok(traj.pop().unwrap_or_else(|| initial.clone()))
}

/// Full unitary of a measurement-free circuit; qubit `q` is bit `q`.
pub fn circuit_unitary(c: &Circuit) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(1 << c.n_qubits);
    for gate in &c.gates {
        match gate {
            Gate::Apply { kind, controls, targets } => {
                left_apply(&mut u, &kind.matrix(), controls, targets);
            }
            _ => {
                return Err(OqwError::InvalidParameter(
                    "circuit contains non-unitary operations".into(),
                ))
            }
        }
    }
    Ok(u)
}
