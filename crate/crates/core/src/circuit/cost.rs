//! CNOT and depth estimates for compiled circuits.
//!
//! Multi-controlled gates are not decomposed; each costs `f(c)` CNOTs for
//! its `c` controls plus the two-qubit cost of its base gate. The constants
//! are stand-ins and only the scaling of the totals is meaningful.

use serde::Serialize;

use super::{Circuit, Gate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CostModel {
    /// `α·c + β`, as for ancilla-assisted decompositions.
    LinearAncilla { alpha: f64, beta: f64 },
    /// `α·c²`, as for ancilla-free decompositions.
    QuadraticAncillaFree { alpha: f64 },
}

impl CostModel {
    pub const fn linear() -> Self {
        CostModel::LinearAncilla { alpha: 16.0, beta: 0.0 }
    }

    pub const fn quadratic() -> Self {
        CostModel::QuadraticAncillaFree { alpha: 1.0 }
    }

    fn control_cost(&self, c: usize) -> u64 {
        if c == 0 {
            return 0;
        }
        let c = c as f64;
        let f = match *self {
            CostModel::LinearAncilla { alpha, beta } => alpha * c + beta,
            CostModel::QuadraticAncillaFree { alpha } => alpha * c * c,
        };
        f.ceil().max(0.0) as u64
    }
}

impl Default for CostModel {
    fn default() -> Self {
        Self::linear()
    }
}

/// CNOTs for a generic `t`-qubit unitary, `⌈(4^t − 3t − 1)/4⌉`: 0 for one
/// qubit, 3 for two.
pub fn base_cnot_cost(t: usize) -> u64 {
    if t <= 1 {
        return 0;
    }
    let four_t = 1u64 << (2 * t);
    (four_t - 3 * t as u64 - 1).div_ceil(4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub cnot: u64,
    pub depth: u64,
}

/// Totals the per-gate CNOT cost and layers gates greedily: each gate goes
/// one layer after the latest gate sharing any of its qubits.
pub fn cost_estimate(c: &Circuit, model: CostModel) -> CostReport {
    let mut cnot = 0;
    let mut frontier = vec![0u64; c.n_qubits];
    let mut depth = 0;
    for gate in &c.gates {
        if let Gate::Apply { controls, targets, .. } = gate {
            cnot += model.control_cost(controls.len()) + base_cnot_cost(targets.len());
        }
        let qs = gate.qubits();
        let layer = qs.iter().map(|&q| frontier[q]).max().unwrap_or(0) + 1;
        for q in qs {
            frontier[q] = layer;
        }
        depth = depth.max(layer);
    }
    CostReport { cnot, depth }
}
