//! Gate-level construction of the locality dilation.
//!
//! Qubit registers: `qH` holds the walker (`h = ⌈log₂ d_H⌉` qubits), `qG` the
//! node in binary (`g = ⌈log₂ N⌉` qubits), and every step uses one coin
//! qubit `qA` plus one boundary flag `qA'`. Register values are read
//! little-endian: the first qubit of a register is its least significant bit.
//!
//! One step prepares `qA` with `RY(−2 asin √ω)`, dephases it, then applies the
//! boundary-corrected right and left shifts. The right shift applies `U_j` at
//! node `j` when `qA = 1` and increments the node register; the left shift
//! applies `U_{j−1}†` at node `j` when `qA = 0` and decrements it. At the two
//! ends the increment/decrement is undone through `qA'`, which realizes the
//! self-loops.
//!
//! Walker spaces and node counts that are not powers of two are padded:
//! unitaries become `U ⊕ I` and padded nodes are never populated.

mod cost;
mod export;
mod sim;

pub use cost::{cost_estimate, CostModel, CostReport};
pub use export::{to_json, to_qasm};
pub use sim::{circuit_unitary, simulate_density, simulate_trajectory};

use crate::matrixkit::{gates, ComplexMatrix};
use crate::walk::LinearChainSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    X,
    /// `exp(−iθY/2)`.
    Ry(f64),
    Unitary { matrix: ComplexMatrix, label: String },
}

impl GateKind {
    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            GateKind::X => gates::x(),
            GateKind::Ry(theta) => gates::ry(*theta),
            GateKind::Unitary { matrix, .. } => matrix.clone(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            GateKind::X => "x",
            GateKind::Ry(_) => "ry",
            GateKind::Unitary { label, .. } => label,
        }
    }
}

/// A control condition: the qubit must read `polarity` (open control = false).
pub type Control = (usize, bool);

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `kind` on `targets` (little-endian) when every control is satisfied.
    Apply {
        kind: GateKind,
        controls: Vec<Control>,
        targets: Vec<usize>,
    },
    /// Non-selective computational-basis measurement: drops coherences.
    MeasureNonSelective(usize),
    /// Discard the qubit and re-prepare it in `|0⟩`.
    Reset(usize),
}

impl Gate {
    pub fn x(target: usize, controls: Vec<Control>) -> Self {
        Gate::Apply {
            kind: GateKind::X,
            controls,
            targets: vec![target],
        }
    }

    /// Every qubit the gate touches, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Apply { controls, targets, .. } => {
                controls.iter().map(|c| c.0).chain(targets.iter().copied()).collect()
            }
            Gate::MeasureNonSelective(q) | Gate::Reset(q) => vec![*q],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub qubits: Vec<usize>,
}

/// Dimensions of the walk a circuit was compiled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkInfo {
    pub walker_dim: usize,
    pub n_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub registers: Vec<Register>,
    pub gates: Vec<Gate>,
    pub walk: Option<WalkInfo>,
    /// Gate count after each completed walk step.
    pub step_ends: Vec<usize>,
}

impl Circuit {
    pub fn register(&self, name: &str) -> Option<&[usize]> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.qubits.as_slice())
    }

    /// True when every gate references declared qubits and no gate uses a
    /// qubit both as control and target.
    pub fn is_well_formed(&self) -> bool {
        self.gates.iter().all(|g| {
            let qs = g.qubits();
            let mut sorted = qs.clone();
            sorted.sort_unstable();
            sorted.dedup();
            sorted.len() == qs.len() && qs.iter().all(|&q| q < self.n_qubits)
        })
    }
}

/// Number of qubits needed to index `n` levels.
pub fn qubits_for(n: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < n {
        bits += 1;
    }
    bits
}

/// Controls requiring `register` to hold `value`.
fn value_controls(register: &[usize], value: usize) -> Vec<Control> {
    register
        .iter()
        .enumerate()
        .map(|(k, &q)| (q, (value >> k) & 1 == 1))
        .collect()
}

fn with_extra(mut controls: Vec<Control>, extra: &[Control]) -> Vec<Control> {
    controls.extend_from_slice(extra);
    controls
}

/// `|i⟩ → |i+1 mod 2^g⟩`: bit `k` flips iff all lower bits are 1, handled from
/// the most significant bit down so each gate sees the original lower bits.
fn increment_gates(reg: &[usize], extra: &[Control]) -> Vec<Gate> {
    (0..reg.len())
        .rev()
        .map(|k| {
            let lower = reg[..k].iter().map(|&q| (q, true)).collect();
            Gate::x(reg[k], with_extra(lower, extra))
        })
        .collect()
}

/// Inverse ladder of [`increment_gates`].
fn decrement_gates(reg: &[usize], extra: &[Control]) -> Vec<Gate> {
    let mut g = increment_gates(reg, extra);
    g.reverse();
    g
}

/// Single-register circuit for `S` on `g` qubits.
pub fn build_increment(g: usize) -> Circuit {
    let reg: Vec<usize> = (0..g).collect();
    Circuit {
        n_qubits: g,
        gates: increment_gates(&reg, &[]),
        registers: vec![Register { name: "qG".into(), qubits: reg }],
        walk: None,
        step_ends: Vec::new(),
    }
}

/// Single-register circuit for `P` on `g` qubits.
pub fn build_decrement(g: usize) -> Circuit {
    let mut c = build_increment(g);
    c.gates.reverse();
    c
}

/// Qubit assignment shared by the chain builders.
#[derive(Debug, Clone)]
struct Layout {
    qh: Vec<usize>,
    qg: Vec<usize>,
    qa: Vec<usize>,
    qa_prime: Vec<usize>,
    info: WalkInfo,
}

impl Layout {
    fn new(chain: &LinearChainSpec, pairs: usize) -> Self {
        let h = qubits_for(chain.walker_dim());
        let g = qubits_for(chain.n_nodes());
        let base = h + g;
        Self {
            qh: (0..h).collect(),
            qg: (h..base).collect(),
            qa: (0..pairs).map(|k| base + 2 * k).collect(),
            qa_prime: (0..pairs).map(|k| base + 2 * k + 1).collect(),
            info: WalkInfo {
                walker_dim: chain.walker_dim(),
                n_nodes: chain.n_nodes(),
            },
        }
    }

    fn circuit(&self, gates: Vec<Gate>, step_ends: Vec<usize>) -> Circuit {
        let registers = vec![
            Register { name: "qH".into(), qubits: self.qh.clone() },
            Register { name: "qG".into(), qubits: self.qg.clone() },
            Register { name: "qA".into(), qubits: self.qa.clone() },
            Register { name: "qA'".into(), qubits: self.qa_prime.clone() },
        ];
        Circuit {
            n_qubits: self.qh.len() + self.qg.len() + 2 * self.qa.len(),
            registers,
            gates,
            walk: Some(self.info),
            step_ends,
        }
    }
}

/// `U ⊕ I` up to `2^h`.
fn padded(u: &ComplexMatrix, h: usize) -> ComplexMatrix {
    u.pad_identity((1usize << h) - u.rows())
}

fn right_gates(chain: &LinearChainSpec, lay: &Layout, qa: usize) -> Vec<Gate> {
    let h = lay.qh.len();
    let coin = [(qa, true)];
    let mut out: Vec<Gate> = (0..chain.n_nodes() - 1)
        .map(|j| Gate::Apply {
            kind: GateKind::Unitary {
                matrix: padded(chain.unitary(j), h),
                label: format!("U{j}"),
            },
            controls: with_extra(value_controls(&lay.qg, j), &coin),
            targets: lay.qh.clone(),
        })
        .collect();
    out.extend(increment_gates(&lay.qg, &coin));
    out
}

fn left_gates(chain: &LinearChainSpec, lay: &Layout, qa: usize) -> Vec<Gate> {
    let h = lay.qh.len();
    let coin = [(qa, false)];
    let mut out: Vec<Gate> = (1..chain.n_nodes())
        .map(|j| Gate::Apply {
            kind: GateKind::Unitary {
                matrix: padded(&chain.unitary(j - 1).adjoint(), h),
                label: format!("U{}dg", j - 1),
            },
            controls: with_extra(value_controls(&lay.qg, j), &coin),
            targets: lay.qh.clone(),
        })
        .collect();
    out.extend(decrement_gates(&lay.qg, &coin));
    out
}

/// The flag `qA'` is raised when the walker sits on node `N−1` with the coin
/// pointing right; the increment is then undone by a decrement. The decrement
/// is also conditioned on `qA = 1` so that a flag left raised by a walker
/// *arriving* at `N−1` cannot fire the left boundary's correction later in
/// the same step.
fn right_boundary_gates(chain: &LinearChainSpec, lay: &Layout, pair: usize) -> Vec<Gate> {
    let (qa, qf) = (lay.qa[pair], lay.qa_prime[pair]);
    let flag = Gate::x(qf, with_extra(value_controls(&lay.qg, chain.n_nodes() - 1), &[(qa, true)]));
    let mut out = vec![flag.clone()];
    out.extend(right_gates(chain, lay, qa));
    out.extend(decrement_gates(&lay.qg, &[(qf, true), (qa, true)]));
    out.push(flag);
    out
}

/// Mirror of [`right_boundary_gates`] at node 0.
fn left_boundary_gates(chain: &LinearChainSpec, lay: &Layout, pair: usize) -> Vec<Gate> {
    let (qa, qf) = (lay.qa[pair], lay.qa_prime[pair]);
    let flag = Gate::x(qf, with_extra(value_controls(&lay.qg, 0), &[(qa, false)]));
    let mut out = vec![flag.clone()];
    out.extend(left_gates(chain, lay, qa));
    out.extend(increment_gates(&lay.qg, &[(qf, true), (qa, false)]));
    out.push(flag);
    out
}

/// `R`: conditional unitaries for `qA = 1`, then the controlled increment.
pub fn build_right(chain: &LinearChainSpec) -> Circuit {
    let lay = Layout::new(chain, 1);
    lay.circuit(right_gates(chain, &lay, lay.qa[0]), Vec::new())
}

/// `L`: conditional inverse unitaries for `qA = 0`, then the controlled decrement.
pub fn build_left(chain: &LinearChainSpec) -> Circuit {
    let lay = Layout::new(chain, 1);
    lay.circuit(left_gates(chain, &lay, lay.qa[0]), Vec::new())
}

pub fn build_right_boundary(chain: &LinearChainSpec) -> Circuit {
    let lay = Layout::new(chain, 1);
    lay.circuit(right_boundary_gates(chain, &lay, 0), Vec::new())
}

pub fn build_left_boundary(chain: &LinearChainSpec) -> Circuit {
    let lay = Layout::new(chain, 1);
    lay.circuit(left_boundary_gates(chain, &lay, 0), Vec::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepOrder {
    /// Right boundary shift first.
    #[default]
    RightFirst,
    LeftFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AncillaPolicy {
    /// A new `(qA, qA')` pair for every step.
    Fresh,
    /// One pair, reset after every step.
    #[default]
    Reuse,
}

/// Coin angle putting weight `ω` on `|1⟩`.
pub fn coin_angle(omega: f64) -> f64 {
    -2.0 * omega.sqrt().asin()
}

fn step_gates(chain: &LinearChainSpec, lay: &Layout, pair: usize, order: StepOrder) -> Vec<Gate> {
    let qa = lay.qa[pair];
    let mut out = vec![
        Gate::Apply {
            kind: GateKind::Ry(coin_angle(chain.omega())),
            controls: Vec::new(),
            targets: vec![qa],
        },
        Gate::MeasureNonSelective(qa),
    ];
    let right = right_boundary_gates(chain, lay, pair);
    let left = left_boundary_gates(chain, lay, pair);
    match order {
        StepOrder::RightFirst => {
            out.extend(right);
            out.extend(left);
        }
        StepOrder::LeftFirst => {
            out.extend(left);
            out.extend(right);
        }
    }
    out
}

pub fn build_step(chain: &LinearChainSpec, order: StepOrder) -> Circuit {
    let lay = Layout::new(chain, 1);
    let gates = step_gates(chain, &lay, 0, order);
    let end = gates.len();
    lay.circuit(gates, vec![end])
}

/// `n` steps. With [`AncillaPolicy::Fresh`] the circuit has `h + g + 2n`
/// qubits; with [`AncillaPolicy::Reuse`] it has `h + g + 2`.
pub fn build_walk(chain: &LinearChainSpec, n: usize, policy: AncillaPolicy, order: StepOrder) -> Circuit {
    let pairs = match (policy, n) {
        (_, 0) => 0,
        (AncillaPolicy::Fresh, n) => n,
        (AncillaPolicy::Reuse, _) => 1,
    };
    let lay = Layout::new(chain, pairs);
    let mut gates = Vec::new();
    let mut ends = Vec::with_capacity(n);
    for s in 0..n {
        match policy {
            AncillaPolicy::Fresh => gates.extend(step_gates(chain, &lay, s, order)),
            AncillaPolicy::Reuse => {
                gates.extend(step_gates(chain, &lay, 0, order));
                gates.push(Gate::Reset(lay.qa[0]));
                gates.push(Gate::Reset(lay.qa_prime[0]));
            }
        }
        ends.push(gates.len());
    }
    lay.circuit(gates, ends)
}
