//! Open quantum walk specifications and their exact evolution.
//!
//! A walk on `N` nodes is given by jump operators `B[i→j]` acting on the
//! walker's internal space. Starting from a state that is block-diagonal in
//! the node basis, every step keeps it block-diagonal, so a state is stored
//! as one `d_H × d_H` block per node.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{OqwError, Result};
use crate::matrixkit::{eigenvalues_hermitian, is_unitary, ComplexMatrix};

/// Completeness tolerance for walk specifications.
pub const SPEC_TOL: f64 = 1e-10;

/// A node whose jump operators fail `Σ_j B[i→j]† B[i→j] = I`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub node: usize,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OqwSpec {
    n_nodes: usize,
    walker_dim: usize,
    /// Keyed by `(from, to)`. Missing pairs are zero operators.
    jumps: BTreeMap<(usize, usize), ComplexMatrix>,
}

impl OqwSpec {
    /// Checks shapes and node indices; completeness is reported by [`validate`].
    pub fn new(
        n_nodes: usize,
        walker_dim: usize,
        jumps: BTreeMap<(usize, usize), ComplexMatrix>,
    ) -> Result<Self> {
        if n_nodes == 0 || walker_dim == 0 {
            return Err(OqwError::InvalidParameter(
                "walk needs at least one node and a non-empty walker space".into(),
            ));
        }
        for (&(from, to), b) in &jumps {
            if from >= n_nodes || to >= n_nodes {
                return Err(OqwError::DimensionMismatch(format!(
                    "jump {from}->{to} out of range for {n_nodes} nodes"
                )));
            }
            if b.dim() != (walker_dim, walker_dim) {
                return Err(OqwError::DimensionMismatch(format!(
                    "jump {from}->{to} is {:?}, walker dimension is {walker_dim}",
                    b.dim()
                )));
            }
        }
        Ok(Self {
            n_nodes,
            walker_dim,
            jumps,
        })
    }

    /// Like [`OqwSpec::new`] but also rejects incomplete specifications.
    pub fn new_validated(
        n_nodes: usize,
        walker_dim: usize,
        jumps: BTreeMap<(usize, usize), ComplexMatrix>,
    ) -> Result<Self> {
        let spec = Self::new(n_nodes, walker_dim, jumps)?;
        let violations = validate(&spec);
        if violations.is_empty() {
            Ok(spec)
        } else {
            Err(OqwError::InvalidSpec(violations))
        }
    }

    /// Jump operators of a linear chain, without checking unitarity.
    pub fn from_chain_parts(n_nodes: usize, omega: f64, unitaries: &[ComplexMatrix]) -> Result<Self> {
        if n_nodes < 2 || unitaries.len() != n_nodes - 1 {
            return Err(OqwError::InvalidParameter(format!(
                "chain with {n_nodes} nodes needs {} unitaries, got {}",
                n_nodes.saturating_sub(1),
                unitaries.len()
            )));
        }
        let dh = unitaries[0].rows();
        let sw = omega.sqrt();
        let sl = (1.0 - omega).sqrt();
        let id = ComplexMatrix::identity(dh);
        let mut jumps = BTreeMap::new();
        for (i, u) in unitaries.iter().enumerate() {
            jumps.insert((i, i + 1), u.scale_real(sw));
            jumps.insert((i + 1, i), u.adjoint().scale_real(sl));
        }
        jumps.insert((0, 0), id.scale_real(sl));
        jumps.insert((n_nodes - 1, n_nodes - 1), id.scale_real(sw));
        Self::new(n_nodes, dh, jumps)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn walker_dim(&self) -> usize {
        self.walker_dim
    }

    pub fn jumps(&self) -> &BTreeMap<(usize, usize), ComplexMatrix> {
        &self.jumps
    }

    pub fn jump(&self, from: usize, to: usize) -> Option<&ComplexMatrix> {
        self.jumps.get(&(from, to))
    }

    /// Non-zero jumps leaving `node`, ordered by target.
    pub fn outgoing(&self, node: usize) -> impl Iterator<Item = (usize, &ComplexMatrix)> {
        self.jumps
            .range((node, 0)..(node + 1, 0))
            .map(|(&(_, to), b)| (to, b))
    }
}

/// Completeness check per node; empty iff the spec is a valid walk.
pub fn validate(spec: &OqwSpec) -> Vec<Violation> {
    let d = spec.walker_dim;
    let id = ComplexMatrix::identity(d);
    (0..spec.n_nodes)
        .filter_map(|node| {
            let mut sum = ComplexMatrix::zeros(d, d);
            for (_, b) in spec.outgoing(node) {
                sum = &sum + &(&b.adjoint() * b);
            }
            let deviation = sum.max_abs_diff(&id);
            (deviation > SPEC_TOL).then_some(Violation { node, deviation })
        })
        .collect()
}

/// Block-diagonal walk state `Σ_i ρ_i ⊗ |i⟩⟨i|`; blocks are unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalState {
    blocks: Vec<ComplexMatrix>,
}

impl DiagonalState {
    /// Validates shape, Hermiticity, positivity and unit total trace.
    pub fn new(blocks: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(OqwError::InvalidParameter("state has no nodes".into()));
        };
        let d = first.rows();
        for (i, b) in blocks.iter().enumerate() {
            if b.dim() != (d, d) {
                return Err(OqwError::DimensionMismatch(format!(
                    "block {i} is {:?}, expected {d}x{d}",
                    b.dim()
                )));
            }
            let min = eigenvalues_hermitian(b)?.first().copied().unwrap_or(0.0);
            if min < -SPEC_TOL {
                return Err(OqwError::NotPositive { min_eigenvalue: min });
            }
        }
        let state = Self { blocks };
        let total = state.total_trace();
        if (total - 1.0).abs() > SPEC_TOL {
            return Err(OqwError::InvalidParameter(format!(
                "total trace {total} is not 1"
            )));
        }
        Ok(state)
    }

    pub(crate) fn from_blocks_unchecked(blocks: Vec<ComplexMatrix>) -> Self {
        Self { blocks }
    }

    /// All mass at `node` in state `rho`.
    pub fn localized(n_nodes: usize, node: usize, rho: &ComplexMatrix) -> Result<Self> {
        if node >= n_nodes {
            return Err(OqwError::InvalidParameter(format!(
                "node {node} out of range for {n_nodes} nodes"
            )));
        }
        let d = rho.rows();
        let blocks = (0..n_nodes)
            .map(|i| {
                if i == node {
                    rho.clone()
                } else {
                    ComplexMatrix::zeros(d, d)
                }
            })
            .collect();
        Self::new(blocks)
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn block(&self, node: usize) -> &ComplexMatrix {
        &self.blocks[node]
    }

    pub fn n_nodes(&self) -> usize {
        self.blocks.len()
    }

    pub fn walker_dim(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().re).sum()
    }

    /// Dense `(d_H·N) × (d_H·N)` matrix in walker ⊗ node ordering.
    pub fn to_dense(&self) -> ComplexMatrix {
        let n = self.n_nodes();
        let d = self.walker_dim();
        let mut m = ComplexMatrix::zeros(d * n, d * n);
        for (node, b) in self.blocks.iter().enumerate() {
            for r in 0..d {
                for c in 0..d {
                    m[(r * n + node, c * n + node)] = b[(r, c)];
                }
            }
        }
        m
    }

    /// Largest per-block trace distance to another state of the same shape.
    pub fn max_block_distance(&self, other: &Self) -> Result<f64> {
        if self.n_nodes() != other.n_nodes() || self.walker_dim() != other.walker_dim() {
            return Err(OqwError::DimensionMismatch(
                "states have different shapes".into(),
            ));
        }
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| crate::matrixkit::trace_distance(a, b))
            .try_fold(0.0_f64, |acc, d| d.map(|d| acc.max(d)))
    }
}

/// Parameters of the linear chain: `N` nodes, right-jump probability `ω`
/// and the per-edge unitaries `U_0 … U_{N−2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearChainSpec {
    n_nodes: usize,
    omega: f64,
    unitaries: Vec<ComplexMatrix>,
}

impl LinearChainSpec {
    pub fn new(n_nodes: usize, omega: f64, unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        if n_nodes < 2 {
            return Err(OqwError::InvalidParameter(format!(
                "chain needs at least 2 nodes, got {n_nodes}"
            )));
        }
        if !(0.0..=1.0).contains(&omega) {
            return Err(OqwError::InvalidParameter(format!(
                "omega must lie in [0, 1], got {omega}"
            )));
        }
        if unitaries.len() != n_nodes - 1 {
            return Err(OqwError::InvalidParameter(format!(
                "chain with {n_nodes} nodes needs {} unitaries, got {}",
                n_nodes - 1,
                unitaries.len()
            )));
        }
        let d = unitaries[0].rows();
        for (i, u) in unitaries.iter().enumerate() {
            if u.dim() != (d, d) {
                return Err(OqwError::DimensionMismatch(format!(
                    "U_{i} is {:?}, expected {d}x{d}",
                    u.dim()
                )));
            }
            if !is_unitary(u, SPEC_TOL)? {
                return Err(OqwError::NotUnitary {
                    deviation: crate::matrixkit::unitarity_deviation(u)?,
                });
            }
        }
        Ok(Self {
            n_nodes,
            omega,
            unitaries,
        })
    }

    /// Chain whose unitaries are all the identity.
    pub fn identity_chain(n_nodes: usize, omega: f64, dh: usize) -> Result<Self> {
        Self::new(
            n_nodes,
            omega,
            vec![ComplexMatrix::identity(dh); n_nodes.saturating_sub(1)],
        )
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Left-jump probability, `1 − ω`.
    pub fn lambda(&self) -> f64 {
        1.0 - self.omega
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn unitary(&self, i: usize) -> &ComplexMatrix {
        &self.unitaries[i]
    }

    pub fn walker_dim(&self) -> usize {
        self.unitaries[0].rows()
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(self.n_nodes, omega, self.unitaries.clone())
    }

    /// Net walker operator picked up moving from node `from` to node `to`:
    /// `U_{to−1}⋯U_{from}` to the right, its adjoint to the left.
    pub fn transport(&self, from: usize, to: usize) -> ComplexMatrix {
        let d = self.walker_dim();
        let mut acc = ComplexMatrix::identity(d);
        if to > from {
            for k in from..to {
                acc = &self.unitaries[k] * &acc;
            }
        } else {
            for k in (to..from).rev() {
                acc = &self.unitaries[k].adjoint() * &acc;
            }
        }
        acc
    }
}

pub fn chain_to_spec(chain: &LinearChainSpec) -> OqwSpec {
    OqwSpec::from_chain_parts(chain.n_nodes, chain.omega, &chain.unitaries)
        .expect("validated chain builds a valid spec")
}

fn check_shapes(spec: &OqwSpec, state: &DiagonalState) -> Result<()> {
    if spec.n_nodes != state.n_nodes() || spec.walker_dim != state.walker_dim() {
        return Err(OqwError::DimensionMismatch(format!(
            "spec has {} nodes of dimension {}, state has {} of dimension {}",
            spec.n_nodes,
            spec.walker_dim,
            state.n_nodes(),
            state.walker_dim()
        )));
    }
    Ok(())
}

/// One application of the walk map: `ρ'_j = Σ_i B[i→j] ρ_i B[i→j]†`.
pub fn step(spec: &OqwSpec, state: &DiagonalState) -> Result<DiagonalState> {
    check_shapes(spec, state)?;
    let d = spec.walker_dim;
    let mut blocks = vec![ComplexMatrix::zeros(d, d); spec.n_nodes];
    for (&(from, to), b) in &spec.jumps {
        let src = &state.blocks[from];
        if src.max_abs() == 0.0 {
            continue;
        }
        blocks[to] = &blocks[to] + &src.conjugate_by(b);
    }
    Ok(DiagonalState { blocks })
}

pub fn evolve(spec: &OqwSpec, state: &DiagonalState, n: usize) -> Result<DiagonalState> {
    check_shapes(spec, state)?;
    let mut current = state.clone();
    for _ in 0..n {
        current = step(spec, &current)?;
    }
    Ok(current)
}

/// `Tr ρ_i` per node.
pub fn node_distribution(state: &DiagonalState) -> Vec<f64> {
    state.blocks.iter().map(|b| b.trace().re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{transition_matrix, ChainParams};
    use crate::matrixkit::{gates, trace_distance};
    use crate::random::{haar_unitary, random_chain, random_density, SeededRng};

    fn single_node_identity() -> OqwSpec {
        let mut jumps = BTreeMap::new();
        jumps.insert((0, 0), ComplexMatrix::identity(2));
        OqwSpec::new(1, 2, jumps).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&single_node_identity()).is_empty());

        let u0 = haar_unitary(&mut SeededRng::new(1), 2);
        let u1 = haar_unitary(&mut SeededRng::new(2), 2);
        let chain = LinearChainSpec::new(3, 2.0 / 3.0, vec![u0.clone(), u1.clone()]).unwrap();
        let spec = chain_to_spec(&chain);
        assert!(validate(&spec).is_empty());
        let left = spec.jump(1, 0).unwrap();
        let right = spec.jump(1, 2).unwrap();
        assert!(left.max_abs_diff(&u0.adjoint().scale_real((1.0_f64 / 3.0).sqrt())) < 1e-15);
        assert!(right.max_abs_diff(&u1.scale_real((2.0_f64 / 3.0).sqrt())) < 1e-15);

        let mut jumps = BTreeMap::new();
        jumps.insert((0, 0), ComplexMatrix::identity(2));
        jumps.insert((0, 1), ComplexMatrix::identity(2));
        let bad = OqwSpec::new(2, 2, jumps).unwrap();
        let v = validate(&bad);
        // node 0 sums to 2I, node 1 has no jumps at all
        assert_eq!(v[0], Violation { node: 0, deviation: 1.0 });
        assert_eq!(v[1], Violation { node: 1, deviation: 1.0 });
    }

    #[test]
    fn n2_single_step_matches_closed_form() {
        let mut rng = SeededRng::new(17);
        let u = haar_unitary(&mut rng, 2);
        let omega = 0.7;
        let lambda = 1.0 - omega;
        let p = 0.35;
        let rho0 = random_density(&mut rng, 2);
        let rho1 = random_density(&mut rng, 2);
        let chain = LinearChainSpec::new(2, omega, vec![u.clone()]).unwrap();
        let state =
            DiagonalState::new(vec![rho0.scale_real(p), rho1.scale_real(1.0 - p)]).unwrap();
        let next = step(&chain_to_spec(&chain), &state).unwrap();
        let ud = u.adjoint();
        let expect0 = &rho0.scale_real(lambda * p) + &rho1.conjugate_by(&ud).scale_real((1.0 - p) * lambda);
        let expect1 = &rho0.conjugate_by(&u).scale_real(omega * p) + &rho1.scale_real(omega * (1.0 - p));
        assert!(next.block(0).max_abs_diff(&expect0) < 1e-14);
        assert!(next.block(1).max_abs_diff(&expect1) < 1e-14);
    }

    #[test]
    fn classical_redistribution_for_scalar_jumps() {
        let chain = LinearChainSpec::identity_chain(5, 0.6, 2).unwrap();
        let spec = chain_to_spec(&chain);
        let mut rng = SeededRng::new(5);
        let masses = rng.random_probabilities(5);
        let rho = random_density(&mut rng, 2);
        let state = DiagonalState::new(masses.iter().map(|&m| rho.scale_real(m)).collect()).unwrap();
        let t = transition_matrix(&ChainParams::new(5, 0.6).unwrap());
        let next = node_distribution(&step(&spec, &state).unwrap());
        for (i, &p) in next.iter().enumerate() {
            let expected: f64 = (0..5).map(|j| t[(i, j)].re * masses[j]).sum();
            assert!((p - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn step_conserves_trace_on_random_specs() {
        let mut rng = SeededRng::new(23);
        for trial in 0..100 {
            let n = 2 + trial % 6;
            let d = 1 + trial % 3;
            let omega = rng.uniform();
            let chain = random_chain(&mut rng, n, d, omega);
            let masses = rng.random_probabilities(n);
            let blocks = masses
                .iter()
                .map(|&m| random_density(&mut rng, d).scale_real(m))
                .collect();
            let state = DiagonalState::new(blocks).unwrap();
            let next = step(&chain_to_spec(&chain), &state).unwrap();
            assert!((next.total_trace() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn evolve_zero_steps_is_identity() {
        let chain = random_chain(&mut SeededRng::new(3), 4, 2, 0.6);
        let state = DiagonalState::localized(4, 0, &ComplexMatrix::unit(2, 0, 0)).unwrap();
        assert_eq!(evolve(&chain_to_spec(&chain), &state, 0).unwrap(), state);
    }

    #[test]
    fn n2_chain_stabilizes_after_one_step() {
        let mut rng = SeededRng::new(77);
        let chain = random_chain(&mut rng, 2, 2, 0.55);
        let state = DiagonalState::new(vec![
            random_density(&mut rng, 2).scale_real(0.4),
            random_density(&mut rng, 2).scale_real(0.6),
        ])
        .unwrap();
        let spec = chain_to_spec(&chain);
        let one = evolve(&spec, &state, 1).unwrap();
        let two = evolve(&spec, &state, 2).unwrap();
        assert!(one.max_block_distance(&two).unwrap() <= 1e-12);
    }

    #[test]
    fn pure_start_blocks_follow_unitary_prefix() {
        let mut rng = SeededRng::new(31);
        let chain = random_chain(&mut rng, 5, 2, 0.65);
        let psi = ComplexMatrix::projector(&rng.random_ket(2));
        let spec = chain_to_spec(&chain);
        let mut state = DiagonalState::localized(5, 0, &psi).unwrap();
        let t = transition_matrix(&ChainParams::new(5, 0.65).unwrap());
        let mut classical = vec![1.0, 0.0, 0.0, 0.0, 0.0];
        for _ in 0..12 {
            state = step(&spec, &state).unwrap();
            classical = (0..5)
                .map(|i| (0..5).map(|j| t[(i, j)].re * classical[j]).sum())
                .collect();
            for i in 0..5 {
                let expected = psi.conjugate_by(&chain.transport(0, i)).scale_real(classical[i]);
                assert!(state.block(i).max_abs_diff(&expected) < 1e-12);
            }
        }
    }

    #[test]
    fn chain_to_spec_for_n2_x() {
        let chain = LinearChainSpec::new(2, 2.0 / 3.0, vec![gates::x()]).unwrap();
        let spec = chain_to_spec(&chain);
        assert_eq!(spec.jumps().len(), 4);
        let sl = (1.0_f64 / 3.0).sqrt();
        let sw = (2.0_f64 / 3.0).sqrt();
        let id = ComplexMatrix::identity(2);
        assert!(spec.jump(0, 0).unwrap().max_abs_diff(&id.scale_real(sl)) < 1e-15);
        assert!(spec.jump(0, 1).unwrap().max_abs_diff(&gates::x().scale_real(sw)) < 1e-15);
        assert!(spec.jump(1, 0).unwrap().max_abs_diff(&gates::x().scale_real(sl)) < 1e-15);
        assert!(spec.jump(1, 1).unwrap().max_abs_diff(&id.scale_real(sw)) < 1e-15);
    }

    #[test]
    fn random_chains_validate() {
        let mut rng = SeededRng::new(12);
        for trial in 0..50 {
            let chain = random_chain(&mut rng, 2 + trial % 7, 1 + trial % 4, rng_omega(trial));
            assert!(validate(&chain_to_spec(&chain)).is_empty());
        }
    }

    fn rng_omega(trial: usize) -> f64 {
        (trial as f64 * 0.37).fract()
    }

    #[test]
    fn deterministic_right_transport() {
        let chain = LinearChainSpec::new(2, 1.0, vec![gates::x()]).unwrap();
        let state = DiagonalState::localized(2, 0, &ComplexMatrix::unit(2, 0, 0)).unwrap();
        let next = step(&chain_to_spec(&chain), &state).unwrap();
        assert_eq!(node_distribution(&next), vec![0.0, 1.0]);
        assert!(trace_distance(next.block(1), &ComplexMatrix::unit(2, 1, 1)).unwrap() < 1e-15);
    }

    #[test]
    fn shape_errors() {
        let chain = random_chain(&mut SeededRng::new(1), 3, 2, 0.5);
        let state = DiagonalState::localized(4, 0, &ComplexMatrix::unit(2, 0, 0)).unwrap();
        assert!(matches!(
            step(&chain_to_spec(&chain), &state),
            Err(OqwError::DimensionMismatch(_))
        ));
        assert!(LinearChainSpec::new(2, 0.5, vec![ComplexMatrix::diag_real(&[1.0, 0.5])]).is_err());
        assert!(LinearChainSpec::new(1, 0.5, vec![]).is_err());
        assert!(DiagonalState::new(vec![ComplexMatrix::identity(2)]).is_err());
    }
}
