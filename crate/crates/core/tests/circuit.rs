use oqw::channels::{dephasing_channel, postselect};
use oqw::circuit::{
    build_decrement, build_increment, build_left, build_left_boundary, build_right, build_right_boundary,
    build_step, build_walk, circuit_unitary, cost_estimate, simulate_density, simulate_trajectory, AncillaPolicy,
    Circuit, CostModel, StepOrder,
};
use oqw::matrixkit::{gates, trace_distance, unitarity_deviation};
use oqw::random::{haar_unitary, random_chain, random_density, SeededRng};
use oqw::walk::{chain_to_spec, evolve};
use oqw::{ComplexMatrix, DiagonalState, LinearChainSpec, C64};

fn random_state(rng: &mut SeededRng, n: usize, d: usize) -> DiagonalState {
    let masses = rng.random_probabilities(n);
    DiagonalState::new(masses.iter().map(|&m| random_density(rng, d).scale_real(m)).collect()).unwrap()
}

fn block_distance(a: &DiagonalState, b: &DiagonalState) -> f64 {
    a.blocks()
        .iter()
        .zip(b.blocks())
        .map(|(x, y)| trace_distance(x, y).unwrap())
        .fold(0.0, f64::max)
}

/// Basis index of `|w⟩|i⟩|a⟩|a'⟩` in a single-step layout (qubit q = bit q).
fn basis(c: &Circuit, w: usize, i: usize, a: usize, f: usize) -> usize {
    let mut idx = 0;
    for (k, &q) in c.register("qH").unwrap().iter().enumerate() {
        idx |= ((w >> k) & 1) << q;
    }
    for (k, &q) in c.register("qG").unwrap().iter().enumerate() {
        idx |= ((i >> k) & 1) << q;
    }
    idx |= a << c.register("qA").unwrap()[0];
    idx |= f << c.register("qA'").unwrap()[0];
    idx
}

/// Column of the circuit unitary for `|e_w⟩|i⟩|a⟩|f⟩` restricted to the walker
/// amplitudes at `(j, b, g)`.
fn amplitudes(u: &ComplexMatrix, c: &Circuit, dh: usize, from: (usize, usize, usize, usize), to: (usize, usize, usize)) -> ComplexMatrix {
    ComplexMatrix::from_fn(dh, dh, |v, w| {
        u[(basis(c, v, to.0, to.1, to.2), basis(c, w, from.1, from.2, from.3))]
    })
}

fn chain4(seed: u64) -> LinearChainSpec {
    random_chain(&mut SeededRng::new(seed), 4, 2, 0.6)
}

#[test]
fn increment_decrement_are_inverse() {
    for g in 1..=4 {
        let s = circuit_unitary(&build_increment(g)).unwrap();
        let p = circuit_unitary(&build_decrement(g)).unwrap();
        assert!((&s * &p).max_abs_diff(&ComplexMatrix::identity(1 << g)) == 0.0);
        assert_eq!(p, s.adjoint());
        let mut acc = ComplexMatrix::identity(1 << g);
        for _ in 0..(1 << g) {
            acc = &acc * &p;
        }
        assert_eq!(acc, ComplexMatrix::identity(1 << g));
    }
}

#[test]
fn right_shift_semantics() {
    let chain = chain4(1);
    let c = build_right(&chain);
    let u = circuit_unitary(&c).unwrap();
    for j in 0..3 {
        let got = amplitudes(&u, &c, 2, (0, j, 1, 0), (j + 1, 1, 0));
        assert!(got.max_abs_diff(chain.unitary(j)) < 1e-14);
    }
    for j in 0..4 {
        let got = amplitudes(&u, &c, 2, (0, j, 0, 0), (j, 0, 0));
        assert!(got.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }
}

#[test]
fn left_shift_semantics() {
    let chain = chain4(2);
    let c = build_left(&chain);
    let u = circuit_unitary(&c).unwrap();
    for j in 1..4 {
        let got = amplitudes(&u, &c, 2, (0, j, 0, 0), (j - 1, 0, 0));
        assert!(got.max_abs_diff(&chain.unitary(j - 1).adjoint()) < 1e-14);
    }
    for j in 0..4 {
        let got = amplitudes(&u, &c, 2, (0, j, 1, 0), (j, 1, 0));
        assert!(got.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }
}

#[test]
fn left_then_right_returns_interior_states() {
    let chain = chain4(3);
    let l = build_left(&chain);
    let r = build_right(&chain);
    let ul = circuit_unitary(&l).unwrap();
    let ur = circuit_unitary(&r).unwrap();
    // flip qA between the two shifts
    let qa = l.register("qA").unwrap()[0];
    let dim = ul.rows();
    let flip = ComplexMatrix::from_fn(dim, dim, |a, b| {
        if a == b ^ (1 << qa) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let round = &(&ur * &flip) * &ul;
    for j in 1..3 {
        let got = amplitudes(&round, &l, 2, (0, j, 0, 0), (j, 1, 0));
        assert!(got.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }
}

#[test]
fn boundary_blocks() {
    let chain = chain4(4);
    let rb = build_right_boundary(&chain);
    let u = circuit_unitary(&rb).unwrap();
    let hold: f64 = (0..2).map(|f| amplitudes(&u, &rb, 2, (0, 3, 1, 0), (3, 1, f)).frobenius_norm().powi(2)).sum();
    assert!((hold - 2.0).abs() < 1e-14);
    assert!(amplitudes(&u, &rb, 2, (0, 3, 1, 0), (3, 1, 0)).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    for i in 0..3 {
        let moved: ComplexMatrix = (0..2)
            .map(|f| amplitudes(&u, &rb, 2, (0, i, 1, 0), (i + 1, 1, f)))
            .fold(ComplexMatrix::zeros(2, 2), |acc, m| &acc + &m);
        assert!(moved.max_abs_diff(chain.unitary(i)) < 1e-14);
    }
    for i in 0..4 {
        let same = amplitudes(&u, &rb, 2, (0, i, 0, 0), (i, 0, 0));
        assert!(same.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }

    let lb = build_left_boundary(&chain);
    let u = circuit_unitary(&lb).unwrap();
    assert!(amplitudes(&u, &lb, 2, (0, 0, 0, 0), (0, 0, 0)).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    for i in 1..4 {
        let moved: ComplexMatrix = (0..2)
            .map(|f| amplitudes(&u, &lb, 2, (0, i, 0, 0), (i - 1, 0, f)))
            .fold(ComplexMatrix::zeros(2, 2), |acc, m| &acc + &m);
        assert!(moved.max_abs_diff(&chain.unitary(i - 1).adjoint()) < 1e-14);
    }
    for i in 0..4 {
        let same = amplitudes(&u, &lb, 2, (0, i, 1, 0), (i, 1, 0));
        assert!(same.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }
}

#[test]
fn sub_circuits_are_unitary() {
    let mut rng = SeededRng::new(5);
    for n in [2, 3, 4, 5, 8] {
        for dh in [1, 2, 3] {
            let chain = random_chain(&mut rng, n, dh, 0.6);
            for c in [
                build_right(&chain),
                build_left(&chain),
                build_right_boundary(&chain),
                build_left_boundary(&chain),
            ] {
                assert!(c.is_well_formed());
                assert!(unitarity_deviation(&circuit_unitary(&c).unwrap()).unwrap() <= 1e-10);
            }
        }
    }
}

#[test]
fn walk_circuit_matches_direct_evolution() {
    let mut rng = SeededRng::new(6);
    for n_nodes in [2, 4, 8] {
        let omega = rng.uniform_in(0.1, 0.9);
        let chain = random_chain(&mut rng, n_nodes, 2, omega);
        let spec = chain_to_spec(&chain);
        let init = random_state(&mut rng, n_nodes, 2);
        let c = build_walk(&chain, 10, AncillaPolicy::Reuse, StepOrder::RightFirst);
        let traj = simulate_trajectory(&c, &init).unwrap();
        for (k, state) in traj.iter().enumerate() {
            let direct = evolve(&spec, &init, k + 1).unwrap();
            assert!(block_distance(state, &direct) <= 1e-10, "N={n_nodes} step {}", k + 1);
            assert!((state.total_trace() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn policies_and_orders_agree() {
    let mut rng = SeededRng::new(7);
    let chain = random_chain(&mut rng, 4, 2, 0.55);
    let init = random_state(&mut rng, 4, 2);
    let reference = simulate_density(&build_walk(&chain, 5, AncillaPolicy::Reuse, StepOrder::RightFirst), &init).unwrap();
    for policy in [AncillaPolicy::Fresh, AncillaPolicy::Reuse] {
        for order in [StepOrder::RightFirst, StepOrder::LeftFirst] {
            let out = simulate_density(&build_walk(&chain, 5, policy, order), &init).unwrap();
            assert!(block_distance(&out, &reference) <= 1e-12);
        }
    }
}

#[test]
fn padded_sizes_match_direct_evolution() {
    let mut rng = SeededRng::new(8);
    for (n_nodes, dh) in [(3, 2), (5, 2), (3, 3), (6, 1)] {
        let chain = random_chain(&mut rng, n_nodes, dh, 0.62);
        let init = random_state(&mut rng, n_nodes, dh);
        for order in [StepOrder::RightFirst, StepOrder::LeftFirst] {
            let out = simulate_density(&build_walk(&chain, 4, AncillaPolicy::Reuse, order), &init).unwrap();
            let direct = evolve(&chain_to_spec(&chain), &init, 4).unwrap();
            assert!(block_distance(&out, &direct) <= 1e-10, "N={n_nodes} dH={dh}");
        }
    }
}

#[test]
fn extreme_coins() {
    let mut rng = SeededRng::new(9);
    let chain = random_chain(&mut rng, 4, 2, 1.0);
    let rho = random_density(&mut rng, 2);
    let init = DiagonalState::localized(4, 1, &rho).unwrap();
    let out = simulate_density(&build_step(&chain, StepOrder::RightFirst), &init).unwrap();
    assert!(out.block(2).max_abs_diff(&rho.conjugate_by(chain.unitary(1))) < 1e-12);

    let chain = chain.with_omega(0.0).unwrap();
    let out = simulate_density(&build_step(&chain, StepOrder::RightFirst), &init).unwrap();
    assert!(out.block(0).max_abs_diff(&rho.conjugate_by(&chain.unitary(0).adjoint())) < 1e-12);
}

#[test]
fn dephasing_chain_circuit() {
    let mut rng = SeededRng::new(10);
    let chain = LinearChainSpec::new(2, 0.7, vec![gates::z()]).unwrap();
    let rho = oqw::random::random_pure_density(&mut rng, 2);
    let p = 0.3;
    let init = DiagonalState::new(vec![rho.scale_real(p), rho.scale_real(1.0 - p)]).unwrap();
    let out = simulate_density(&build_walk(&chain, 1, AncillaPolicy::Fresh, StepOrder::RightFirst), &init).unwrap();
    let post = postselect(&out, 1).unwrap();
    assert!(trace_distance(&post, &dephasing_channel(p, &rho)).unwrap() <= 1e-12);
}

#[test]
fn zero_steps_is_identity() {
    let mut rng = SeededRng::new(11);
    let chain = random_chain(&mut rng, 4, 2, 0.6);
    let init = random_state(&mut rng, 4, 2);
    let c = build_walk(&chain, 0, AncillaPolicy::Fresh, StepOrder::RightFirst);
    assert!(c.gates.is_empty());
    assert_eq!(simulate_density(&c, &init).unwrap(), init);
}

#[test]
fn mismatched_state_is_rejected() {
    let mut rng = SeededRng::new(12);
    let chain = random_chain(&mut rng, 4, 2, 0.6);
    let init = random_state(&mut rng, 3, 2);
    let c = build_walk(&chain, 1, AncillaPolicy::Reuse, StepOrder::RightFirst);
    assert!(simulate_density(&c, &init).is_err());
}

#[test]
fn walker_unitaries_padded_with_identity() {
    let mut rng = SeededRng::new(13);
    let u = haar_unitary(&mut rng, 3);
    let chain = LinearChainSpec::new(2, 0.5, vec![u.clone()]).unwrap();
    let c = build_right(&chain);
    let full = circuit_unitary(&c).unwrap();
    let got = amplitudes(&full, &c, 4, (0, 0, 1, 0), (1, 1, 0));
    assert!(got.max_abs_diff(&u.pad_identity(1)) < 1e-14);
}

#[test]
fn gate_cost_grows_with_graph_size() {
    let mut rng = SeededRng::new(14);
    let mut last = 0;
    for g in [4, 8, 16, 32] {
        let chain = random_chain(&mut rng, g, 2, 0.6);
        let c = build_walk(&chain, 3, AncillaPolicy::Reuse, StepOrder::RightFirst);
        let cost = cost_estimate(&c, CostModel::linear());
        assert!(cost.cnot > last);
        assert!(cost.depth > 0);
        last = cost.cnot;
    }
}
