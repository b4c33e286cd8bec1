mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqe_lab::ansatz::{initial_parameters, AnsatzKind, EntanglementScheme};
use vqe_lab::ising::{build_tim, estimate_expectation_shots, measurement_groups, TimParams};
use vqe_lab::pauli::{Pauli, PauliString, PauliSum};
use vqe_lab::state::{Axis, Statevector};

#[derive(Debug, Clone)]
enum Op {
    Rot(Axis, usize, f64),
    Cnot(usize, usize),
}

fn op() -> impl Strategy<Value = Op> {
    let axis = prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)];
    prop_oneof![
        (axis, 0..6usize, -10.0..10.0f64).prop_map(|(a, q, t)| Op::Rot(a, q, t)),
        (0..6usize, 1..6usize).prop_map(|(c, d)| Op::Cnot(c, d)),
    ]
}

fn apply(state: &mut Statevector, ops: &[Op]) {
    let n = state.n_qubits();
    for o in ops {
        match *o {
            Op::Rot(a, q, t) => state.apply_rotation(a, q % n, t).unwrap(),
            Op::Cnot(c, d) if n > 1 => state.apply_cnot(c % n, (c % n + 1 + d % (n - 1)) % n).unwrap(),
            Op::Cnot(..) => {}
        }
    }
}

fn random_state(n: usize, seed: u64) -> Statevector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = Statevector::zero_state(n).unwrap();
    for layer in 0..3 {
        for q in 0..n {
            for axis in [Axis::Y, Axis::Z] {
                state.apply_rotation(axis, q, rng.random_range(-PI..PI)).unwrap();
            }
            if layer < 2 && q + 1 < n {
                state.apply_cnot(q, q + 1).unwrap();
            }
        }
    }
    state
}

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)], n)
        .prop_map(PauliString::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gate_sequences_preserve_norm(n in 1..=6usize, ops in prop::collection::vec(op(), 0..=100)) {
        let mut state = Statevector::zero_state(n).unwrap();
        apply(&mut state, &ops);
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rotation_is_undone_by_its_inverse(n in 1..=5usize, seed in any::<u64>(), q in 0..5usize, t in -10.0..10.0f64) {
        let start = random_state(n, seed);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let mut s = start.clone();
            s.apply_rotation(axis, q % n, t).unwrap();
            s.apply_rotation(axis, q % n, -t).unwrap();
            for (a, b) in s.amplitudes().iter().zip(start.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cnot_twice_is_bit_exact_identity(n in 2..=6usize, seed in any::<u64>(), c in 0..6usize, d in 1..6usize) {
        let start = random_state(n, seed);
        let (c, t) = (c % n, (c % n + 1 + d % (n - 1)) % n);
        let mut s = start.clone();
        s.apply_cnot(c, t).unwrap();
        s.apply_cnot(c, t).unwrap();
        prop_assert_eq!(s.amplitudes(), start.amplitudes());
    }

    #[test]
    fn expectation_is_linear(
        seed in any::<u64>(),
        (p, q) in (pauli_string(4), pauli_string(4)),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let state = random_state(4, seed);
        let sum = PauliSum::new(4, vec![(a, p.clone()), (b, q.clone())]).unwrap();
        let lhs = state.expectation(&sum).unwrap();
        let rhs = a * state.pauli_expectation(&p).unwrap() + b * state.pauli_expectation(&q).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn measurement_groups_recombine(n in 2..=7usize, h in 0.0..3.0f64, open in any::<bool>(), seed in any::<u64>()) {
        let params = if open { TimParams::open(n, 1.0, h) } else { TimParams::ring(n, 1.0, h) };
        let ham = build_tim(&params).unwrap();
        let (z, x) = measurement_groups(&ham).unwrap();
        let state = random_state(n, seed);
        let whole = state.expectation(&ham).unwrap();
        let parts = state.expectation(&z).unwrap() + state.expectation(&x).unwrap();
        prop_assert!((whole - parts).abs() < 1e-12);
    }

    #[test]
    fn bound_states_are_normalized(
        kind in prop_oneof![Just(AnsatzKind::RealAmplitudes), Just(AnsatzKind::EfficientSu2)],
        ent in prop_oneof![Just(EntanglementScheme::Linear), Just(EntanglementScheme::Full)],
        n in 2..=7usize,
        layers in 0..=3usize,
        seed in any::<u64>(),
    ) {
        let t = kind.build(n, layers, ent).unwrap();
        let state = t.bind(&initial_parameters(&t, &mut ChaCha8Rng::seed_from_u64(seed))).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn real_amplitudes_stay_real(n in 2..=7usize, layers in 0..=3usize, seed in any::<u64>()) {
        let t = AnsatzKind::RealAmplitudes.build(n, layers, EntanglementScheme::Full).unwrap();
        let state = t.bind(&initial_parameters(&t, &mut ChaCha8Rng::seed_from_u64(seed))).unwrap();
        prop_assert!(state.amplitudes().iter().all(|a| a.im.abs() < 1e-12));
    }

    #[test]
    fn parameters_have_period_four_pi(
        kind in prop_oneof![Just(AnsatzKind::RealAmplitudes), Just(AnsatzKind::EfficientSu2)],
        n in 2..=5usize,
        seed in any::<u64>(),
        pick in any::<prop::sample::Index>(),
    ) {
        let t = kind.build(n, 2, EntanglementScheme::Linear).unwrap();
        let theta = initial_parameters(&t, &mut ChaCha8Rng::seed_from_u64(seed));
        let i = pick.index(theta.len());
        let mut shifted = theta.clone();
        shifted[i] += 4.0 * PI;
        let a = t.bind(&theta).unwrap();
        let b = t.bind(&shifted).unwrap();
        prop_assert!(a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| (x - y).norm() < 1e-10));
        // A 2π shift flips the sign only.
        shifted[i] -= 2.0 * PI;
        let c = t.bind(&shifted).unwrap();
        prop_assert!(a.amplitudes().iter().zip(c.amplitudes()).all(|(x, y)| (x + y).norm() < 1e-10));
    }

    #[test]
    fn parameter_counts(n in 2..=12usize, layers in 0..=4usize) {
        let ra = AnsatzKind::RealAmplitudes.build(n, layers, EntanglementScheme::Linear).unwrap();
        let su2 = AnsatzKind::EfficientSu2.build(n, layers, EntanglementScheme::Full).unwrap();
        prop_assert_eq!(ra.n_params(), n * (layers + 1));
        prop_assert_eq!(su2.n_params(), 2 * n * (layers + 1));
    }

    #[test]
    fn blocks_act_on_distinct_qubits(
        kind in prop_oneof![Just(AnsatzKind::RealAmplitudes), Just(AnsatzKind::EfficientSu2)],
        n in 2..=8usize,
        layers in 0..=3usize,
    ) {
        let t = kind.build(n, layers, EntanglementScheme::Full).unwrap();
        for block in t.layer_blocks() {
            let mut qubits: Vec<usize> = t.generators()[block.clone()].iter().map(|g| g.qubit).collect();
            qubits.sort_unstable();
            qubits.dedup();
            prop_assert_eq!(qubits.len(), block.len());
        }
    }
}

#[test]
fn shot_estimator_is_unbiased() {
    let ham = build_tim(&TimParams::ring(4, 1.0, 2.0)).unwrap();
    let state = random_state(4, 17);
    let exact = state.expectation(&ham).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let samples: Vec<f64> =
        (0..200).map(|_| estimate_expectation_shots(&state, &ham, 10_000, &mut rng).unwrap()).collect();
    let (m, s) = (common::mean(&samples), common::std_dev(&samples));
    assert!((m - exact).abs() < 5.0 * s / (200f64).sqrt(), "mean {m} exact {exact} std {s}");
}

#[test]
fn basis_states_follow_little_endian_indexing() {
    let mut s = Statevector::zero_state(3).unwrap();
    s.apply_rotation(Axis::X, 0, PI).unwrap();
    let one = Complex64::new(0.0, -1.0);
    assert!((s.amplitudes()[1] - one).norm() < 1e-15);
    let z0 = PauliString::from_sparse(3, &[(0, Pauli::Z)]).unwrap();
    assert!((s.pauli_expectation(&z0).unwrap() + 1.0).abs() < 1e-15);
}
