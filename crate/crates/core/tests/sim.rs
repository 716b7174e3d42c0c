mod common;

use common::dense::{self, Mat};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rlvqc::sim::{
    apply_gate, decompose_rab, gate_census, rzz_as_cx, Angle, Axis, BasisGate, Circuit,
    GateInstance, GateKind, StateVector,
};

fn simulator_unitary(g: &GateInstance, theta: f64, n: usize) -> Mat {
    // Column k is the image of basis state |k>.
    let d = 1 << n;
    let mut cols = Vec::with_capacity(d);
    for k in 0..d {
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        amps[k] = Complex64::new(1.0, 0.0);
        let s = apply_gate(StateVector::from_amplitudes(amps), g, theta).unwrap();
        cols.push(s.amplitudes().to_vec());
    }
    (0..d).map(|i| (0..d).map(|k| cols[k][i]).collect()).collect()
}

fn max_abs(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn rxx_pi_matches_matrix_exponential() {
    let u = dense::rotation(&dense::pauli_pair(Axis::X, 0, Axis::X, 1, 2), std::f64::consts::PI);
    let col: Vec<_> = u.iter().map(|r| r[0]).collect();
    let expect = [0.0, 0.0, 0.0].map(|x| Complex64::new(x, 0.0));
    for k in 0..3 {
        assert!((col[k] - expect[k]).norm() < 1e-12);
    }
    assert!((col[3] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
}

#[test]
fn every_kernel_matches_dense_oracle() {
    let n = 3;
    let mut gates = vec![
        GateInstance::h(1),
        GateInstance::cx(2, 0),
        GateInstance::cx(0, 2),
        GateInstance::single(GateKind::Rx, 0, Angle::slot(0)),
        GateInstance::single(GateKind::Ry, 2, Angle::slot(0)),
        GateInstance::single(GateKind::Rz, 1, Angle::slot(0)),
        GateInstance::double(GateKind::Rzz, 2, 0, Angle::slot(0)),
    ];
    for a in Axis::ALL {
        for b in Axis::ALL {
            gates.push(GateInstance::double(GateKind::Rab(a, b), 0, 2, Angle::slot(0)));
            gates.push(GateInstance::double(GateKind::Rab(a, b), 2, 1, Angle::slot(0)));
        }
    }
    for g in &gates {
        for theta in [0.3, 1.7, -2.2] {
            let err = max_abs(&simulator_unitary(g, theta, n), &dense::gate_matrix(g, theta, n));
            assert!(err <= 1e-9, "{:?} theta={theta}: {err}", g.kind);
        }
    }
}

#[test]
fn rab_decomposition_matches_exponential() {
    for a in Axis::ALL {
        for b in Axis::ALL {
            for theta in [0.3, 1.7] {
                let gates = decompose_rab(a, b, 0, 1, Angle::slot(0));
                let composite = dense::sequence_matrix(&gates, &[theta], 2);
                let target = dense::rotation(&dense::pauli_pair(a, 0, b, 1, 2), theta);
                let err = dense::dist_up_to_phase(&composite, &target);
                assert!(err <= 1e-9, "({a:?},{b:?}) theta={theta}: {err}");
                // exact, not only up to phase
                assert!(max_abs(&composite, &target) <= 1e-9);
            }
        }
    }
}

#[test]
fn rzz_equals_cx_rz_cx_up_to_phase() {
    for theta in [0.4, 2.9] {
        let seq = rzz_as_cx(0, 1, Angle::slot(0));
        let composite = dense::sequence_matrix(&seq, &[theta], 2);
        let target = dense::rotation(&dense::pauli_pair(Axis::Z, 0, Axis::Z, 1, 2), theta);
        assert!(dense::dist_up_to_phase(&composite, &target) <= 1e-9);
    }
}

#[test]
fn rxy_census() {
    let mut c = Circuit::new(2);
    c.push_rotation(GateKind::Rab(Axis::X, Axis::Y), [0, 1]);
    let census = gate_census(&c);
    assert_eq!(census[&BasisGate::H], 2);
    assert_eq!(census[&BasisGate::Rx], 2);
    assert_eq!(census[&BasisGate::Cx], 2);
    assert_eq!(census[&BasisGate::Rz], 1);
}

fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn arb_kind() -> impl Strategy<Value = GateKind> {
    let axis = prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)];
    prop_oneof![
        Just(GateKind::H),
        Just(GateKind::Rx),
        Just(GateKind::Ry),
        Just(GateKind::Rz),
        Just(GateKind::Rzz),
        Just(GateKind::Cx),
        (axis.clone(), axis).prop_map(|(a, b)| GateKind::Rab(a, b)),
    ]
}

prop_compose! {
    fn arb_circuit(max_qubits: usize, max_gates: usize)
        (n in 2..=max_qubits)
        (gates in prop::collection::vec((arb_kind(), 0..n, 1..n, -6.3f64..6.3), 0..=max_gates), n in Just(n))
        -> Circuit
    {
        let mut c = Circuit::new(n);
        for (kind, q0, off, theta) in gates {
            let q1 = (q0 + off) % n;
            let qubits = [q0, if kind.arity() == 2 { q1 } else { q0 }];
            if kind.is_parameterized() {
                let slot = c.push_rotation(kind, qubits);
                c.params[slot] = theta;
            } else {
                c.gates.push(GateInstance { kind, qubits, angle: None });
            }
        }
        c
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_preserved(c in arb_circuit(10, 50)) {
        let s = c.simulate().unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn zero_angle_gate_is_transparent(c in arb_circuit(5, 20), kind in arb_kind(), q0 in 0usize..5, off in 1usize..5) {
        prop_assume!(kind.is_parameterized());
        let n = c.n_qubits;
        let q0 = q0 % n;
        let q1 = (q0 + off % (n - 1).max(1)) % n;
        prop_assume!(kind.arity() == 1 || q0 != q1);
        let before = c.simulate().unwrap();
        let mut d = c.clone();
        d.push_rotation(kind, [q0, if kind.arity() == 2 { q1 } else { q0 }]);
        let after = d.simulate().unwrap();
        for (a, b) in before.amplitudes().iter().zip(after.amplitudes()) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn census_invariant_under_disjoint_permutation(c in arb_circuit(6, 12), seed in 0u64..1000) {
        // reversing a layer of gates on pairwise disjoint wires does not change the census
        let mut used = vec![false; c.n_qubits];
        let mut layer = Vec::new();
        for g in &c.gates {
            if g.targets().iter().all(|&q| !used[q]) {
                for &q in g.targets() { used[q] = true; }
                layer.push(*g);
            } else {
                break;
            }
        }
        let mut permuted = c.clone();
        let k = layer.len();
        let rot = if k > 0 { (seed as usize) % k } else { 0 };
        layer.rotate_left(rot);
        permuted.gates[..k].copy_from_slice(&layer);
        prop_assert_eq!(gate_census(&c), gate_census(&permuted));
        prop_assert_eq!(rlvqc::sim::circuit_depth(&c), rlvqc::sim::circuit_depth(&permuted));
    }
}

#[test]
fn shot_frequencies_converge_to_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = arb_circuit(4, 15);
    let n_runs = 100_000;
    let mut tree_rng = runner;
    for _ in 0..10 {
        let c = strategy.new_tree(&mut tree_rng).unwrap().current();
        let exact = c.exact_probabilities().unwrap();
        let h = c.run_shots(n_runs, &mut rng).unwrap();
        let bound = 5.0 * ((1usize << c.n_qubits) as f64 / n_runs as f64).sqrt();
        let tv = total_variation(&h.frequencies(), &exact);
        assert!(tv <= bound, "tv={tv} bound={bound}");
    }
}
