use super::*;
use crate::par::Execution;
use approx::assert_abs_diff_eq;
use std::f64::consts::{FRAC_PI_2, PI};

fn random_prep(c: &mut Circuit, seed: u64) {
    use rand::Rng;
    let mut r = rng::seeded(seed);
    for q in 0..c.n_qubits() {
        c.ry(q, r.random_range(0.0..PI)).unwrap();
        c.phase(q, r.random_range(-PI..PI)).unwrap();
    }
    for q in 1..c.n_qubits() {
        c.cx(q - 1, q).unwrap();
        c.ry(q, r.random_range(0.0..PI)).unwrap();
    }
}

#[test]
fn bell_state() {
    let mut c = Circuit::new(2);
    c.h(0).unwrap();
    c.cx(0, 1).unwrap();
    let s = statevector(&c).unwrap();
    let p = s.probabilities();
    assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(p[3], 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(p[1] + p[2], 0.0, epsilon = 1e-12);
}

#[test]
fn ry_amplitudes() {
    let mut c = Circuit::new(1);
    c.ry(0, FRAC_PI_2).unwrap();
    let s = statevector(&c).unwrap();
    assert_abs_diff_eq!(s.amplitudes()[0].re, FRAC_PI_2.cos().sqrt() * 0.0 + (PI / 4.0).cos(), epsilon = 1e-12);
    assert_abs_diff_eq!(s.amplitudes()[1].re, (PI / 4.0).sin(), epsilon = 1e-12);
}

#[test]
fn little_endian_basis() {
    let mut c = Circuit::new(3);
    c.x(1).unwrap();
    let s = statevector(&c).unwrap();
    assert_abs_diff_eq!(s.probabilities()[2], 1.0);
    assert_eq!(s.marginal(&[1, 2]).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
}

#[test]
fn named_register_marginal() {
    let mut c = Circuit::new(0);
    let a = c.add_register("a", 2).unwrap();
    let b = c.add_register("b", 1).unwrap();
    c.x(a.qubit(0)).unwrap();
    c.h(b.qubit(0)).unwrap();
    let s = statevector(&c).unwrap();
    let p = probabilities(&s, &c, "a").unwrap();
    assert_abs_diff_eq!(p[1], 1.0, epsilon = 1e-12);
    assert!(probabilities(&s, &c, "nope").is_err());
}

#[test]
fn rejects_bad_ops() {
    let mut c = Circuit::new(2);
    assert!(c.cx(0, 0).is_err());
    assert!(c.x(5).is_err());
    assert!(c.ry(0, f64::NAN).is_err());
    assert!(c.measure(0, 0).is_err());
}

#[test]
fn zero_control_is_x_conjugated() {
    for gate in [Gate::X, Gate::H, Gate::Ry(0.7), Gate::Phase(-1.1)] {
        let mut a = Circuit::new(3);
        random_prep(&mut a, 3);
        let mut b = a.clone();
        a.apply_controlled(gate, 2, &[Control::zero(0), Control::one(1)]).unwrap();
        b.x(0).unwrap();
        b.apply_controlled(gate, 2, &[Control::one(0), Control::one(1)]).unwrap();
        b.x(0).unwrap();
        let d = statevector(&a).unwrap().max_abs_diff(&statevector(&b).unwrap());
        assert!(d < 1e-12, "{gate:?}: {d}");
    }
}

#[test]
fn inverse_undoes() {
    let mut c = Circuit::new(4);
    random_prep(&mut c, 9);
    c.apply_controlled(Gate::Ry(0.3), 3, &[Control::one(0), Control::zero(1)]).unwrap();
    let mut full = c.clone();
    full.append(&c.inverse().unwrap()).unwrap();
    let s = statevector(&full).unwrap();
    assert_abs_diff_eq!(s.probabilities()[0], 1.0, epsilon = 1e-12);
}

#[test]
fn measurement_collapses_and_is_seeded() {
    let mut c = Circuit::with_bits(2, 2);
    c.h(0).unwrap();
    c.cx(0, 1).unwrap();
    c.measure(0, 0).unwrap();
    c.measure(1, 1).unwrap();
    for seed in 0..20 {
        let a = run(&c, seed).unwrap();
        let b = run(&c, seed).unwrap();
        assert_eq!(a.bits, b.bits);
        assert_eq!(a.bits[0], a.bits[1]);
        assert_abs_diff_eq!(a.state.norm_sqr(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn reset_and_feedback() {
    let mut c = Circuit::with_bits(2, 1);
    c.x(0).unwrap();
    c.measure(0, 0).unwrap();
    c.classical(Gate::X, 1, 0).unwrap();
    c.reset(0).unwrap();
    let out = run(&c, 1).unwrap();
    assert!(out.bits[0]);
    assert_abs_diff_eq!(out.state.probabilities()[2], 1.0, epsilon = 1e-12);
}

#[test]
fn sampling_is_reproducible() {
    let mut c = Circuit::new(3);
    random_prep(&mut c, 1);
    let s = statevector(&c).unwrap();
    let a = s.sample(1000, 42).unwrap();
    assert_eq!(a, s.sample(1000, 42).unwrap());
    assert_eq!(a.values().sum::<u64>(), 1000);
    assert!(s.sample(0, 1).is_err());
}

#[test]
fn parallel_matches_sequential() {
    let mut c = Circuit::new(16);
    random_prep(&mut c, 5);
    c.apply_controlled(Gate::H, 15, &[Control::one(0), Control::zero(7)]).unwrap();
    c.apply_controlled(Gate::X, 0, &[Control::one(15)]).unwrap();
    let a = statevector_with(&c, Execution::Sequential).unwrap();
    let b = statevector_with(&c, Execution::Parallel).unwrap();
    assert_eq!(a.amplitudes(), b.amplitudes());
    assert_eq!(a.norm_sqr().to_bits(), b.norm_sqr().to_bits());
}

#[test]
fn toffoli_costs_six() {
    let mut c = Circuit::new(3);
    c.ccx(0, 1, 2).unwrap();
    assert_eq!(two_qubit_gate_count(&c), 6);
    let mut one = Circuit::new(2);
    one.apply_controlled(Gate::Ry(0.4), 1, &[Control::zero(0)]).unwrap();
    assert_eq!(two_qubit_gate_count(&one), 2);
}

fn check_decomposition(n: usize, gate: Gate, target: usize, controls: &[Control]) {
    let mut c = Circuit::new(n);
    random_prep(&mut c, (n * 31 + target) as u64);
    c.apply_controlled(gate, target, controls).unwrap();
    let d = decompose(&c);
    for op in d.ops() {
        if let Op::Gate { controls, gate, .. } = op {
            assert!(controls.len() <= 1);
            assert!(controls.is_empty() || (*gate == Gate::X && controls[0].on_one));
        }
    }
    let diff = statevector(&c).unwrap().max_abs_diff(&statevector(&d).unwrap());
    assert!(diff < 1e-9, "{gate:?} k={} n={n}: {diff}", controls.len());
}

#[test]
fn decomposition_matches_up_to_eight_qubits() {
    let gates = [Gate::X, Gate::H, Gate::Ry(1.3), Gate::Phase(0.9)];
    for n in 2..=8 {
        for k in 1..n {
            for gate in gates {
                let controls: Vec<Control> = (0..k)
                    .map(|i| Control::when(i, i % 3 != 1))
                    .collect();
                check_decomposition(n, gate, n - 1, &controls);
                // target in the middle, controls around it
                let t = k / 2;
                let controls: Vec<Control> = (0..=k)
                    .filter(|q| *q != t)
                    .map(|q| Control::when(q, q % 2 == 0))
                    .collect();
                check_decomposition(n, gate, t, &controls);
            }
        }
    }
}

#[test]
fn v_chain_count() {
    // k = 5 controls with plenty of idle qubits: 4·3 Toffolis.
    let mut c = Circuit::new(9);
    c.apply_controlled(Gate::X, 5, &(0..5).map(Control::one).collect::<Vec<_>>()).unwrap();
    assert_eq!(two_qubit_gate_count(&c), 12 * 6);
}
