//! Rewrites multi-controlled gates into single-qubit gates and CX.
//!
//! Rules, applied recursively after 0-controls are conjugated with X:
//!
//! * one control: CX as is; C-RY and C-PHASE with two CX; C-H as
//!   `RY(π/4) · CX · RY(-π/4)` on the target.
//! * two-control X: the standard 6-CX Toffoli network.
//! * k ≥ 3 control X: with k-2 idle qubits, the borrowed-ancilla V-chain of
//!   4(k-2) Toffolis; with one idle qubit, split the controls in half around
//!   it (four smaller V-chains); with none, `H · C^k PHASE(π) · H`.
//! * k ≥ 2 control RY / PHASE: `C-V(c_k) · C^{k-1}X(→c_k) · C-V† · C^{k-1}X ·
//!   C^{k-1}V` with V the half-angle gate. The target is idle during the
//!   inner C^{k-1}X, so those always find a borrowed ancilla.
//!
//! Borrowed ancillas may hold any state; they are restored exactly.

use super::circuit::Circuit;
use super::gate::{Control, Gate, Op};
use std::f64::consts::{FRAC_PI_4, PI};

struct Emitter {
    n_qubits: usize,
    ops: Vec<Op>,
}

impl Emitter {
    fn one(&mut self, gate: Gate, q: usize) {
        self.ops.push(Op::gate(gate, q));
    }

    fn cx(&mut self, c: usize, t: usize) {
        self.ops.push(Op::controlled(Gate::X, t, vec![Control::one(c)]));
    }

    fn gate(&mut self, gate: Gate, target: usize, controls: &[Control]) {
        let zeros: Vec<usize> = controls.iter().filter(|c| !c.on_one).map(|c| c.qubit).collect();
        for &q in &zeros {
            self.one(Gate::X, q);
        }
        let cs: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
        self.mc(gate, target, &cs);
        for &q in &zeros {
            self.one(Gate::X, q);
        }
    }

    fn mc(&mut self, gate: Gate, t: usize, cs: &[usize]) {
        match (gate, cs.len()) {
            (_, 0) => self.one(gate, t),
            (Gate::X, 1) => self.cx(cs[0], t),
            (Gate::Ry(theta), 1) => {
                self.one(Gate::Ry(theta / 2.0), t);
                self.cx(cs[0], t);
                self.one(Gate::Ry(-theta / 2.0), t);
                self.cx(cs[0], t);
            }
            (Gate::Phase(theta), 1) => {
                self.one(Gate::Phase(theta / 2.0), cs[0]);
                self.cx(cs[0], t);
                self.one(Gate::Phase(-theta / 2.0), t);
                self.cx(cs[0], t);
                self.one(Gate::Phase(theta / 2.0), t);
            }
            (Gate::H, _) => {
                self.one(Gate::Ry(FRAC_PI_4), t);
                self.mc(Gate::X, t, cs);
                self.one(Gate::Ry(-FRAC_PI_4), t);
            }
            (Gate::X, 2) => self.toffoli(cs[0], cs[1], t),
            (Gate::X, _) => self.mcx(cs, t),
            (Gate::Ry(theta), _) => self.mc_root(Gate::Ry(theta / 2.0), t, cs),
            (Gate::Phase(theta), _) => self.mc_root(Gate::Phase(theta / 2.0), t, cs),
        }
    }

    /// C^k U with U = V², k ≥ 2.
    fn mc_root(&mut self, v: Gate, t: usize, cs: &[usize]) {
        let (last, rest) = cs.split_last().expect("at least two controls");
        self.mc(v, t, &[*last]);
        self.mc(Gate::X, *last, rest);
        self.mc(v.inverse(), t, &[*last]);
        self.mc(Gate::X, *last, rest);
        self.mc(v, t, rest);
    }

    fn idle(&self, cs: &[usize], t: usize) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|q| *q != t && !cs.contains(q))
            .collect()
    }

    fn mcx(&mut self, cs: &[usize], t: usize) {
        let k = cs.len();
        let idle = self.idle(cs, t);
        if idle.len() >= k - 2 {
            self.v_chain(cs, &idle[..k - 2], t);
        } else if let Some(&a) = idle.first() {
            let m1 = k.div_ceil(2);
            let (ca, cb) = cs.split_at(m1);
            let mut cb_a = cb.to_vec();
            cb_a.push(a);
            for _ in 0..2 {
                self.mc(Gate::X, a, ca);
                self.mc(Gate::X, t, &cb_a);
            }
        } else {
            self.one(Gate::H, t);
            self.mc(Gate::Phase(PI), t, cs);
            self.one(Gate::H, t);
        }
    }

    /// C^m X using m-2 borrowed ancillas: 4(m-2) Toffolis.
    fn v_chain(&mut self, c: &[usize], a: &[usize], t: usize) {
        let m = c.len();
        debug_assert_eq!(a.len(), m - 2);
        let ladder = |e: &mut Emitter| {
            for i in (2..m - 1).rev() {
                e.toffoli(c[i], a[i - 2], a[i - 1]);
            }
            e.toffoli(c[0], c[1], a[0]);
            for i in 2..m - 1 {
                e.toffoli(c[i], a[i - 2], a[i - 1]);
            }
        };
        self.toffoli(c[m - 1], a[m - 3], t);
        ladder(self);
        self.toffoli(c[m - 1], a[m - 3], t);
        ladder(self);
    }

    fn toffoli(&mut self, a: usize, b: usize, t: usize) {
        let tg = Gate::Phase(FRAC_PI_4);
        let tdg = Gate::Phase(-FRAC_PI_4);
        self.one(Gate::H, t);
        self.cx(b, t);
        self.one(tdg, t);
        self.cx(a, t);
        self.one(tg, t);
        self.cx(b, t);
        self.one(tdg, t);
        self.cx(a, t);
        self.one(tg, b);
        self.one(tg, t);
        self.one(Gate::H, t);
        self.cx(a, b);
        self.one(tg, a);
        self.one(tdg, b);
        self.cx(a, b);
    }
}

/// Equivalent circuit using only uncontrolled gates and CX. Measurements,
/// resets and classically controlled gates are copied unchanged.
pub fn decompose(circuit: &Circuit) -> Circuit {
    let mut e = Emitter {
        n_qubits: circuit.n_qubits(),
        ops: Vec::new(),
    };
    for op in circuit.ops() {
        match op {
            Op::Gate {
                gate,
                target,
                controls,
            } => e.gate(*gate, *target, controls),
            other => e.ops.push(other.clone()),
        }
    }
    circuit.with_ops(e.ops)
}

/// Number of CX gates after [`decompose`].
pub fn two_qubit_gate_count(circuit: &Circuit) -> usize {
    decompose(circuit)
        .ops()
        .iter()
        .filter(|op| matches!(op, Op::Gate { controls, .. } if !controls.is_empty()))
        .count()
}
