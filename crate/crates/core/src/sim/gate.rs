use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

/// Single-qubit gate alphabet. Angles are in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H,
    X,
    /// `exp(-i θ Y / 2)`: maps |0⟩ to cos(θ/2)|0⟩ + sin(θ/2)|1⟩.
    Ry(f64),
    /// `diag(1, e^{iθ})`.
    Phase(f64),
}

impl Gate {
    pub fn inverse(self) -> Gate {
        match self {
            Gate::H | Gate::X => self,
            Gate::Ry(t) => Gate::Ry(-t),
            Gate::Phase(t) => Gate::Phase(-t),
        }
    }

    pub fn angle(self) -> Option<f64> {
        match self {
            Gate::Ry(t) | Gate::Phase(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        self.angle().is_none_or(f64::is_finite)
    }

    /// Row-major 2x2 matrix.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let r = |x: f64| Complex64::new(x, 0.0);
        match self {
            Gate::H => [
                [r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)],
                [r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)],
            ],
            Gate::X => [[r(0.0), r(1.0)], [r(1.0), r(0.0)]],
            Gate::Ry(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                [[r(c), r(-s)], [r(s), r(c)]]
            }
            Gate::Phase(t) => [[r(1.0), r(0.0)], [r(0.0), Complex64::from_polar(1.0, t)]],
        }
    }
}

/// A control qubit together with the value it must hold for the gate to act.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub on_one: bool,
}

impl Control {
    pub fn one(qubit: usize) -> Self {
        Control { qubit, on_one: true }
    }

    pub fn zero(qubit: usize) -> Self {
        Control {
            qubit,
            on_one: false,
        }
    }

    pub fn when(qubit: usize, on_one: bool) -> Self {
        Control { qubit, on_one }
    }
}

/// Controls that must all be 1 (`mask` bits with matching `want` bits).
pub(crate) fn control_masks(controls: &[Control]) -> (usize, usize) {
    controls.iter().fold((0, 0), |(m, w), c| {
        let bit = 1usize << c.qubit;
        (m | bit, if c.on_one { w | bit } else { w })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Op {
    Gate {
        gate: Gate,
        target: usize,
        controls: Vec<Control>,
    },
    /// Projective Z measurement, outcome written to classical bit `bit`.
    Measure { qubit: usize, bit: usize },
    /// Measure and flip back to |0⟩.
    Reset { qubit: usize },
    /// Applies `gate` only when classical bit `bit` holds 1.
    ClassicalGate { gate: Gate, target: usize, bit: usize },
}

impl Op {
    pub fn gate(gate: Gate, target: usize) -> Self {
        Op::Gate {
            gate,
            target,
            controls: Vec::new(),
        }
    }

    pub fn controlled(gate: Gate, target: usize, controls: Vec<Control>) -> Self {
        Op::Gate {
            gate,
            target,
            controls,
        }
    }

    pub fn is_unitary(&self) -> bool {
        matches!(self, Op::Gate { .. })
    }

    /// Every qubit this op touches.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Op::Gate {
                target, controls, ..
            } => std::iter::once(*target)
                .chain(controls.iter().map(|c| c.qubit))
                .collect(),
            Op::Measure { qubit, .. } | Op::Reset { qubit } => vec![*qubit],
            Op::ClassicalGate { target, .. } => vec![*target],
        }
    }
}
