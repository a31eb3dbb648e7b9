use super::gate::{Control, Gate, Op};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A named, contiguous range of qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Register {
    /// The `i`-th qubit of the register (bit `i` of the encoded integer).
    pub fn qubit(&self, i: usize) -> usize {
        assert!(i < self.len, "register `{}` has {} qubits", self.name, self.len);
        self.start + i
    }

    pub fn qubits(&self) -> Vec<usize> {
        (self.start..self.start + self.len).collect()
    }

    /// Most significant qubit.
    pub fn top(&self) -> usize {
        self.qubit(self.len - 1)
    }
}

/// An ordered list of operations over `n_qubits` qubits and `n_bits`
/// classical bits. Qubit 0 is the least significant bit of a basis index.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    n_bits: usize,
    ops: Vec<Op>,
    registers: Vec<Register>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            ..Default::default()
        }
    }

    pub fn with_bits(n_qubits: usize, n_bits: usize) -> Self {
        Circuit {
            n_qubits,
            n_bits,
            ..Default::default()
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    /// Appends `len` fresh qubits as a named register.
    pub fn add_register(&mut self, name: &str, len: usize) -> Result<Register> {
        if self.registers.iter().any(|r| r.name == name) {
            return Err(Error::DuplicateRegister(name.to_string()));
        }
        let reg = Register {
            name: name.to_string(),
            start: self.n_qubits,
            len,
        };
        self.n_qubits += len;
        self.registers.push(reg.clone());
        Ok(reg)
    }

    /// Names an existing qubit range. Ranges may not overlap.
    pub fn name_range(&mut self, name: &str, start: usize, len: usize) -> Result<Register> {
        if self.registers.iter().any(|r| r.name == name) {
            return Err(Error::DuplicateRegister(name.to_string()));
        }
        if start + len > self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: start + len - 1,
                n_qubits: self.n_qubits,
            });
        }
        if self
            .registers
            .iter()
            .any(|r| start < r.start + r.len && r.start < start + len)
        {
            return Err(Error::param("register", format!("`{name}` overlaps an existing register")));
        }
        let reg = Register {
            name: name.to_string(),
            start,
            len,
        };
        self.registers.push(reg.clone());
        Ok(reg)
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn add_bits(&mut self, n: usize) -> usize {
        let first = self.n_bits;
        self.n_bits += n;
        first
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    fn check_bit(&self, b: usize) -> Result<()> {
        if b >= self.n_bits {
            return Err(Error::BitOutOfRange {
                bit: b,
                n_bits: self.n_bits,
            });
        }
        Ok(())
    }

    pub fn validate_op(&self, op: &Op) -> Result<()> {
        match op {
            Op::Gate {
                gate,
                target,
                controls,
            } => {
                if !gate.is_finite() {
                    return Err(Error::NonFiniteAngle(gate.angle().unwrap_or(f64::NAN)));
                }
                self.check_qubit(*target)?;
                for (i, c) in controls.iter().enumerate() {
                    self.check_qubit(c.qubit)?;
                    if c.qubit == *target {
                        return Err(Error::ControlIsTarget(c.qubit));
                    }
                    if controls[..i].iter().any(|d| d.qubit == c.qubit) {
                        return Err(Error::DuplicateControl(c.qubit));
                    }
                }
                Ok(())
            }
            Op::Measure { qubit, bit } => {
                self.check_qubit(*qubit)?;
                self.check_bit(*bit)
            }
            Op::Reset { qubit } => self.check_qubit(*qubit),
            Op::ClassicalGate { gate, target, bit } => {
                if !gate.is_finite() {
                    return Err(Error::NonFiniteAngle(gate.angle().unwrap_or(f64::NAN)));
                }
                self.check_qubit(*target)?;
                self.check_bit(*bit)
            }
        }
    }

    /// Re-checks every op against the current qubit and bit counts.
    pub fn validate(&self) -> Result<()> {
        self.ops.iter().try_for_each(|op| self.validate_op(op))
    }

    pub fn push(&mut self, op: Op) -> Result<()> {
        self.validate_op(&op)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn apply(&mut self, gate: Gate, target: usize) -> Result<()> {
        self.push(Op::gate(gate, target))
    }

    pub fn apply_controlled(&mut self, gate: Gate, target: usize, controls: &[Control]) -> Result<()> {
        self.push(Op::controlled(gate, target, controls.to_vec()))
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.apply(Gate::H, q)
    }

    pub fn x(&mut self, q: usize) -> Result<()> {
        self.apply(Gate::X, q)
    }

    pub fn ry(&mut self, q: usize, theta: f64) -> Result<()> {
        self.apply(Gate::Ry(theta), q)
    }

    pub fn phase(&mut self, q: usize, theta: f64) -> Result<()> {
        self.apply(Gate::Phase(theta), q)
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.apply_controlled(Gate::X, target, &[Control::one(control)])
    }

    pub fn ccx(&mut self, c0: usize, c1: usize, target: usize) -> Result<()> {
        self.apply_controlled(Gate::X, target, &[Control::one(c0), Control::one(c1)])
    }

    pub fn swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.cx(a, b)?;
        self.cx(b, a)?;
        self.cx(a, b)
    }

    pub fn measure(&mut self, qubit: usize, bit: usize) -> Result<()> {
        self.push(Op::Measure { qubit, bit })
    }

    pub fn reset(&mut self, qubit: usize) -> Result<()> {
        self.push(Op::Reset { qubit })
    }

    pub fn classical(&mut self, gate: Gate, target: usize, bit: usize) -> Result<()> {
        self.push(Op::ClassicalGate { gate, target, bit })
    }

    /// Appends every op of `other`. `other` may not be wider than `self`.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: other.n_qubits - 1,
                n_qubits: self.n_qubits,
            });
        }
        if other.n_bits > self.n_bits {
            return Err(Error::BitOutOfRange {
                bit: other.n_bits - 1,
                n_bits: self.n_bits,
            });
        }
        self.ops.extend(other.ops.iter().cloned());
        Ok(())
    }

    /// Appends `other` with qubit `q` of `other` mapped to `map[q]`.
    pub fn append_mapped(&mut self, other: &Circuit, map: &[usize]) -> Result<()> {
        if map.len() < other.n_qubits {
            return Err(Error::param("map", "qubit map shorter than the appended circuit"));
        }
        for op in &other.ops {
            let mapped = match op {
                Op::Gate {
                    gate,
                    target,
                    controls,
                } => Op::Gate {
                    gate: *gate,
                    target: map[*target],
                    controls: controls
                        .iter()
                        .map(|c| Control::when(map[c.qubit], c.on_one))
                        .collect(),
                },
                Op::Measure { qubit, bit } => Op::Measure {
                    qubit: map[*qubit],
                    bit: *bit,
                },
                Op::Reset { qubit } => Op::Reset { qubit: map[*qubit] },
                Op::ClassicalGate { gate, target, bit } => Op::ClassicalGate {
                    gate: *gate,
                    target: map[*target],
                    bit: *bit,
                },
            };
            self.push(mapped)?;
        }
        Ok(())
    }

    pub fn is_unitary(&self) -> bool {
        self.ops.iter().all(Op::is_unitary)
    }

    /// Adjoint circuit. Fails if the circuit measures, resets, or uses
    /// classical feedback.
    pub fn inverse(&self) -> Result<Circuit> {
        let mut inv = Circuit {
            n_qubits: self.n_qubits,
            n_bits: self.n_bits,
            ops: Vec::with_capacity(self.ops.len()),
            registers: self.registers.clone(),
        };
        for op in self.ops.iter().rev() {
            match op {
                Op::Gate {
                    gate,
                    target,
                    controls,
                } => inv.ops.push(Op::Gate {
                    gate: gate.inverse(),
                    target: *target,
                    controls: controls.clone(),
                }),
                _ => return Err(Error::NonUnitary("cannot invert a measurement or reset")),
            }
        }
        Ok(inv)
    }

    /// The same circuit with `extra` added to the control list of every gate.
    pub fn controlled(&self, extra: &[Control]) -> Result<Circuit> {
        let mut out = Circuit {
            n_qubits: self.n_qubits,
            n_bits: self.n_bits,
            ops: Vec::with_capacity(self.ops.len()),
            registers: self.registers.clone(),
        };
        for op in &self.ops {
            match op {
                Op::Gate {
                    gate,
                    target,
                    controls,
                } => {
                    let mut cs = controls.clone();
                    cs.extend_from_slice(extra);
                    out.push(Op::Gate {
                        gate: *gate,
                        target: *target,
                        controls: cs,
                    })?;
                }
                _ => return Err(Error::NonUnitary("cannot control a measurement or reset")),
            }
        }
        Ok(out)
    }

    /// Widens the circuit to `n_qubits` (never shrinks).
    pub fn widen(&mut self, n_qubits: usize) {
        self.n_qubits = self.n_qubits.max(n_qubits);
    }
}

impl Circuit {
    /// Same shape and registers, different op list. Ops are assumed valid.
    pub(crate) fn with_ops(&self, ops: Vec<Op>) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            n_bits: self.n_bits,
            ops,
            registers: self.registers.clone(),
        }
    }
}
