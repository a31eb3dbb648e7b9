use super::circuit::Circuit;
use super::gate::Op;
use super::rng;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::par::Execution;
use rand::Rng;

/// Final state and classical record of one circuit execution.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub state: StateVector,
    pub bits: Vec<bool>,
}

/// Executes `circuit` from |0…0⟩. Measurements draw from a ChaCha8 stream
/// seeded with `seed`.
pub fn run(circuit: &Circuit, seed: u64) -> Result<RunOutcome> {
    run_with(circuit, seed, Execution::default())
}

pub fn run_with(circuit: &Circuit, seed: u64, exec: Execution) -> Result<RunOutcome> {
    circuit.validate()?;
    let mut state = StateVector::zero(circuit.n_qubits()).with_execution(exec);
    let mut bits = vec![false; circuit.n_bits()];
    let mut rng = rng::seeded(seed);
    execute(&mut state, circuit, &mut bits, &mut rng)?;
    Ok(RunOutcome { state, bits })
}

/// Applies `circuit` to an existing state and classical record.
pub fn execute<R: Rng + ?Sized>(
    state: &mut StateVector,
    circuit: &Circuit,
    bits: &mut [bool],
    rng: &mut R,
) -> Result<()> {
    state.check_width(circuit)?;
    if bits.len() < circuit.n_bits() {
        return Err(Error::BitOutOfRange {
            bit: circuit.n_bits() - 1,
            n_bits: bits.len(),
        });
    }
    for op in circuit.ops() {
        match op {
            Op::Gate {
                gate,
                target,
                controls,
            } => state.apply_gate(*gate, *target, controls),
            Op::Measure { qubit, bit } => {
                bits[*bit] = state.measure(*qubit, rng)?;
                state.check_norm()?;
            }
            Op::Reset { qubit } => {
                state.reset(*qubit, rng)?;
                state.check_norm()?;
            }
            Op::ClassicalGate { gate, target, bit } => {
                if bits[*bit] {
                    state.apply_gate(*gate, *target, &[]);
                }
            }
        }
    }
    state.check_norm()
}

/// Statevector of a measurement-free circuit.
pub fn statevector(circuit: &Circuit) -> Result<StateVector> {
    statevector_with(circuit, Execution::default())
}

pub fn statevector_with(circuit: &Circuit, exec: Execution) -> Result<StateVector> {
    circuit.validate()?;
    let mut state = StateVector::zero(circuit.n_qubits()).with_execution(exec);
    state.apply_unitary(circuit)?;
    state.check_norm()?;
    Ok(state)
}

/// Marginal distribution of a named register of `circuit` in `state`.
pub fn probabilities(state: &StateVector, circuit: &Circuit, register: &str) -> Result<Vec<f64>> {
    let reg = circuit.register(register)?;
    state.marginal(&reg.qubits())
}
