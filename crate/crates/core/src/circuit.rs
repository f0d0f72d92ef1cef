//! Flat gate-list circuit representation and its statevector replay.

use crate::error::{Error, Result};
use crate::gates::{self, U3Params};
use crate::statevector::{GateMatrix, Statevector};

/// One circuit instruction. The QASM-expressible variants mirror the
/// `qelib1.inc` gates of the same name; `cu3` carries no global phase.
#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    H(usize),
    X(usize),
    Ry { theta: f64, target: usize },
    /// `diag(1, e^{iλ})`.
    P { lambda: f64, target: usize },
    Cu3 { theta: f64, phi: f64, lambda: f64, control: usize, target: usize },
    Cry { theta: f64, control: usize, target: usize },
    Cp { lambda: f64, control: usize, target: usize },
    Swap(usize, usize),
    Measure { qubit: usize, clbit: usize },
    /// Arbitrary (multi-)controlled unitary. Replays, but has no QASM form.
    Unitary { label: String, gate: GateMatrix, controls: Vec<usize>, targets: Vec<usize> },
}

impl Op {
    pub fn name(&self) -> &str {
        match self {
            Op::H(_) => "h",
            Op::X(_) => "x",
            Op::Ry { .. } => "ry",
            Op::P { .. } => "p",
            Op::Cu3 { .. } => "cu3",
            Op::Cry { .. } => "cry",
            Op::Cp { .. } => "cp",
            Op::Swap(..) => "swap",
            Op::Measure { .. } => "measure",
            Op::Unitary { label, .. } => label,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Op::Ry { theta, .. } | Op::Cry { theta, .. } => vec![theta],
            Op::P { lambda, .. } | Op::Cp { lambda, .. } => vec![lambda],
            Op::Cu3 { theta, phi, lambda, .. } => vec![theta, phi, lambda],
            _ => Vec::new(),
        }
    }

    /// Qubit operands, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Op::H(q) | Op::X(q) => vec![*q],
            Op::Ry { target, .. } | Op::P { target, .. } => vec![*target],
            Op::Cu3 { control, target, .. } | Op::Cry { control, target, .. } | Op::Cp { control, target, .. } => {
                vec![*control, *target]
            }
            Op::Swap(a, b) => vec![*a, *b],
            Op::Measure { qubit, .. } => vec![*qubit],
            Op::Unitary { controls, targets, .. } => controls.iter().chain(targets).copied().collect(),
        }
    }

    pub fn clbits(&self) -> Vec<usize> {
        match self {
            Op::Measure { clbit, .. } => vec![*clbit],
            _ => Vec::new(),
        }
    }

    pub fn inverse(&self) -> Op {
        match self {
            Op::Ry { theta, target } => Op::Ry { theta: -theta, target: *target },
            Op::P { lambda, target } => Op::P { lambda: -lambda, target: *target },
            Op::Cry { theta, control, target } => Op::Cry { theta: -theta, control: *control, target: *target },
            Op::Cp { lambda, control, target } => Op::Cp { lambda: -lambda, control: *control, target: *target },
            Op::Cu3 { theta, phi, lambda, control, target } => Op::Cu3 {
                theta: -theta,
                phi: -lambda,
                lambda: -phi,
                control: *control,
                target: *target,
            },
            Op::Unitary { label, gate, controls, targets } => Op::Unitary {
                label: format!("{label}_dg"),
                gate: gate.adjoint(),
                controls: controls.clone(),
                targets: targets.clone(),
            },
            other => other.clone(),
        }
    }

    fn apply(&self, state: &mut Statevector) -> Result<()> {
        match self {
            Op::H(q) => state.apply_unitary(&gates::hadamard(), &[*q]),
            Op::X(q) => state.apply_unitary(&gates::pauli_x(), &[*q]),
            Op::Ry { theta, target } => state.apply_unitary(&gates::ry(*theta), &[*target]),
            Op::P { lambda, target } => state.apply_unitary(&gates::phase(*lambda), &[*target]),
            Op::Cu3 { theta, phi, lambda, control, target } => {
                let u = gates::u3_matrix(&U3Params::new(*theta, *phi, *lambda, 0.0)?);
                state.apply_controlled(&u, &[*control], &[*target])
            }
            Op::Cry { theta, control, target } => state.apply_controlled(&gates::ry(*theta), &[*control], &[*target]),
            Op::Cp { lambda, control, target } => {
                state.apply_controlled(&gates::phase(*lambda), &[*control], &[*target])
            }
            Op::Swap(a, b) => state.apply_unitary(&gates::swap(), &[*a, *b]),
            // replay yields the pre-measurement state
            Op::Measure { .. } => Ok(()),
            Op::Unitary { gate, controls, targets, .. } => state.apply_controlled(gate, controls, targets),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitIR {
    num_qubits: usize,
    num_clbits: usize,
    ops: Vec<Op>,
    /// Free-text annotations keyed by the index of the op they precede.
    notes: Vec<(usize, String)>,
}

impl CircuitIR {
    pub fn new(num_qubits: usize, num_clbits: usize, ops: Vec<Op>) -> Result<Self> {
        let mut ir = Self { num_qubits, num_clbits, ops: Vec::with_capacity(ops.len()), notes: Vec::new() };
        for op in ops {
            ir.push(op)?;
        }
        Ok(ir)
    }

    /// Appends `op` after checking operands and parameters.
    pub fn push(&mut self, op: Op) -> Result<()> {
        let qubits = op.qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(Error::Domain(format!("{}: qubit {q} out of range", op.name())));
            }
            if qubits[..i].contains(&q) {
                return Err(Error::Domain(format!("{}: qubit {q} repeated", op.name())));
            }
        }
        for c in op.clbits() {
            if c >= self.num_clbits {
                return Err(Error::Domain(format!("{}: clbit {c} out of range", op.name())));
            }
        }
        if op.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Validation(format!("{}: non-finite parameter", op.name())));
        }
        self.ops.push(op);
        Ok(())
    }

    pub fn extend(&mut self, ops: impl IntoIterator<Item = Op>) -> Result<()> {
        ops.into_iter().try_for_each(|op| self.push(op))
    }

    /// Attaches `note` to the next op pushed.
    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push((self.ops.len(), note.into()));
    }

    pub fn notes_before(&self, index: usize) -> impl Iterator<Item = &str> {
        self.notes.iter().filter(move |(i, _)| *i == index).map(|(_, n)| n.as_str())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    /// Runs every gate on `state`, skipping measurements.
    pub fn replay(&self, mut state: Statevector) -> Result<Statevector> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::Domain(format!(
                "circuit has {} qubits, state has {}",
                self.num_qubits,
                state.num_qubits()
            )));
        }
        for op in &self.ops {
            op.apply(&mut state)?;
        }
        Ok(state)
    }

    /// Replays from `|0…0⟩`.
    pub fn simulate(&self) -> Result<Statevector> {
        self.replay(Statevector::zero(self.num_qubits)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn operand_checks() {
        let mut ir = CircuitIR::new(2, 1, vec![]).unwrap();
        assert!(ir.push(Op::H(2)).is_err());
        assert!(ir.push(Op::Cp { lambda: 1.0, control: 1, target: 1 }).is_err());
        assert!(ir.push(Op::Measure { qubit: 0, clbit: 1 }).is_err());
        assert!(ir.push(Op::Ry { theta: f64::INFINITY, target: 0 }).is_err());
        ir.push(Op::Measure { qubit: 0, clbit: 0 }).unwrap();
        assert_eq!(ir.ops().len(), 1);
    }

    #[test]
    fn inverse_ops_cancel() {
        let ops = vec![
            Op::Ry { theta: 0.3, target: 0 },
            Op::P { lambda: -1.2, target: 1 },
            Op::Cu3 { theta: 1.1, phi: 0.4, lambda: -2.0, control: 0, target: 2 },
            Op::Cry { theta: PI / 3.0, control: 2, target: 1 },
            Op::Cp { lambda: 0.9, control: 1, target: 0 },
            Op::Swap(0, 2),
            Op::H(1),
        ];
        let mut all = ops.clone();
        all.extend(ops.iter().rev().map(Op::inverse));
        let ir = CircuitIR::new(3, 0, all).unwrap();
        let start = Statevector::from_unnormalized(
            (0..8).map(|i| num_complex::Complex64::new(i as f64 + 1.0, 0.5 * i as f64)).collect(),
        )
        .unwrap();
        let out = ir.replay(start.clone()).unwrap();
        for (a, b) in out.amplitudes().iter().zip(start.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn replay_dimension_mismatch() {
        let ir = CircuitIR::new(2, 0, vec![Op::H(0)]).unwrap();
        assert!(ir.replay(Statevector::zero(3).unwrap()).is_err());
    }
}
