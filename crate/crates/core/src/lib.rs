//! Statevector simulation of the HHL linear-system algorithm on small
//! Hermitian systems, with OpenQASM 2.0 export.
//!
//! Qubits are little-endian. The layout puts the ancilla on qubit 0, the
//! clock register on qubits `1..=n` and the b-register above it, so a basis
//! index is `a + 2·c + 2^(n+1)·b`.

pub mod circuit;
pub mod encoding;
pub mod error;
pub mod gates;
pub mod hhl;
pub mod problem;
pub mod qasm;
pub mod statevector;

pub use circuit::{CircuitIR, Op};
pub use encoding::{
    choose_time_and_clock, cu3_params_from_unitary, eig_hermitian, unitary_from_hamiltonian, EncodingMode,
    EncodingPlan, HermitianSystem, TimeEncoding,
};
pub use error::{Error, Result};
pub use gates::U3Params;
pub use hhl::{classical_solve, solve, trace_run, AncillaMode, HHLResult, PostselectOrder, SolveOptions, Stage, StageTrace};
pub use problem::Problem;
pub use qasm::{build_circuit_ir, emit_qasm, parse_qasm};
pub use statevector::{fidelity, init_basis_state, ket_label, GateMatrix, RegisterLayout, Statevector};
