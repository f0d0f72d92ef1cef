use thiserror::Error;

use crate::encoding::TimeEncoding;
use crate::hhl::Stage;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad index, dimension or register argument.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input failed a structural check (unitarity, Hermiticity, finiteness).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("impossible outcome: qubit {qubit} = {outcome} has probability {probability:e}")]
    ImpossibleOutcome {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },

    #[error("spectrum must be strictly positive, found eigenvalue {0}")]
    NonPositiveSpectrum(f64),

    #[error("no exact encoding with {clock_qubits} clock qubits{}", best_rounded_note(.best_rounded))]
    EncodingInfeasible {
        clock_qubits: usize,
        best_rounded: Option<Box<TimeEncoding>>,
    },

    #[error("encoded eigenvalue collision: eigenvalues {first} and {second} both map to {encoded}")]
    Collision {
        first: f64,
        second: f64,
        encoded: u64,
    },

    #[error("per-qubit ancilla rotation cannot reproduce the populated clock values (residual {residual:e})")]
    DecompositionInvalid { residual: f64 },

    #[error("clock value {clock} is populated but smaller than C = {c}")]
    ArcsinDomain { clock: u64, c: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("unsupported emission: {0}")]
    UnsupportedEmission(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

fn best_rounded_note(best: &Option<Box<TimeEncoding>>) -> String {
    match best {
        Some(plan) => format!("; best rounded plan: {plan}"),
        None => String::new(),
    }
}

impl Error {
    /// Strips stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn at(stage: Stage) -> impl FnOnce(Error) -> Error {
        move |source| match source {
            already @ Error::Stage { .. } => already,
            source => Error::Stage {
                stage,
                source: Box::new(source),
            },
        }
    }
}
