//! Exact quantum circuit simulation on bit-sliced binary decision diagrams.
//!
//! A state over `n` qubits stores every amplitude as
//! `(a·ω³ + b·ω² + c·ω + d) / √2^k` with integer `a..d` and `ω = e^{iπ/4}`.
//! The four integer vectors are kept in two's complement, one BDD per bit
//! ([`state::SlicedState`]). Gates rewrite those BDDs with Boolean formulas
//! ([`kernels`]), measurement merges them into a single BDD and accumulates
//! exact probabilities in ℚ[√2] ([`measure`]). A dense exact simulator
//! ([`oracle`]) serves as the reference for differential testing.

pub mod amplitude;
pub mod circuit;
pub mod exact;
pub mod kernels;
pub mod measure;
pub mod oracle;
pub mod par;
pub mod state;

pub use amplitude::AlgebraicAmplitude;
pub use circuit::{Circuit, Gate, GateKind};
pub use exact::ExactProb;
pub use par::Execution;
pub use qsim_bdd as bdd;
pub use state::{SimConfig, SlicedState};

use qsim_bdd::BddError;

/// Errors raised by simulation, decoding and measurement.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("node budget of {budget} live BDD nodes exhausted")]
    NodeBudget { budget: usize },
    #[error("BDD engine error: {0}")]
    Bdd(BddError),
    #[error("a state needs at least one qubit")]
    NoQubits,
    #[error("expected {expected} bit(s), got {got}")]
    BitLength { expected: usize, got: usize },
    #[error("circuit has {circuit} qubit(s) but the state has {state}")]
    QubitCountMismatch { circuit: usize, state: usize },
    #[error("gate {index}: {source}")]
    InvalidGate {
        index: usize,
        source: circuit::OperandError,
    },
    #[error("{n} qubit(s) exceed the enumeration limit of {limit}")]
    EnumerationLimit { n: usize, limit: usize },
    #[error("time limit reached after {gates_done} gate(s)")]
    Timeout { gates_done: usize },
    #[error("measured qubit {0} is out of range")]
    MeasuredOutOfRange(usize),
    #[error("qubit {0} is measured more than once")]
    DuplicateMeasured(usize),
    #[error("all measured qubits have been consumed")]
    NoQubitsLeft,
    #[error("forced outcome {outcome} on qubit {qubit} has probability 0")]
    ImpossibleOutcome { qubit: usize, outcome: bool },
    #[error("more than {limit} outcomes have nonzero probability")]
    TooManyOutcomes { limit: usize },
}

impl From<BddError> for SimError {
    fn from(e: BddError) -> Self {
        match e {
            BddError::NodeBudget { budget } => SimError::NodeBudget { budget },
            other => SimError::Bdd(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
