//! Exact finite-dimensional quantum state engine.
//!
//! States are density matrices so that reduced and mixed states arising from
//! forged or swapped qubits are represented exactly. A [`QuantumHeap`] owns all
//! joint states of one protocol execution and is the only source of
//! measurement randomness.

mod bell;
mod density;
mod heap;

use thiserror::Error;

pub use bell::{bell_state_vector, BellLabel};
pub use density::DensityMatrix;
pub use heap::{
    partial_trace, JointState, Owner, PureQubitSpec, QubitHandle, QubitMeta, QuantumHeap, Slot,
    MAX_JOINT_QUBITS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("qubit {0} used twice in one operation")]
    SameHandle(u32),
    #[error("qubit {0} was already measured or discarded")]
    Consumed(u32),
    #[error("qubit {0} does not belong to this heap")]
    Unknown(u32),
    #[error("qubit {0} is not part of the given joint state")]
    NotInState(u32),
    #[error("amplitudes are not normalized: |α|²+|β|² = {0}")]
    NotNormalized(f64),
    #[error("partial trace needs at least one qubit to keep")]
    EmptyKeep,
    #[error("joint state would span {0} qubits")]
    TooManyQubits(usize),
    #[error("node {0} is not a valid density matrix")]
    InvalidState(usize),
}
