//! Simulation and analysis of quantum fair two-party computation.
//!
//! The dealer distributes halves of Bell pairs whose labels encode the output
//! of a two-party function; the parties reconstruct the output by exchanging
//! and measuring qubits round by round. The crate provides an exact density
//! matrix engine, the share generators and reconstruction protocols, a catalog
//! of adversarial strategies, and estimators for detection probabilities,
//! fairness and equilibrium conditions.

pub mod adversary;
pub mod analysis;
pub mod protocol;
pub mod quantum;
pub mod scalar;

pub use scalar::{Real, UtilityScalar};

/// Heap over double precision amplitudes.
pub type Heap = quantum::QuantumHeap<f64>;
/// Heap over single precision amplitudes.
pub type Heap32 = quantum::QuantumHeap<f32>;
pub type Density = quantum::DensityMatrix<f64>;
pub type Density32 = quantum::DensityMatrix<f32>;
