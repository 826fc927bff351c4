//! Exact state-vector simulation of two-qubit iterative quantum phase
//! estimation (IQPE) under random gate noise and static residual couplings,
//! with Pauli-random-error-correction (PAREC) and closed-form success
//! probabilities.
//!
//! The register is always `ancilla ⊗ target`, with the ancilla as the most
//! significant basis index: `|a t⟩ ↦ 2·a + t`.

pub mod error;
pub mod gates;
pub mod iqpe;
pub mod parec;
pub mod qcore;
pub mod sweep;
pub mod theory;

pub use error::{Error, Result};
pub use gates::{CalibrationConvention, NoisePolicy, StaticDisorder};
pub use iqpe::{IterationRecord, RunConfig, RunResult};
pub use parec::{GapPolicy, Pauli, PauliFrame};
pub use qcore::{SingleQubitOperator, StateVector, TwoQubitOperator, C64};
pub use sweep::{Coupling, Scenario, SweepRecord, SweepSpec};

/// The random stream type used throughout: every Monte Carlo sample owns one,
/// derived with [`sweep::derive_substream`].
pub type Stream = rand_chacha::ChaCha8Rng;
