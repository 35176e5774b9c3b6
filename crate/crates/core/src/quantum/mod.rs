//! Quantized phonon/detector dynamics for a single localized trajectory.

pub mod density;
pub mod evolve;
pub mod fock;
pub mod full;

use thiserror::Error;

use crate::modes::ModesError;

pub use density::{DensityMatrix, DensityTolerance, QuantumState};
pub use evolve::{build_ndpa, evolve_exact, evolve_perturbative, Hamiltonian, PerturbativeGuard};
pub use fock::{Factor, FactorKind, FockSpace};
pub use full::{evolve_full, FullEvolution, FullOptions};

/// Factor label of the two-level detector in single-detector spaces.
pub const DETECTOR: &str = "detector";

/// Factor label of chain mode `α`.
pub fn mode_label(alpha: usize) -> String {
    format!("mode{alpha}")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("factor `{0}` is not part of the space")]
    MissingFactor(String),
    #[error("factor label `{0}` appears twice")]
    DuplicateLabel(String),
    #[error("factor `{0}` has zero dimension")]
    EmptyFactor(String),
    #[error("factor `{0}` is a classical label and has no ladder operators")]
    NotDynamical(String),
    #[error("level {level} does not exist in factor `{label}`")]
    Level { label: String, level: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("operator is not Hermitian (max |H - H†| = {0:e})")]
    NotHermitian(f64),
    #[error("density matrix trace {0} differs from 1")]
    Trace(f64),
    #[error("density matrix has eigenvalue {0:e} below zero")]
    NotPositive(f64),
    #[error("time must be finite and non-negative (got {0})")]
    Time(f64),
    #[error("|g t|/ħ = {gt} exceeds the perturbative guard {limit}; use exact evolution")]
    Guard { gt: f64, limit: f64 },
    #[error("time step {dt} exceeds 2π/(50 × fastest phase rate) = {limit}")]
    Step { dt: f64, limit: f64 },
    #[error(transparent)]
    Modes(#[from] ModesError),
}
