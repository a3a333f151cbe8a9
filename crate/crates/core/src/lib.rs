//! Quantum and classical Fisher-information limits of a subwavelength
//! Fabry-Perot slit sensor modeled as a phase-and-loss channel in a
//! Mach-Zehnder interferometer.
//!
//! The crate answers one design question numerically: the geometry that
//! maximizes the quality factor `Q` of the slit resonance is not the
//! geometry that maximizes the quantum Fisher information, because the
//! information is governed by the phase generator `d(phi)/d(theta)`
//! (usually dominated by interface contributions) and by loss, not by
//! resonance sharpness.
//!
//! Modules:
//! * [`gaussian`] - Gaussian states, symplectic operations, probes.
//! * [`slit`] - Fabry-Perot slit response, Airy transmission, Q extraction.
//! * [`metrology`] - QFI and classical FI for the channel and its MZI.
//! * [`fock`] - truncated number-basis oracle (channel + SLD QFI).
//! * [`crosscheck`] - Gaussian-vs-Fock comparison grid.
//! * [`sweep`] - theta sweeps, CSV emission, argmax comparison.
//!
//! Everything numeric is generic over the scalar type through
//! [`scalar::Real`] (`f32` or `f64`); the aliases below fix the `f64` lane
//! used by the CLI and the test suites.

pub mod crosscheck;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod metrology;
pub mod scalar;
pub mod search;
pub mod slit;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GaussianState64 = gaussian::GaussianState<f64>;
pub type SymplecticForm64 = gaussian::SymplecticForm<f64>;
pub type ProbeSpec64 = gaussian::ProbeSpec<f64>;
pub type SlitConfig64 = slit::SlitConfig<f64>;
pub type ToyDispersion64 = slit::ToyDispersion<f64>;
pub type TabulatedDispersion64 = slit::TabulatedDispersion<f64>;
pub type FPChannelPoint64 = slit::FPChannelPoint<f64>;
pub type ResonanceReport64 = slit::ResonanceReport<f64>;
pub type StateFamily64 = metrology::StateFamily<f64>;
pub type FisherReport64 = metrology::FisherReport<f64>;
pub type FockOperators64 = fock::FockOperators<f64>;
pub type FockDensityMatrix64 = fock::FockDensityMatrix<f64>;
pub type SweepConfig64 = sweep::SweepConfig<f64>;
pub type SweepResult64 = sweep::SweepResult<f64>;
pub type SweepRecord64 = sweep::SweepRecord<f64>;
pub type OptimaReport64 = sweep::OptimaReport<f64>;
pub type OracleReport64 = crosscheck::OracleReport<f64>;
