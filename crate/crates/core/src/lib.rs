//! Few-mode Fock-space simulation of up-converted NOON-state interferometry.
//!
//! * [`fock`] — truncated multimode Fock states and NOON preparation.
//! * [`elements`] — two-mode unitaries (splitters, phases, frequency
//!   converters), circuits and threshold detection.
//! * [`spectral`] — KTP dispersion, quasi-phase-matched spectra and HOM dips.
//! * [`experiments`] — scans with Poisson counting, fits and budgets.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod defaults;
pub mod elements;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod fock;
pub mod kv;
pub mod spectral;

pub use elements::{
    apply_circuit, beamsplitter, detect, frequency_converter, Circuit, CircuitElement, Detector,
    DetectorPattern, TwoModeUnitary,
};
pub use error::{Error, Result};
pub use fock::{noon_state, FockState, ModeId, StateVector, Truncation};
pub use num_complex::Complex64;
pub use spectral::{Axis, Dispersion, Spectrum};
