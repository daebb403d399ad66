//! Crystal dispersion, quasi-phase-matching spectra and HOM dip shapes.

pub mod crystal;
pub mod hom;
pub mod sellmeier;
pub mod spectrum;

pub use crystal::{
    phase_matched, phase_mismatch, solve_poling_period, CrystalSpec, PhaseMatching, Process,
    WaveTriplet,
};
pub use hom::{coherence_length, hom_profile, spectral_overlap, SPEED_OF_LIGHT};
pub use sellmeier::{Axis, Dispersion, SellmeierCoefficients, SellmeierTable};
pub use spectrum::{
    acceptance_spectrum, default_grid, emission_spectrum, filtered_spectrum, fwhm, sinc_sq,
    uniform_grid, Spectrum,
};
