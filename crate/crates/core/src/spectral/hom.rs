//! Hong–Ou–Mandel dip profiles from two-photon spectral densities.
//!
//! For a degenerate pair with signal at `ω0 + Ω` and idler at `ω0 - Ω` the
//! interference term at relative delay `τ` is
//!
//! ```text
//! g(τ) = ∫ S(Ω) cos(2 Ω τ) dΩ / ∫ S(Ω) dΩ
//! ```
//!
//! with `S` the symmetrized density, and the coincidence probability through
//! a balanced splitter is `C(τ) = (1 - V g(τ)) / 2`. Delays are path-length
//! differences; `τ = δ / c`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::spectrum::Spectrum;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular-frequency samples of a spectrum with trapezoid weights.
struct FrequencySamples {
    /// Detuning from the spectral centroid, rad/s.
    detuning: Vec<f64>,
    /// `S_j · w_j`, normalized to unit sum.
    weight: Vec<f64>,
}

impl FrequencySamples {
    fn new(s: &Spectrum) -> Result<Self> {
        if !s.is_uniform() {
            return Err(Error::Grid(
                "HOM profile needs a uniform wavelength grid".into(),
            ));
        }
        let omega: Vec<f64> = s
            .wavelengths_nm()
            .iter()
            .map(|&l| 2.0 * PI * SPEED_OF_LIGHT / (l * 1e-9))
            .collect();
        let n = omega.len();
        let mut weight = vec![0.0; n];
        for i in 0..n - 1 {
            let half = 0.5 * (omega[i] - omega[i + 1]).abs();
            weight[i] += half;
            weight[i + 1] += half;
        }
        for (w, d) in weight.iter_mut().zip(s.density()) {
            *w *= d;
        }
        let total: f64 = weight.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Grid("spectrum carries no weight".into()));
        }
        for w in &mut weight {
            *w /= total;
        }
        let centroid: f64 = omega.iter().zip(&weight).map(|(o, w)| o * w).sum();
        Ok(Self {
            detuning: omega.iter().map(|o| o - centroid).collect(),
            weight,
        })
    }

    fn overlap(&self, delay_m: f64) -> f64 {
        if delay_m == 0.0 {
            return 1.0;
        }
        let scale = 2.0 * delay_m / SPEED_OF_LIGHT;
        self.detuning
            .iter()
            .zip(&self.weight)
            .map(|(d, w)| w * (d * scale).cos())
            .sum()
    }
}

/// Unit-peak interference term `g(δ)` at each path-length delay (mm).
pub fn spectral_overlap(s: &Spectrum, delays_mm: &[f64]) -> Result<Vec<f64>> {
    let samples = FrequencySamples::new(s)?;
    Ok(delays_mm
        .iter()
        .map(|&d| samples.overlap(d * 1e-3))
        .collect())
}

/// Coincidence probability `(1 - V g(δ)) / 2` behind a balanced splitter.
pub fn hom_profile(s: &Spectrum, delays_mm: &[f64], visibility: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::InvalidParameter(format!(
            "visibility {visibility} outside [0, 1]"
        )));
    }
    Ok(spectral_overlap(s, delays_mm)?
        .into_iter()
        .map(|g| 0.5 * (1.0 - visibility * g))
        .collect())
}

/// Two-photon coherence length in mm, `(2 ln 2 / π) λ0² / Δλ`.
///
/// This equals the FWHM in path-length delay of the HOM dip produced by a
/// Gaussian single-photon spectrum of FWHM `Δλ`.
pub fn coherence_length(center_nm: f64, bandwidth_nm: f64) -> Result<f64> {
    if !(bandwidth_nm > 0.0) || !(center_nm > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coherence length needs positive wavelength and bandwidth, got {center_nm} / {bandwidth_nm}"
        )));
    }
    Ok(2.0 * std::f64::consts::LN_2 / PI * center_nm * center_nm / bandwidth_nm * 1e-6)
}
