//! Quasi-phase-matched crystals: wave-vector mismatch and poling periods.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::sellmeier::{Axis, Dispersion};

/// Relative tolerance on `1/λ_sum = 1/λ_first + 1/λ_second`.
pub const ENERGY_TOLERANCE: f64 = 1e-6;

/// Target for `|Δk · L|` when solving for the poling period.
pub const POLING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Process {
    /// Down-conversion: pump → signal + idler.
    Spdc,
    /// Up-conversion: pump + signal → sum frequency.
    Sfg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMatching {
    TypeI,
    TypeII,
}

impl FromStr for PhaseMatching {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "type-i" | "i" | "1" => Ok(Self::TypeI),
            "type-ii" | "ii" | "2" => Ok(Self::TypeII),
            other => Err(Error::InvalidParameter(format!(
                "unknown phase-matching type `{other}`"
            ))),
        }
    }
}

impl fmt::Display for PhaseMatching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TypeI => "type-I",
            Self::TypeII => "type-II",
        })
    }
}

/// Three interacting wavelengths in nm.
///
/// `sum_nm` is always the highest-frequency wave (the SPDC pump or the SFG
/// output); `first_nm` and `second_nm` are the SPDC signal and idler, or the
/// SFG pump and signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveTriplet {
    pub sum_nm: f64,
    pub first_nm: f64,
    pub second_nm: f64,
}

impl WaveTriplet {
    /// Down-conversion of `pump_nm` with the idler fixed by energy conservation.
    pub fn spdc(pump_nm: f64, signal_nm: f64) -> Result<Self> {
        let idler = 1.0 / (1.0 / pump_nm - 1.0 / signal_nm);
        if !(idler.is_finite() && idler > 0.0 && pump_nm > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "signal {signal_nm} nm cannot be emitted by pump {pump_nm} nm"
            )));
        }
        Ok(Self {
            sum_nm: pump_nm,
            first_nm: signal_nm,
            second_nm: idler,
        })
    }

    /// Up-conversion of `signal_nm` by `pump_nm`.
    pub fn sfg(pump_nm: f64, signal_nm: f64) -> Result<Self> {
        if !(pump_nm > 0.0 && signal_nm > 0.0) {
            return Err(Error::InvalidParameter(
                "wavelengths must be positive".into(),
            ));
        }
        Ok(Self {
            sum_nm: 1.0 / (1.0 / pump_nm + 1.0 / signal_nm),
            first_nm: pump_nm,
            second_nm: signal_nm,
        })
    }

    pub fn energy_mismatch(&self) -> f64 {
        let sum = 1.0 / self.sum_nm;
        ((sum - 1.0 / self.first_nm - 1.0 / self.second_nm) / sum).abs()
    }

    pub fn check_energy(&self) -> Result<()> {
        let m = self.energy_mismatch();
        if !(m <= ENERGY_TOLERANCE) {
            return Err(Error::EnergyConservation(m));
        }
        Ok(())
    }
}

/// A periodically poled crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSpec {
    pub length_mm: f64,
    pub poling_period_um: f64,
    pub phase_matching: PhaseMatching,
    pub process: Process,
    /// Polarization axis of `(sum, first, second)` in [`WaveTriplet`] order.
    pub axes: [Axis; 3],
}

impl CrystalSpec {
    /// Type-II down-converter: pump and signal on `y`, idler on `z`.
    /// The period is left at zero for [`solve_poling_period`].
    pub fn type_ii_spdc(length_mm: f64) -> Self {
        Self {
            length_mm,
            poling_period_um: 0.0,
            phase_matching: PhaseMatching::TypeII,
            process: Process::Spdc,
            axes: [Axis::Y, Axis::Y, Axis::Z],
        }
    }

    /// Up-converter with all three waves on `z`.
    pub fn type_i_sfg(length_mm: f64) -> Self {
        Self {
            length_mm,
            poling_period_um: 0.0,
            phase_matching: PhaseMatching::TypeI,
            process: Process::Sfg,
            axes: [Axis::Z, Axis::Z, Axis::Z],
        }
    }

    pub fn with_period(mut self, poling_period_um: f64) -> Self {
        self.poling_period_um = poling_period_um;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_mm > 0.0 && self.length_mm.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "crystal length must be > 0 mm, got {}",
                self.length_mm
            )));
        }
        if !(self.poling_period_um > 0.0 && self.poling_period_um.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "poling period must be > 0 µm, got {}",
                self.poling_period_um
            )));
        }
        Ok(())
    }

    /// Sign with which the grating vector enters Δk.
    ///
    /// Down-conversion: `Δk = k_p - k_s - k_i + 2π/Λ`.
    /// Up-conversion:   `Δk = k_sum - k_p - k_s - 2π/Λ`, so that a positive
    /// period compensates the normally dispersive `k_sum > k_p + k_s`.
    pub fn grating_sign(&self) -> f64 {
        match self.process {
            Process::Spdc => 1.0,
            Process::Sfg => -1.0,
        }
    }

    pub fn length_m(&self) -> f64 {
        self.length_mm * 1e-3
    }
}

/// Wave number `2π n / λ` in rad/m.
fn wave_number(dispersion: &Dispersion, axis: Axis, wavelength_nm: f64) -> Result<f64> {
    let n = dispersion.refractive_index(axis, wavelength_nm)?;
    Ok(2.0 * PI * n / (wavelength_nm * 1e-9))
}

/// Material part of the mismatch, `k_sum - k_first - k_second`, in rad/m.
fn material_mismatch(
    crystal: &CrystalSpec,
    dispersion: &Dispersion,
    waves: &WaveTriplet,
) -> Result<f64> {
    waves.check_energy()?;
    let [a, b, c] = crystal.axes;
    Ok(wave_number(dispersion, a, waves.sum_nm)?
        - wave_number(dispersion, b, waves.first_nm)?
        - wave_number(dispersion, c, waves.second_nm)?)
}

/// Phase mismatch Δk in rad/m including the grating term.
pub fn phase_mismatch(
    crystal: &CrystalSpec,
    dispersion: &Dispersion,
    waves: &WaveTriplet,
) -> Result<f64> {
    crystal.validate()?;
    let grating = 2.0 * PI / (crystal.poling_period_um * 1e-6);
    Ok(material_mismatch(crystal, dispersion, waves)? + crystal.grating_sign() * grating)
}

/// Poling period (µm) that zeroes Δk at `waves`, by bisection on Λ.
///
/// Only the length, process and axes of `template` are used.
pub fn solve_poling_period(
    template: &CrystalSpec,
    dispersion: &Dispersion,
    waves: &WaveTriplet,
) -> Result<f64> {
    const LOW_UM: f64 = 0.1;
    const HIGH_UM: f64 = 10_000.0;

    let probe = template.clone().with_period(1.0);
    probe.validate()?;
    let base = material_mismatch(&probe, dispersion, waves)?;
    let sign = probe.grating_sign();
    let length = probe.length_m();
    let mismatch = |period_um: f64| base + sign * 2.0 * PI / (period_um * 1e-6);

    let (mut lo, mut hi) = (LOW_UM, HIGH_UM);
    let (f_lo, f_hi) = (mismatch(lo), mismatch(hi));
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSolution(format!(
            "Δk keeps sign {} for Λ in [{LOW_UM}, {HIGH_UM}] µm",
            f_lo.signum()
        )));
    }
    // bisect in log Λ: the grating term is ~1/Λ so this keeps iterations balanced
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let f_mid = mismatch(mid);
        if (f_mid * length).abs() < POLING_TOLERANCE || mid == lo || mid == hi {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = (lo * hi).sqrt();
    if (mismatch(mid) * length).abs() < 1e3 * POLING_TOLERANCE {
        Ok(mid)
    } else {
        Err(Error::NoSolution("bisection did not converge".into()))
    }
}

/// Copy of `template` with its period solved for `waves`.
pub fn phase_matched(
    template: &CrystalSpec,
    dispersion: &Dispersion,
    waves: &WaveTriplet,
) -> Result<CrystalSpec> {
    let period = solve_poling_period(template, dispersion, waves)?;
    Ok(template.clone().with_period(period))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source() -> (CrystalSpec, WaveTriplet) {
        (
            CrystalSpec::type_ii_spdc(20.0),
            WaveTriplet::spdc(773.5, 1547.0).unwrap(),
        )
    }

    /// Dense scan of Δk(Λ) for the first sign change, refined linearly.
    fn scan_period(template: &CrystalSpec, d: &Dispersion, w: &WaveTriplet) -> f64 {
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=200_000 {
            let period = 1.0 + f64::from(i) * 1e-3;
            let dk = phase_mismatch(&template.clone().with_period(period), d, w).unwrap();
            if let Some((p0, d0)) = prev {
                if d0.signum() != dk.signum() {
                    return p0 + (period - p0) * d0 / (d0 - dk);
                }
            }
            prev = Some((period, dk));
        }
        panic!("no sign change");
    }

    #[test]
    fn source_period_near_46um() {
        let d = Dispersion::ktp();
        let (c, w) = source();
        let period = solve_poling_period(&c, &d, &w).unwrap();
        assert!((period - 46.0).abs() < 1.0, "Λ = {period}");
        assert!((period - scan_period(&c, &d, &w)).abs() < 1e-4);
        let dk = phase_mismatch(&c.clone().with_period(period), &d, &w).unwrap();
        assert!(dk.abs() < 1e-6, "Δk = {dk}");
    }

    #[test]
    fn converter_period_zeroes_mismatch() {
        let d = Dispersion::ktp();
        let c = CrystalSpec::type_i_sfg(20.0);
        let w = WaveTriplet::sfg(795.0, 1547.0).unwrap();
        assert!((w.sum_nm - 525.2).abs() < 0.1);
        let period = solve_poling_period(&c, &d, &w).unwrap();
        assert!((period - scan_period(&c, &d, &w)).abs() < 1e-4);
        let matched = c.with_period(period);
        assert!(phase_mismatch(&matched, &d, &w).unwrap().abs() < 1e-6);
        let detuned = matched.clone().with_period(period * 1.01);
        assert!(phase_mismatch(&detuned, &d, &w).unwrap().abs() > 1.0);
    }

    #[test]
    fn perturbed_period_is_mismatched() {
        let d = Dispersion::ktp();
        let (c, w) = source();
        let matched = phase_matched(&c, &d, &w).unwrap();
        let off = matched.clone().with_period(matched.poling_period_um * 1.01);
        assert!(phase_mismatch(&off, &d, &w).unwrap().abs() > 1.0);
    }

    #[test]
    fn mismatch_changes_sign_through_degeneracy() {
        let d = Dispersion::ktp();
        let (c, w) = source();
        let matched = phase_matched(&c, &d, &w).unwrap();
        let values: Vec<f64> = (0..=200)
            .map(|i| {
                let s = 1537.0 + 0.1 * f64::from(i);
                phase_mismatch(&matched, &d, &WaveTriplet::spdc(773.5, s).unwrap()).unwrap()
            })
            .collect();
        assert!(values[0].signum() != values[200].signum());
        let crossings = values
            .windows(2)
            .filter(|p| p[0].signum() != p[1].signum())
            .count();
        assert_eq!(crossings, 1);
        let max_step = values
            .windows(2)
            .map(|p| (p[1] - p[0]).abs())
            .fold(0.0, f64::max);
        let span = (values[200] - values[0]).abs();
        assert!(max_step < span / 100.0, "Δk should vary smoothly");
    }

    #[test]
    fn grating_term_is_linear() {
        let d = Dispersion::ktp();
        let (c, w) = source();
        let c1 = c.clone().with_period(40.0);
        let c2 = c.clone().with_period(20.0);
        let diff = phase_mismatch(&c2, &d, &w).unwrap() - phase_mismatch(&c1, &d, &w).unwrap();
        let expected = 2.0 * PI / 40e-6;
        assert!((diff - expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn energy_conservation_enforced() {
        let d = Dispersion::ktp();
        let c = CrystalSpec::type_ii_spdc(20.0).with_period(46.0);
        let bad = WaveTriplet {
            sum_nm: 773.5,
            first_nm: 1547.0,
            second_nm: 1548.0,
        };
        assert!(matches!(
            phase_mismatch(&c, &d, &bad),
            Err(Error::EnergyConservation(_))
        ));
        assert!(WaveTriplet::spdc(773.5, 700.0).is_err());
    }

    #[test]
    fn invalid_crystal() {
        let d = Dispersion::ktp();
        let (c, w) = source();
        assert!(phase_mismatch(&c, &d, &w).is_err());
        let short = CrystalSpec::type_ii_spdc(0.0);
        assert!(solve_poling_period(&short, &d, &w).is_err());
    }

    #[test]
    fn no_solution_when_unbracketed() {
        let d = Dispersion::ktp();
        // with the grating sign flipped the required period is negative
        let mut c = CrystalSpec::type_i_sfg(20.0);
        c.process = Process::Spdc;
        let w = WaveTriplet::sfg(795.0, 1547.0).unwrap();
        assert!(matches!(
            solve_poling_period(&c, &d, &w),
            Err(Error::NoSolution(_))
        ));
    }
}
