//! Fringe visibility fits and standard-quantum-limit verdicts.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, LmOptions, Model};
use crate::kv::KvSection;

use super::scan::ScanResult;

/// `C₀ + a cos(fφ) + b sin(fφ)`, parameters `[C₀, a, b, f]`.
///
/// Equivalent to `C₀ (1 + V cos(fφ + φ₀))` with `V = √(a² + b²) / C₀` and
/// `φ₀ = atan2(−b, a)`, but free of the phase wrap.
struct Fringe;

impl Model for Fringe {
    fn n_params(&self) -> usize {
        4
    }

    fn eval(&self, phi: f64, p: &[f64], grad: &mut [f64]) -> f64 {
        let (c, s) = ((p[3] * phi).cos(), (p[3] * phi).sin());
        grad[0] = 1.0;
        grad[1] = c;
        grad[2] = s;
        grad[3] = phi * (p[2] * c - p[1] * s);
        p[0] + p[1] * c + p[2] * s
    }
}

/// Result of a fringe fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub visibility: f64,
    pub visibility_sigma: f64,
    /// Fringe periods per 2π of phase.
    pub frequency: f64,
    pub frequency_sigma: f64,
    pub phase_offset: f64,
    /// Mean level `C₀`.
    pub offset: f64,
    /// `√χ²` with Poisson weights.
    pub residual_norm: f64,
    pub points: usize,
    /// Set when the fitted visibility exceeded 1 and was clamped.
    pub clamped: bool,
}

impl FitReport {
    pub fn to_kv(&self, section: &str) -> KvSection {
        let mut s = KvSection::new(section);
        s.push("visibility", self.visibility);
        s.push("visibility_sigma", self.visibility_sigma);
        s.push("frequency", self.frequency);
        s.push("frequency_sigma", self.frequency_sigma);
        s.push("phase_offset", self.phase_offset);
        s.push("offset", self.offset);
        s.push("residual_norm", self.residual_norm);
        s.push("points", self.points);
        s.push("clamped", self.clamped);
        s
    }

    pub fn from_kv(s: &KvSection) -> Result<Self> {
        Ok(Self {
            visibility: s.require("visibility")?,
            visibility_sigma: s.require("visibility_sigma")?,
            frequency: s.require("frequency")?,
            frequency_sigma: s.require("frequency_sigma")?,
            phase_offset: s.require("phase_offset")?,
            offset: s.require("offset")?,
            residual_norm: s.require("residual_norm")?,
            points: s.require("points")?,
            clamped: s.require("clamped")?,
        })
    }
}

impl fmt::Display for FitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "V = {:.4} ± {:.4}, frequency = {:.4} ± {:.4}, φ₀ = {:.4} rad, C₀ = {:.3}, residual = {:.4}",
            self.visibility,
            self.visibility_sigma,
            self.frequency,
            self.frequency_sigma,
            self.phase_offset,
            self.offset,
            self.residual_norm
        )?;
        if self.clamped {
            f.write_str(" (clamped)")?;
        }
        Ok(())
    }
}

/// Weighted least-squares fringe fit.
///
/// Weights are Poisson, `σᵢ = √max(nᵢ, 1)`; `σ_V` comes from the parameter
/// covariance rescaled by the reduced χ², so it vanishes for noiseless data.
/// The frequency is started at `n_expected` and left free.
pub fn fit_visibility(scan: &ScanResult, n_expected: u32) -> Result<FitReport> {
    if scan.len() < 8 {
        return Err(Error::InvalidParameter(format!(
            "fringe fit needs at least 8 points, got {}",
            scan.len()
        )));
    }
    if n_expected == 0 {
        return Err(Error::InvalidParameter(
            "expected fringe frequency must be >= 1".into(),
        ));
    }
    let phases = scan.phases()?;
    // a grid of n points covers its span plus one mean step
    let n = phases.len() as f64;
    let span = (phases.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - phases.iter().copied().fold(f64::INFINITY, f64::min))
        * n
        / (n - 1.0);
    if span < 2.0 * PI / f64::from(n_expected) * (1.0 - 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "phase span {span:.4} rad covers less than one period"
        )));
    }
    let ys = scan.observed();
    let sigmas = scan.sigma();
    let f0 = f64::from(n_expected);
    let initial = linear_start(&phases, &ys, &sigmas, f0)?;
    let fit = levenberg_marquardt(
        &Fringe,
        &phases,
        &ys,
        &sigmas,
        &initial,
        LmOptions::default(),
    )?;

    let [c0, a, b, freq] = [fit.params[0], fit.params[1], fit.params[2], fit.params[3]];
    if !(c0 > 0.0) {
        return Err(Error::FitDiverged {
            iterations: fit.iterations,
            residual: fit.chi2.sqrt(),
        });
    }
    let amp = a.hypot(b);
    let v = amp / c0;
    // a residual at round-off level is an exact fit; report zero spread
    let scale: f64 = ys.iter().zip(&sigmas).map(|(y, s)| (y / s).powi(2)).sum();
    let exact = fit.chi2 <= 1e-20 * scale;
    let cov = if exact {
        DMatrix::zeros(4, 4)
    } else {
        fit.scaled_covariance()
    };
    // ∂V/∂(C₀, a, b)
    let grad = if amp > 0.0 {
        [-v / c0, a / (amp * c0), b / (amp * c0)]
    } else {
        [0.0, 0.0, 0.0]
    };
    let mut var_v = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            var_v += grad[i] * cov[(i, j)] * grad[j];
        }
    }
    Ok(FitReport {
        visibility: v.min(1.0),
        visibility_sigma: var_v.max(0.0).sqrt(),
        frequency: freq.abs(),
        frequency_sigma: cov[(3, 3)].max(0.0).sqrt(),
        phase_offset: (-b).atan2(a),
        offset: c0,
        residual_norm: fit.chi2.sqrt(),
        points: scan.len(),
        clamped: v > 1.0,
    })
}

/// Weighted linear solve for `[C₀, a, b]` at fixed frequency.
fn linear_start(phases: &[f64], ys: &[f64], sigmas: &[f64], f: f64) -> Result<[f64; 4]> {
    let n = phases.len();
    let mut design = DMatrix::zeros(n, 3);
    let mut rhs = DVector::zeros(n);
    for i in 0..n {
        let w = 1.0 / sigmas[i];
        design[(i, 0)] = w;
        design[(i, 1)] = w * (f * phases[i]).cos();
        design[(i, 2)] = w * (f * phases[i]).sin();
        rhs[i] = w * ys[i];
    }
    let normal = design.transpose() * &design;
    let x = normal
        .lu()
        .solve(&(design.transpose() * rhs))
        .ok_or_else(|| {
            Error::InvalidParameter("fringe scan does not constrain the model".into())
        })?;
    Ok([x[0], x[1], x[2], f])
}

/// Outcome of comparing a fringe visibility with `1/√N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqlVerdict {
    pub n: u32,
    pub visibility: f64,
    pub threshold: f64,
    pub beats: bool,
    /// `(V − threshold) / σ_V`; `None` when `σ_V = 0`.
    pub margin_sigma: Option<f64>,
}

impl fmt::Display for SqlVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = if self.beats { "beats" } else { "does not beat" };
        write!(f, "{word} SQL (threshold {:.4})", self.threshold)?;
        if let Some(m) = self.margin_sigma {
            write!(f, ", margin {m:.2}σ")?;
        }
        Ok(())
    }
}

/// An N-photon fringe beats the standard quantum limit iff `V > 1/√N`.
pub fn sql_verdict(visibility: f64, sigma: f64, n: u32) -> Result<SqlVerdict> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "SQL comparison needs N >= 2, got {n}"
        )));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "σ_V must be >= 0, got {sigma}"
        )));
    }
    let threshold = (1.0 / f64::from(n)).sqrt();
    Ok(SqlVerdict {
        n,
        visibility,
        threshold,
        beats: visibility > threshold,
        margin_sigma: (sigma > 0.0).then(|| (visibility - threshold) / sigma),
    })
}
