//! Sampled spectral densities and the phase-matching spectra built on them.

use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::crystal::{phase_mismatch, CrystalSpec, Process, WaveTriplet};
use super::sellmeier::Dispersion;

/// Default number of grid points.
pub const DEFAULT_GRID_POINTS: usize = 4096;
/// Default half-width of the grid around its center, nm.
pub const DEFAULT_HALF_SPAN_NM: f64 = 8.0;

const UNIFORM_TOLERANCE: f64 = 1e-6;

/// Nonnegative density sampled on a strictly increasing wavelength grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    wavelengths_nm: Vec<f64>,
    density: Vec<f64>,
    /// Set when the half-maximum is not crossed on both sides of the peak.
    pub truncated: bool,
}

impl Spectrum {
    pub fn new(wavelengths_nm: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if wavelengths_nm.len() != density.len() {
            return Err(Error::Grid(format!(
                "{} wavelengths but {} density values",
                wavelengths_nm.len(),
                density.len()
            )));
        }
        if wavelengths_nm.len() < 2 {
            return Err(Error::Grid("a spectrum needs at least two points".into()));
        }
        if wavelengths_nm.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::Grid(
                "wavelengths must be finite and positive".into(),
            ));
        }
        if wavelengths_nm.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid(
                "wavelengths must be strictly increasing".into(),
            ));
        }
        if density.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Grid("density must be finite and nonnegative".into()));
        }
        let mut s = Self {
            wavelengths_nm,
            density,
            truncated: false,
        };
        s.truncated = fwhm(&s).is_err();
        Ok(s)
    }

    /// Evaluate `f` on every grid point.
    pub fn from_fn<F>(grid: &[f64], mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let density = grid.iter().map(|&w| f(w)).collect::<Result<Vec<_>>>()?;
        Self::new(grid.to_vec(), density)
    }

    pub fn wavelengths_nm(&self) -> &[f64] {
        &self.wavelengths_nm
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    pub fn peak(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }

    /// Wavelength of the largest sample.
    pub fn peak_wavelength_nm(&self) -> f64 {
        let (i, _) = self
            .density
            .iter()
            .enumerate()
            .fold(
                (0, f64::MIN),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        self.wavelengths_nm[i]
    }

    /// Rescale so the largest sample is exactly 1.
    pub fn normalized(mut self) -> Result<Self> {
        let peak = self.peak();
        if peak <= 0.0 {
            return Err(Error::Grid("cannot normalize an all-zero spectrum".into()));
        }
        if peak != 1.0 {
            for v in &mut self.density {
                *v /= peak;
            }
        }
        Ok(self)
    }

    pub fn grid_step_nm(&self) -> f64 {
        let n = self.wavelengths_nm.len();
        (self.wavelengths_nm[n - 1] - self.wavelengths_nm[0]) / (n - 1) as f64
    }

    pub fn is_uniform(&self) -> bool {
        let step = self.grid_step_nm();
        self.wavelengths_nm
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= UNIFORM_TOLERANCE * step)
    }

    pub fn same_grid(&self, other: &Spectrum) -> bool {
        self.wavelengths_nm.len() == other.wavelengths_nm.len()
            && self
                .wavelengths_nm
                .iter()
                .zip(&other.wavelengths_nm)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs())
    }

    /// Two-column CSV `wavelength_nm,density`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["wavelength_nm", "density"])?;
        for (l, d) in self.wavelengths_nm.iter().zip(&self.density) {
            w.write_record([l.to_string(), d.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["wavelength_nm", "density"] {
            return Err(Error::Parse {
                line: 1,
                message: format!("unexpected spectrum header {headers:?}"),
            });
        }
        let mut wl = Vec::new();
        let mut density = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse = |field: usize| -> Result<f64> {
                rec.get(field)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Parse {
                        line: i + 2,
                        message: format!("bad number in column {}", field + 1),
                    })
            };
            wl.push(parse(0)?);
            density.push(parse(1)?);
        }
        Self::new(wl, density)
    }
}

/// `points` wavelengths evenly spaced over `[center - half_span, center + half_span]`.
pub fn uniform_grid(center_nm: f64, half_span_nm: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::Grid("grid needs at least two points".into()));
    }
    if !(half_span_nm > 0.0) || !(center_nm - half_span_nm > 0.0) {
        return Err(Error::Grid(format!(
            "invalid grid {center_nm} ± {half_span_nm} nm"
        )));
    }
    let start = center_nm - half_span_nm;
    let step = 2.0 * half_span_nm / (points - 1) as f64;
    Ok((0..points).map(|i| start + step * i as f64).collect())
}

/// The default 4096-point, ±8 nm grid.
pub fn default_grid(center_nm: f64) -> Vec<f64> {
    uniform_grid(center_nm, DEFAULT_HALF_SPAN_NM, DEFAULT_GRID_POINTS)
        .expect("default grid parameters are valid")
}

/// `sinc²(x) = (sin x / x)²`.
pub fn sinc_sq(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 3.0
    } else {
        let s = x.sin() / x;
        s * s
    }
}

fn phase_matching_spectrum<F>(
    crystal: &CrystalSpec,
    dispersion: &Dispersion,
    grid: &[f64],
    waves: F,
) -> Result<Spectrum>
where
    F: Fn(f64) -> Result<WaveTriplet>,
{
    crystal.validate()?;
    let half_length = crystal.length_m() / 2.0;
    Spectrum::from_fn(grid, |signal| {
        let dk = phase_mismatch(crystal, dispersion, &waves(signal)?)?;
        Ok(sinc_sq(dk * half_length))
    })?
    .normalized()
}

/// Signal emission spectrum `sinc²(Δk L / 2)` of a down-converter pumped at
/// `pump_nm`; the idler follows from energy conservation. Peak-normalized.
pub fn emission_spectrum(
    crystal: &CrystalSpec,
    dispersion: &Dispersion,
    pump_nm: f64,
    grid: &[f64],
) -> Result<Spectrum> {
    if crystal.process != Process::Spdc {
        return Err(Error::InvalidParameter(
            "emission spectrum needs a down-conversion crystal".into(),
        ));
    }
    phase_matching_spectrum(crystal, dispersion, grid, |s| WaveTriplet::spdc(pump_nm, s))
}

/// Signal acceptance spectrum `sinc²(Δk L / 2)` of an up-converter pumped at
/// `pump_nm`. Peak-normalized.
pub fn acceptance_spectrum(
    crystal: &CrystalSpec,
    dispersion: &Dispersion,
    pump_nm: f64,
    grid: &[f64],
) -> Result<Spectrum> {
    if crystal.process != Process::Sfg {
        return Err(Error::InvalidParameter(
            "acceptance spectrum needs an up-conversion crystal".into(),
        ));
    }
    phase_matching_spectrum(crystal, dispersion, grid, |s| WaveTriplet::sfg(pump_nm, s))
}

/// Pair spectrum after both photons pass the converter: `F · G²`, peak-normalized.
pub fn filtered_spectrum(emission: &Spectrum, acceptance: &Spectrum) -> Result<Spectrum> {
    if !emission.same_grid(acceptance) {
        return Err(Error::Grid("emission and acceptance grids differ".into()));
    }
    let density = emission
        .density
        .iter()
        .zip(&acceptance.density)
        .map(|(f, g)| f * g * g)
        .collect();
    Spectrum::new(emission.wavelengths_nm.clone(), density)?.normalized()
}

/// Full width at half maximum in nm, linearly interpolated between samples.
///
/// Fails when the samples at or above half maximum do not form one
/// contiguous run, or when the run touches the grid edge.
pub fn fwhm(s: &Spectrum) -> Result<f64> {
    let half = s.peak() / 2.0;
    if !(half > 0.0) {
        return Err(Error::Grid("spectrum is identically zero".into()));
    }
    let d = &s.density;
    let x = &s.wavelengths_nm;
    let first = d.iter().position(|&v| v >= half).expect("peak exists");
    let last = d.iter().rposition(|&v| v >= half).expect("peak exists");
    if d[first..=last].iter().any(|&v| v < half) {
        return Err(Error::Grid(
            "more than one region above half maximum; peak is ambiguous".into(),
        ));
    }
    if first == 0 || last == d.len() - 1 {
        return Err(Error::Grid(
            "half maximum is not crossed within the grid".into(),
        ));
    }
    let cross = |i0: usize, i1: usize| x[i0] + (half - d[i0]) * (x[i1] - x[i0]) / (d[i1] - d[i0]);
    Ok(cross(last, last + 1) - cross(first - 1, first))
}
