//! Scan drivers: HOM dips, second-splitter bunching and NOON phase fringes.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::spectral::{spectral_overlap, Spectrum};

use super::counting::{sample_counts, Sampling};

/// Phase offset of the fringe closed form `(1 + V cos(Nφ + φ₀)) / 2`.
///
/// With a real 50:50 splitter recombining the NOON arms and the readout
/// "odd photon number in output B", the fringe starts at its minimum, so
/// `φ₀ = π`. For N = 2 that readout is exactly the `|1,1⟩` coincidence.
pub const FRINGE_PHASE_OFFSET: f64 = PI;

/// Tilted plate in one interferometer arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePlate {
    pub thickness_m: f64,
    pub index: f64,
    pub wavelength_m: f64,
}

impl PhasePlate {
    pub fn phase(&self, theta: f64) -> Result<f64> {
        plate_phase(theta, self.thickness_m, self.index, self.wavelength_m)
    }
}

/// Extra phase of a plate of thickness `t` tilted by `θ`, relative to normal
/// incidence: `(2π t/λ)(√(n² − sin²θ) − cos θ − (n − 1))`.
pub fn plate_phase(theta: f64, thickness_m: f64, index: f64, wavelength_m: f64) -> Result<f64> {
    if !(theta.abs() < PI / 3.0) {
        return Err(Error::InvalidParameter(format!(
            "plate tilt {theta} rad outside (-π/3, π/3)"
        )));
    }
    if !(index > 1.0) || !(thickness_m > 0.0) || !(wavelength_m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "plate needs n > 1, t > 0, λ > 0 (got n={index}, t={thickness_m}, λ={wavelength_m})"
        )));
    }
    let s = theta.sin();
    Ok(2.0 * PI * thickness_m / wavelength_m
        * ((index * index - s * s).sqrt() - theta.cos() - (index - 1.0)))
}

/// What the scan parameter means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanAxis {
    /// Path-length delay in mm.
    Delay,
    /// Interferometer phase in rad.
    Phase,
    /// Plate tilt in rad, mapped to phase through the plate.
    PlateAngle(PhasePlate),
}

impl ScanAxis {
    /// Interferometer phase at parameter value `x`.
    pub fn phase_of(&self, x: f64) -> Result<f64> {
        match self {
            ScanAxis::Delay => Err(Error::InvalidParameter(
                "delay axis carries no phase".into(),
            )),
            ScanAxis::Phase => Ok(x),
            ScanAxis::PlateAngle(plate) => plate.phase(x),
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            ScanAxis::Delay => "mm",
            ScanAxis::Phase | ScanAxis::PlateAngle(_) => "rad",
        }
    }
}

/// Acquisition settings recorded with a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanMetadata {
    pub seed: Option<u64>,
    pub integration_time_s: f64,
    pub pair_rate_hz: f64,
}

impl ScanMetadata {
    pub fn new(sampling: Sampling, pair_rate_hz: f64, integration_time_s: f64) -> Result<Self> {
        if !(pair_rate_hz > 0.0) || !pair_rate_hz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pair rate must be > 0, got {pair_rate_hz}"
            )));
        }
        if !(integration_time_s > 0.0) || !integration_time_s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "integration time must be > 0, got {integration_time_s}"
            )));
        }
        Ok(Self {
            seed: sampling.seed(),
            integration_time_s,
            pair_rate_hz,
        })
    }

    /// Expected pairs per bin.
    pub fn pairs_per_bin(&self) -> f64 {
        self.pair_rate_hz * self.integration_time_s
    }
}

/// Expected and (optionally) sampled counts along one scan axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub axis: ScanAxis,
    pub params: Vec<f64>,
    pub expected: Vec<f64>,
    /// `None` in noiseless mode.
    pub counts: Option<Vec<u64>>,
    /// `None` for scans read back from CSV.
    pub metadata: Option<ScanMetadata>,
}

impl ScanResult {
    pub fn new(
        axis: ScanAxis,
        params: Vec<f64>,
        expected: Vec<f64>,
        counts: Option<Vec<u64>>,
        metadata: Option<ScanMetadata>,
    ) -> Result<Self> {
        if params.len() != expected.len()
            || counts.as_ref().is_some_and(|c| c.len() != params.len())
        {
            return Err(Error::InvalidParameter(
                "scan arrays differ in length".into(),
            ));
        }
        if let Some(bad) = expected.iter().find(|e| !(**e >= 0.0) || !e.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "expected count {bad} is not finite and >= 0"
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(
                "scan parameter is not finite".into(),
            ));
        }
        Ok(Self {
            axis,
            params,
            expected,
            counts,
            metadata,
        })
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Sampled counts, or the expectations in noiseless mode.
    pub fn observed(&self) -> Vec<f64> {
        match &self.counts {
            Some(c) => c.iter().map(|&n| n as f64).collect(),
            None => self.expected.clone(),
        }
    }

    /// Poisson error bars `√max(n, 1)`.
    pub fn sigma(&self) -> Vec<f64> {
        self.observed().iter().map(|n| n.max(1.0).sqrt()).collect()
    }

    /// Interferometer phase at every scan point.
    pub fn phases(&self) -> Result<Vec<f64>> {
        self.params.iter().map(|&x| self.axis.phase_of(x)).collect()
    }

    /// Mean of the two outermost points, taken as the far-from-dip level.
    fn edge_baseline(&self) -> Result<f64> {
        let obs = self.observed();
        if obs.len() < 2 {
            return Err(Error::InvalidParameter(
                "scan needs at least two points".into(),
            ));
        }
        let base = 0.5 * (obs[0] + obs[obs.len() - 1]);
        if !(base > 0.0) {
            return Err(Error::InvalidParameter("scan baseline is zero".into()));
        }
        Ok(base)
    }

    /// HOM visibility `(C_baseline − C_dip) / C_baseline`.
    pub fn dip_visibility(&self) -> Result<f64> {
        let base = self.edge_baseline()?;
        let min = self.observed().into_iter().fold(f64::INFINITY, f64::min);
        Ok((base - min) / base)
    }

    /// Level at the point nearest zero parameter over the baseline.
    pub fn center_to_baseline(&self) -> Result<f64> {
        let base = self.edge_baseline()?;
        let (i, _) = self
            .params
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("nonempty");
        Ok(self.observed()[i] / base)
    }

    /// Fringe contrast `(C_max − C_min) / (C_max + C_min)`.
    pub fn fringe_contrast(&self) -> Result<f64> {
        let obs = self.observed();
        let max = obs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = obs.iter().copied().fold(f64::INFINITY, f64::min);
        if !(max + min > 0.0) {
            return Err(Error::InvalidParameter("fringe has no counts".into()));
        }
        Ok((max - min) / (max + min))
    }

    /// CSV with header `param,expected,counts,sigma`; `counts` is left
    /// empty in noiseless mode.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["param", "expected", "counts", "sigma"])?;
        let sigma = self.sigma();
        for i in 0..self.len() {
            let counts = self
                .counts
                .as_ref()
                .map(|c| c[i].to_string())
                .unwrap_or_default();
            w.write_record([
                self.params[i].to_string(),
                self.expected[i].to_string(),
                counts,
                sigma[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a file written by [`ScanResult::write_csv`]. Acquisition
    /// metadata is not stored in the CSV.
    pub fn read_csv<R: Read>(reader: R, axis: ScanAxis) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["param", "expected", "counts", "sigma"] {
            return Err(Error::Parse {
                line: 1,
                message: "expected header param,expected,counts,sigma".into(),
            });
        }
        let mut params = Vec::new();
        let mut expected = Vec::new();
        let mut counts: Vec<Option<u64>> = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let field = |k: usize| rec.get(k).unwrap_or("");
            let num = |k: usize| -> Result<f64> {
                field(k).parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad number {:?}", field(k)),
                })
            };
            params.push(num(0)?);
            expected.push(num(1)?);
            counts.push(match field(2) {
                "" => None,
                s => Some(s.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad count {s:?}"),
                })?),
            });
            num(3)?;
        }
        let counts = if counts.iter().all(Option::is_none) {
            None
        } else {
            Some(
                counts
                    .into_iter()
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Parse {
                        line: 0,
                        message: "counts column is only partly filled".into(),
                    })?,
            )
        };
        Self::new(axis, params, expected, counts, None)
    }
}

/// Pair rate, bin time and sampling mode shared by all scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acquisition {
    pub pair_rate_hz: f64,
    pub integration_time_s: f64,
    pub sampling: Sampling,
}

impl Acquisition {
    fn finish(&self, axis: ScanAxis, params: Vec<f64>, expected: Vec<f64>) -> Result<ScanResult> {
        let meta = ScanMetadata::new(self.sampling, self.pair_rate_hz, self.integration_time_s)?;
        let counts = match self.sampling {
            Sampling::Poisson { seed } => Some(sample_counts(&expected, seed)?),
            Sampling::Noiseless => None,
        };
        ScanResult::new(axis, params, expected, counts, Some(meta))
    }

    fn pairs_per_bin(&self) -> Result<f64> {
        Ok(
            ScanMetadata::new(self.sampling, self.pair_rate_hz, self.integration_time_s)?
                .pairs_per_bin(),
        )
    }
}

fn check_overlap(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "overlap γ = {gamma} outside [0, 1]"
        )));
    }
    Ok(())
}

/// HOM dip: `rate · t_bin · 2 C(δ)` coincidences with `C = (1 − γ g(δ)) / 2`.
pub fn hom_scan(
    spectrum: &Spectrum,
    gamma: f64,
    delays_mm: &[f64],
    acq: &Acquisition,
) -> Result<ScanResult> {
    check_overlap(gamma)?;
    let scale = acq.pairs_per_bin()?;
    let g = spectral_overlap(spectrum, delays_mm)?;
    let expected = g.iter().map(|g| scale * (1.0 - gamma * g)).collect();
    acq.finish(ScanAxis::Delay, delays_mm.to_vec(), expected)
}

/// Coincidences across a second balanced splitter placed in one output of
/// the HOM splitter: `rate · t_bin · (1 + γ g(δ)) / 8`.
pub fn bunching_scan(
    spectrum: &Spectrum,
    gamma: f64,
    delays_mm: &[f64],
    acq: &Acquisition,
) -> Result<ScanResult> {
    check_overlap(gamma)?;
    let scale = acq.pairs_per_bin()?;
    let g = spectral_overlap(spectrum, delays_mm)?;
    let expected = g.iter().map(|g| scale * (1.0 + gamma * g) / 8.0).collect();
    acq.finish(ScanAxis::Delay, delays_mm.to_vec(), expected)
}

/// N-photon fringe `rate · t_bin · (1 + V cos(Nφ + φ₀)) / 2` with
/// `φ₀ = FRINGE_PHASE_OFFSET`, sampled along `axis`.
pub fn noon_fringe(
    n: u32,
    visibility: f64,
    axis: ScanAxis,
    params: &[f64],
    acq: &Acquisition,
) -> Result<ScanResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("fringe needs N >= 1".into()));
    }
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::InvalidParameter(format!(
            "visibility {visibility} outside [0, 1]"
        )));
    }
    let scale = acq.pairs_per_bin()?;
    let expected = params
        .iter()
        .map(|&x| {
            let phi = axis.phase_of(x)?;
            Ok(scale * fringe_closed_form(n, visibility, phi))
        })
        .collect::<Result<Vec<_>>>()?;
    acq.finish(axis, params.to_vec(), expected)
}

/// `(1 + V cos(Nφ + φ₀)) / 2`.
pub fn fringe_closed_form(n: u32, visibility: f64, phi: f64) -> f64 {
    0.5 * (1.0 + visibility * (f64::from(n) * phi + FRINGE_PHASE_OFFSET).cos())
}

/// Fock-space fringe: NOON state on arms `a, b`, phase `φ` on `b`,
/// recombination on a 50:50 splitter, probability of an odd photon number
/// in output `b`.
pub fn fock_fringe_probabilities(n: u32, phases: &[f64]) -> Result<Vec<f64>> {
    use crate::elements::beamsplitter;
    use crate::fock::{noon_state_with, ModeId, Truncation, DEFAULT_MAX_PHOTONS};

    let (a, b) = (ModeId::from("a"), ModeId::from("b"));
    let noon = noon_state_with(
        n,
        a.clone(),
        b.clone(),
        Truncation::with_max_photons(n.max(DEFAULT_MAX_PHOTONS)),
    )?;
    let bs = beamsplitter(FRAC_PI_4);
    phases
        .iter()
        .map(|&phi| {
            let out = noon
                .apply_phase(&b, phi)?
                .apply_two_mode_mixer(&bs, &a, &b)?;
            Ok(out.probability_where(|s| s.occupation(1) % 2 == 1))
        })
        .collect()
}

/// Fock-space HOM coincidence probability for `|1,1⟩` on a 50:50 splitter,
/// mixing indistinguishable (weight γ) and orthogonally tagged photons.
pub fn fock_hom_coincidence(gamma: f64) -> Result<f64> {
    check_overlap(gamma)?;
    let (same, tagged) = two_photon_oracle(false)?;
    Ok(gamma * same + (1.0 - gamma) * tagged)
}

/// Fock-space coincidence probability behind a second 50:50 splitter
/// placed in output `a` of the HOM splitter.
pub fn fock_bunching_coincidence(gamma: f64) -> Result<f64> {
    check_overlap(gamma)?;
    let (same, tagged) = two_photon_oracle(true)?;
    Ok(gamma * same + (1.0 - gamma) * tagged)
}

/// Coincidence probabilities `(indistinguishable, distinguishable)`.
fn two_photon_oracle(second_splitter: bool) -> Result<(f64, f64)> {
    use crate::elements::{
        apply_circuit, detect, Circuit, CircuitElement, Detector, DetectorPattern, Outcome,
    };
    use crate::fock::{ModeId, StateVector};

    let bs = FRAC_PI_4;
    let ids = |names: &[&str]| names.iter().map(|&m| ModeId::from(m)).collect::<Vec<_>>();
    // detectors watch (a, b) for HOM, (a, e) behind the second splitter
    let other = if second_splitter { "e" } else { "b" };

    let mut same = Circuit::new(ids(&["a", "b", "e"]));
    same.push(CircuitElement::splitter(bs, "a", "b"))?;
    if second_splitter {
        same.push(CircuitElement::splitter(bs, "a", "e"))?;
    }
    let state = apply_circuit(
        &StateVector::basis(ids(&["a", "b", "e"]), &[1, 1, 0])?,
        &same,
    )?;
    let p_same = detect(&state, &DetectorPattern::coincidence("a", other, 1.0))?;

    let tagged_modes = ids(&["a.h", "b.h", "e.h", "a.v", "b.v", "e.v"]);
    let mut tagged = Circuit::new(tagged_modes.clone());
    for tag in ["h", "v"] {
        tagged.push(CircuitElement::splitter(
            bs,
            format!("a.{tag}").as_str(),
            format!("b.{tag}").as_str(),
        ))?;
        if second_splitter {
            tagged.push(CircuitElement::splitter(
                bs,
                format!("a.{tag}").as_str(),
                format!("e.{tag}").as_str(),
            ))?;
        }
    }
    let state = apply_circuit(
        &StateVector::basis(tagged_modes, &[1, 0, 0, 0, 1, 0])?,
        &tagged,
    )?;
    let pattern = DetectorPattern::new(vec![
        Detector::grouped(ids(&["a.h", "a.v"]), Outcome::Click, 1.0),
        Detector::grouped(
            ids(&[&format!("{other}.h"), &format!("{other}.v")]),
            Outcome::Click,
            1.0,
        ),
    ]);
    let p_tagged = detect(&state, &pattern)?;
    Ok((p_same, p_tagged))
}

impl fmt::Display for ScanAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanAxis::Delay => f.write_str("delay"),
            ScanAxis::Phase => f.write_str("phase"),
            ScanAxis::PlateAngle(_) => f.write_str("plate-angle"),
        }
    }
}
