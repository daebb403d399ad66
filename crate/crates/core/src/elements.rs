//! Optical elements, circuits and threshold detection.
//!
//! Matrix conventions:
//!
//! * splitter: `[[cos θ, sin θ], [sin θ, -cos θ]]`, real and involutive; the
//!   balanced splitter is `θ = π/4`.
//! * frequency converter: the rotation `[[cos ξt, -sin ξt], [sin ξt, cos ξt]]`
//!   between the signal mode (row/column 0) and the sum-frequency mode
//!   (row/column 1). A single photon is converted with probability `sin²(ξt)`.
//!
//! Loss never enters a unitary; it is applied at detection through the
//! threshold-detector formula.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{ModeId, StateVector};

/// Maximum allowed `max |U†U - I|` entry.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

/// A 2×2 unitary acting on a pair of modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeUnitary {
    m: [[Complex64; 2]; 2],
}

impl TwoModeUnitary {
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        if m.iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidParameter(
                "matrix has non-finite entries".into(),
            ));
        }
        let deviation = unitarity_deviation(&m);
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { m })
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Result<Self> {
        let c = |x: f64| Complex64::new(x, 0.0);
        Self::new([[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]])
    }

    /// General U(2) element `e^{iα} [[e^{iβ} cos θ, e^{iγ} sin θ], [-e^{-iγ} sin θ, e^{-iβ} cos θ]]`.
    pub fn from_angles(alpha: f64, beta: f64, gamma: f64, theta: f64) -> Self {
        let g = Complex64::from_polar(1.0, alpha);
        let (s, c) = theta.sin_cos();
        Self {
            m: [
                [
                    g * Complex64::from_polar(c, beta),
                    g * Complex64::from_polar(s, gamma),
                ],
                [
                    -g * Complex64::from_polar(s, -gamma),
                    g * Complex64::from_polar(c, -beta),
                ],
            ],
        }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            m: [[one, zero], [zero, one]],
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    /// Matrix product `self · rhs`, i.e. `rhs` acts first.
    pub fn then_after(&self, rhs: &TwoModeUnitary) -> TwoModeUnitary {
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        TwoModeUnitary { m }
    }

    pub fn adjoint(&self) -> TwoModeUnitary {
        let m = &self.m;
        TwoModeUnitary {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    /// Largest entry-wise distance to another matrix.
    pub fn max_abs_diff(&self, other: &TwoModeUnitary) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub fn unitarity_deviation(m: &[[Complex64; 2]; 2]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let dot = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

/// Splitter with mixing angle `theta`; `π/4` is 50:50.
pub fn beamsplitter(theta: f64) -> TwoModeUnitary {
    let (s, c) = theta.sin_cos();
    TwoModeUnitary {
        m: [
            [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(-c, 0.0)],
        ],
    }
}

/// Sum-frequency converter after interaction `xi_t = ξ t`.
///
/// Heisenberg evolution `a1(t) = a1 cos ξt - a2 sin ξt`,
/// `a2(t) = a2 cos ξt + a1 sin ξt`, with mode 1 the signal and mode 2 the
/// up-converted field.
pub fn frequency_converter(xi_t: f64) -> TwoModeUnitary {
    let (s, c) = xi_t.sin_cos();
    TwoModeUnitary {
        m: [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
    }
}

/// Internal conversion efficiency `sin²(a √P)` at circulating power `power_w`.
///
/// `a` has units of W^-1/2 and absorbs the pump-field/coupling prefactor, since
/// the coupling is proportional to the pump amplitude.
pub fn internal_conversion_efficiency(power_w: f64, a: f64) -> Result<f64> {
    if !(power_w >= 0.0) || !power_w.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "circulating power must be >= 0 W, got {power_w}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::InvalidParameter(
            "calibration constant is not finite".into(),
        ));
    }
    Ok((a * power_w.sqrt()).sin().powi(2))
}

/// Calibration constant placing `(power_w, efficiency)` on the rising branch
/// of `sin²(a √P)`.
pub fn calibrate_conversion(power_w: f64, efficiency: f64) -> Result<f64> {
    if !(power_w > 0.0) || !power_w.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "calibration power must be > 0 W, got {power_w}"
        )));
    }
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(Error::InvalidParameter(format!(
            "efficiency {efficiency} outside [0, 1]"
        )));
    }
    Ok(efficiency.sqrt().asin() / power_w.sqrt())
}

/// Circulating power at which the model reaches full conversion, `(π / 2a)²`.
pub fn full_conversion_power(a: f64) -> f64 {
    (std::f64::consts::FRAC_PI_2 / a).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementKind {
    /// Mixing angle in radians.
    Splitter { theta: f64 },
    /// Phase in radians imprinted per photon on the single target mode.
    Phase { phi: f64 },
    /// Conversion angle ξt in radians; first target is the signal mode.
    Converter { xi_t: f64 },
    /// Exchange of the two target modes.
    Relabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitElement {
    pub kind: ElementKind,
    pub targets: Vec<ModeId>,
}

impl CircuitElement {
    pub fn splitter(theta: f64, a: impl Into<ModeId>, b: impl Into<ModeId>) -> Self {
        Self {
            kind: ElementKind::Splitter { theta },
            targets: vec![a.into(), b.into()],
        }
    }

    pub fn phase(phi: f64, mode: impl Into<ModeId>) -> Self {
        Self {
            kind: ElementKind::Phase { phi },
            targets: vec![mode.into()],
        }
    }

    pub fn converter(xi_t: f64, signal: impl Into<ModeId>, sum: impl Into<ModeId>) -> Self {
        Self {
            kind: ElementKind::Converter { xi_t },
            targets: vec![signal.into(), sum.into()],
        }
    }

    pub fn relabel(a: impl Into<ModeId>, b: impl Into<ModeId>) -> Self {
        Self {
            kind: ElementKind::Relabel,
            targets: vec![a.into(), b.into()],
        }
    }

    /// The element undoing this one: splitters and relabels are their own
    /// inverses, phases and converters run backwards.
    pub fn inverse(&self) -> Self {
        let kind = match self.kind {
            ElementKind::Phase { phi } => ElementKind::Phase { phi: -phi },
            ElementKind::Converter { xi_t } => ElementKind::Converter { xi_t: -xi_t },
            k @ (ElementKind::Splitter { .. } | ElementKind::Relabel) => k,
        };
        Self {
            kind,
            targets: self.targets.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let (param, arity) = match self.kind {
            ElementKind::Splitter { theta } => (theta, 2),
            ElementKind::Phase { phi } => (phi, 1),
            ElementKind::Converter { xi_t } => (xi_t, 2),
            ElementKind::Relabel => (0.0, 2),
        };
        if !param.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "{:?} has a non-finite parameter",
                self.kind
            )));
        }
        if self.targets.len() != arity {
            return Err(Error::InvalidParameter(format!(
                "{:?} needs {arity} target mode(s), got {}",
                self.kind,
                self.targets.len()
            )));
        }
        if arity == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::InvalidParameter(format!(
                "{:?} targets `{}` twice",
                self.kind, self.targets[0]
            )));
        }
        Ok(())
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.validate()?;
        let t = &self.targets;
        match self.kind {
            ElementKind::Splitter { theta } => {
                state.apply_two_mode_mixer(&beamsplitter(theta), &t[0], &t[1])
            }
            ElementKind::Converter { xi_t } => {
                state.apply_two_mode_mixer(&frequency_converter(xi_t), &t[0], &t[1])
            }
            ElementKind::Phase { phi } => state.apply_phase(&t[0], phi),
            ElementKind::Relabel => state.swap_modes(&t[0], &t[1]),
        }
    }
}

/// An ordered list of elements over a declared mode set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    modes: Vec<ModeId>,
    elements: Vec<CircuitElement>,
}

impl Circuit {
    pub fn new(modes: Vec<ModeId>) -> Self {
        Self {
            modes,
            elements: Vec::new(),
        }
    }

    /// Append an element; every target must be declared.
    pub fn push(&mut self, element: CircuitElement) -> Result<&mut Self> {
        element.validate()?;
        if let Some(m) = element.targets.iter().find(|m| !self.modes.contains(m)) {
            return Err(Error::UnknownMode(m.to_string()));
        }
        self.elements.push(element);
        Ok(self)
    }

    pub fn with(mut self, element: CircuitElement) -> Result<Self> {
        self.push(element)?;
        Ok(self)
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn elements(&self) -> &[CircuitElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements inverted in reverse order.
    pub fn inverse(&self) -> Self {
        Self {
            modes: self.modes.clone(),
            elements: self
                .elements
                .iter()
                .rev()
                .map(CircuitElement::inverse)
                .collect(),
        }
    }
}

/// Run every element of `circuit` on `state`, first element first.
pub fn apply_circuit(state: &StateVector, circuit: &Circuit) -> Result<StateVector> {
    if let Some(m) = circuit.modes.iter().find(|m| state.mode_index(m).is_err()) {
        return Err(Error::UnknownMode(m.to_string()));
    }
    circuit
        .elements
        .iter()
        .try_fold(state.clone(), |s, e| e.apply(&s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Click,
    NoClick,
}

/// A threshold (non-number-resolving) detector watching one or more modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    pub modes: Vec<ModeId>,
    pub outcome: Outcome,
    pub efficiency: f64,
}

impl Detector {
    pub fn click(mode: impl Into<ModeId>, efficiency: f64) -> Self {
        Self {
            modes: vec![mode.into()],
            outcome: Outcome::Click,
            efficiency,
        }
    }

    pub fn no_click(mode: impl Into<ModeId>, efficiency: f64) -> Self {
        Self {
            modes: vec![mode.into()],
            outcome: Outcome::NoClick,
            efficiency,
        }
    }

    /// One detector integrating several modes, e.g. two polarizations or
    /// spectral tags arriving at the same port.
    pub fn grouped(modes: Vec<ModeId>, outcome: Outcome, efficiency: f64) -> Self {
        Self {
            modes,
            outcome,
            efficiency,
        }
    }

    fn outcome_probability(&self, photons: u32) -> f64 {
        let miss = (1.0 - self.efficiency).powi(photons as i32);
        match self.outcome {
            Outcome::Click => 1.0 - miss,
            Outcome::NoClick => miss,
        }
    }
}

/// Joint outcome required from a set of detectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectorPattern {
    pub detectors: Vec<Detector>,
}

impl DetectorPattern {
    pub fn new(detectors: Vec<Detector>) -> Self {
        Self { detectors }
    }

    /// Both modes click, each with efficiency `eta`.
    pub fn coincidence(a: impl Into<ModeId>, b: impl Into<ModeId>, eta: f64) -> Self {
        Self::new(vec![Detector::click(a, eta), Detector::click(b, eta)])
    }
}

/// Probability of `pattern`:
/// `Σ_states |amp|² Π_detectors f(n, η)` with `f = 1 - (1-η)^n` for a click
/// and `(1-η)^n` for no click.
pub fn detect(state: &StateVector, pattern: &DetectorPattern) -> Result<f64> {
    let mut indexed = Vec::with_capacity(pattern.detectors.len());
    for d in &pattern.detectors {
        if !(0.0..=1.0).contains(&d.efficiency) {
            return Err(Error::InvalidParameter(format!(
                "detector efficiency {} outside [0, 1]",
                d.efficiency
            )));
        }
        if d.modes.is_empty() {
            return Err(Error::InvalidParameter("detector watches no modes".into()));
        }
        let idx = d
            .modes
            .iter()
            .map(|m| state.mode_index(m))
            .collect::<Result<Vec<_>>>()?;
        indexed.push((d, idx));
    }
    let p: f64 = state
        .iter()
        .map(|(basis, amp)| {
            let weight: f64 = indexed
                .iter()
                .map(|(d, idx)| {
                    let n: u32 = idx.iter().map(|&i| basis.occupation(i)).sum();
                    d.outcome_probability(n)
                })
                .product();
            amp.norm_sqr() * weight
        })
        .sum();
    Ok(p.clamp(0.0, 1.0))
}
