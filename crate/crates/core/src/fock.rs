//! Truncated Fock-space states over labeled optical modes.
//!
//! A [`StateVector`] is a sparse superposition of occupation-number basis
//! states. Every basis state is a [`FockState`] whose occupations are listed in
//! the order of the vector's mode set, so two states are comparable only when
//! their mode sets agree element for element.
//!
//! Two-mode transformations act on creation operators,
//!
//! ```text
//! a†_A -> U11 a†_A + U21 a†_B
//! a†_B -> U12 a†_A + U22 a†_B
//! ```
//!
//! which is the Schrödinger-picture counterpart of `a_out = U a_in` for the
//! annihilation operators.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::elements::TwoModeUnitary;
use crate::error::{Error, Result};

/// Default photon-number truncation.
pub const DEFAULT_MAX_PHOTONS: u32 = 6;

/// Upper bound on the number of basis states a single enumeration may produce.
pub const DEFAULT_MAX_BASIS: usize = 1 << 20;

/// Amplitudes with modulus at or below this are treated as zero and dropped.
pub const ZERO_AMPLITUDE: f64 = 1e-12;

/// Label of one optical mode, e.g. `"path-A@1547nm"`.
///
/// Path, port and wavelength tags all live in the label; two photons can only
/// interfere when an element maps them onto the same label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId(String);

impl ModeId {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ModeId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// Occupation numbers, one per mode of the owning mode set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState(Vec<u32>);

impl FockState {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self(vec![0; n_modes])
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn occupation(&self, mode_index: usize) -> u32 {
        self.0[mode_index]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn n_modes(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.0.iter().any(|&n| n > 9) {
            ","
        } else {
            ""
        };
        let body: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "|{}⟩", body.join(sep))
    }
}

/// Photon-number and basis-size limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub max_photons: u32,
    pub max_basis: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            max_photons: DEFAULT_MAX_PHOTONS,
            max_basis: DEFAULT_MAX_BASIS,
        }
    }
}

impl Truncation {
    pub fn with_max_photons(max_photons: u32) -> Self {
        Self {
            max_photons,
            ..Self::default()
        }
    }

    fn check_photons(&self, n: u32) -> Result<()> {
        if n > self.max_photons {
            return Err(Error::Capacity(format!(
                "{n} photons exceed truncation of {}",
                self.max_photons
            )));
        }
        Ok(())
    }
}

/// Number of ways to place `n` photons in `m` modes, `C(n + m - 1, n)`.
///
/// Returns `None` on overflow.
pub fn basis_size(n_photons: u32, n_modes: usize) -> Option<usize> {
    if n_modes == 0 {
        return Some(0);
    }
    let n = n_photons as u128;
    let k = (n_modes - 1) as u128;
    // C(n + k, k) built incrementally so every intermediate is an integer
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul(n + i)? / i;
    }
    usize::try_from(acc).ok()
}

/// All occupation patterns with `n_photons` photons over `modes`.
///
/// Patterns come out in descending lexicographic order of the occupation
/// vector, so for two modes the order is `|20⟩, |11⟩, |02⟩`.
pub fn enumerate_basis(
    n_photons: u32,
    modes: &[ModeId],
    truncation: Truncation,
) -> Result<Vec<FockState>> {
    if modes.is_empty() {
        return Err(Error::InvalidParameter("mode set is empty".into()));
    }
    check_unique(modes)?;
    truncation.check_photons(n_photons)?;
    let size = basis_size(n_photons, modes.len())
        .filter(|&s| s <= truncation.max_basis)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "basis of {n_photons} photons in {} modes exceeds limit {}",
                modes.len(),
                truncation.max_basis
            ))
        })?;

    let mut out = Vec::with_capacity(size);
    let mut current = vec![0u32; modes.len()];
    fill(&mut current, 0, n_photons, &mut out);
    debug_assert_eq!(out.len(), size);
    Ok(out)
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<FockState>) {
    if pos == current.len() - 1 {
        current[pos] = remaining;
        out.push(FockState(current.to_vec()));
        return;
    }
    for n in (0..=remaining).rev() {
        current[pos] = n;
        fill(current, pos + 1, remaining - n, out);
    }
    current[pos] = 0;
}

fn check_unique(modes: &[ModeId]) -> Result<()> {
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return Err(Error::InvalidParameter(format!("duplicate mode `{m}`")));
        }
    }
    Ok(())
}

/// Sparse complex superposition of Fock basis states over an ordered mode set.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    modes: Vec<ModeId>,
    amplitudes: BTreeMap<FockState, Complex64>,
    truncation: Truncation,
}

impl StateVector {
    /// The vacuum over `modes`.
    pub fn vacuum(modes: Vec<ModeId>) -> Result<Self> {
        Self::basis(modes, &[])
    }

    /// A single basis state. Missing trailing occupations are zero.
    pub fn basis(modes: Vec<ModeId>, occupations: &[u32]) -> Result<Self> {
        Self::from_amplitudes(
            modes,
            [(occupations.to_vec(), Complex64::new(1.0, 0.0))],
            Truncation::default(),
        )
    }

    /// Build a state from `(occupations, amplitude)` pairs. Repeated patterns
    /// are summed; the result is not normalized.
    pub fn from_amplitudes<I>(modes: Vec<ModeId>, terms: I, truncation: Truncation) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        if modes.is_empty() {
            return Err(Error::InvalidParameter("mode set is empty".into()));
        }
        check_unique(&modes)?;
        let mut amplitudes = BTreeMap::new();
        for (mut occ, amp) in terms {
            if occ.len() > modes.len() {
                return Err(Error::ModeMismatch(format!(
                    "{} occupations for {} modes",
                    occ.len(),
                    modes.len()
                )));
            }
            occ.resize(modes.len(), 0);
            let state = FockState(occ);
            truncation.check_photons(state.total())?;
            *amplitudes.entry(state).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        amplitudes.retain(|_, a| a.norm() > ZERO_AMPLITUDE);
        Ok(Self {
            modes,
            amplitudes,
            truncation,
        })
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn mode_index(&self, mode: &ModeId) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m == mode)
            .ok_or_else(|| Error::UnknownMode(mode.to_string()))
    }

    /// Nonzero amplitudes in canonical (ascending) basis order.
    pub fn iter(&self) -> impl Iterator<Item = (&FockState, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, occupations: &[u32]) -> Complex64 {
        if occupations.len() != self.modes.len() {
            return Complex64::new(0.0, 0.0);
        }
        self.amplitudes
            .get(&FockState(occupations.to_vec()))
            .copied()
            .unwrap_or_default()
    }

    pub fn probability(&self, occupations: &[u32]) -> f64 {
        self.amplitude(occupations).norm_sqr()
    }

    /// Born-rule probability of the set of basis states selected by `pred`.
    pub fn probability_where<F: Fn(&FockState) -> bool>(&self, pred: F) -> f64 {
        self.amplitudes
            .iter()
            .filter(|(s, _)| pred(s))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm <= ZERO_AMPLITUDE {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero vector".into(),
            ));
        }
        for a in self.amplitudes.values_mut() {
            *a /= norm;
        }
        Ok(self)
    }

    /// Photon numbers present in the superposition, ascending.
    pub fn photon_numbers(&self) -> Vec<u32> {
        let mut n: Vec<u32> = self.amplitudes.keys().map(FockState::total).collect();
        n.sort_unstable();
        n.dedup();
        n
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch(format!(
                "[{}] vs [{}]",
                join(&self.modes),
                join(&other.modes)
            )));
        }
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (state, a) in &small.amplitudes {
            if let Some(b) = large.amplitudes.get(state) {
                acc += if conj_small {
                    a.conj() * b
                } else {
                    b.conj() * a
                };
            }
        }
        Ok(acc)
    }

    /// Multiply each basis term by `exp(i n φ)` where `n` is the occupation of `mode`.
    pub fn apply_phase(&self, mode: &ModeId, phi: f64) -> Result<StateVector> {
        if !phi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "phase {phi} is not finite"
            )));
        }
        let idx = self.mode_index(mode)?;
        let mut out = self.clone();
        for (state, a) in out.amplitudes.iter_mut() {
            *a *= Complex64::from_polar(1.0, phi * f64::from(state.0[idx]));
        }
        Ok(out)
    }

    /// Exchange the occupations of two modes.
    pub fn swap_modes(&self, a: &ModeId, b: &ModeId) -> Result<StateVector> {
        let (ia, ib) = self.mode_pair(a, b)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(s, amp)| {
                let mut occ = s.0.clone();
                occ.swap(ia, ib);
                (FockState(occ), *amp)
            })
            .collect();
        Ok(StateVector {
            modes: self.modes.clone(),
            amplitudes,
            truncation: self.truncation,
        })
    }

    fn mode_pair(&self, a: &ModeId, b: &ModeId) -> Result<(usize, usize)> {
        let ia = self.mode_index(a)?;
        let ib = self.mode_index(b)?;
        if ia == ib {
            return Err(Error::InvalidParameter(format!(
                "two-mode operation needs distinct modes, got `{a}` twice"
            )));
        }
        Ok((ia, ib))
    }

    /// Apply a lossless two-mode transformation to modes `a` and `b`.
    ///
    /// Each basis term `(a†)^p (b†)^q / √(p! q!)` is expanded binomially under
    /// the creation-operator substitution and re-collected with the
    /// `√(m! n!)` factors of the output occupations.
    pub fn apply_two_mode_mixer(
        &self,
        u: &TwoModeUnitary,
        a: &ModeId,
        b: &ModeId,
    ) -> Result<StateVector> {
        let (ia, ib) = self.mode_pair(a, b)?;
        let u11 = u.entry(0, 0);
        let u12 = u.entry(0, 1);
        let u21 = u.entry(1, 0);
        let u22 = u.entry(1, 1);

        let mut out: BTreeMap<FockState, Complex64> = BTreeMap::new();
        for (state, &amp) in &self.amplitudes {
            let p = state.0[ia];
            let q = state.0[ib];
            if p == 0 && q == 0 {
                *out.entry(state.clone()).or_default() += amp;
                continue;
            }
            let total = p + q;
            let norm_in = (factorial(p) * factorial(q)).sqrt();
            // coefficient of (a†)^m (b†)^(total - m)
            let mut poly = vec![Complex64::new(0.0, 0.0); total as usize + 1];
            let from_a = expand(u11, u21, p);
            let from_b = expand(u12, u22, q);
            for (j, ca) in from_a.iter().enumerate() {
                for (k, cb) in from_b.iter().enumerate() {
                    poly[j + k] += ca * cb;
                }
            }
            for (m, c) in poly.into_iter().enumerate() {
                if c.norm() == 0.0 {
                    continue;
                }
                let m = m as u32;
                let n = total - m;
                let weight = (factorial(m) * factorial(n)).sqrt() / norm_in;
                let mut occ = state.0.clone();
                occ[ia] = m;
                occ[ib] = n;
                *out.entry(FockState(occ)).or_default() += amp * c * weight;
            }
        }
        out.retain(|_, a| a.norm() > ZERO_AMPLITUDE);
        Ok(StateVector {
            modes: self.modes.clone(),
            amplitudes: out,
            truncation: self.truncation,
        })
    }
}

/// Coefficients of `(x a† + y b†)^n` indexed by the power of `a†`.
fn expand(x: Complex64, y: Complex64, n: u32) -> Vec<Complex64> {
    (0..=n)
        .map(|j| x.powu(j) * y.powu(n - j) * binomial(n, j))
        .collect()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn join(modes: &[ModeId]) -> String {
    modes
        .iter()
        .map(ModeId::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

/// `(|N0⟩ + |0N⟩)/√2` on the mode pair `(a, b)`.
pub fn noon_state(n: u32, a: ModeId, b: ModeId) -> Result<StateVector> {
    noon_state_with(n, a, b, Truncation::default())
}

pub fn noon_state_with(
    n: u32,
    a: ModeId,
    b: ModeId,
    truncation: Truncation,
) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::InvalidParameter("NOON state needs N >= 1".into()));
    }
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    StateVector::from_amplitudes(vec![a, b], [(vec![n, 0], h), (vec![0, n], h)], truncation)
}
