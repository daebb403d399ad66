//! Sellmeier dispersion data and its coefficient file format.
//!
//! Each section of a coefficient file is one named set:
//!
//! ```text
//! version = 1
//!
//! [KTP.nz]
//! a = 2.12725
//! b1 = 1.18431
//! c1 = 0.0514852
//! b2 = 0.6603
//! c2 = 100.00507
//! d = 0.00968956
//! lambda_min_um = 0.4
//! lambda_max_um = 5
//! source = <literature reference>
//! ```
//!
//! describing `n²(λ) = a + Σ_i b_i / (1 - c_i / λ²) - d λ²`, λ in µm.
//! Numbers are written with Rust's shortest round-trip formatting, so
//! parse → serialize → parse is bit-exact.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kv::{KvDocument, KvSection};

/// Coefficient file shipped with the crate.
pub const BUNDLED_KTP: &str = include_str!("../../data/ktp_sellmeier.txt");

pub const FORMAT_VERSION: u32 = 1;

/// Polarization axis of a biaxial crystal used by a wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Y,
    Z,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "y" | "ny" => Ok(Axis::Y),
            "z" | "nz" => Ok(Axis::Z),
            other => Err(Error::InvalidParameter(format!("unknown axis `{other}`"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// One named dispersion formula with its validity window.
#[derive(Debug, Clone, PartialEq)]
pub struct SellmeierCoefficients {
    pub name: String,
    pub a: f64,
    /// `(b_i, c_i)` pole terms, `c_i` in µm².
    pub poles: Vec<(f64, f64)>,
    /// Infrared correction, µm⁻².
    pub d: f64,
    pub lambda_min_um: f64,
    pub lambda_max_um: f64,
    pub source: String,
}

impl SellmeierCoefficients {
    /// Refractive index at `wavelength_nm`.
    pub fn refractive_index(&self, wavelength_nm: f64) -> Result<f64> {
        let l = wavelength_nm * 1e-3;
        if !(l >= self.lambda_min_um && l <= self.lambda_max_um) {
            return Err(Error::OutOfRange {
                name: self.name.clone(),
                wavelength_nm,
                min_nm: self.lambda_min_um * 1e3,
                max_nm: self.lambda_max_um * 1e3,
            });
        }
        let l2 = l * l;
        let n2 = self.a
            + self
                .poles
                .iter()
                .map(|&(b, c)| b / (1.0 - c / l2))
                .sum::<f64>()
            - self.d * l2;
        if !(n2 > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "`{}` gives n² = {n2} at {wavelength_nm} nm",
                self.name
            )));
        }
        Ok(n2.sqrt())
    }

    fn from_section(section: &KvSection) -> Result<Self> {
        let mut poles = Vec::new();
        for i in 1.. {
            let b: Option<f64> = section.parse(&format!("b{i}"))?;
            let c: Option<f64> = section.parse(&format!("c{i}"))?;
            match (b, c) {
                (Some(b), Some(c)) => poles.push((b, c)),
                (None, None) => break,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "[{}] b{i} and c{i} must appear together",
                        section.name
                    )))
                }
            }
        }
        let known = |k: &str| {
            matches!(k, "a" | "d" | "lambda_min_um" | "lambda_max_um" | "source")
                || k.strip_prefix('b')
                    .or_else(|| k.strip_prefix('c'))
                    .and_then(|i| i.parse::<usize>().ok())
                    .is_some_and(|i| (1..=poles.len()).contains(&i))
        };
        if let Some((k, _)) = section.entries.iter().find(|(k, _)| !known(k)) {
            return Err(Error::InvalidParameter(format!(
                "[{}] unknown key `{k}`",
                section.name
            )));
        }
        let coeffs = Self {
            name: section.name.clone(),
            a: section.require("a")?,
            poles,
            d: section.parse("d")?.unwrap_or(0.0),
            lambda_min_um: section.require("lambda_min_um")?,
            lambda_max_um: section.require("lambda_max_um")?,
            source: section.get("source").unwrap_or_default().to_string(),
        };
        if !(coeffs.lambda_min_um > 0.0 && coeffs.lambda_min_um < coeffs.lambda_max_um) {
            return Err(Error::InvalidParameter(format!(
                "[{}] invalid validity window",
                coeffs.name
            )));
        }
        Ok(coeffs)
    }

    fn to_section(&self) -> KvSection {
        let mut s = KvSection::new(self.name.clone());
        s.push("a", self.a);
        for (i, (b, c)) in self.poles.iter().enumerate() {
            s.push(format!("b{}", i + 1), b);
            s.push(format!("c{}", i + 1), c);
        }
        s.push("d", self.d);
        s.push("lambda_min_um", self.lambda_min_um);
        s.push("lambda_max_um", self.lambda_max_um);
        if !self.source.is_empty() {
            s.push("source", &self.source);
        }
        s
    }
}

/// A parsed coefficient file.
#[derive(Debug, Clone, PartialEq)]
pub struct SellmeierTable {
    pub sets: Vec<SellmeierCoefficients>,
}

impl SellmeierTable {
    pub fn bundled() -> Self {
        BUNDLED_KTP
            .parse()
            .expect("bundled coefficient file is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        text.parse()
    }

    pub fn get(&self, name: &str) -> Result<&SellmeierCoefficients> {
        self.sets
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::InvalidParameter(format!("no coefficient set named `{name}`")))
    }
}

impl FromStr for SellmeierTable {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let doc: KvDocument = text.parse()?;
        let mut sets = Vec::new();
        for section in &doc.sections {
            if section.name.is_empty() {
                let version: u32 = section.require("version")?;
                if version != FORMAT_VERSION {
                    return Err(Error::InvalidParameter(format!(
                        "unsupported coefficient file version {version}"
                    )));
                }
                continue;
            }
            sets.push(SellmeierCoefficients::from_section(section)?);
        }
        if sets.is_empty() {
            return Err(Error::InvalidParameter(
                "coefficient file has no sets".into(),
            ));
        }
        Ok(Self { sets })
    }
}

impl fmt::Display for SellmeierTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut doc = KvDocument::default();
        let mut head = KvSection::new("");
        head.push("version", FORMAT_VERSION);
        doc.push(head);
        for set in &self.sets {
            doc.push(set.to_section());
        }
        write!(f, "{doc}")
    }
}

/// Index data for the two crystal axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dispersion {
    pub y: SellmeierCoefficients,
    pub z: SellmeierCoefficients,
}

impl Dispersion {
    pub fn from_table(table: &SellmeierTable, y_name: &str, z_name: &str) -> Result<Self> {
        Ok(Self {
            y: table.get(y_name)?.clone(),
            z: table.get(z_name)?.clone(),
        })
    }

    /// KTP with the bundled coefficient file.
    pub fn ktp() -> Self {
        Self::ktp_from(&SellmeierTable::bundled()).expect("bundled file defines KTP.ny and KTP.nz")
    }

    pub fn ktp_from(table: &SellmeierTable) -> Result<Self> {
        Self::from_table(table, "KTP.ny", "KTP.nz")
    }

    pub fn axis(&self, axis: Axis) -> &SellmeierCoefficients {
        match axis {
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }

    pub fn refractive_index(&self, axis: Axis, wavelength_nm: f64) -> Result<f64> {
        self.axis(axis).refractive_index(wavelength_nm)
    }
}
