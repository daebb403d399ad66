//! Run configuration: a `[section]` / `key = value` file with defaults for
//! every key. Unknown sections or keys are rejected so typos do not pass
//! silently.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use noonsim_core::defaults::*;
use noonsim_core::experiments::EfficiencyChain;
use noonsim_core::kv::{KvDocument, KvSection};

#[derive(Debug, Clone)]
pub struct SourceConfig {
    pub pump_nm: f64,
    pub signal_nm: f64,
    pub length_mm: f64,
    /// Solved from phase matching when absent.
    pub poling_period_um: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConverterConfig {
    pub pump_nm: f64,
    pub length_mm: f64,
    pub poling_period_um: Option<f64>,
    /// When off the acceptance is taken as 1 everywhere.
    pub filter: bool,
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub center_nm: Option<f64>,
    pub half_span_nm: f64,
    pub points: usize,
}

#[derive(Debug, Clone)]
pub struct DelayScanConfig {
    pub gamma_source: f64,
    pub gamma_upconverted: f64,
    pub min_mm: f64,
    pub max_mm: f64,
    pub points: usize,
}

impl DelayScanConfig {
    pub fn delays(&self) -> Vec<f64> {
        linspace(self.min_mm, self.max_mm, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FringeAxis {
    Phase,
    Plate,
}

#[derive(Debug, Clone)]
pub struct FringeConfig {
    pub visibility_one: f64,
    pub visibility_two: f64,
    pub axis: FringeAxis,
    /// Scan range in rad of phase or of plate tilt.
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub plate_thickness_mm: f64,
    pub plate_index: f64,
    /// Defaults to the up-converted wavelength.
    pub wavelength_nm: Option<f64>,
}

impl FringeConfig {
    pub fn params(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.points)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub output: PathBuf,
    pub seed: u64,
    pub noiseless: bool,
    pub sellmeier: Option<PathBuf>,
    pub pair_rate_hz: f64,
    pub integration_time_s: f64,
    pub source: SourceConfig,
    pub converter: ConverterConfig,
    pub grid: GridConfig,
    pub hom: DelayScanConfig,
    pub bunching: DelayScanConfig,
    pub fringe: FringeConfig,
    pub budget: EfficiencyChain,
}

impl Default for RunConfig {
    fn default() -> Self {
        let delay = DelayScanConfig {
            gamma_source: SOURCE_HOM_VISIBILITY,
            gamma_upconverted: UPCONVERTED_HOM_VISIBILITY,
            min_mm: -10.0,
            max_mm: 10.0,
            points: 201,
        };
        Self {
            output: PathBuf::from("out"),
            seed: 1,
            noiseless: false,
            sellmeier: None,
            pair_rate_hz: PAIR_RATE_HZ,
            integration_time_s: INTEGRATION_TIME_S,
            source: SourceConfig {
                pump_nm: SOURCE_PUMP_NM,
                signal_nm: DEGENERATE_NM,
                length_mm: CRYSTAL_LENGTH_MM,
                poling_period_um: None,
            },
            converter: ConverterConfig {
                pump_nm: CONVERTER_PUMP_NM,
                length_mm: CRYSTAL_LENGTH_MM,
                poling_period_um: None,
                filter: true,
            },
            grid: GridConfig {
                center_nm: None,
                half_span_nm: 8.0,
                points: 4096,
            },
            hom: delay.clone(),
            bunching: delay,
            fringe: FringeConfig {
                visibility_one: ONE_PHOTON_FRINGE_VISIBILITY,
                visibility_two: TWO_PHOTON_FRINGE_VISIBILITY,
                axis: FringeAxis::Phase,
                min: 0.0,
                max: 4.0 * PI,
                points: 81,
                plate_thickness_mm: PLATE_THICKNESS_MM,
                plate_index: PLATE_INDEX,
                wavelength_nm: None,
            },
            budget: EfficiencyChain::reference(),
        }
    }
}

pub fn linspace(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    let step = (max - min) / (points - 1) as f64;
    (0..points).map(|i| min + step * i as f64).collect()
}

/// Typed access to one section; construction rejects keys outside `allowed`.
struct Reader<'a> {
    section: &'a KvSection,
    allowed: &'static [&'static str],
}

impl<'a> Reader<'a> {
    fn new(section: &'a KvSection, allowed: &'static [&'static str]) -> Result<Self> {
        for (key, _) in &section.entries {
            if !allowed.contains(&key.as_str()) {
                bail!(
                    "unknown key `{key}` in section [{}] (allowed: {})",
                    section.name,
                    allowed.join(", ")
                );
            }
        }
        Ok(Self { section, allowed })
    }

    fn set<T: std::str::FromStr>(&self, key: &str, target: &mut T) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        debug_assert!(self.allowed.contains(&key));
        if let Some(raw) = self.section.get(key) {
            *target = raw
                .parse()
                .map_err(|e| anyhow::anyhow!("[{}] {key} = {raw:?}: {e}", self.section.name))?;
        }
        Ok(())
    }

    fn set_opt<T: std::str::FromStr>(&self, key: &str, target: &mut Option<T>) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(raw) = self.section.get(key) {
            *target =
                Some(raw.parse().map_err(|e| {
                    anyhow::anyhow!("[{}] {key} = {raw:?}: {e}", self.section.name)
                })?);
        }
        Ok(())
    }

    fn switch(&self, key: &str, target: &mut bool) -> Result<()> {
        if let Some(raw) = self.section.get(key) {
            *target = match raw.to_ascii_lowercase().as_str() {
                "on" | "true" | "yes" => true,
                "off" | "false" | "no" => false,
                _ => bail!("[{}] {key} = {raw:?}: expected on/off", self.section.name),
            };
        }
        Ok(())
    }
}

const SECTIONS: [&str; 8] = [
    "general",
    "source",
    "converter",
    "grid",
    "hom",
    "bunching",
    "fringe",
    "budget",
];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let doc: KvDocument = text
            .parse()
            .with_context(|| format!("parsing config {}", path.display()))?;
        let mut cfg =
            Self::from_document(&doc).with_context(|| format!("in config {}", path.display()))?;
        // relative paths in the config are relative to the config file
        if let (Some(p), Some(dir)) = (&cfg.sellmeier, path.parent()) {
            if p.is_relative() {
                cfg.sellmeier = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn from_document(doc: &KvDocument) -> Result<Self> {
        let mut cfg = Self::default();
        for s in &doc.sections {
            if !SECTIONS.contains(&s.name.as_str()) {
                if s.name.is_empty() {
                    bail!("keys must appear inside a [section]");
                }
                bail!(
                    "unknown section [{}] (allowed: {})",
                    s.name,
                    SECTIONS.join(", ")
                );
            }
        }
        if let Some(s) = doc.section("general") {
            let r = Reader::new(
                s,
                &[
                    "output",
                    "seed",
                    "noiseless",
                    "sellmeier",
                    "pair_rate_hz",
                    "integration_time_s",
                ],
            )?;
            r.set("output", &mut cfg.output)?;
            r.set("seed", &mut cfg.seed)?;
            r.switch("noiseless", &mut cfg.noiseless)?;
            r.set_opt("sellmeier", &mut cfg.sellmeier)?;
            r.set("pair_rate_hz", &mut cfg.pair_rate_hz)?;
            r.set("integration_time_s", &mut cfg.integration_time_s)?;
        }
        if let Some(s) = doc.section("source") {
            let r = Reader::new(
                s,
                &["pump_nm", "signal_nm", "length_mm", "poling_period_um"],
            )?;
            r.set("pump_nm", &mut cfg.source.pump_nm)?;
            r.set("signal_nm", &mut cfg.source.signal_nm)?;
            r.set("length_mm", &mut cfg.source.length_mm)?;
            r.set_opt("poling_period_um", &mut cfg.source.poling_period_um)?;
        }
        if let Some(s) = doc.section("converter") {
            let r = Reader::new(s, &["pump_nm", "length_mm", "poling_period_um", "filter"])?;
            r.set("pump_nm", &mut cfg.converter.pump_nm)?;
            r.set("length_mm", &mut cfg.converter.length_mm)?;
            r.set_opt("poling_period_um", &mut cfg.converter.poling_period_um)?;
            r.switch("filter", &mut cfg.converter.filter)?;
        }
        if let Some(s) = doc.section("grid") {
            let r = Reader::new(s, &["center_nm", "half_span_nm", "points"])?;
            r.set_opt("center_nm", &mut cfg.grid.center_nm)?;
            r.set("half_span_nm", &mut cfg.grid.half_span_nm)?;
            r.set("points", &mut cfg.grid.points)?;
        }
        for (name, target) in [("hom", &mut cfg.hom), ("bunching", &mut cfg.bunching)] {
            if let Some(s) = doc.section(name) {
                let r = Reader::new(
                    s,
                    &[
                        "gamma_source",
                        "gamma_upconverted",
                        "min_mm",
                        "max_mm",
                        "points",
                    ],
                )?;
                r.set("gamma_source", &mut target.gamma_source)?;
                r.set("gamma_upconverted", &mut target.gamma_upconverted)?;
                r.set("min_mm", &mut target.min_mm)?;
                r.set("max_mm", &mut target.max_mm)?;
                r.set("points", &mut target.points)?;
            }
        }
        if let Some(s) = doc.section("fringe") {
            let r = Reader::new(
                s,
                &[
                    "visibility_one",
                    "visibility_two",
                    "axis",
                    "min",
                    "max",
                    "points",
                    "plate_thickness_mm",
                    "plate_index",
                    "wavelength_nm",
                ],
            )?;
            let f = &mut cfg.fringe;
            r.set("visibility_one", &mut f.visibility_one)?;
            r.set("visibility_two", &mut f.visibility_two)?;
            if let Some(axis) = s.get("axis") {
                f.axis = match axis {
                    "phase" => FringeAxis::Phase,
                    "plate" => FringeAxis::Plate,
                    other => bail!("[fringe] axis = {other:?}: expected phase or plate"),
                };
            }
            r.set("min", &mut f.min)?;
            r.set("max", &mut f.max)?;
            r.set("points", &mut f.points)?;
            r.set("plate_thickness_mm", &mut f.plate_thickness_mm)?;
            r.set("plate_index", &mut f.plate_index)?;
            r.set_opt("wavelength_nm", &mut f.wavelength_nm)?;
        }
        if let Some(s) = doc.section("budget") {
            cfg.budget = budget_chain(s)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if !(v > 0.0) || !v.is_finite() {
                bail!("{name} must be a positive number, got {v}");
            }
            Ok(())
        }
        positive("[general] pair_rate_hz", self.pair_rate_hz)?;
        positive("[general] integration_time_s", self.integration_time_s)?;
        positive("[source] length_mm", self.source.length_mm)?;
        positive("[converter] length_mm", self.converter.length_mm)?;
        positive("[grid] half_span_nm", self.grid.half_span_nm)?;
        if self.grid.points < 16 {
            bail!("[grid] points must be >= 16, got {}", self.grid.points);
        }
        for (name, s) in [("hom", &self.hom), ("bunching", &self.bunching)] {
            for (key, g) in [
                ("gamma_source", s.gamma_source),
                ("gamma_upconverted", s.gamma_upconverted),
            ] {
                if !(0.0..=1.0).contains(&g) {
                    bail!("[{name}] {key} must lie in [0, 1], got {g}");
                }
            }
            if !(s.max_mm > s.min_mm) || s.points < 3 {
                bail!("[{name}] needs min_mm < max_mm and at least 3 points");
            }
        }
        let f = &self.fringe;
        for (key, v) in [
            ("visibility_one", f.visibility_one),
            ("visibility_two", f.visibility_two),
        ] {
            if !(0.0..=1.0).contains(&v) {
                bail!("[fringe] {key} must lie in [0, 1], got {v}");
            }
        }
        if !(f.max > f.min) || f.points < 8 {
            bail!("[fringe] needs min < max and at least 8 points");
        }
        Ok(())
    }
}

fn budget_chain(s: &KvSection) -> Result<EfficiencyChain> {
    let mode = s.get("mode").unwrap_or("reference");
    let stages: Vec<(&str, &str)> = s
        .entries
        .iter()
        .filter(|(k, _)| k != "mode")
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .collect();
    match mode {
        "reference" | "decomposed" if !stages.is_empty() => {
            bail!("[budget] stage entries need mode = custom")
        }
        "reference" => Ok(EfficiencyChain::reference()),
        "decomposed" => Ok(EfficiencyChain::reference_decomposed()),
        "custom" => {
            let parsed = stages
                .into_iter()
                .map(|(k, v)| {
                    v.parse::<f64>()
                        .map(|eta| (k.to_string(), eta))
                        .map_err(|e| anyhow::anyhow!("[budget] {k} = {v:?}: {e}"))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(EfficiencyChain::new(parsed)?)
        }
        other => bail!("[budget] mode = {other:?}: expected reference, decomposed or custom"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::from_document(&text.parse()?)
    }

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg.seed, 1);
        assert!(cfg.converter.filter);
        assert_eq!(cfg.budget, EfficiencyChain::reference());
    }

    #[test]
    fn overrides_apply() {
        let cfg = parse(
            "[general]\nseed = 9\nnoiseless = on\n[converter]\nfilter = off\n[fringe]\naxis = plate\nmax = 0.1\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert!(cfg.noiseless);
        assert!(!cfg.converter.filter);
        assert_eq!(cfg.fringe.axis, FringeAxis::Plate);
        assert_eq!(cfg.fringe.max, 0.1);
    }

    #[test]
    fn typos_rejected() {
        assert!(parse("[general]\nsed = 3\n").is_err());
        assert!(parse("[genral]\nseed = 3\n").is_err());
        assert!(parse("seed = 3\n").is_err());
        assert!(parse("[hom]\ngamma_source = 1.2\n").is_err());
        assert!(parse("[general]\nseed = -1\n").is_err());
    }

    #[test]
    fn custom_budget() {
        let cfg = parse("[budget]\nmode = custom\nlens = 0.5\ndetector = 0.5\n").unwrap();
        assert_eq!(cfg.budget.stages().len(), 2);
        assert!(parse("[budget]\nmode = custom\n").is_err());
        assert!(parse("[budget]\nlens = 0.5\n").is_err());
        assert!(parse("[budget]\nmode = custom\nlens = 1.5\n").is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-1.0, 1.0, 5);
        assert_eq!(v, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
