//! Subcommand implementations. Each writes its data files into the output
//! directory and returns a `key = value` summary document.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use noonsim_core::experiments::{
    bunching_scan, efficiency_budget, fit_visibility, hom_scan, metrology_limits, noon_fringe,
    sql_verdict, Acquisition, PhasePlate, Sampling, ScanAxis, ScanResult,
};
use noonsim_core::fit::{fit_dip, DipShape};
use noonsim_core::kv::{KvDocument, KvSection};
use noonsim_core::spectral::{
    acceptance_spectrum, coherence_length, emission_spectrum, filtered_spectrum, fwhm,
    phase_matched, uniform_grid, CrystalSpec, SellmeierTable, Spectrum, WaveTriplet,
};
use noonsim_core::Dispersion;

use crate::config::{FringeAxis, RunConfig};

/// Crystals, dispersion and the three spectra shared by several commands.
struct Spectra {
    source: CrystalSpec,
    converter: CrystalSpec,
    upconverted_nm: f64,
    emission: Spectrum,
    acceptance: Spectrum,
    filtered: Spectrum,
}

fn dispersion(cfg: &RunConfig) -> Result<Dispersion> {
    match &cfg.sellmeier {
        None => Ok(Dispersion::ktp()),
        Some(path) => {
            let table = SellmeierTable::load(path).context("loading Sellmeier coefficients")?;
            Dispersion::ktp_from(&table)
                .with_context(|| format!("coefficient file {}", path.display()))
        }
    }
}

fn crystal(
    template: CrystalSpec,
    period: Option<f64>,
    d: &Dispersion,
    waves: &WaveTriplet,
) -> Result<CrystalSpec> {
    Ok(match period {
        Some(p) => template.with_period(p),
        None => phase_matched(&template, d, waves)?,
    })
}

fn spectra(cfg: &RunConfig) -> Result<Spectra> {
    let d = dispersion(cfg)?;
    let src = &cfg.source;
    let conv = &cfg.converter;
    let spdc = WaveTriplet::spdc(src.pump_nm, src.signal_nm)?;
    let sfg = WaveTriplet::sfg(conv.pump_nm, src.signal_nm)?;
    let source = crystal(
        CrystalSpec::type_ii_spdc(src.length_mm),
        src.poling_period_um,
        &d,
        &spdc,
    )
    .context("phase matching the source crystal")?;
    let converter = crystal(
        CrystalSpec::type_i_sfg(conv.length_mm),
        conv.poling_period_um,
        &d,
        &sfg,
    )
    .context("phase matching the converter crystal")?;
    let grid = uniform_grid(
        cfg.grid.center_nm.unwrap_or(src.signal_nm),
        cfg.grid.half_span_nm,
        cfg.grid.points,
    )?;
    let emission =
        emission_spectrum(&source, &d, src.pump_nm, &grid).context("emission spectrum")?;
    let acceptance = if conv.filter {
        acceptance_spectrum(&converter, &d, conv.pump_nm, &grid).context("acceptance spectrum")?
    } else {
        Spectrum::from_fn(&grid, |_| Ok(1.0))?
    };
    let filtered = filtered_spectrum(&emission, &acceptance)?;
    Ok(Spectra {
        source,
        converter,
        upconverted_nm: sfg.sum_nm,
        emission,
        acceptance,
        filtered,
    })
}

fn output_path(cfg: &RunConfig, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.output)
        .with_context(|| format!("creating output directory {}", cfg.output.display()))?;
    Ok(cfg.output.join(name))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn write_spectrum(cfg: &RunConfig, name: &str, s: &Spectrum) -> Result<()> {
    let mut buf = Vec::new();
    s.write_csv(&mut buf)?;
    write_bytes(&output_path(cfg, name)?, &buf)
}

fn write_scan(cfg: &RunConfig, name: &str, s: &ScanResult) -> Result<()> {
    let mut buf = Vec::new();
    s.write_csv(&mut buf)?;
    write_bytes(&output_path(cfg, name)?, &buf)
}

/// Writes `<name>_summary.txt` and returns its text.
fn write_summary(cfg: &RunConfig, name: &str, doc: &KvDocument) -> Result<String> {
    let text = doc.to_string();
    write_bytes(
        &output_path(cfg, &format!("{name}_summary.txt"))?,
        text.as_bytes(),
    )?;
    Ok(text)
}

fn fwhm_or_undefined(s: &Spectrum) -> String {
    fwhm(s).map_or_else(|_| "undefined".to_string(), |w| w.to_string())
}

/// FNV-1a of the scan label, mixed into the run seed so that scans in one
/// run draw independent counts.
fn scan_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    seed ^ h
}

fn acquisition(cfg: &RunConfig, label: &str) -> Acquisition {
    Acquisition {
        pair_rate_hz: cfg.pair_rate_hz,
        integration_time_s: cfg.integration_time_s,
        sampling: if cfg.noiseless {
            Sampling::Noiseless
        } else {
            Sampling::Poisson {
                seed: scan_seed(cfg.seed, label),
            }
        },
    }
}

fn general_section(cfg: &RunConfig) -> KvSection {
    let mut s = KvSection::new("run");
    s.push(
        "mode",
        if cfg.noiseless {
            "noiseless"
        } else {
            "poisson"
        },
    );
    s.push("seed", cfg.seed);
    s.push("pair_rate_hz", cfg.pair_rate_hz);
    s.push("integration_time_s", cfg.integration_time_s);
    s
}

pub fn spectra_cmd(cfg: &RunConfig) -> Result<String> {
    let sp = spectra(cfg)?;
    write_spectrum(cfg, "emission.csv", &sp.emission)?;
    write_spectrum(cfg, "acceptance.csv", &sp.acceptance)?;
    write_spectrum(cfg, "filtered.csv", &sp.filtered)?;

    let mut s = KvSection::new("spectra");
    s.push("source_poling_period_um", sp.source.poling_period_um);
    s.push("converter_poling_period_um", sp.converter.poling_period_um);
    s.push("upconverted_nm", sp.upconverted_nm);
    s.push(
        "converter_filter",
        if cfg.converter.filter { "on" } else { "off" },
    );
    s.push("emission_fwhm_nm", fwhm_or_undefined(&sp.emission));
    s.push("acceptance_fwhm_nm", fwhm_or_undefined(&sp.acceptance));
    s.push("filtered_fwhm_nm", fwhm_or_undefined(&sp.filtered));
    if let Ok(w) = fwhm(&sp.emission) {
        s.push(
            "emission_coherence_length_mm",
            coherence_length(cfg.source.signal_nm, w)?,
        );
    }
    s.push("emission_truncated", sp.emission.truncated);
    let mut doc = KvDocument::default();
    doc.push(s);
    write_summary(cfg, "spectra", &doc)
}

fn dip_section(name: &str, gamma: f64, scan: &ScanResult) -> Result<KvSection> {
    let obs = scan.observed();
    let gauss = fit_dip(&scan.params, &obs, DipShape::Gaussian)
        .with_context(|| format!("Gaussian fit to {name}"))?;
    let tri = fit_dip(&scan.params, &obs, DipShape::Triangle)
        .with_context(|| format!("triangle fit to {name}"))?;
    let mut s = KvSection::new(name);
    s.push("gamma", gamma);
    s.push("visibility", scan.dip_visibility()?);
    s.push("gaussian_visibility", gauss.visibility);
    s.push("gaussian_residual", gauss.residual_norm);
    s.push("triangle_visibility", tri.visibility);
    s.push("triangle_residual", tri.residual_norm);
    let shape = if gauss.residual_norm < tri.residual_norm {
        "gaussian"
    } else {
        "triangle"
    };
    s.push("better_shape", shape);
    Ok(s)
}

pub fn hom_cmd(cfg: &RunConfig) -> Result<String> {
    let sp = spectra(cfg)?;
    let delays = cfg.hom.delays();
    let source = hom_scan(
        &sp.emission,
        cfg.hom.gamma_source,
        &delays,
        &acquisition(cfg, "hom_source"),
    )?;
    let up = hom_scan(
        &sp.filtered,
        cfg.hom.gamma_upconverted,
        &delays,
        &acquisition(cfg, "hom_upconverted"),
    )?;
    write_scan(cfg, "hom_source.csv", &source)?;
    write_scan(cfg, "hom_upconverted.csv", &up)?;
    let mut doc = KvDocument::default();
    doc.push(general_section(cfg));
    doc.push(dip_section("hom.source", cfg.hom.gamma_source, &source)?);
    doc.push(dip_section(
        "hom.upconverted",
        cfg.hom.gamma_upconverted,
        &up,
    )?);
    write_summary(cfg, "hom", &doc)
}

pub fn bunching_cmd(cfg: &RunConfig) -> Result<String> {
    let sp = spectra(cfg)?;
    let delays = cfg.bunching.delays();
    let b = &cfg.bunching;
    let mut doc = KvDocument::default();
    doc.push(general_section(cfg));
    for (label, spectrum, gamma) in [
        ("source", &sp.emission, b.gamma_source),
        ("upconverted", &sp.filtered, b.gamma_upconverted),
    ] {
        let name = format!("bunching_{label}");
        let scan = bunching_scan(spectrum, gamma, &delays, &acquisition(cfg, &name))?;
        write_scan(cfg, &format!("{name}.csv"), &scan)?;
        let mut s = KvSection::new(format!("bunching.{label}"));
        s.push("gamma", gamma);
        s.push("center_to_baseline", scan.center_to_baseline()?);
        s.push("expected_ratio", 1.0 + gamma);
        doc.push(s);
    }
    write_summary(cfg, "bunching", &doc)
}

pub fn fringe_cmd(cfg: &RunConfig) -> Result<String> {
    let f = &cfg.fringe;
    let upconverted_nm = WaveTriplet::sfg(cfg.converter.pump_nm, cfg.source.signal_nm)?.sum_nm;
    let wavelength_nm = f.wavelength_nm.unwrap_or(upconverted_nm);
    let axis = match f.axis {
        FringeAxis::Phase => ScanAxis::Phase,
        FringeAxis::Plate => ScanAxis::PlateAngle(PhasePlate {
            thickness_m: f.plate_thickness_mm * 1e-3,
            index: f.plate_index,
            wavelength_m: wavelength_nm * 1e-9,
        }),
    };
    let params = f.params();
    let mut doc = KvDocument::default();
    doc.push(general_section(cfg));
    let mut fits = Vec::new();
    for (n, v) in [(1u32, f.visibility_one), (2, f.visibility_two)] {
        let name = format!("fringe_n{n}");
        let scan = noon_fringe(n, v, axis, &params, &acquisition(cfg, &name))
            .with_context(|| format!("{name} scan"))?;
        write_scan(cfg, &format!("{name}.csv"), &scan)?;
        let fit = fit_visibility(&scan, n).with_context(|| format!("fitting {name}"))?;
        let mut s = fit.to_kv(&format!("fringe.n{n}"));
        s.push("model_visibility", v);
        doc.push(s);
        fits.push(fit);
    }
    let (one, two) = (&fits[0], &fits[1]);
    let ratio = two.frequency / one.frequency;
    let ratio_sigma = ratio
        * ((two.frequency_sigma / two.frequency).powi(2)
            + (one.frequency_sigma / one.frequency).powi(2))
        .sqrt();

    let verdict = sql_verdict(two.visibility, two.visibility_sigma, 2)?;
    let mut s = KvSection::new("verdict");
    s.push("period_ratio", ratio);
    s.push("period_ratio_sigma", ratio_sigma);
    s.push("n", verdict.n);
    s.push("visibility", verdict.visibility);
    s.push("threshold", verdict.threshold);
    s.push("beats_sql", verdict.beats);
    s.push(
        "margin_sigma",
        verdict
            .margin_sigma
            .map_or_else(|| "none".to_string(), |m| m.to_string()),
    );
    s.push("verdict", verdict);
    doc.push(s);

    let limits = metrology_limits(2, wavelength_nm)?;
    let mut s = KvSection::new("limits");
    s.push("wavelength_nm", wavelength_nm);
    s.push("heisenberg", limits.heisenberg);
    s.push("standard_quantum", limits.standard_quantum);
    s.push("de_broglie_nm", limits.de_broglie_nm);
    doc.push(s);
    write_summary(cfg, "fringe", &doc)
}

pub fn budget_cmd(cfg: &RunConfig) -> Result<String> {
    let b = efficiency_budget(&cfg.budget);
    let mut stages = KvSection::new("stages");
    for st in &b.stages {
        stages.push(st.name.clone(), st.efficiency);
    }
    let mut products = KvSection::new("products");
    products.push("single_arm", b.single_arm);
    products.push("pair", b.pair);
    products.push("quoted", b.quoted);
    products.push("single_arm_matches_quoted", b.single_arm_matches_quoted());
    products.push("pair_matches_quoted", b.pair_matches_quoted());
    products.push("flag", b.discrepancy().unwrap_or_else(|| "none".into()));
    let mut doc = KvDocument::default();
    doc.push(stages);
    doc.push(products);
    write_summary(cfg, "budget", &doc)
}
