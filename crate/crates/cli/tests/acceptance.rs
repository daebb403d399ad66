//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fs;
use std::process::{Command, ExitCode};

use noonsim_core::defaults::*;
use noonsim_core::elements::{
    calibrate_conversion, internal_conversion_efficiency, unitarity_deviation, ElementKind,
};
use noonsim_core::experiments::{
    bunching_scan, efficiency_budget, fit_visibility, fock_bunching_coincidence,
    fock_fringe_probabilities, fringe_closed_form, hom_scan, noon_fringe, point_rng, poisson_draws,
    sql_verdict, Acquisition, EfficiencyChain, Sampling, ScanAxis,
};
use noonsim_core::fit::{fit_dip, DipShape};
use noonsim_core::fock::Truncation;
use noonsim_core::spectral::{
    acceptance_spectrum, coherence_length, default_grid, emission_spectrum, filtered_spectrum,
    fwhm, hom_profile, phase_matched, sinc_sq, uniform_grid, CrystalSpec, WaveTriplet,
    SPEED_OF_LIGHT,
};
use noonsim_core::{
    apply_circuit, beamsplitter, frequency_converter, Circuit, CircuitElement, Complex64,
    Dispersion, ModeId, Spectrum, StateVector,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn verdict(pass: bool, detail: String) -> Outcome {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

struct Spectra {
    emission: Spectrum,
    acceptance: Spectrum,
    filtered: Spectrum,
}

fn spectra() -> Result<Spectra, String> {
    let d = Dispersion::ktp();
    let spdc = WaveTriplet::spdc(SOURCE_PUMP_NM, DEGENERATE_NM).map_err(fail)?;
    let sfg = WaveTriplet::sfg(CONVERTER_PUMP_NM, DEGENERATE_NM).map_err(fail)?;
    let source =
        phase_matched(&CrystalSpec::type_ii_spdc(CRYSTAL_LENGTH_MM), &d, &spdc).map_err(fail)?;
    let converter =
        phase_matched(&CrystalSpec::type_i_sfg(CRYSTAL_LENGTH_MM), &d, &sfg).map_err(fail)?;
    let grid = default_grid(DEGENERATE_NM);
    let emission = emission_spectrum(&source, &d, SOURCE_PUMP_NM, &grid).map_err(fail)?;
    let acceptance = acceptance_spectrum(&converter, &d, CONVERTER_PUMP_NM, &grid).map_err(fail)?;
    let filtered = filtered_spectrum(&emission, &acceptance).map_err(fail)?;
    Ok(Spectra {
        emission,
        acceptance,
        filtered,
    })
}

fn noiseless() -> Acquisition {
    Acquisition {
        pair_rate_hz: PAIR_RATE_HZ,
        integration_time_s: INTEGRATION_TIME_S,
        sampling: Sampling::Noiseless,
    }
}

fn hom_null() -> Outcome {
    let (a, b) = (ModeId::from("a"), ModeId::from("b"));
    let out = StateVector::basis(vec![a.clone(), b.clone()], &[1, 1])
        .and_then(|s| s.apply_two_mode_mixer(&beamsplitter(FRAC_PI_4), &a, &b))
        .map_err(fail)?;
    let p = out.probability(&[1, 1]);
    verdict(p.abs() < 1e-12, format!("P(1,1) = {p:.3e}"))
}

fn full_conversion() -> Outcome {
    let (s, u) = (ModeId::from("signal"), ModeId::from("sum"));
    let out = StateVector::basis(vec![s.clone(), u.clone()], &[1, 0])
        .and_then(|st| st.apply_two_mode_mixer(&frequency_converter(FRAC_PI_2), &s, &u))
        .map_err(fail)?;
    let p = out.probability(&[0, 1]);
    verdict((p - 1.0).abs() < 1e-12, format!("P(0,1) = {p:.15}"))
}

fn bandwidths() -> Outcome {
    let sp = spectra()?;
    let e = fwhm(&sp.emission).map_err(fail)?;
    let a = fwhm(&sp.acceptance).map_err(fail)?;
    verdict(
        (e / 1.3 - 1.0).abs() <= 0.15 && (a / 0.5 - 1.0).abs() <= 0.15,
        format!("emission FWHM {e:.4} nm (1.3 ± 15%), acceptance FWHM {a:.4} nm (0.5 ± 15%)"),
    )
}

fn acceptance_narrower() -> Outcome {
    let sp = spectra()?;
    let e = fwhm(&sp.emission).map_err(fail)?;
    let a = fwhm(&sp.acceptance).map_err(fail)?;
    verdict(a < e, format!("acceptance {a:.4} nm < emission {e:.4} nm"))
}

fn dip_shapes() -> Outcome {
    // pure sinc² spectrum against the closed-form triangle
    let grid = uniform_grid(DEGENERATE_NM, 200.0, 4096).map_err(fail)?;
    let l0 = DEGENERATE_NM * 1e-9;
    let omega0 = 2.0 * PI * SPEED_OF_LIGHT / l0;
    let d_omega = 2.0 * PI * SPEED_OF_LIGHT * 1.2e-9 / (l0 * l0);
    let tau0 = 4.0 * 1.391_557_377_251_55 / d_omega;
    let s = Spectrum::from_fn(&grid, |l| {
        let omega = 2.0 * PI * SPEED_OF_LIGHT / (l * 1e-9);
        Ok(sinc_sq((omega - omega0) * tau0 / 2.0))
    })
    .map_err(fail)?;
    let delays: Vec<f64> = (-150..=150).map(|i| f64::from(i) * 0.01).collect();
    let c = hom_profile(&s, &delays, 1.0).map_err(fail)?;
    let half_base = SPEED_OF_LIGHT * tau0 / 2.0 * 1e3;
    let worst = delays
        .iter()
        .zip(&c)
        .map(|(d, c)| (c - 0.5 * (1.0 - (1.0 - d.abs() / half_base).max(0.0))).abs())
        .fold(0.0, f64::max);

    // filtered-spectrum dip: Gaussian beats triangle
    let sp = spectra()?;
    let delays: Vec<f64> = (-100..=100).map(|i| f64::from(i) * 0.1).collect();
    let scan = hom_scan(
        &sp.filtered,
        UPCONVERTED_HOM_VISIBILITY,
        &delays,
        &noiseless(),
    )
    .map_err(fail)?;
    let obs = scan.observed();
    let g = fit_dip(&delays, &obs, DipShape::Gaussian).map_err(fail)?;
    let t = fit_dip(&delays, &obs, DipShape::Triangle).map_err(fail)?;
    verdict(
        worst < 1e-3 && g.residual_norm < t.residual_norm,
        format!(
            "sinc² vs triangle max |Δ| = {worst:.2e} (< 1e-3); filtered dip residual Gaussian {:.3} < triangle {:.3}",
            g.residual_norm, t.residual_norm
        ),
    )
}

fn coherence() -> Outcome {
    let lc = coherence_length(DEGENERATE_NM, 1.28).map_err(fail)?;
    verdict(
        (lc / 0.83 - 1.0).abs() <= 0.05,
        format!("coherence length {lc:.4} mm (0.83 ± 5%)"),
    )
}

fn bunching() -> Outcome {
    let sp = spectra()?;
    // far enough out that the truncated-grid ripple of g(δ) is below 1e-6
    let delays = [-30.0, 0.0, 30.0];
    let analytic = bunching_scan(&sp.emission, 1.0, &delays, &noiseless())
        .and_then(|s| s.center_to_baseline())
        .map_err(fail)?;
    let fock = fock_bunching_coincidence(1.0).map_err(fail)?
        / fock_bunching_coincidence(0.0).map_err(fail)?;

    let seeds = 1000;
    let (mut center, mut base) = (0.0, 0.0);
    for seed in 0..seeds {
        let acq = Acquisition {
            sampling: Sampling::Poisson { seed },
            ..noiseless()
        };
        let scan = bunching_scan(&sp.emission, 1.0, &delays, &acq).map_err(fail)?;
        let c = scan.counts.as_ref().expect("sampled");
        center += c[1] as f64;
        base += 0.5 * (c[0] + c[2]) as f64;
    }
    let n = seeds as f64;
    let (mc, mb) = (center / n, base / n);
    let ratio = mc / mb;
    // Poisson variances of the ensemble means; the baseline averages two bins
    let sigma = ratio * ((1.0 / (mc * n)) + (1.0 / (2.0 * mb * n))).sqrt();
    let z = (ratio - 2.0) / sigma;
    verdict(
        (analytic - 2.0).abs() < 1e-6 && (fock - 2.0).abs() < 1e-6 && z.abs() < 3.0,
        format!(
            "analytic {analytic:.8}, Fock oracle {fock:.8}, Monte Carlo {ratio:.4} ± {sigma:.4} ({z:+.2}σ over {seeds} seeds)"
        ),
    )
}

fn period_halving() -> Outcome {
    let phases: Vec<f64> = (0..81).map(|i| 4.0 * PI * f64::from(i) / 80.0).collect();
    let fit = |n: u32, v: f64, acq: &Acquisition| {
        noon_fringe(n, v, ScanAxis::Phase, &phases, acq).and_then(|s| fit_visibility(&s, n))
    };
    let one = fit(1, ONE_PHOTON_FRINGE_VISIBILITY, &noiseless()).map_err(fail)?;
    let two = fit(2, TWO_PHOTON_FRINGE_VISIBILITY, &noiseless()).map_err(fail)?;
    let exact = two.frequency / one.frequency;

    let poisson = |seed| Acquisition {
        sampling: Sampling::Poisson { seed },
        ..noiseless()
    };
    let one = fit(1, ONE_PHOTON_FRINGE_VISIBILITY, &poisson(101)).map_err(fail)?;
    let two = fit(2, TWO_PHOTON_FRINGE_VISIBILITY, &poisson(202)).map_err(fail)?;
    let ratio = two.frequency / one.frequency;
    let sigma = ratio
        * ((two.frequency_sigma / two.frequency).powi(2)
            + (one.frequency_sigma / one.frequency).powi(2))
        .sqrt();
    verdict(
        (exact - 2.0).abs() <= 0.02 && (ratio - 2.0).abs() < 3.0 * sigma,
        format!("noiseless ratio {exact:.6}; Poisson ratio {ratio:.4} ± {sigma:.4}"),
    )
}

fn sql() -> Outcome {
    let v = sql_verdict(
        TWO_PHOTON_FRINGE_VISIBILITY,
        TWO_PHOTON_FRINGE_VISIBILITY_SIGMA,
        2,
    )
    .map_err(fail)?;
    let below = sql_verdict(0.70, TWO_PHOTON_FRINGE_VISIBILITY_SIGMA, 2).map_err(fail)?;
    let margin = v.margin_sigma.unwrap_or(f64::NAN);
    verdict(
        v.beats
            && format!("{:.4}", v.threshold) == "0.7071"
            && (margin - 4.5).abs() < 0.05
            && !below.beats,
        format!("{v}; V = 0.70: {below}"),
    )
}

fn fringe_oracle() -> Outcome {
    let phases: Vec<f64> = (0..200)
        .map(|i| -PI + 2.0 * PI * f64::from(i) / 199.0)
        .collect();
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let fock = fock_fringe_probabilities(n, &phases).map_err(fail)?;
        for (phi, p) in phases.iter().zip(&fock) {
            worst = worst.max((p - fringe_closed_form(n, 1.0, *phi)).abs());
        }
    }
    verdict(
        worst < 1e-10,
        format!("N = 1..4, max |closed form − Fock| = {worst:.2e}"),
    )
}

fn budget() -> Outcome {
    let b = efficiency_budget(&EfficiencyChain::reference());
    let factor = (b.pair / b.quoted).max(b.quoted / b.pair);
    let flagged = b.discrepancy();
    verdict(
        (b.single_arm - 1.29e-3).abs() <= 1e-5 && factor <= 1.25 && flagged.is_some(),
        format!(
            "single-arm {:.4e}, pair {:.4e} (factor {factor:.3} from {:.1e}); flag: {}",
            b.single_arm,
            b.pair,
            b.quoted,
            flagged.unwrap_or_else(|| "MISSING".into())
        ),
    )
}

fn calibration() -> Outcome {
    let a = calibrate_conversion(CALIBRATION_POWER_W, CALIBRATION_EFFICIENCY).map_err(fail)?;
    let eta = internal_conversion_efficiency(CALIBRATION_POWER_W, a).map_err(fail)?;
    verdict(
        (eta - CALIBRATION_EFFICIENCY).abs() < 1e-6,
        format!("a = {a:.6} W^-1/2, η(0.660 W) = {eta:.12}"),
    )
}

fn random_circuits() -> Result<f64, String> {
    let names = ["a", "b", "c"];
    let modes: Vec<ModeId> = names.iter().map(|&m| ModeId::from(m)).collect();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let mut rng = point_rng(2024, i);
        let mut circuit = Circuit::new(modes.clone());
        for _ in 0..rng.random_range(1..16) {
            let x = rng.random_range(0..3);
            let y = (x + rng.random_range(1..3)) % 3;
            let angle = rng.random_range(-PI..PI);
            let e = match rng.random_range(0..4) {
                0 => CircuitElement::splitter(angle, names[x], names[y]),
                1 => CircuitElement::phase(angle, names[x]),
                2 => CircuitElement::converter(angle, names[x], names[y]),
                _ => CircuitElement::relabel(names[x], names[y]),
            };
            if let ElementKind::Splitter { theta } = e.kind {
                worst = worst.max(unitarity_deviation(&beamsplitter(theta).matrix()));
            }
            if let ElementKind::Converter { xi_t } = e.kind {
                worst = worst.max(unitarity_deviation(&frequency_converter(xi_t).matrix()));
            }
            circuit.push(e).map_err(fail)?;
        }
        let terms = (0..3).map(|_| {
            let occ: Vec<u32> = (0..3).map(|_| rng.random_range(0..2)).collect();
            (
                occ,
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        });
        let psi = StateVector::from_amplitudes(modes.clone(), terms, Truncation::default())
            .and_then(|s| s.normalized())
            .map_err(fail)?;
        let out = apply_circuit(&psi, &circuit).map_err(fail)?;
        let back = apply_circuit(&out, &circuit.inverse()).map_err(fail)?;
        // composition: the circuit equals its two halves applied in turn
        let split = circuit.len() / 2;
        let mut first = Circuit::new(modes.clone());
        let mut second = Circuit::new(modes.clone());
        for (k, e) in circuit.elements().iter().enumerate() {
            if k < split { &mut first } else { &mut second }
                .push(e.clone())
                .map_err(fail)?;
        }
        let halves =
            apply_circuit(&apply_circuit(&psi, &first).map_err(fail)?, &second).map_err(fail)?;
        worst = worst
            .max((out.norm_sqr() - 1.0).abs())
            .max((psi.inner_product(&back).map_err(fail)?.norm() - 1.0).abs())
            .max((out.inner_product(&halves).map_err(fail)?.norm() - 1.0).abs());
    }
    Ok(worst)
}

fn cli_reruns() -> Result<bool, String> {
    let run = |dir: &std::path::Path| -> Result<(), String> {
        for cmd in ["spectra", "hom", "bunching", "fringe", "budget"] {
            let status = Command::new(env!("CARGO_BIN_EXE_noonsim"))
                .args(["--seed", "77", "--out"])
                .arg(dir)
                .arg(cmd)
                .output()
                .map_err(fail)?
                .status;
            if !status.success() {
                return Err(format!("`noonsim {cmd}` failed"));
            }
        }
        Ok(())
    };
    let a = tempfile::tempdir().map_err(fail)?;
    let b = tempfile::tempdir().map_err(fail)?;
    run(a.path())?;
    run(b.path())?;
    let mut same = true;
    for entry in fs::read_dir(a.path()).map_err(fail)? {
        let name = entry.map_err(fail)?.file_name();
        same &= fs::read(a.path().join(&name)).map_err(fail)?
            == fs::read(b.path().join(&name)).map_err(fail)?;
    }
    Ok(same)
}

fn properties() -> Outcome {
    let worst = random_circuits()?;
    let draws = poisson_draws(50.0, 13, 100_000).map_err(fail)?;
    let n = draws.len() as f64;
    let mean = draws.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = draws
        .iter()
        .map(|&c| (c as f64 - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    let identical = cli_reruns()?;
    verdict(
        worst < 1e-10 && (mean / 50.0 - 1.0).abs() < 0.01 && (var / 50.0 - 1.0).abs() < 0.01 && identical,
        format!(
            "100 circuits worst deviation {worst:.2e}; Poisson mean {mean:.3}, variance {var:.3}; CLI reruns identical: {identical}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 13] = [
        ("HOM null on a 50:50 splitter", hom_null),
        ("full frequency conversion", full_conversion),
        ("emission and acceptance bandwidths", bandwidths),
        ("acceptance narrower than emission", acceptance_narrower),
        ("triangle and Gaussian dip shapes", dip_shapes),
        ("coherence length", coherence),
        ("bunching ratio", bunching),
        ("fringe period halving", period_halving),
        ("SQL verdict", sql),
        ("closed-form fringe equals Fock pipeline", fringe_oracle),
        ("efficiency budget", budget),
        ("conversion-efficiency calibration", calibration),
        ("property suites", properties),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}: {title} — {detail}", i + 1);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
