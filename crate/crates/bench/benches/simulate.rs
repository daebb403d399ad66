use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use noonsim_core::defaults::{CRYSTAL_LENGTH_MM, DEGENERATE_NM, SOURCE_PUMP_NM};
use noonsim_core::experiments::{
    fit_visibility, fock_fringe_probabilities, hom_scan, noon_fringe, Acquisition, Sampling,
    ScanAxis,
};
use noonsim_core::spectral::{
    default_grid, emission_spectrum, phase_matched, CrystalSpec, WaveTriplet,
};
use noonsim_core::Dispersion;

fn source_spectrum() -> noonsim_core::Spectrum {
    let d = Dispersion::ktp();
    let waves = WaveTriplet::spdc(SOURCE_PUMP_NM, DEGENERATE_NM).unwrap();
    let crystal = phase_matched(&CrystalSpec::type_ii_spdc(CRYSTAL_LENGTH_MM), &d, &waves).unwrap();
    emission_spectrum(&crystal, &d, SOURCE_PUMP_NM, &default_grid(DEGENERATE_NM)).unwrap()
}

fn benches(c: &mut Criterion) {
    let d = Dispersion::ktp();
    let waves = WaveTriplet::spdc(SOURCE_PUMP_NM, DEGENERATE_NM).unwrap();
    let crystal = phase_matched(&CrystalSpec::type_ii_spdc(CRYSTAL_LENGTH_MM), &d, &waves).unwrap();
    let grid = default_grid(DEGENERATE_NM);
    c.bench_function("emission_spectrum_4096", |b| {
        b.iter(|| emission_spectrum(black_box(&crystal), &d, SOURCE_PUMP_NM, &grid).unwrap())
    });

    let spectrum = source_spectrum();
    let delays: Vec<f64> = (-100..=100).map(|i| f64::from(i) * 0.02).collect();
    let acq = Acquisition {
        pair_rate_hz: 50.0,
        integration_time_s: 10.0,
        sampling: Sampling::Poisson { seed: 1 },
    };
    c.bench_function("hom_scan_201", |b| {
        b.iter(|| hom_scan(black_box(&spectrum), 0.979, &delays, &acq).unwrap())
    });

    let phases: Vec<f64> = (0..64).map(|i| 2.0 * PI * f64::from(i) / 64.0).collect();
    c.bench_function("fock_fringe_n4", |b| {
        b.iter(|| fock_fringe_probabilities(black_box(4), &phases).unwrap())
    });

    let scan = noon_fringe(2, 0.8493, ScanAxis::Phase, &phases, &acq).unwrap();
    c.bench_function("fit_visibility_64", |b| {
        b.iter(|| fit_visibility(black_box(&scan), 2).unwrap())
    });
}

criterion_group!(simulate, benches);
criterion_main!(simulate);
