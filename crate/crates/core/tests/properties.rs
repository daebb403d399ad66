use std::f64::consts::PI;

use noonsim_core::elements::{unitarity_deviation, ElementKind};
use noonsim_core::experiments::{
    efficiency_budget, fit_visibility, noon_fringe, plate_phase, poisson_draws, Acquisition,
    EfficiencyChain, Sampling, ScanAxis,
};
use noonsim_core::fock::Truncation;
use noonsim_core::{
    apply_circuit, beamsplitter, frequency_converter, Circuit, CircuitElement, ModeId, Spectrum,
    StateVector, TwoModeUnitary,
};
use num_complex::Complex64;
use proptest::prelude::*;

const MODES: [&str; 3] = ["a", "b", "c"];

fn modes() -> Vec<ModeId> {
    MODES.iter().map(|&m| ModeId::from(m)).collect()
}

fn element() -> impl Strategy<Value = CircuitElement> {
    let pair = (0usize..3, 1usize..3).prop_map(|(i, d)| (MODES[i], MODES[(i + d) % 3]));
    prop_oneof![
        (0.0..PI, pair.clone()).prop_map(|(t, (a, b))| CircuitElement::splitter(t, a, b)),
        (-PI..PI, 0usize..3).prop_map(|(p, i)| CircuitElement::phase(p, MODES[i])),
        (0.0..PI, pair.clone()).prop_map(|(x, (a, b))| CircuitElement::converter(x, a, b)),
        pair.prop_map(|(a, b)| CircuitElement::relabel(a, b)),
    ]
}

fn circuit() -> impl Strategy<Value = Circuit> {
    prop::collection::vec(element(), 1..12).prop_map(|els| {
        let mut c = Circuit::new(modes());
        for e in els {
            c.push(e).unwrap();
        }
        c
    })
}

/// Normalized superposition of up to three basis states with ≤ 3 photons.
fn input_state() -> impl Strategy<Value = StateVector> {
    prop::collection::vec(
        ((0u32..2, 0u32..2, 0u32..2), -1.0..1.0f64, -1.0..1.0f64),
        1..4,
    )
    .prop_filter_map("nonzero state", |terms| {
        let terms = terms
            .into_iter()
            .map(|((x, y, z), re, im)| (vec![x, y, z], Complex64::new(re, im)));
        StateVector::from_amplitudes(modes(), terms, Truncation::default())
            .ok()
            .filter(|s| s.norm_sqr() > 1e-3)
            .and_then(|s| s.normalized().ok())
    })
}

fn overlap(a: &StateVector, b: &StateVector) -> f64 {
    a.inner_product(b).unwrap().norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn circuits_preserve_norm(c in circuit(), psi in input_state()) {
        let out = apply_circuit(&psi, &c).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        prop_assert_eq!(out.photon_numbers().iter().sum::<u32>(), psi.photon_numbers().iter().sum::<u32>());
    }

    #[test]
    fn inverse_circuit_restores_input(c in circuit(), psi in input_state()) {
        let back = apply_circuit(&apply_circuit(&psi, &c).unwrap(), &c.inverse()).unwrap();
        prop_assert!((overlap(&psi, &back) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn element_matrices_are_unitary(t in -10.0..10.0f64) {
        prop_assert!(unitarity_deviation(&beamsplitter(t).matrix()) < 1e-12);
        prop_assert!(unitarity_deviation(&frequency_converter(t).matrix()) < 1e-12);
    }

    #[test]
    fn mixers_compose(
        angles in (-PI..PI, -PI..PI, -PI..PI, -PI..PI, -PI..PI, -PI..PI, -PI..PI, -PI..PI),
        psi in input_state(),
    ) {
        let (a0, a1, a2, a3, b0, b1, b2, b3) = angles;
        let u = TwoModeUnitary::from_angles(a0, a1, a2, a3);
        let v = TwoModeUnitary::from_angles(b0, b1, b2, b3);
        prop_assert!(unitarity_deviation(&u.matrix()) < 1e-10);
        let (a, b) = (ModeId::from("a"), ModeId::from("b"));
        let stepwise = psi.apply_two_mode_mixer(&u, &a, &b).unwrap().apply_two_mode_mixer(&v, &a, &b).unwrap();
        let joint = psi.apply_two_mode_mixer(&v.then_after(&u), &a, &b).unwrap();
        prop_assert!((overlap(&stepwise, &joint) - 1.0).abs() < 1e-10);
        let undone = joint.apply_two_mode_mixer(&v.then_after(&u).adjoint(), &a, &b).unwrap();
        prop_assert!((overlap(&undone, &psi) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_of_inverse_is_identity(e in element()) {
        prop_assert_eq!(e.inverse().inverse(), e.clone());
        if let ElementKind::Splitter { .. } | ElementKind::Relabel = e.kind {
            prop_assert_eq!(e.inverse(), e);
        }
    }

    #[test]
    fn spectrum_csv_round_trip_is_exact(values in prop::collection::vec(0.0..1e3f64, 4..64)) {
        let grid: Vec<f64> = (0..values.len()).map(|i| 1540.0 + 0.013 * i as f64).collect();
        let s = Spectrum::new(grid, values).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = Spectrum::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.wavelengths_nm(), s.wavelengths_nm());
        prop_assert_eq!(back.density(), s.density());
    }

    #[test]
    fn poisson_is_deterministic(mean in 0.0..500.0f64, seed in any::<u64>()) {
        prop_assert_eq!(poisson_draws(mean, seed, 20).unwrap(), poisson_draws(mean, seed, 20).unwrap());
    }

    #[test]
    fn plate_phase_is_even(theta in -1.0..1.0f64, n in 1.01..2.5f64) {
        let p = plate_phase(theta, 1e-3, n, 525e-9).unwrap();
        prop_assert_eq!(p, plate_phase(-theta, 1e-3, n, 525e-9).unwrap());
        prop_assert!(p >= 0.0);
    }

    #[test]
    fn fit_is_scale_invariant(v in 0.05..0.99f64, k in 0.01..100.0f64, n in 1u32..4) {
        let phases: Vec<f64> = (0..48).map(|i| 2.0 * PI * f64::from(i) / 48.0).collect();
        let acq = Acquisition { pair_rate_hz: 50.0, integration_time_s: 10.0, sampling: Sampling::Noiseless };
        let scan = noon_fringe(n, v, ScanAxis::Phase, &phases, &acq).unwrap();
        let mut scaled = scan.clone();
        for e in &mut scaled.expected {
            *e *= k;
        }
        let a = fit_visibility(&scan, n).unwrap();
        let b = fit_visibility(&scaled, n).unwrap();
        prop_assert!((a.visibility - v).abs() < 1e-6);
        prop_assert!((a.visibility - b.visibility).abs() < 1e-9);
        prop_assert!((b.offset / a.offset - k).abs() < 1e-9 * k);
    }

    #[test]
    fn budget_is_order_independent(mut etas in prop::collection::vec(0.0..=1.0f64, 1..10), rot in 0usize..10) {
        let named = |v: &[f64]| v.iter().enumerate().map(|(i, &e)| (format!("s{i}"), e)).collect::<Vec<_>>();
        let p0 = efficiency_budget(&EfficiencyChain::new(named(&etas)).unwrap());
        let len = etas.len();
        etas.rotate_left(rot % len);
        etas.reverse();
        let p1 = efficiency_budget(&EfficiencyChain::new(named(&etas)).unwrap());
        prop_assert!((p0.single_arm - p1.single_arm).abs() <= 1e-14 * p0.single_arm.max(1e-300));
        prop_assert!((p1.pair - p1.single_arm * p1.single_arm).abs() <= f64::EPSILON * p1.pair);
    }
}
