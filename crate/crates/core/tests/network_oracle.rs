//! Ladder two-port checks against full element-level nodal analysis, the
//! terminated-impedance route for Re Z_ext, and passivity/unitarity
//! properties over random networks.

mod common;

use common::{fig4b_ladder, ladder_circuit, TAU};
use mpfilter::bvd::{Quality, ResonatorSpec};
use mpfilter::network::{linear_grid, re_zext_from_s11, LadderFilterSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn fig4b_ladder_matches_nodal_analysis() {
    let spec = fig4b_ladder(Quality::Finite(800.0));
    let grid = linear_grid(2.6e9, 3.6e9, 401).unwrap();
    let net = spec.build(&grid).unwrap();
    let s = net.s_params();
    let (ckt, p1, p2) = ladder_circuit(&spec);
    let mut worst = 0.0f64;
    for (i, &f) in grid.iter().enumerate() {
        let lib = s[i].expect("representable");
        let (s11_mna, s21_mna) = ckt.s_params(p1, p2, spec.z0(), TAU * f);
        worst = worst
            .max((lib.s11 - s11_mna).norm())
            .max((lib.s21 - s21_mna).norm());
    }
    assert!(worst < 1e-9, "worst |ΔS| against nodal analysis: {worst}");
}

#[test]
fn fig4b_ladder_is_a_bandpass_with_expected_zeros() {
    let spec = fig4b_ladder(Quality::Finite(800.0));
    let grid = linear_grid(2.6e9, 3.6e9, 2001).unwrap();
    let net = spec.build(&grid).unwrap();
    let bw = net.bandwidth(3.0).expect("passband exists");

    // Passband center sits between the shunt antiresonance and the series
    // resonance region; edges inside the sweep.
    let (_, f_a_shunt) = spec.shunt().to_bvd().resonance_antiresonance();
    assert!(bw.peak_freq_hz > f_a_shunt - 40e6 && bw.peak_freq_hz < 3.30e9);
    assert!(bw.lower_edge_hz > grid[0] && bw.upper_edge_hz < grid[grid.len() - 1]);

    // Transmission zero below the band at the shunt resonance, and above
    // the band at the series antiresonance.
    let s = net.s_params();
    let mag = |f_target: f64| {
        let idx = grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - f_target).abs().total_cmp(&(b.1 - f_target).abs()))
            .unwrap()
            .0;
        s[idx].unwrap().s21.norm()
    };
    let (_, f_a_series) = spec.series().to_bvd().resonance_antiresonance();
    assert!(mag(3.00e9) < 1e-2, "dip at the shunt resonance");
    assert!(mag(f_a_series) < 1e-2, "dip at the series antiresonance");
    assert!(f_a_series > bw.upper_edge_hz && 3.00e9 < bw.lower_edge_hz);
    // The high-side zero lands at 3.35 GHz for this design.
    assert!((f_a_series - 3.35e9).abs() < 5e6);
}

#[test]
fn re_zext_agrees_with_terminated_input_impedance() {
    // Eq-consistency: the reflection formula and the directly computed
    // terminated input impedance are two routes to the same resistance.
    let spec = fig4b_ladder(Quality::Finite(800.0));
    let grid = linear_grid(2.6e9, 3.6e9, 801).unwrap();
    let net = spec.build(&grid).unwrap();
    let s = net.s_params();
    let zin = net.input_impedance_terminated();
    for i in 0..grid.len() {
        let s11 = s[i].unwrap().s11;
        let from_s11 = re_zext_from_s11(s11, spec.z0()).unwrap();
        let direct = zin[i].re;
        let denom = direct.abs().max(1e-9 * spec.z0());
        assert!(
            ((from_s11 - direct) / denom).abs() < 1e-6,
            "at {} Hz: {} vs {}",
            grid[i],
            from_s11,
            direct
        );
    }
}

#[test]
fn re_zext_inside_band_is_near_z0_and_small_outside() {
    let spec = fig4b_ladder(Quality::Finite(800.0));
    let center = spec.abcd_at(TAU * 3.2e9).to_s(50.0).unwrap().s11;
    let re_center = re_zext_from_s11(center, 50.0).unwrap();
    assert!(re_center > 25.0 && re_center < 100.0, "band center sees ~z0, got {re_center}");
    let deep = spec.abcd_at(TAU * 2.65e9).to_s(50.0).unwrap().s11;
    let re_deep = re_zext_from_s11(deep, 50.0).unwrap();
    assert!(re_deep < re_center / 100.0, "stopband {re_deep} vs band {re_center}");
}

#[test]
fn coupling_widens_the_passband_monotonically() {
    // k² from 0.01 to 0.06: the 3 dB bandwidth grows with coupling. Spot
    // values are cross-checked against the nodal oracle at the band center.
    let mut last_width = 0.0;
    for k2 in [0.01, 0.02, 0.03, 0.04, 0.05, 0.06] {
        let f_s = 3.18e9;
        // Keep the shunt antiresonance on the series resonance as the
        // coupling changes.
        let ratio = (1.0 + 8.0 * k2 / std::f64::consts::PI.powi(2)).sqrt();
        let series = ResonatorSpec::from_hz(f_s, k2, Quality::Finite(800.0), 1e-12).unwrap();
        let shunt = ResonatorSpec::from_hz(f_s / ratio, k2, Quality::Finite(800.0), 1e-12).unwrap();
        let spec = LadderFilterSpec::new(3, series, shunt, 2, 50.0).unwrap();
        assert!(spec.design_rule_warning().is_none());
        let grid = linear_grid(2.9e9, 3.5e9, 3001).unwrap();
        let net = spec.build(&grid).unwrap();
        let bw = net.bandwidth(3.0).expect("passband");
        assert!(
            bw.width_hz > last_width,
            "k2 = {k2}: width {} did not grow past {last_width}",
            bw.width_hz
        );
        last_width = bw.width_hz;

        let (ckt, p1, p2) = ladder_circuit(&spec);
        let lib = spec.abcd_at(TAU * bw.peak_freq_hz).to_s(50.0).unwrap();
        let (_, s21_mna) = ckt.s_params(p1, p2, 50.0, TAU * bw.peak_freq_hz);
        assert!((lib.s21 - s21_mna).norm() < 1e-9);
    }
}

use common::random_ladder;

#[test]
fn random_ladders_are_passive_and_reciprocal() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2a6f);
    let mut worst_det = 0.0f64;
    let mut worst_power = 0.0f64;
    let mut worst_unitarity = 0.0f64;
    for trial in 0..200 {
        let lossless = trial % 4 == 0;
        let (spec, grid) = random_ladder(&mut rng, lossless);
        let net = spec.build(&grid).unwrap();
        for (m, s) in net.abcd().iter().zip(net.s_params()) {
            let det = m.determinant();
            let det_err = (det.re - 1.0).abs().max(det.im.abs());
            worst_det = worst_det.max(det_err);
            assert!(det_err < 1e-9, "trial {trial}: det = {det}");
            let s = s.expect("representable");
            let power = s.s11.norm_sqr() + s.s21.norm_sqr();
            worst_power = worst_power.max(power - 1.0);
            assert!(power <= 1.0 + 1e-9, "trial {trial}: |S11|²+|S21|² = {power}");
            if lossless {
                worst_unitarity = worst_unitarity.max((power - 1.0).abs());
                assert!((power - 1.0).abs() < 1e-9, "trial {trial}: unitarity {power}");
            }
        }
    }
    println!(
        "margins: |det-1| {worst_det:.2e}, passivity excess {worst_power:.2e}, unitarity {worst_unitarity:.2e}"
    );
}

proptest! {
    #[test]
    fn prop_series_shunt_cascade_det_and_passivity(
        r1 in 0.0f64..100.0,
        x1 in -500.0f64..500.0,
        g2 in 0.0f64..0.1,
        b2 in -0.1f64..0.1,
        r3 in 0.0f64..100.0,
        x3 in -500.0f64..500.0,
    ) {
        let m = mpfilter::network::Abcd::series(Complex64::new(r1, x1))
            .cascade(&mpfilter::network::Abcd::shunt(Complex64::new(g2, b2)))
            .cascade(&mpfilter::network::Abcd::series(Complex64::new(r3, x3)));
        let det = m.determinant();
        prop_assert!((det.re - 1.0).abs() < 1e-9 && det.im.abs() < 1e-9);
        let s = m.to_s(50.0).unwrap();
        prop_assert!(s.s11.norm_sqr() + s.s21.norm_sqr() <= 1.0 + 1e-9);
    }
}
