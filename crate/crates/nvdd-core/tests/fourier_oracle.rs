//! Cross-checks of the closed-form Fourier coefficients against an
//! independent Gauss-Legendre quadrature of the time-domain modulation
//! functions, plus frozen reference magnitudes.

use nvdd_core::pulses::{cpmg8, xy4, xy8, PulseSequence};
use std::f64::consts::PI;

mod common;
use common::fourier_quad;

const TWO_PI: f64 = 2.0 * PI;

fn assert_triple_close(seq: &PulseSequence, k: i64, tol: f64) {
    let analytic = seq.fourier_triple(k);
    for (which, value) in analytic.iter().enumerate() {
        let quad = fourier_quad(seq, k, which);
        let d = (value - quad).norm();
        assert!(
            d < tol,
            "k = {k}, component {which}: closed form {value:?} vs quadrature {quad:?} (|diff| = {d:.3e})"
        );
    }
}

#[test]
fn closed_form_matches_quadrature_for_xy8() {
    let seq = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap();
    for k in [0, 1, 2, 3, 4, 5, 8, 12, 17] {
        assert_triple_close(&seq, k, 1e-9);
    }
}

#[test]
fn closed_form_matches_quadrature_with_global_phase() {
    let seq = xy8(0.25e-6, TWO_PI * 20.0e6, 0.7, None).unwrap();
    for k in [1, 2, 4, 5] {
        assert_triple_close(&seq, k, 1e-9);
    }
}

#[test]
fn closed_form_matches_quadrature_for_cpmg_and_xy4() {
    let c = cpmg8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap();
    let x = xy4(0.25e-6, TWO_PI * 20.0e6, -0.3, None).unwrap();
    for k in [1, 2, 3, 4, 6] {
        assert_triple_close(&c, k, 1e-9);
        assert_triple_close(&x, k, 1e-9);
    }
}

#[test]
fn closed_form_matches_quadrature_for_wide_pulses() {
    // pulse duration a quarter of the spacing: strongly finite-width regime
    let tau = 0.25e-6;
    let rabi = PI / (tau / 4.0);
    let seq = xy8(tau, rabi, 0.0, None).unwrap();
    for k in [1, 2, 4, 9] {
        assert_triple_close(&seq, k, 1e-9);
    }
}

/// Reference magnitudes for the standard train (tau = 0.25 us,
/// Omega = 2 pi x 20 MHz): axial harmonics at the sequence's own period.
#[test]
fn frozen_axial_harmonics() {
    let seq = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap();
    let expect = [(4, 0.635133), (12, 0.207777), (20, 0.120042)];
    for (k, val) in expect {
        let fz = seq.fourier_triple(k)[2].norm();
        assert!(
            (fz - val).abs() < 1e-5,
            "|f_z^{k}| = {fz:.6}, expected {val}"
        );
    }
}

/// Transverse harmonics of the same train; nonzero only off multiples
/// of 4, with the k = 2 value rescaled to its own resonance period.
#[test]
fn frozen_transverse_harmonics() {
    let seq = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap();
    let expect = [
        (1, 0.012179),
        (2, 0.031812),
        (3, 0.029369),
        (5, 0.029301),
        (7, 0.012094),
    ];
    for (k, val) in expect {
        let fp = seq.f_perp(k).norm();
        assert!(
            (fp - val).abs() < 1e-5,
            "|f_perp^{k}| = {fp:.6}, expected {val}"
        );
    }
    for k in [4, 8, 12] {
        assert!(seq.f_perp(k).norm() < 1e-12, "f_perp^{k} should vanish");
    }
    // at the k = 2 resonance period (T = 1 us) the pulses fill more of
    // the sequence and the coefficient grows
    let at_dip = seq.scaled_to(1.0e-6).unwrap();
    let fp2 = at_dip.f_perp(2).norm();
    assert!(
        (fp2 - 0.063513).abs() < 1e-5,
        "|f_perp^2| at T = 1 us: {fp2:.6}"
    );
    assert!((at_dip.phi_perp(2) - PI / 4.0).abs() < 1e-12);
}

/// Ideal-pulse limit: the classical square-wave filter of period T/4,
/// whose only harmonics are odd multiples of k = 4 with magnitude
/// 2/(n pi); transverse parts vanish identically.
#[test]
fn delta_limit_recovers_square_wave() {
    let seq = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap().delta_limit();
    for n in [1i64, 3, 5, 7, 9] {
        let fz = seq.fourier_triple(4 * n)[2].norm();
        let ideal = 2.0 / (n as f64 * PI);
        assert!(
            (fz - ideal).abs() < 1e-12,
            "|f_z^{}| = {fz}, square wave gives {ideal}",
            4 * n
        );
        assert!(seq.f_perp(4 * n).norm() < 1e-15);
        assert!(seq.f_perp(4 * n - 1).norm() < 1e-15);
    }
    for k in [8, 16, 24] {
        assert!(seq.fourier_triple(k)[2].norm() < 1e-12);
    }
}
