//! Shared test helpers: an independent Gauss-Legendre quadrature of the
//! time-domain modulation functions, used to cross-check the closed-form
//! Fourier coefficients.

#![allow(dead_code)]

use num_complex::Complex64 as C64;
use nvdd_core::pulses::{PulseSequence, Segment};
use std::f64::consts::PI;

pub const GL_NODES: [f64; 16] = [
    -0.9894009349916499,
    -0.9445750230732326,
    -0.8656312023878318,
    -0.755404408355003,
    -0.6178762444026438,
    -0.45801677765722737,
    -0.2816035507792589,
    -0.09501250983763745,
    0.09501250983763745,
    0.2816035507792589,
    0.45801677765722737,
    0.6178762444026438,
    0.755404408355003,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];

pub const GL_WEIGHTS: [f64; 16] = [
    0.027152459411754037,
    0.062253523938647706,
    0.09515851168249259,
    0.12462897125553403,
    0.14959598881657676,
    0.16915651939500262,
    0.1826034150449236,
    0.18945061045506859,
    0.18945061045506859,
    0.1826034150449236,
    0.16915651939500262,
    0.14959598881657676,
    0.12462897125553403,
    0.09515851168249259,
    0.062253523938647706,
    0.027152459411754037,
];

/// Quadrature of f_which(t) e^{-i k omega t} / T, splitting each segment
/// finely enough that every subinterval sees less than a half oscillation.
pub fn fourier_quad(seq: &PulseSequence, k: i64, which: usize) -> C64 {
    let t_tot = seq.period();
    let beta = k as f64 * 2.0 * PI / t_tot;
    let mut total = C64::new(0.0, 0.0);
    for seg in seq.segments() {
        let (a, b, rate) = match seg {
            Segment::Free { a, b, .. } => (a, b, beta.abs()),
            Segment::Pulse { a, b, index } => {
                (a, b, beta.abs() + seq.pulses()[index - 1].rabi)
            }
        };
        let n = ((rate * (b - a) / PI).ceil() as usize).max(1);
        let step = (b - a) / n as f64;
        for j in 0..n {
            let mid = a + step * (j as f64 + 0.5);
            let half = 0.5 * step;
            for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
                let t = mid + half * x;
                let f = seq.modulation_at(t).unwrap();
                let fv = [f.0, f.1, f.2][which];
                total += w * half * fv * C64::new(0.0, -beta * t).exp();
            }
        }
    }
    total / t_tot
}
