//! Nuclear spin targets and the average-Hamiltonian reduction.
//!
//! A target is a nuclear spin-1/2 seen by the NV electron spin through the
//! secular hyperfine vector (A_x, A_z) on top of its Zeeman precession
//! gamma_n * B0. Conditioned on the NV state, the nuclear Hamiltonians are
//!
//! ```text
//! H0 = gamma_n B0 Iz                      (m_s = 0)
//! H1 = gamma_n B0 Iz + A_x Ix + A_z Iz    (m_s = 1)
//! ```
//!
//! Rotating the frame so the NV-state-averaged Hamiltonian (H0 + H1)/2 is
//! diagonal yields the average basis: precession frequency `omega_av`, tilt
//! angle `theta_av`, and hyperfine components `a_perp` (transverse, opens
//! coherence dips) and `a_par` (parallel, neglected by the closed-form dip
//! models and optionally included by the exact propagator).
//!
//! All frequencies are angular (rad/s) throughout the library; user-facing
//! boundaries convert from plain Hz exactly once.

use crate::error::{Error, Result};
use crate::linalg::{id2, sigma_x, sigma_z, CMat2, C64};
use serde::{Deserialize, Serialize};

/// One nuclear spin-1/2 target with its derived average-basis quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinTarget {
    /// Gyromagnetic ratio (rad/s per tesla).
    pub gamma_n: f64,
    /// Magnetic field along the NV axis (tesla).
    pub b0: f64,
    /// Hyperfine component perpendicular to the NV axis (rad/s).
    pub a_x: f64,
    /// Hyperfine component along the NV axis (rad/s).
    pub a_z: f64,
    /// Average-basis precession frequency (rad/s), always >= 0.
    pub omega_av: f64,
    /// Transverse hyperfine coupling in the average basis (rad/s).
    pub a_perp: f64,
    /// Parallel hyperfine coupling in the average basis (rad/s).
    pub a_par: f64,
    /// Tilt of the average quantization axis (rad), in (-pi, pi].
    pub theta_av: f64,
}

/// Nuclear Hamiltonians conditioned on the NV state, as 2x2 Hermitian
/// matrices in the Zeeman basis (spin operators I_i = sigma_i / 2).
#[derive(Debug, Clone, PartialEq)]
pub struct NuclearHamiltonians {
    /// Nuclear Hamiltonian for m_s = 0.
    pub h0: CMat2,
    /// Nuclear Hamiltonian for m_s = 1.
    pub h1: CMat2,
}

impl NuclearHamiltonians {
    /// NV-state-averaged Hamiltonian (h0 + h1) / 2; eigenvalues +-omega_av/2.
    pub fn h_av(&self) -> CMat2 {
        (self.h0 + self.h1) * C64::new(0.5, 0.0)
    }

    /// Conditional half-difference (h1 - h0) / 2 = (A . I) / 2.
    pub fn v(&self) -> CMat2 {
        (self.h1 - self.h0) * C64::new(0.5, 0.0)
    }
}

impl SpinTarget {
    /// Build a target from Zeeman-basis parameters.
    ///
    /// Errors with [`Error::DegenerateTarget`] when omega_av = 0, since dip
    /// periods 2 pi k / omega_av would be undefined.
    pub fn new(gamma_n: f64, b0: f64, a_x: f64, a_z: f64) -> Result<Self> {
        let wx = a_x / 2.0;
        let wz = gamma_n * b0 + a_z / 2.0;
        let omega_av = (wz * wz + wx * wx).sqrt();
        if omega_av == 0.0 {
            return Err(Error::DegenerateTarget);
        }
        let theta_av = a_x.atan2(2.0 * gamma_n * b0 + a_z);
        let (s, c) = theta_av.sin_cos();
        let a_perp = (a_x * c - a_z * s) / 2.0;
        let a_par = (a_z * c + a_x * s) / 2.0;
        Ok(SpinTarget {
            gamma_n,
            b0,
            a_x,
            a_z,
            omega_av,
            a_perp,
            a_par,
            theta_av,
        })
    }

    /// Build a target directly from average-basis quantities.
    ///
    /// Inverts the reduction: theta = atan(a_perp / (omega_av - a_par)),
    /// A_x = 2 omega_av sin(theta), A_z = 2 (a_par - omega_av sin^2 theta)/cos(theta),
    /// gamma_n B0 = omega_av cos(theta) - A_z/2, with B0 fixed at 1 T.
    /// Running the forward reduction on the result reproduces the inputs.
    pub fn from_average(omega_av: f64, a_perp: f64, a_par: f64) -> Result<Self> {
        if omega_av <= 0.0 {
            return Err(Error::DegenerateTarget);
        }
        let theta = (a_perp / (omega_av - a_par)).atan();
        let (s, c) = theta.sin_cos();
        let a_x = 2.0 * omega_av * s;
        let a_z = 2.0 * (a_par - omega_av * s * s) / c;
        let gb0 = omega_av * c - a_z / 2.0;
        SpinTarget::new(gb0, 1.0, a_x, a_z)
    }

    /// Period of the k-th resonance, T_dip^k = 2 pi k / omega_av.
    pub fn dip_period(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidHarmonic(0));
        }
        Ok(2.0 * std::f64::consts::PI * f64::from(k) / self.omega_av)
    }

    /// Conditioned nuclear Hamiltonians in the Zeeman basis.
    pub fn zeeman_hamiltonians(&self) -> NuclearHamiltonians {
        let iz = sigma_z() * C64::new(0.5, 0.0);
        let ix = sigma_x() * C64::new(0.5, 0.0);
        let h0 = iz * C64::new(self.gamma_n * self.b0, 0.0);
        let h1 = h0 + ix * C64::new(self.a_x, 0.0) + iz * C64::new(self.a_z, 0.0);
        NuclearHamiltonians { h0, h1 }
    }

    /// Average-basis free Hamiltonian pieces: (H_av, V) with
    /// H_av = omega_av Iz and V = a_perp Ix + a_par Iz.
    pub fn average_hamiltonians(&self, include_a_par: bool) -> (CMat2, CMat2) {
        let iz = sigma_z() * C64::new(0.5, 0.0);
        let ix = sigma_x() * C64::new(0.5, 0.0);
        let h_av = iz * C64::new(self.omega_av, 0.0);
        let mut v = ix * C64::new(self.a_perp, 0.0);
        if include_a_par {
            v += iz * C64::new(self.a_par, 0.0);
        }
        (h_av, v)
    }
}

/// Identity helper used by tests and the propagator for zero-coupling checks.
pub fn identity2() -> CMat2 {
    id2()
}
