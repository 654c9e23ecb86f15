//! Simulation of NV-center quantum sensing under periodic dynamical-decoupling
//! sequences with finite pulse duration.
//!
//! The library models a single NV electron spin (two-level subspace) coupled to
//! one or more nuclear spin-1/2 targets. Periodic pi-pulse trains imprint
//! rotating-frame modulation functions whose Fourier harmonics open avoided
//! crossings in the Floquet quasienergy spectrum; each open crossing produces a
//! coherence dip. Finite pulse duration activates transverse harmonics
//! (`f_perp^k`) that create narrow "spurious" dips in addition to the expected
//! ones from `f_z^k`, and a global pulse phase steers spurious-dip contrast.
//!
//! Modules:
//! - [`spin_model`]: nuclear targets, average-Hamiltonian reduction, dip periods
//! - [`pulses`]: sequence construction, modulation functions, Fourier spectra
//! - [`floquet`]: truncated Floquet matrices, quasienergy scans, crossing gaps
//! - [`coherence`]: closed-form dip models, envelopes, global-phase control
//! - [`propagator`]: exact piecewise propagation, coherence traces
//! - [`isotopes`]: built-in gyromagnetic-ratio dataset
//! - [`config`]: serde-friendly run descriptions for file-driven scans

pub mod config;
pub mod coherence;
pub mod error;
pub mod floquet;
pub mod isotopes;
pub mod linalg;
pub mod propagator;
pub mod pulses;
pub mod spin_model;

pub use error::{Error, Result};
