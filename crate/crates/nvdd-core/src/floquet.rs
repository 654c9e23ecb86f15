//! Floquet analysis of the periodically driven NV-nucleus pair.
//!
//! The one-period dynamics is lifted to a time-independent Hermitian matrix
//! on the dressed basis |m_s, alpha, l> where alpha labels the nuclear
//! eigenstates of the averaged Hamiltonian (energies +-omega_av/2) and
//! l in [-L, L] indexes Fourier replicas shifted by l * omega, omega = 2
//! pi/T. Diagonal entries are +-omega_av/2 + l omega; the transverse
//! hyperfine coupling enters through the modulation Fourier coefficients:
//! block (l, l') carries (a_perp/2)(f_x^k sigma_x + f_y^k sigma_y + f_z^k
//! sigma_z) on the NV indices with k = l - l', connecting only opposite
//! alpha (the coupling is purely transverse on the nucleus).
//!
//! Near T = 2 pi k/omega_av two dressed levels become degenerate and the
//! k-th coefficient opens an avoided crossing: f_z^k gaps make the expected
//! coherence dips, f_perp^k = f_x^k + i f_y^k the spurious ones. Gap
//! extraction minimizes the labeled level splitting over T; the two-level
//! reduction at a crossing yields closed-form stroboscopic propagators used
//! by the analytic dip models.

use crate::error::{Error, Result};
use crate::linalg::{unitary_eigenphases, CMat, CMat4, C64};
use crate::propagator::one_period_unitary;
use crate::pulses::PulseSequence;
use crate::spin_model::SpinTarget;
use std::f64::consts::PI;

/// Truncated Floquet Hamiltonian plus the context it was built from.
#[derive(Debug, Clone)]
pub struct FloquetMatrix {
    /// Replica truncation: l runs over [-L, L].
    pub l_max: usize,
    /// Drive frequency omega = 2 pi / T (rad/s).
    pub omega: f64,
    /// Nuclear precession frequency of the target (rad/s).
    pub omega_av: f64,
    /// Sequence period the matrix was built at (s).
    pub period: f64,
    /// The 4(2L+1)-dimensional Hermitian matrix.
    pub matrix: CMat,
}

/// Quasienergy spectra over a period scan.
#[derive(Debug, Clone)]
pub struct FloquetSpectrum {
    /// Scanned periods (s).
    pub periods: Vec<f64>,
    /// Per period: quasienergies folded to (-omega/2, omega/2], sorted.
    pub folded: Vec<Vec<f64>>,
    /// Per branch: continuity-tracked quasienergies (same branch index
    /// across all periods, unfolded so crossing fans plot smoothly).
    pub tracked: Vec<Vec<f64>>,
}

/// Classification of an avoided crossing by the coefficient that opens it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingKind {
    /// Opened by f_z^k; present already for ideal pulses.
    Expected,
    /// Opened by f_perp^k; requires finite pulse duration.
    Spurious,
    /// Both coefficients vanish; the levels actually cross.
    Closed,
}

impl CrossingKind {
    /// Stable lowercase tag for output.
    pub fn tag(self) -> &'static str {
        match self {
            CrossingKind::Expected => "expected",
            CrossingKind::Spurious => "spurious",
            CrossingKind::Closed => "closed",
        }
    }
}

/// Measured avoided-crossing gap at one harmonic.
#[derive(Debug, Clone, Copy)]
pub struct CrossingGap {
    /// Harmonic index k.
    pub k: u32,
    /// Which coefficient opens the crossing.
    pub kind: CrossingKind,
    /// True when both f_z^k and f_perp^k are nonzero (CPMG-like trains):
    /// the spurious resonance is buried inside the expected one.
    pub coincident: bool,
    /// Minimal level splitting found (rad/s); 0 for closed crossings.
    pub gap: f64,
    /// First-order prediction |a_perp f^k| for the classified kind (rad/s).
    pub predicted: f64,
    /// Period minimizing the splitting (s).
    pub t_center: f64,
    /// Truncation used.
    pub l_max: usize,
}

/// Replica truncation heuristic: resonances at harmonic k live at
/// |l| ~ k = omega_av T / 2 pi, so keep a 4x margin (at least 16).
pub fn default_truncation(omega_av: f64, period: f64) -> usize {
    let k = (omega_av * period / (2.0 * PI)).ceil() as usize;
    (4 * k).max(16)
}

fn dressed_index(l_max: usize, ms: usize, al: usize, l: i64) -> usize {
    let nl = 2 * l_max + 1;
    (ms * 2 + al) * nl + (l + l_max as i64) as usize
}

/// Assemble the truncated Floquet Hamiltonian for `target` driven by `seq`.
///
/// The drive frequency is 2 pi / seq.period(). Errors if the truncation
/// cannot hold a single replica (l_max = 0).
pub fn build_floquet(
    target: &SpinTarget,
    seq: &PulseSequence,
    l_max: usize,
) -> Result<FloquetMatrix> {
    if l_max == 0 {
        return Err(Error::InsufficientTruncation { l: 0, k: 1 });
    }
    let period = seq.period();
    let omega = 2.0 * PI / period;
    let nl = 2 * l_max + 1;
    let dim = 4 * nl;
    let li = l_max as i64;

    // Fourier table for every difference k = l - l', |k| <= 2L
    let f: Vec<[C64; 3]> = (-2 * li..=2 * li).map(|k| seq.fourier_triple(k)).collect();
    let f_at = |k: i64| f[(k + 2 * li) as usize];

    // Pauli entries sigma_i[ms, ms'] on the NV indices
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let im = C64::new(0.0, 1.0);
    let sx = [[zero, one], [one, zero]];
    let sy = [[zero, -im], [im, zero]];
    let sz = [[one, zero], [zero, -one]];

    let mut h = CMat::zeros(dim, dim);
    for ms in 0..2 {
        for al in 0..2 {
            let e_alpha = if al == 0 { 0.5 } else { -0.5 } * target.omega_av;
            for l in -li..=li {
                let a = dressed_index(l_max, ms, al, l);
                h[(a, a)] = C64::new(e_alpha + l as f64 * omega, 0.0);
            }
        }
    }
    let half_coupling = C64::new(target.a_perp / 2.0, 0.0);
    for ms in 0..2 {
        for msp in 0..2 {
            for al in 0..2 {
                let alp = 1 - al; // coupling is transverse on the nucleus
                for l in -li..=li {
                    for lp in -li..=li {
                        let [fx, fy, fz] = f_at(l - lp);
                        let el = (fx * sx[ms][msp] + fy * sy[ms][msp] + fz * sz[ms][msp])
                            * half_coupling;
                        if el != zero {
                            let a = dressed_index(l_max, ms, al, l);
                            let b = dressed_index(l_max, msp, alp, lp);
                            h[(a, b)] += el;
                        }
                    }
                }
            }
        }
    }
    Ok(FloquetMatrix {
        l_max,
        omega,
        omega_av: target.omega_av,
        period,
        matrix: h,
    })
}

impl FloquetMatrix {
    /// Matrix dimension 4(2L+1).
    pub fn dim(&self) -> usize {
        4 * (2 * self.l_max + 1)
    }

    /// Largest |H - H^dag| element; analytically zero, so this measures
    /// assembly consistency.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues and eigenvectors, ascending.
    pub fn eigensystem(&self) -> (nalgebra::DVector<f64>, CMat) {
        crate::linalg::eigh(&self.matrix)
    }

    /// Quasienergies folded to the first zone (-omega/2, omega/2], sorted.
    pub fn quasienergies_folded(&self) -> Vec<f64> {
        let vals = crate::linalg::eigh_values(&self.matrix);
        let mut out: Vec<f64> = vals.iter().map(|&e| fold(e, self.omega)).collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Fold an energy into the first zone (-omega/2, omega/2].
pub fn fold(e: f64, omega: f64) -> f64 {
    let mut r = e - omega * (e / omega).round();
    if r <= -omega / 2.0 {
        r += omega;
    }
    r
}

/// Circular distance between two energies identified modulo omega.
pub fn fold_distance(a: f64, b: f64, omega: f64) -> f64 {
    fold(a - b, omega).abs()
}

/// Quasienergy spectra across a period scan.
///
/// The sequence is rescaled to each grid period (tau = T/n family). Folded
/// spectra are sorted per point; tracked branches follow each level through
/// zone-edge wraps by nearest-match modulo omega, so crossing fans stay
/// continuous for plotting.
pub fn quasienergy_scan(
    target: &SpinTarget,
    seq: &PulseSequence,
    periods: &[f64],
    l_max: usize,
) -> Result<FloquetSpectrum> {
    let mut folded = Vec::with_capacity(periods.len());
    let mut tracked: Vec<Vec<f64>> = Vec::new();
    for (j, &t) in periods.iter().enumerate() {
        let fm = build_floquet(target, &seq.scaled_to(t)?, l_max)?;
        let fq = fm.quasienergies_folded();
        if j == 0 {
            tracked = fq.iter().map(|&e| vec![e]).collect();
        } else {
            let mut used = vec![false; fq.len()];
            for branch in tracked.iter_mut() {
                let last = *branch.last().unwrap();
                let mut best = usize::MAX;
                let mut best_d = f64::INFINITY;
                for (i, &e) in fq.iter().enumerate() {
                    if used[i] {
                        continue;
                    }
                    let d = fold_distance(e, last, fm.omega);
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                used[best] = true;
                // continue the branch without a fold jump
                let e = fq[best];
                let shifted = e + fm.omega * ((last - e) / fm.omega).round();
                branch.push(shifted);
            }
        }
        folded.push(fq);
    }
    Ok(FloquetSpectrum {
        periods: periods.to_vec(),
        folded,
        tracked,
    })
}

/// Splitting of the four dressed levels that meet at the k-th crossing.
///
/// The labels are (ms, alpha, l) = (0|1, +, 0) and (0|1, -, k): the pairs
/// degenerate at T = 2 pi k / omega_av. The spectrum is exactly doubly
/// degenerate, so the gap is the mean of the upper two labeled eigenvalues
/// minus the mean of the lower two, with levels identified by overlap with
/// the labeled basis rows.
fn labeled_splitting(fm: &FloquetMatrix, k: u32) -> f64 {
    let (vals, vecs) = fm.eigensystem();
    let l_max = fm.l_max;
    let idx = [
        dressed_index(l_max, 0, 0, 0),
        dressed_index(l_max, 1, 0, 0),
        dressed_index(l_max, 0, 1, k as i64),
        dressed_index(l_max, 1, 1, k as i64),
    ];
    let n = fm.dim();
    let mut overlap: Vec<(f64, f64)> = Vec::with_capacity(n);
    for col in 0..n {
        let ov: f64 = idx.iter().map(|&r| vecs[(r, col)].norm_sqr()).sum();
        overlap.push((ov, vals[col]));
    }
    overlap.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut top: Vec<f64> = overlap[..4].iter().map(|p| p.1).collect();
    top.sort_by(f64::total_cmp);
    (top[2] + top[3]) / 2.0 - (top[0] + top[1]) / 2.0
}

/// Coupling magnitudes (|a_perp f_z^k|, |a_perp f_perp^k|) for `seq`
/// rescaled to the k-th resonance of `target`.
pub fn crossing_couplings(target: &SpinTarget, seq: &PulseSequence, k: u32) -> Result<(f64, f64)> {
    let t_dip = target.dip_period(k)?;
    let s = seq.scaled_to(t_dip)?;
    let [_, _, fz] = s.fourier_triple(k as i64);
    let fp = s.f_perp(k as i64);
    Ok((
        target.a_perp.abs() * fz.norm(),
        target.a_perp.abs() * fp.norm(),
    ))
}

/// Measure the avoided-crossing gap at harmonic `k` with the default
/// truncation max(16, k + 12).
pub fn crossing_gap(target: &SpinTarget, seq: &PulseSequence, k: u32) -> Result<CrossingGap> {
    let l_max = (k as usize + 12).max(16);
    crossing_gap_with_truncation(target, seq, k, l_max)
}

/// Gap measurement with explicit truncation; the replica ladder must reach
/// past the crossing label, so l_max < k + 4 is rejected.
pub fn crossing_gap_with_truncation(
    target: &SpinTarget,
    seq: &PulseSequence,
    k: u32,
    l_max: usize,
) -> Result<CrossingGap> {
    if k == 0 {
        return Err(Error::InvalidHarmonic(0));
    }
    if l_max < k as usize + 4 {
        return Err(Error::InsufficientTruncation { l: l_max, k: k as i64 });
    }
    let t_dip = target.dip_period(k)?;
    let (g_z, g_p) = crossing_couplings(target, seq, k)?;
    const COEFF_TOL: f64 = 1e-12;
    let z_open = g_z > COEFF_TOL * target.a_perp.abs().max(1.0);
    let p_open = g_p > COEFF_TOL * target.a_perp.abs().max(1.0);
    let (kind, predicted) = match (z_open, p_open) {
        (true, _) => (CrossingKind::Expected, g_z),
        (false, true) => (CrossingKind::Spurious, g_p),
        (false, false) => (CrossingKind::Closed, 0.0),
    };
    let coincident = z_open && p_open;
    if kind == CrossingKind::Closed {
        return Ok(CrossingGap {
            k,
            kind,
            coincident,
            gap: 0.0,
            predicted: 0.0,
            t_center: t_dip,
            l_max,
        });
    }

    let split = |t: f64| -> Result<f64> {
        let fm = build_floquet(target, &seq.scaled_to(t)?, l_max)?;
        Ok(labeled_splitting(&fm, k))
    };
    // golden-section minimization over T_dip (1 +- 5 g / omega_av)
    let half = 5.0 * predicted / target.omega_av * t_dip;
    let (mut lo, mut hi) = (t_dip - half, t_dip + half);
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - gr * (hi - lo);
    let mut x2 = lo + gr * (hi - lo);
    let mut f1 = split(x1)?;
    let mut f2 = split(x2)?;
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = split(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = split(x2)?;
        }
    }
    let t_center = (lo + hi) / 2.0;
    let gap = split(t_center)?;
    Ok(CrossingGap {
        k,
        kind,
        coincident,
        gap,
        predicted,
        t_center,
        l_max,
    })
}

/// Closed-form stroboscopic propagator U(N_p T) of the two-level reduction
/// at the k-th crossing, in the dressed basis |0+>, |0->, |1+>, |1->.
///
/// With detuning delta = omega_av - k omega and coupling g the reduction
/// gives eps = sqrt(delta^2 + g^2)/2 and mixing angle theta = atan2(g,
/// delta). An f_z^k resonance couples within each m_s pair and yields the
/// block form built from u_a = cos(N_p eps T) - i sin(N_p eps T) cos theta,
/// u_b = -i sin(N_p eps T) sin theta; an f_perp^k resonance couples across
/// the pairs and carries the coupling phase, v_b = u_b e^{-i arg f_perp^k}.
/// When both coefficients are open (CPMG trains) the dominant expected form
/// is returned.
pub fn stroboscopic_propagator(
    target: &SpinTarget,
    seq: &PulseSequence,
    k: u32,
    n_p: u64,
) -> Result<CMat4> {
    if k == 0 {
        return Err(Error::InvalidHarmonic(0));
    }
    let period = seq.period();
    let omega = 2.0 * PI / period;
    let delta = target.omega_av - k as f64 * omega;
    let [_, _, fz] = seq.fourier_triple(k as i64);
    let fp = seq.f_perp(k as i64);
    let g_z = target.a_perp.abs() * fz.norm();
    let g_p = target.a_perp.abs() * fp.norm();
    const COEFF_TOL: f64 = 1e-12;
    let tol = COEFF_TOL * target.a_perp.abs().max(1.0);

    let zero = C64::new(0.0, 0.0);
    if g_z > tol {
        let eps = 0.5 * (delta * delta + g_z * g_z).sqrt();
        let theta = g_z.atan2(delta);
        let phase = n_p as f64 * eps * period;
        let (s, c) = phase.sin_cos();
        let ua = C64::new(c, -s * theta.cos());
        let ub = C64::new(0.0, -s * theta.sin());
        Ok(CMat4::from_row_slice(&[
            ua,
            ub,
            zero,
            zero,
            -ub.conj(),
            ua.conj(),
            zero,
            zero,
            zero,
            zero,
            ua,
            -ub,
            zero,
            zero,
            ub.conj(),
            ua.conj(),
        ]))
    } else if g_p > tol {
        let eps = 0.5 * (delta * delta + g_p * g_p).sqrt();
        let theta = g_p.atan2(delta);
        let phi_f = fp.im.atan2(fp.re);
        let phase = n_p as f64 * eps * period;
        let (s, c) = phase.sin_cos();
        let va = C64::new(c, -s * theta.cos());
        let vb = C64::new(0.0, -s * theta.sin()) * C64::new(phi_f.cos(), -phi_f.sin());
        Ok(CMat4::from_row_slice(&[
            va,
            zero,
            zero,
            vb,
            zero,
            va.conj(),
            -vb,
            zero,
            zero,
            vb.conj(),
            va,
            zero,
            -vb.conj(),
            zero,
            zero,
            va.conj(),
        ]))
    } else {
        Err(Error::ClosedCrossing {
            kind: "stroboscopic",
            k: k as i64,
        })
    }
}

/// Largest circular distance between the exact one-period eigenphases
/// (expressed as quasienergies) and the Floquet spectrum folded to the
/// first zone; converged truncations push this below 1e-8 omega.
pub fn monodromy_deviation(
    target: &SpinTarget,
    seq: &PulseSequence,
    l_max: usize,
) -> Result<f64> {
    let fm = build_floquet(target, seq, l_max)?;
    let folded = fm.quasienergies_folded();
    let u = one_period_unitary(target, seq, false);
    let du = CMat::from_fn(4, 4, |i, j| u[(i, j)]);
    let phases = unitary_eigenphases(&du);
    let mut worst = 0.0f64;
    for th in phases {
        // U = exp(-i H_F T) on the physical subspace: quasienergy -theta/T
        let q = -th / fm.period;
        let d = folded
            .iter()
            .map(|&e| fold_distance(e, q, fm.omega))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::xy8;

    const TWO_PI: f64 = 2.0 * PI;

    fn fig_target() -> SpinTarget {
        SpinTarget::from_average(TWO_PI * 2.0e6, TWO_PI * 200.0e3, 0.0).unwrap()
    }

    #[test]
    fn zero_coupling_matrix_is_diagonal() {
        let t = SpinTarget::from_average(TWO_PI * 2.0e6, 0.0, 0.0).unwrap();
        let s = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap();
        let fm = build_floquet(&t, &s, 4).unwrap();
        for i in 0..fm.dim() {
            for j in 0..fm.dim() {
                if i != j {
                    assert_eq!(fm.matrix[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
        // eigenvalues are +-omega_av/2 + l omega
        let vals = fm.quasienergies_folded();
        for v in vals {
            let d = fold_distance(v, fold(t.omega_av / 2.0, fm.omega), fm.omega)
                .min(fold_distance(v, fold(-t.omega_av / 2.0, fm.omega), fm.omega));
            assert!(d < 1e-6, "stray quasienergy {v}");
        }
    }

    #[test]
    fn hermitian_to_machine_precision() {
        let t = fig_target();
        let s = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap();
        let fm = build_floquet(&t, &s, 16).unwrap();
        assert!(fm.hermiticity_defect() < 1e-13);
    }

    #[test]
    fn delta_pulse_k2_crossing_is_closed() {
        let t = fig_target();
        let s = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, Some(0.0)).unwrap();
        let g = crossing_gap(&t, &s, 2).unwrap();
        assert_eq!(g.kind, CrossingKind::Closed);
        assert_eq!(g.gap, 0.0);
    }

    #[test]
    fn truncation_guard() {
        let t = fig_target();
        let s = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap();
        assert!(matches!(
            crossing_gap_with_truncation(&t, &s, 20, 16),
            Err(Error::InsufficientTruncation { .. })
        ));
    }

    #[test]
    fn stroboscopic_identity_at_zero_reps() {
        let t = fig_target();
        let s = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap();
        let u = stroboscopic_propagator(&t, &s.scaled_to(t.dip_period(4).unwrap()).unwrap(), 4, 0)
            .unwrap();
        assert!((u - CMat4::identity()).norm() < 1e-14);
    }
}
