//! Closed-form coherence dips, envelopes, optimal pulse numbers, and
//! global-phase control.
//!
//! Near the k-th resonance the Floquet problem reduces to two levels with
//! detuning delta = omega_av - k omega and coupling g = |a_perp f^k|, giving
//! eps = sqrt(delta^2 + g^2)/2 and the shared dip kernel
//!
//! ```text
//! L = 1 - 2 [g^2/(g^2+delta^2)] sin^2(N_p eps T) * contrast,
//! ```
//!
//! with contrast 1 for expected dips (g from f_z^k) and
//! cos^2(phi_perp^k + phi_g) for spurious dips (g from f_perp^k). The
//! spurious contrast makes the dip depth steerable: phi_g = -phi_perp^k
//! maximizes it and phi_g = -phi_perp^k +- pi/2 removes the dip entirely,
//! which is what disambiguates a real nuclear species from another
//! species' spurious harmonic landing at the same period.

use crate::error::{Error, Result};
use crate::floquet::CrossingKind;
use crate::isotopes::Isotope;
use crate::linalg::wrap_angle;
use crate::pulses::{PulseSequence, SequenceFamily};
use crate::spin_model::SpinTarget;
use std::f64::consts::PI;

/// Tolerance below which a Fourier coefficient counts as closed.
const COEFF_TOL: f64 = 1e-12;

/// Two-level reduction of one avoided crossing, frozen at its resonance.
#[derive(Debug, Clone, Copy)]
pub struct DipModel {
    /// Expected (f_z^k) or spurious (f_perp^k).
    pub kind: CrossingKind,
    /// Harmonic index.
    pub k: u32,
    /// Nuclear precession frequency (rad/s).
    pub omega_av: f64,
    /// Coupling magnitude |a_perp f^k| at the resonance period (rad/s).
    pub coupling: f64,
    /// arg f_perp^k of the phi_g = 0 sequence (spurious; 0 for expected).
    pub phi_perp: f64,
    /// Global phase the sequence carries.
    pub phi_g: f64,
    /// Resonance period T_dip = 2 pi k / omega_av (s).
    pub t_dip: f64,
    /// Repetitions to full contrast, pi/(coupling * T_dip).
    pub np_max: f64,
    /// Envelope full width in period, 2 coupling T_dip / omega_av (s).
    pub w_t: f64,
}

/// One analytic evaluation: the coherence and whether the period sits
/// inside the two-level validity window |delta| <= 10 coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipEval {
    /// Coherence value in [-1, 1].
    pub l: f64,
    /// False when the two-level reduction is extrapolating.
    pub in_window: bool,
}

impl DipModel {
    /// Build the reduction for `target` and `seq` at harmonic `k`.
    ///
    /// The coupling is read from the sequence rescaled to T_dip; a closed
    /// coefficient for the requested kind is an error.
    pub fn new(
        target: &SpinTarget,
        seq: &PulseSequence,
        k: u32,
        kind: CrossingKind,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidHarmonic(0));
        }
        let t_dip = target.dip_period(k)?;
        let at_dip = seq.scaled_to(t_dip)?;
        let tol = COEFF_TOL * target.a_perp.abs().max(1.0);
        let (coupling, phi_perp) = match kind {
            CrossingKind::Expected => {
                let fz = at_dip.fourier_triple(k as i64)[2];
                (target.a_perp.abs() * fz.norm(), 0.0)
            }
            CrossingKind::Spurious => {
                let fp0 = at_dip.with_global_phase(0.0).f_perp(k as i64);
                (
                    target.a_perp.abs() * fp0.norm(),
                    fp0.im.atan2(fp0.re),
                )
            }
            CrossingKind::Closed => {
                return Err(Error::ClosedCrossing {
                    kind: "closed",
                    k: k as i64,
                })
            }
        };
        if coupling <= tol {
            return Err(Error::ClosedCrossing {
                kind: kind.tag(),
                k: k as i64,
            });
        }
        Ok(DipModel {
            kind,
            k,
            omega_av: target.omega_av,
            coupling,
            phi_perp,
            phi_g: seq.global_phase(),
            t_dip,
            np_max: PI / (coupling * t_dip),
            w_t: 2.0 * coupling * t_dip / target.omega_av,
        })
    }

    /// Detuning delta(T) = omega_av - k * 2 pi / T.
    pub fn detuning(&self, t: f64) -> f64 {
        self.omega_av - self.k as f64 * 2.0 * PI / t
    }

    /// Half-splitting eps(k; T) = sqrt(delta^2 + g^2) / 2.
    pub fn epsilon(&self, t: f64) -> f64 {
        let d = self.detuning(t);
        0.5 * (d * d + self.coupling * self.coupling).sqrt()
    }

    /// Whether T lies in the validity window |delta| <= 10 g.
    pub fn in_window(&self, t: f64) -> bool {
        self.detuning(t).abs() <= 10.0 * self.coupling
    }

    /// Depth contrast: 1 for expected dips, cos^2(phi_perp + phi_g) for
    /// spurious ones.
    pub fn contrast(&self) -> f64 {
        match self.kind {
            CrossingKind::Spurious => {
                let c = (self.phi_perp + self.phi_g).cos();
                c * c
            }
            _ => 1.0,
        }
    }

    /// Coherence after n_p repetitions at period t.
    pub fn coherence(&self, n_p: u64, t: f64) -> DipEval {
        let d = self.detuning(t);
        let g = self.coupling;
        let depth = g * g / (g * g + d * d);
        let eps = self.epsilon(t);
        let s = (n_p as f64 * eps * t).sin();
        DipEval {
            l: 1.0 - 2.0 * depth * s * s * self.contrast(),
            in_window: self.in_window(t),
        }
    }

    /// Lower envelope over n_p: the sin^2 factor replaced by 1.
    pub fn envelope(&self, t: f64) -> DipEval {
        let d = self.detuning(t);
        let g = self.coupling;
        let depth = g * g / (g * g + d * d);
        DipEval {
            l: 1.0 - 2.0 * depth * self.contrast(),
            in_window: self.in_window(t),
        }
    }

    /// np_max rounded to the nearest positive integer.
    pub fn np_max_rounded(&self) -> u64 {
        (self.np_max.round() as u64).max(1)
    }
}

/// Expected-dip coherence at harmonic `k`, period `t`, after `n_p`
/// repetitions; independent of the global phase.
pub fn expected_coherence(
    target: &SpinTarget,
    seq: &PulseSequence,
    k: u32,
    n_p: u64,
    t: f64,
) -> Result<DipEval> {
    Ok(DipModel::new(target, seq, k, CrossingKind::Expected)?.coherence(n_p, t))
}

/// Spurious-dip coherence at harmonic `k`; the sequence's global phase
/// enters through cos^2(phi_perp^k + phi_g).
pub fn spurious_coherence(
    target: &SpinTarget,
    seq: &PulseSequence,
    k: u32,
    n_p: u64,
    t: f64,
) -> Result<DipEval> {
    Ok(DipModel::new(target, seq, k, CrossingKind::Spurious)?.coherence(n_p, t))
}

/// Spurious-dip envelope (independent of n_p), with its width in
/// [`DipModel::w_t`].
pub fn dip_envelope(target: &SpinTarget, seq: &PulseSequence, k: u32, t: f64) -> Result<DipEval> {
    Ok(DipModel::new(target, seq, k, CrossingKind::Spurious)?.envelope(t))
}

/// Repetition count maximizing the spurious dip depth,
/// N_p^max = pi / (|a_perp f_perp^k| T_dip): real value and nearest integer.
pub fn optimal_pulse_number(
    target: &SpinTarget,
    seq: &PulseSequence,
    k: u32,
) -> Result<(f64, u64)> {
    let m = DipModel::new(target, seq, k, CrossingKind::Spurious)?;
    Ok((m.np_max, m.np_max_rounded()))
}

/// Global phase that closes the k-th spurious dip: the smaller in
/// magnitude of -phi_perp^k +- pi/2.
pub fn suppressing_phase(seq: &PulseSequence, k: u32) -> f64 {
    let fp = seq.with_global_phase(0.0).f_perp(k as i64);
    let phi = fp.im.atan2(fp.re);
    let a = wrap_angle(-phi + PI / 2.0);
    let b = wrap_angle(-phi - PI / 2.0);
    if a.abs() <= b.abs() {
        a
    } else {
        b
    }
}

/// Global phase that maximizes the k-th spurious dip depth: -phi_perp^k.
pub fn enhancing_phase(seq: &PulseSequence, k: u32) -> f64 {
    let fp = seq.with_global_phase(0.0).f_perp(k as i64);
    wrap_angle(-fp.im.atan2(fp.re))
}

/// Outcome of checking whether one species' spurious harmonic can pose as
/// another species' fundamental signal.
#[derive(Debug, Clone)]
pub struct MimicReport {
    /// Gyromagnetic ratio of the species being sensed (rad/s/T).
    pub gamma_primary: f64,
    /// Gyromagnetic ratio of the candidate impostor (rad/s/T).
    pub gamma_mimic: f64,
    /// Field (T).
    pub b0: f64,
    /// Sequence family the analysis assumed.
    pub family: SequenceFamily,
    /// True when an integer spurious harmonic of the mimic lands on the
    /// primary's fundamental dip within tolerance.
    pub coincides: bool,
    /// Nearest integer harmonic of the mimic.
    pub k: u32,
    /// Exact harmonic ratio fundamental * omega_mimic / omega_primary.
    pub k_real: f64,
    /// Relative distance |k_real - k| / k.
    pub offset: f64,
    /// Harmonic ratio n = fundamental / k as a reduced fraction.
    pub ratio_num: u32,
    /// Denominator of the reduced fraction.
    pub ratio_den: u32,
    /// The primary's fundamental dip period at b0 (s).
    pub t_dip_primary: f64,
    /// arg f_perp^k of the family at phi_g = 0.
    pub phi_perp: f64,
    /// Global phase that suppresses the mimic's dip.
    pub phi_g_suppress: f64,
    /// Global phase that maximizes the mimic's dip.
    pub phi_g_enhance: f64,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Check whether `mimic`'s spurious harmonic lands on `primary`'s
/// fundamental dip for the given family, in the far-field limit
/// omega_av = |gamma| B0.
///
/// The primary's fundamental sits at T = 2 pi f / omega_primary (f the
/// family's fundamental harmonic); the mimic dips there at harmonic
/// k_real = f * omega_mimic / omega_primary. A coincidence needs k_real
/// within 2% of an integer k >= 1 whose transverse coefficient is open.
pub fn mimic_analysis(
    primary: &Isotope,
    mimic: &Isotope,
    b0: f64,
    family: SequenceFamily,
) -> Result<MimicReport> {
    if b0 <= 0.0 || b0.is_nan() {
        return Err(Error::Config(format!("field must be positive, got {b0}")));
    }
    let omega_p = primary.gamma.abs() * b0;
    let omega_m = mimic.gamma.abs() * b0;
    if omega_p == 0.0 || omega_m == 0.0 {
        return Err(Error::Config("gyromagnetic ratio must be nonzero".into()));
    }
    let fundamental = family.fundamental_harmonic();
    let k_real = fundamental as f64 * omega_m / omega_p;
    let k = k_real.round().max(1.0) as u32;
    let offset = (k_real - k as f64).abs() / k as f64;
    let t_dip_primary = 2.0 * PI * fundamental as f64 / omega_p;

    // representative sequence: the family at the coincidence period with a
    // pulse one tenth of the spacing (phi_perp^k is scale-free for the
    // built-in trains)
    let tau = t_dip_primary / family.pulse_count() as f64;
    let rabi = 10.0 * PI / tau;
    let seq = family.build(tau, rabi, 0.0, None)?;
    let fp = seq.f_perp(k as i64);
    let open = fp.norm() > 1e-9;

    let coincides = offset <= 0.02 && k_real >= 0.5 && open;
    let g = gcd(fundamental, k);
    Ok(MimicReport {
        gamma_primary: primary.gamma,
        gamma_mimic: mimic.gamma,
        b0,
        family,
        coincides,
        k,
        k_real,
        offset,
        ratio_num: fundamental / g,
        ratio_den: k / g,
        t_dip_primary,
        phi_perp: if open { fp.im.atan2(fp.re) } else { 0.0 },
        phi_g_suppress: if open { suppressing_phase(&seq, k) } else { 0.0 },
        phi_g_enhance: if open { enhancing_phase(&seq, k) } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isotopes::{gamma_of, Isotope};
    use crate::pulses::xy8;

    const TWO_PI: f64 = 2.0 * PI;

    fn fig_target() -> SpinTarget {
        SpinTarget::from_average(TWO_PI * 2.0e6, TWO_PI * 200.0e3, 0.0).unwrap()
    }

    fn iso(sym: &str) -> Isotope {
        Isotope {
            symbol: "",
            gamma: gamma_of(sym).unwrap(),
        }
    }

    #[test]
    fn expected_dip_reaches_full_contrast() {
        let t = fig_target();
        let s = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap();
        let m = DipModel::new(&t, &s, 4, CrossingKind::Expected).unwrap();
        let t_dip = t.dip_period(4).unwrap();
        // quarter period of the Rabi-like oscillation: N_p eps T = pi/2
        let n_p = (PI / (m.coupling * t_dip)).round() as u64;
        let l = m.coherence(n_p, t_dip).l;
        assert!(l < -0.99, "L = {l}");
        // far detuned: no dip (the k = 4 coupling is strong, so the
        // validity window spans a couple of periods)
        let far = expected_coherence(&t, &s, 4, 60, t_dip * 3.0).unwrap();
        assert!(far.l > 0.95 && !far.in_window, "L = {:?}", far);
    }

    #[test]
    fn spurious_dip_respects_phase_control() {
        let t = fig_target();
        let s = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap();
        let t_dip = t.dip_period(2).unwrap();
        let (np_real, np) = optimal_pulse_number(&t, &s, 2).unwrap();
        assert!(np_real > 1.0);
        // phi_g = 0 with phi_perp = pi/4: depth cos^2 = 1/2, L bottoms at 0
        let l0 = spurious_coherence(&t, &s, 2, np, t_dip).unwrap().l;
        assert!(l0.abs() < 0.05, "L = {l0}");
        // enhancing phase: full contrast
        let se = s.with_global_phase(enhancing_phase(&s, 2));
        let le = spurious_coherence(&t, &se, 2, np, t_dip).unwrap().l;
        assert!(le < -0.99, "L = {le}");
        // suppressing phase: dip gone at every period
        let ss = s.with_global_phase(suppressing_phase(&s, 2));
        for i in 0..200 {
            let tt = t_dip * (0.98 + 0.04 * i as f64 / 199.0);
            let l = spurious_coherence(&t, &ss, 2, np, tt).unwrap().l;
            assert!((l - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_bounds_every_pulse_count() {
        let t = fig_target();
        let s = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap();
        let m = DipModel::new(&t, &s, 2, CrossingKind::Spurious).unwrap();
        let t_dip = t.dip_period(2).unwrap();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            // xorshift for reproducible pseudo-random samples
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let tt = t_dip * (1.0 + (next() - 0.5) * 0.02);
            let n_p = (next() * 200.0) as u64;
            let l = m.coherence(n_p, tt).l;
            let env = m.envelope(tt).l;
            assert!(l >= env - 1e-12, "L = {l} below envelope {env}");
        }
    }

    #[test]
    fn closed_coefficient_is_rejected() {
        let t = fig_target();
        let delta = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, Some(0.0)).unwrap();
        assert!(matches!(
            spurious_coherence(&t, &delta, 2, 10, t.dip_period(2).unwrap()),
            Err(Error::ClosedCrossing { .. })
        ));
        let s = xy8(0.25e-6, TWO_PI * 20.0e6, 0.0, None).unwrap();
        // f_z^2 = 0 for XY8
        assert!(matches!(
            expected_coherence(&t, &s, 2, 10, t.dip_period(2).unwrap()),
            Err(Error::ClosedCrossing { .. })
        ));
    }

    #[test]
    fn table_of_isotope_mimics() {
        let rows = [
            ("1H", "13C", 0.03, 1u32, 4u32, 1u32, -PI / 4.0),
            ("29Si", "13C", 0.05, 5, 4, 5, -PI / 4.0),
            ("31P", "1H", 0.1, 10, 2, 5, PI / 4.0),
        ];
        for (p, m, b0, k, num, den, phi) in rows {
            let r = mimic_analysis(&iso(p), &iso(m), b0, SequenceFamily::Xy8).unwrap();
            assert!(r.coincides, "{p}/{m} should coincide");
            assert_eq!(r.k, k);
            assert_eq!((r.ratio_num, r.ratio_den), (num, den));
            assert!(
                (r.phi_g_suppress - phi).abs() < 1e-12,
                "{p}/{m}: phi_g = {}",
                r.phi_g_suppress
            );
            assert!(r.offset < 0.02);
        }
        // same isotope: k_real = 4 exactly, but f_perp^4 = 0 for XY8
        let r = mimic_analysis(&iso("13C"), &iso("13C"), 0.05, SequenceFamily::Xy8).unwrap();
        assert!(!r.coincides);
    }
}
