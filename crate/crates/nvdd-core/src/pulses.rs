//! Periodic pulse sequences, modulation functions, and their Fourier spectra.
//!
//! A pulse sequence is a period `T` containing top-hat pi pulses. In the
//! toggling frame of the drive, the NV operator sigma_z is rotated into
//! `f_x(t) sigma_x + f_y(t) sigma_y + f_z(t) sigma_z`; the real triple
//! `(f_x, f_y, f_z)` has unit norm at every instant. Between pulses it is
//! `(0, 0, +-1)` with the sign flipping at each pi pulse; during pulse `m`
//! it rotates continuously with the drive, carrying a cumulative phase that
//! depends on all earlier pulse phases.
//!
//! The Fourier coefficients `f_i^k` of these modulation functions act as
//! filter weights: `f_z^k` drives the expected coherence dips and
//! `f_perp^k = f_x^k + i f_y^k` the spurious ones. Both are evaluated in
//! closed form per segment, so no quadrature error enters downstream dip
//! widths.

use crate::error::{Error, Result};
use crate::linalg::{wrap_angle, C64};
use std::f64::consts::PI;

/// Component selector for [`fourier_coefficient`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// One top-hat pulse. `duration = 0` encodes the ideal delta-pulse limit;
/// otherwise `rabi * duration` must equal pi (only pi pulses are supported).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    /// Center time within the period (s).
    pub center: f64,
    /// Drive phase (rad); 0 is X, pi/2 is Y.
    pub phase: f64,
    /// Drive amplitude (rad/s).
    pub rabi: f64,
    /// Pulse length t_p (s).
    pub duration: f64,
}

impl Pulse {
    /// A pi pulse of the given amplitude: duration pi / rabi.
    pub fn pi(center: f64, phase: f64, rabi: f64) -> Self {
        Pulse {
            center,
            phase,
            rabi,
            duration: PI / rabi,
        }
    }

    fn half_width(&self) -> f64 {
        self.duration / 2.0
    }
}

/// A periodic sequence of pi pulses with a common global phase offset.
///
/// The effective phase of pulse `m` is `phase_m + global_phase`; the global
/// phase is kept separate so suppression scans can vary it without
/// rebuilding the sequence geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    period: f64,
    pulses: Vec<Pulse>,
    global_phase: f64,
}

/// One piecewise segment of the modulation functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// Free evolution on [a, b); `flips` pulses lie before it, so
    /// f_z = (-1)^flips there.
    Free { a: f64, b: f64, flips: usize },
    /// Pulse number `index` (1-based) active on [a, b].
    Pulse { a: f64, b: f64, index: usize },
}

impl PulseSequence {
    /// Validate and build a sequence.
    ///
    /// Requirements: positive finite period; pulses sorted by center with
    /// pairwise disjoint supports inside [0, T]; every finite-duration pulse
    /// has area rabi * duration = pi (relative tolerance 1e-9).
    ///
    /// A sequence whose f_z^0 does not vanish is accepted but logged as a
    /// warning, since an unbalanced sequence leaves a residual static
    /// coupling.
    pub fn new(period: f64, pulses: Vec<Pulse>, global_phase: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidSequence(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        let mut prev_end = 0.0;
        for (i, p) in pulses.iter().enumerate() {
            if !(p.center.is_finite() && p.phase.is_finite()) {
                return Err(Error::InvalidSequence(format!(
                    "pulse {i}: non-finite center or phase"
                )));
            }
            if !(p.duration >= 0.0 && p.duration.is_finite()) {
                return Err(Error::InvalidSequence(format!(
                    "pulse {i}: duration must be finite and >= 0, got {}",
                    p.duration
                )));
            }
            if p.duration > 0.0 {
                if p.rabi <= 0.0 || p.rabi.is_nan() {
                    return Err(Error::InvalidSequence(format!(
                        "pulse {i}: finite-duration pulse needs rabi > 0, got {}",
                        p.rabi
                    )));
                }
                let area = p.rabi * p.duration;
                if (area - PI).abs() > 1e-9 * PI {
                    return Err(Error::InvalidSequence(format!(
                        "pulse {i}: area rabi*duration = {area:.6e} is not pi; \
                         only pi pulses are supported"
                    )));
                }
            }
            let (a, b) = (p.center - p.half_width(), p.center + p.half_width());
            if a < 0.0 || b > period {
                return Err(Error::InvalidSequence(format!(
                    "pulse {i}: support [{a:.3e}, {b:.3e}] outside [0, {period:.3e}]"
                )));
            }
            if a < prev_end {
                return Err(Error::InvalidSequence(format!(
                    "pulse {i}: support overlaps the previous pulse"
                )));
            }
            prev_end = b;
        }
        let seq = PulseSequence {
            period,
            pulses,
            global_phase,
        };
        let f_z0 = seq.fourier_triple(0)[2];
        if f_z0.norm() > 1e-9 {
            log::warn!(
                "unbalanced sequence: f_z^0 = {:.3e} leaves a residual static coupling",
                f_z0.re
            );
        }
        Ok(seq)
    }

    /// Period T (s).
    pub fn period(&self) -> f64 {
        self.period
    }

    /// The pulses, sorted by center.
    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    /// Global phase offset added to every pulse phase (rad).
    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    /// Replace the global phase, keeping the geometry fixed.
    pub fn set_global_phase(&mut self, phi_g: f64) {
        self.global_phase = phi_g;
    }

    /// Copy of this sequence with a different global phase.
    pub fn with_global_phase(&self, phi_g: f64) -> Self {
        let mut s = self.clone();
        s.global_phase = phi_g;
        s
    }

    /// Effective phase of pulse `index` (1-based): phase + global phase.
    pub fn effective_phase(&self, index: usize) -> f64 {
        self.pulses[index - 1].phase + self.global_phase
    }

    /// Rescale the sequence to a new period: pulse centers move
    /// proportionally, pulse lengths and amplitudes stay physical.
    ///
    /// For the built-in trains this is exactly the tau = T/n family used by
    /// period scans. Shrinking far enough for pulses to overlap fails
    /// validation.
    pub fn scaled_to(&self, period: f64) -> Result<Self> {
        let r = period / self.period;
        let pulses = self
            .pulses
            .iter()
            .map(|p| Pulse {
                center: p.center * r,
                ..*p
            })
            .collect();
        PulseSequence::new(period, pulses, self.global_phase)
    }

    /// Ideal-pulse counterpart: same centers and phases, zero durations.
    pub fn delta_limit(&self) -> Self {
        let pulses = self
            .pulses
            .iter()
            .map(|p| Pulse {
                duration: 0.0,
                ..*p
            })
            .collect();
        PulseSequence {
            period: self.period,
            pulses,
            global_phase: self.global_phase,
        }
    }

    /// Cumulative toggling-frame phase carried by pulse `m` (1-based):
    /// 2 sum_{j<m} (-1)^{j+1} (phi_j + phi_g) + (-1)^{m+1} ((phi_m + phi_g) + pi/2).
    ///
    /// Each preceding pi pulse reflects the frame, so earlier phases enter
    /// doubled with alternating sign.
    pub fn toggled_phase(&self, m: usize) -> f64 {
        let mut s = 0.0;
        for j in 1..m {
            s += 2.0 * alt_sign(j) * self.effective_phase(j);
        }
        s + alt_sign(m) * (self.effective_phase(m) + PI / 2.0)
    }

    /// Piecewise decomposition of one period into free and pulse segments.
    pub fn segments(&self) -> Vec<Segment> {
        let mut segs = Vec::with_capacity(2 * self.pulses.len() + 1);
        let mut prev = 0.0;
        for (i, p) in self.pulses.iter().enumerate() {
            let m = i + 1;
            let (a, b) = (p.center - p.half_width(), p.center + p.half_width());
            if a > prev {
                segs.push(Segment::Free {
                    a: prev,
                    b: a,
                    flips: m - 1,
                });
            }
            if p.duration > 0.0 {
                segs.push(Segment::Pulse { a, b, index: m });
            }
            prev = b;
        }
        if self.period > prev {
            segs.push(Segment::Free {
                a: prev,
                b: self.period,
                flips: self.pulses.len(),
            });
        }
        segs
    }

    /// Modulation triple (f_x, f_y, f_z) at time `t` in [0, T).
    pub fn modulation_at(&self, t: f64) -> Result<(f64, f64, f64)> {
        if !(0.0 <= t && t < self.period) {
            return Err(Error::OutOfPeriod {
                t,
                period: self.period,
            });
        }
        let mut flips = 0;
        for (i, p) in self.pulses.iter().enumerate() {
            let m = i + 1;
            if p.duration > 0.0 && (t - p.center).abs() <= p.half_width() {
                let tp = t - p.center;
                let ph = self.toggled_phase(m);
                let c = (p.rabi * tp).cos();
                return Ok((
                    c * ph.cos(),
                    c * ph.sin(),
                    pulse_sign(m) * (p.rabi * tp).sin(),
                ));
            }
            if t > p.center {
                flips = m;
            }
        }
        Ok((0.0, 0.0, free_sign(flips)))
    }

    /// All three Fourier coefficients (f_x^k, f_y^k, f_z^k) in closed form.
    ///
    /// Free segments integrate the signed exponential directly; a pulse
    /// segment contributes sinc-weighted sidebands of the drive frequency
    /// around its center.
    pub fn fourier_triple(&self, k: i64) -> [C64; 3] {
        let t_tot = self.period;
        let beta = k as f64 * 2.0 * PI / t_tot;
        let mut fx = C64::new(0.0, 0.0);
        let mut fy = C64::new(0.0, 0.0);
        let mut fz = C64::new(0.0, 0.0);
        for seg in self.segments() {
            match seg {
                Segment::Free { a, b, flips } => {
                    let s = free_sign(flips);
                    if k == 0 {
                        fz += C64::new(s * (b - a) / t_tot, 0.0);
                    } else {
                        let num = expi(-beta * a) - expi(-beta * b);
                        fz += num * C64::new(0.0, -s / (beta * t_tot));
                    }
                }
                Segment::Pulse { a, b, index } => {
                    let p = &self.pulses[index - 1];
                    let h = (b - a) / 2.0;
                    let c = (a + b) / 2.0;
                    let ph = self.toggled_phase(index);
                    let eb = expi(-beta * c);
                    let w = p.rabi;
                    let amp_c = h * (sinc((w - beta) * h) + sinc((w + beta) * h)) / t_tot;
                    let amp_s = h * (sinc((w - beta) * h) - sinc((w + beta) * h)) / t_tot;
                    fx += eb * C64::new(amp_c * ph.cos(), 0.0);
                    fy += eb * C64::new(amp_c * ph.sin(), 0.0);
                    fz += eb * C64::new(0.0, -pulse_sign(index) * amp_s);
                }
            }
        }
        [fx, fy, fz]
    }

    /// Fourier coefficient of one modulation component at harmonic `k`.
    pub fn fourier_coefficient(&self, axis: Axis, k: i64) -> C64 {
        let f = self.fourier_triple(k);
        match axis {
            Axis::X => f[0],
            Axis::Y => f[1],
            Axis::Z => f[2],
        }
    }

    /// Transverse coefficient f_perp^k = f_x^k + i f_y^k.
    pub fn f_perp(&self, k: i64) -> C64 {
        let f = self.fourier_triple(k);
        f[0] + C64::new(0.0, 1.0) * f[1]
    }

    /// Phase of the transverse coefficient, phi_perp^k = arg f_perp^k.
    pub fn phi_perp(&self, k: i64) -> f64 {
        let fp = self.f_perp(k);
        fp.im.atan2(fp.re)
    }
}

/// (-1)^(j+1): sign with which pulse j's phase enters cumulative sums.
fn alt_sign(j: usize) -> f64 {
    if j % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// (-1)^m: sign of the in-pulse f_z term for pulse m.
fn pulse_sign(m: usize) -> f64 {
    if m.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// f_z value on a free segment preceded by `flips` pulses.
fn free_sign(flips: usize) -> f64 {
    if flips.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// sin(x)/x with the removable singularity filled in.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// e^{i phi} on the unit circle.
fn expi(phi: f64) -> C64 {
    C64::new(phi.cos(), phi.sin())
}

/// Spectrum entry at one harmonic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    /// Harmonic index.
    pub k: i64,
    /// Fourier coefficient of f_x.
    pub f_x: C64,
    /// Fourier coefficient of f_y.
    pub f_y: C64,
    /// Fourier coefficient of f_z.
    pub f_z: C64,
    /// f_perp^k = f_x^k + i f_y^k.
    pub f_perp: C64,
    /// |f_perp^k|.
    pub abs_perp: f64,
    /// arg f_perp^k in (-pi, pi].
    pub phi_perp: f64,
}

/// Fourier spectrum of the modulation functions over k in [-k_max, k_max].
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationSpectrum {
    /// Entries ordered by k from -k_max to k_max.
    pub entries: Vec<SpectrumEntry>,
    /// Truncated Parseval sum over all three components; tends to 1 as
    /// k_max grows since the modulation triple has pointwise unit norm.
    pub parseval: f64,
}

/// Compute the modulation spectrum up to `k_max` harmonics (k_max >= 1).
pub fn modulation_spectrum(seq: &PulseSequence, k_max: u32) -> Result<ModulationSpectrum> {
    if k_max == 0 {
        return Err(Error::InvalidHarmonic(0));
    }
    let k_max = i64::from(k_max);
    let mut entries = Vec::with_capacity((2 * k_max + 1) as usize);
    let mut parseval = 0.0;
    for k in -k_max..=k_max {
        let [f_x, f_y, f_z] = seq.fourier_triple(k);
        let f_perp = f_x + C64::new(0.0, 1.0) * f_y;
        parseval += f_x.norm_sqr() + f_y.norm_sqr() + f_z.norm_sqr();
        entries.push(SpectrumEntry {
            k,
            f_x,
            f_y,
            f_z,
            f_perp,
            abs_perp: f_perp.norm(),
            phi_perp: wrap_angle(f_perp.im.atan2(f_perp.re)),
        });
    }
    Ok(ModulationSpectrum { entries, parseval })
}

fn symmetric_train(
    n: usize,
    tau: f64,
    phases: &[f64],
    rabi: f64,
    global_phase: f64,
    t_p_override: Option<f64>,
) -> Result<PulseSequence> {
    if rabi <= 0.0 || rabi.is_nan() {
        return Err(Error::InvalidSequence(format!(
            "rabi must be positive, got {rabi}"
        )));
    }
    let t_p = t_p_override.unwrap_or(PI / rabi);
    if tau <= t_p {
        return Err(Error::InvalidSequence(format!(
            "pulse spacing tau = {tau:.3e} must exceed the pulse length t_p = {t_p:.3e}"
        )));
    }
    let pulses = (1..=n)
        .map(|m| Pulse {
            center: (m as f64 - 0.5) * tau,
            phase: phases[(m - 1) % phases.len()],
            rabi,
            duration: t_p,
        })
        .collect();
    PulseSequence::new(n as f64 * tau, pulses, global_phase)
}

/// XY8 sequence: 8 pulses at (m - 1/2) tau with phases X,Y,X,Y,Y,X,Y,X,
/// period 8 tau. Pulse length defaults to pi/rabi; `t_p_override = 0`
/// gives the ideal delta-pulse sequence.
pub fn xy8(
    tau: f64,
    rabi: f64,
    global_phase: f64,
    t_p_override: Option<f64>,
) -> Result<PulseSequence> {
    const H: f64 = PI / 2.0;
    symmetric_train(
        8,
        tau,
        &[0.0, H, 0.0, H, H, 0.0, H, 0.0],
        rabi,
        global_phase,
        t_p_override,
    )
}

/// CPMG sequence with the XY8 pulse positions but all phases X; one period
/// holds 8 pulses so it is directly comparable with [`xy8`].
pub fn cpmg8(
    tau: f64,
    rabi: f64,
    global_phase: f64,
    t_p_override: Option<f64>,
) -> Result<PulseSequence> {
    symmetric_train(8, tau, &[0.0], rabi, global_phase, t_p_override)
}

/// XY4 sequence: 4 pulses at (m - 1/2) tau with phases X,Y,X,Y, period 4 tau.
pub fn xy4(
    tau: f64,
    rabi: f64,
    global_phase: f64,
    t_p_override: Option<f64>,
) -> Result<PulseSequence> {
    const H: f64 = PI / 2.0;
    symmetric_train(4, tau, &[0.0, H, 0.0, H], rabi, global_phase, t_p_override)
}

/// Built-in sequence families selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceFamily {
    Xy8,
    Cpmg8,
    Xy4,
}

impl SequenceFamily {
    /// Parse a family name ("xy8" | "cpmg8" | "xy4").
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "xy8" => Ok(SequenceFamily::Xy8),
            "cpmg8" => Ok(SequenceFamily::Cpmg8),
            "xy4" => Ok(SequenceFamily::Xy4),
            other => Err(Error::InvalidSequence(format!(
                "unknown sequence family '{other}' (expected xy8, cpmg8, or xy4)"
            ))),
        }
    }

    /// Canonical lowercase name.
    pub fn name(self) -> &'static str {
        match self {
            SequenceFamily::Xy8 => "xy8",
            SequenceFamily::Cpmg8 => "cpmg8",
            SequenceFamily::Xy4 => "xy4",
        }
    }

    /// Pulses per period.
    pub fn pulse_count(self) -> usize {
        match self {
            SequenceFamily::Xy8 | SequenceFamily::Cpmg8 => 8,
            SequenceFamily::Xy4 => 4,
        }
    }

    /// Lowest harmonic k with f_z^k != 0: the family's fundamental
    /// resonance (n-pulse trains flip the frame n times per period, so the
    /// fundamental sits at k = n/2).
    pub fn fundamental_harmonic(self) -> u32 {
        match self {
            SequenceFamily::Xy8 | SequenceFamily::Cpmg8 => 4,
            SequenceFamily::Xy4 => 2,
        }
    }

    /// Build the sequence with pulse spacing `tau`.
    pub fn build(
        self,
        tau: f64,
        rabi: f64,
        global_phase: f64,
        t_p_override: Option<f64>,
    ) -> Result<PulseSequence> {
        match self {
            SequenceFamily::Xy8 => xy8(tau, rabi, global_phase, t_p_override),
            SequenceFamily::Cpmg8 => cpmg8(tau, rabi, global_phase, t_p_override),
            SequenceFamily::Xy4 => xy4(tau, rabi, global_phase, t_p_override),
        }
    }

    /// Build the sequence with total period `period` (tau = period / n).
    pub fn build_period(
        self,
        period: f64,
        rabi: f64,
        global_phase: f64,
        t_p_override: Option<f64>,
    ) -> Result<PulseSequence> {
        self.build(
            period / self.pulse_count() as f64,
            rabi,
            global_phase,
            t_p_override,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_xy8() -> PulseSequence {
        let rabi = 2.0 * PI * 20.0e6;
        xy8(0.25e-6, rabi, 0.0, None).unwrap()
    }

    #[test]
    fn xy8_geometry() {
        let s = fig_xy8();
        assert!((s.period() - 2.0e-6).abs() < 1e-18);
        assert_eq!(s.pulses().len(), 8);
        assert!((s.pulses()[0].duration - 25.0e-9).abs() < 1e-15);
        assert!((s.pulses()[2].center - 0.625e-6).abs() < 1e-18);
        assert_eq!(s.pulses()[4].phase, PI / 2.0);
        assert_eq!(s.pulses()[5].phase, 0.0);
    }

    #[test]
    fn overlap_rejected() {
        let rabi = 2.0 * PI * 20.0e6;
        let t_p = PI / rabi;
        assert!(xy8(t_p, rabi, 0.0, None).is_err());
        assert!(xy8(0.9 * t_p, rabi, 0.0, None).is_err());
    }

    #[test]
    fn non_pi_area_rejected() {
        let p = Pulse {
            center: 0.5e-6,
            phase: 0.0,
            rabi: 2.0 * PI * 20.0e6,
            duration: 10.0e-9,
        };
        assert!(PulseSequence::new(1.0e-6, vec![p], 0.0).is_err());
    }

    #[test]
    fn modulation_between_and_during_pulses() {
        let s = fig_xy8();
        let (fx, fy, fz) = s.modulation_at(0.05e-6).unwrap();
        assert_eq!((fx, fy, fz), (0.0, 0.0, 1.0));
        // center of pulse 1: frame mid-flip, f_z = 0, transverse norm 1
        let (fx, fy, fz) = s.modulation_at(0.125e-6).unwrap();
        assert!(fz.abs() < 1e-12);
        assert!((fx.hypot(fy) - 1.0).abs() < 1e-12);
        // past pulse 1: sign flipped
        let (_, _, fz) = s.modulation_at(0.2e-6).unwrap();
        assert_eq!(fz, -1.0);
        assert!(s.modulation_at(-1e-9).is_err());
        assert!(s.modulation_at(2.0e-6).is_err());
    }

    #[test]
    fn pointwise_unit_norm() {
        let s = fig_xy8();
        for i in 0..1000 {
            let t = (i as f64 + 0.5) / 1000.0 * s.period();
            let (fx, fy, fz) = s.modulation_at(t).unwrap();
            assert!((fx * fx + fy * fy + fz * fz - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_pulse_sequence_has_no_transverse_part() {
        let s = xy8(0.25e-6, 2.0 * PI * 20.0e6, 0.0, Some(0.0)).unwrap();
        for k in [1, 2, 3, 4, 5] {
            let [fx, fy, _] = s.fourier_triple(k);
            assert_eq!(fx, C64::new(0.0, 0.0));
            assert_eq!(fy, C64::new(0.0, 0.0));
        }
        for i in 0..100 {
            let (fx, fy, _) = s.modulation_at(i as f64 / 100.0 * s.period()).unwrap();
            assert_eq!((fx, fy), (0.0, 0.0));
        }
    }

    #[test]
    fn cpmg_has_zero_f_x() {
        let s = cpmg8(0.25e-6, 2.0 * PI * 20.0e6, 0.0, None).unwrap();
        for i in 0..500 {
            let t = (i as f64 + 0.5) / 500.0 * s.period();
            let (fx, _, _) = s.modulation_at(t).unwrap();
            assert!(fx.abs() < 1e-12, "f_x = {fx} at t = {t}");
        }
    }

    #[test]
    fn negative_harmonic_conjugates() {
        let s = fig_xy8();
        for k in 1..=10 {
            let f = s.fourier_triple(k);
            let g = s.fourier_triple(-k);
            for i in 0..3 {
                assert!((f[i].conj() - g[i]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn spectrum_shape_and_parseval_growth() {
        let s = fig_xy8();
        let sp8 = modulation_spectrum(&s, 8).unwrap();
        let sp24 = modulation_spectrum(&s, 24).unwrap();
        assert_eq!(sp8.entries.len(), 17);
        assert!(sp24.parseval > sp8.parseval);
        assert!(sp24.parseval < 1.0 + 1e-12);
        assert!(modulation_spectrum(&s, 0).is_err());
    }
}
