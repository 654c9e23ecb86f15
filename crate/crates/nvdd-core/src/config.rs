//! Declarative experiment configuration, parsed from TOML or JSON.
//!
//! Frequencies in configuration files are plain Hz and are multiplied by
//! 2 pi exactly once, when the model types are built here; everything
//! downstream works in angular units (rad/s). Times are seconds, phases
//! radians, fields tesla, as the `_s`/`_rad`/`_t` suffixes spell out.

use crate::error::{Error, Result};
use crate::floquet::CrossingKind;
use crate::isotopes;
use crate::propagator::Abscissa;
use crate::pulses::{Pulse, PulseSequence, SequenceFamily};
use crate::spin_model::SpinTarget;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Solver selection for generic scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Piecewise-exact propagation of the full two-spin system.
    Exact,
    /// Closed-form two-level dip formulas.
    Analytic,
    /// Stroboscopic propagator from the two-level Floquet reduction.
    Floquet,
    /// Every applicable method, one column each.
    All,
}

/// Scan abscissa selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbscissaKind {
    /// Sequence period T (seconds).
    Period,
    /// Repetition count N_p (dimensionless, rounded to integers).
    PulseCount,
    /// Global pulse phase phi_g (radians).
    GlobalPhase,
}

impl AbscissaKind {
    /// The propagator-side abscissa tag.
    pub fn to_abscissa(self) -> Abscissa {
        match self {
            AbscissaKind::Period => Abscissa::Period,
            AbscissaKind::PulseCount => Abscissa::PulseCount,
            AbscissaKind::GlobalPhase => Abscissa::GlobalPhase,
        }
    }
}

/// Dip flavor for analytic methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyticKind {
    /// Dip opened by f_z^k.
    Expected,
    /// Dip opened by f_perp^k.
    Spurious,
}

impl AnalyticKind {
    /// The matching crossing classification.
    pub fn to_crossing(self) -> CrossingKind {
        match self {
            AnalyticKind::Expected => CrossingKind::Expected,
            AnalyticKind::Spurious => CrossingKind::Spurious,
        }
    }
}

/// One nuclear target, specified either by its Zeeman-basis ingredients
/// or directly by the average-Hamiltonian triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    /// Gyromagnetic ratio (by isotope symbol or explicit value), field,
    /// and hyperfine components.
    Zeeman {
        /// Isotope symbol, e.g. "13C"; sets the gyromagnetic ratio.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        isotope: Option<String>,
        /// Explicit gyromagnetic ratio (rad/s/T); alternative to `isotope`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma_rad_s_t: Option<f64>,
        /// Static field along the NV axis (T).
        b0_t: f64,
        /// Transverse hyperfine component (Hz).
        a_x_hz: f64,
        /// Axial hyperfine component (Hz).
        a_z_hz: f64,
    },
    /// Average-Hamiltonian frequency and couplings.
    Average {
        /// Average precession frequency (Hz).
        omega_av_hz: f64,
        /// Transverse coupling (Hz).
        a_perp_hz: f64,
        /// Axial coupling (Hz); usually negligible.
        #[serde(default)]
        a_par_hz: f64,
    },
}

impl TargetSpec {
    /// Resolve into a [`SpinTarget`] (angular units).
    pub fn build(&self) -> Result<SpinTarget> {
        match self {
            TargetSpec::Zeeman {
                isotope,
                gamma_rad_s_t,
                b0_t,
                a_x_hz,
                a_z_hz,
            } => {
                let gamma = match (isotope, gamma_rad_s_t) {
                    (Some(sym), None) => isotopes::gamma_of(sym).ok_or_else(|| {
                        Error::Config(format!("unknown isotope symbol {sym:?}"))
                    })?,
                    (None, Some(g)) => *g,
                    (Some(_), Some(_)) => {
                        return Err(Error::Config(
                            "give either isotope or gamma_rad_s_t, not both".into(),
                        ))
                    }
                    (None, None) => {
                        return Err(Error::Config(
                            "a Zeeman target needs isotope or gamma_rad_s_t".into(),
                        ))
                    }
                };
                SpinTarget::new(gamma, *b0_t, TWO_PI * a_x_hz, TWO_PI * a_z_hz)
            }
            TargetSpec::Average {
                omega_av_hz,
                a_perp_hz,
                a_par_hz,
            } => SpinTarget::from_average(
                TWO_PI * omega_av_hz,
                TWO_PI * a_perp_hz,
                TWO_PI * a_par_hz,
            ),
        }
    }
}

/// One pulse of an explicit sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Pulse center (s).
    pub center_s: f64,
    /// Drive phase (rad), before the global phase is added.
    pub phase_rad: f64,
    /// Rabi frequency (Hz).
    pub rabi_hz: f64,
    /// Duration (s); default pi/Omega, a pi pulse.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

/// Pulse sequence, either a named family or an explicit pulse list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceSpec {
    /// Built-in family (xy8, cpmg8, xy4) from inter-pulse spacing and
    /// Rabi frequency.
    Builtin {
        /// Family name: "xy8", "cpmg8", or "xy4".
        family: String,
        /// Inter-pulse spacing tau (s); the period is tau times the
        /// family's pulse count.
        tau_s: f64,
        /// Rabi frequency (Hz).
        rabi_hz: f64,
        /// Global phase added to every pulse (rad).
        #[serde(default)]
        global_phase_rad: f64,
        /// Pulse duration override (s); default pi/Omega, 0 for ideal
        /// delta pulses.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_p_s: Option<f64>,
    },
    /// Arbitrary pulse list over one period.
    Explicit {
        /// Sequence period (s).
        period_s: f64,
        /// Pulses, sorted by center.
        pulses: Vec<PulseSpec>,
        /// Global phase added to every pulse (rad).
        #[serde(default)]
        global_phase_rad: f64,
    },
}

impl SequenceSpec {
    /// Resolve into a [`PulseSequence`] (angular units).
    pub fn build(&self) -> Result<PulseSequence> {
        match self {
            SequenceSpec::Builtin {
                family,
                tau_s,
                rabi_hz,
                global_phase_rad,
                t_p_s,
            } => {
                let fam = SequenceFamily::parse(family)?;
                fam.build(*tau_s, TWO_PI * rabi_hz, *global_phase_rad, *t_p_s)
            }
            SequenceSpec::Explicit {
                period_s,
                pulses,
                global_phase_rad,
            } => {
                let built: Vec<Pulse> = pulses
                    .iter()
                    .map(|p| {
                        let rabi = TWO_PI * p.rabi_hz;
                        Pulse {
                            center: p.center_s,
                            phase: p.phase_rad,
                            rabi,
                            duration: p.duration_s.unwrap_or(PI / rabi),
                        }
                    })
                    .collect();
                PulseSequence::new(*period_s, built, *global_phase_rad)
            }
        }
    }
}

fn default_points() -> usize {
    201
}

fn default_np() -> u64 {
    1
}

fn default_method() -> Method {
    Method::Exact
}

/// What to sweep and how to evaluate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    /// Swept quantity.
    pub abscissa: AbscissaKind,
    /// First grid value (s, count, or rad depending on the abscissa).
    pub start: f64,
    /// Last grid value.
    pub stop: f64,
    /// Grid size.
    #[serde(default = "default_points")]
    pub points: usize,
    /// Repetition count (ignored when the abscissa is the pulse count).
    #[serde(default = "default_np")]
    pub n_p: u64,
    /// Keep the axial coupling in the exact propagation.
    #[serde(default)]
    pub include_a_par: bool,
    /// Solver selection.
    #[serde(default = "default_method")]
    pub method: Method,
    /// Harmonic index for analytic and Floquet methods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Dip flavor for analytic methods; default spurious.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<AnalyticKind>,
}

impl ScanSpec {
    /// The evenly spaced grid, inclusive of both ends.
    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| self.start + step * i as f64)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Config("scan.points must be at least 1".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::Config("scan range must be finite".into()));
        }
        let analytic = matches!(self.method, Method::Analytic | Method::Floquet | Method::All);
        if analytic && self.k.is_none() {
            return Err(Error::Config(
                "analytic and floquet methods need scan.k".into(),
            ));
        }
        if let Some(k) = self.k {
            if k == 0 {
                return Err(Error::Config("scan.k must be at least 1".into()));
            }
        }
        if self.abscissa != AbscissaKind::PulseCount && self.n_p == 0 {
            return Err(Error::Config("scan.n_p must be at least 1".into()));
        }
        if self.abscissa == AbscissaKind::PulseCount && (self.start < 0.0 || self.stop < 0.0) {
            return Err(Error::Config("pulse counts cannot be negative".into()));
        }
        Ok(())
    }
}

/// A full experiment description: targets, sequence, and scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Nuclear targets; multiple targets combine multiplicatively.
    pub targets: Vec<TargetSpec>,
    /// Pulse sequence.
    pub sequence: SequenceSpec,
    /// Scan description.
    pub scan: ScanSpec,
}

impl ExperimentConfig {
    /// Parse a TOML or JSON document, distinguished by the leading
    /// non-whitespace character.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)
                .map_err(|e| Error::Config(format!("JSON config: {e}")))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(format!("TOML config: {e}")))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Validate cross-field constraints without building model types.
    pub fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::Config("at least one target is required".into()));
        }
        self.scan.validate()
    }

    /// Build every target (angular units).
    pub fn build_targets(&self) -> Result<Vec<SpinTarget>> {
        self.targets.iter().map(TargetSpec::build).collect()
    }

    /// Build the sequence (angular units).
    pub fn build_sequence(&self) -> Result<PulseSequence> {
        self.sequence.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOML_EXAMPLE: &str = r#"
        [[targets]]
        omega_av_hz = 2.0e6
        a_perp_hz = 200.0e3

        [sequence]
        family = "xy8"
        tau_s = 0.25e-6
        rabi_hz = 20.0e6

        [scan]
        abscissa = "period"
        start = 1.9e-6
        stop = 2.1e-6
        points = 11
        n_p = 60
    "#;

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::parse(TOML_EXAMPLE).unwrap();
        let targets = cfg.build_targets().unwrap();
        assert_eq!(targets.len(), 1);
        assert!((targets[0].omega_av - TWO_PI * 2.0e6).abs() < 1e-3);
        let seq = cfg.build_sequence().unwrap();
        assert!((seq.period() - 2.0e-6).abs() < 1e-18);
        assert_eq!(cfg.scan.grid().len(), 11);
        assert_eq!(cfg.scan.method, Method::Exact);
    }

    #[test]
    fn json_and_zeeman_target() {
        let json = r#"{
            "targets": [
                {"isotope": "13C", "b0_t": 0.05, "a_x_hz": 50.0e3, "a_z_hz": 10.0e3}
            ],
            "sequence": {"family": "cpmg8", "tau_s": 1.0e-6, "rabi_hz": 10.0e6},
            "scan": {"abscissa": "pulse-count", "start": 1, "stop": 100, "points": 100}
        }"#;
        let cfg = ExperimentConfig::parse(json).unwrap();
        let t = &cfg.build_targets().unwrap()[0];
        let gamma = crate::isotopes::gamma_of("13C").unwrap();
        // weak hyperfine: omega_av close to the bare Larmor frequency
        assert!((t.omega_av - gamma * 0.05).abs() < TWO_PI * 60.0e3);
    }

    #[test]
    fn explicit_pulse_list() {
        let toml = r#"
            [[targets]]
            omega_av_hz = 1.0e6
            a_perp_hz = 10.0e3

            [sequence]
            period_s = 1.0e-6
            pulses = [
                { center_s = 0.25e-6, phase_rad = 0.0, rabi_hz = 50.0e6 },
                { center_s = 0.75e-6, phase_rad = 1.5707963267948966, rabi_hz = 50.0e6 },
            ]

            [scan]
            abscissa = "global-phase"
            start = 0.0
            stop = 3.141592653589793
        "#;
        let cfg = ExperimentConfig::parse(toml).unwrap();
        let seq = cfg.build_sequence().unwrap();
        assert_eq!(seq.pulses().len(), 2);
        assert_eq!(cfg.scan.points, 201);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        // analytic without k
        let bad = r#"
            [[targets]]
            omega_av_hz = 1.0e6
            a_perp_hz = 10.0e3
            [sequence]
            family = "xy8"
            tau_s = 0.25e-6
            rabi_hz = 20.0e6
            [scan]
            abscissa = "period"
            start = 1.0e-6
            stop = 2.0e-6
            method = "analytic"
        "#;
        assert!(matches!(
            ExperimentConfig::parse(bad),
            Err(Error::Config(_))
        ));
        // no targets
        let empty = r#"
            targets = []
            [sequence]
            family = "xy8"
            tau_s = 0.25e-6
            rabi_hz = 20.0e6
            [scan]
            abscissa = "period"
            start = 1.0e-6
            stop = 2.0e-6
        "#;
        assert!(matches!(
            ExperimentConfig::parse(empty),
            Err(Error::Config(_))
        ));
        // unknown isotope
        let iso = r#"
            [[targets]]
            isotope = "3He"
            b0_t = 0.1
            a_x_hz = 1.0e3
            a_z_hz = 0.0
            [sequence]
            family = "xy8"
            tau_s = 0.25e-6
            rabi_hz = 20.0e6
            [scan]
            abscissa = "period"
            start = 1.0e-6
            stop = 2.0e-6
        "#;
        let parsed = ExperimentConfig::parse(iso).unwrap();
        assert!(parsed.build_targets().is_err());
    }
}
