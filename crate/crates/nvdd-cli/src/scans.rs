//! Config-driven subcommands: coherence traces, quasienergy scans,
//! crossing gaps, modulation spectra, closed-form dips, and phase tables.

use nvdd_core::coherence::{enhancing_phase, suppressing_phase, DipModel};
use nvdd_core::config::{AbscissaKind, AnalyticKind, ExperimentConfig, Method};
use nvdd_core::floquet::{
    crossing_gap, quasienergy_scan, stroboscopic_propagator, CrossingKind, FloquetSpectrum,
};
use nvdd_core::propagator::{coherence_of, coherence_trace, Abscissa};
use nvdd_core::pulses::{modulation_spectrum, PulseSequence};
use nvdd_core::spin_model::SpinTarget;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{json_number, Table};
use crate::CliError;

/// Grid points handed to one worker at a time.
const CHUNK: usize = 32;

/// Exact coherence over `grid`, evaluated in parallel chunks.
pub fn parallel_trace(
    targets: &[SpinTarget],
    seq: &PulseSequence,
    n_p: u64,
    abscissa: Abscissa,
    grid: &[f64],
    include_a_par: bool,
) -> Result<Vec<f64>, CliError> {
    let chunks: Vec<Vec<f64>> = grid
        .par_chunks(CHUNK)
        .map(|c| coherence_trace(targets, seq, n_p, abscissa, c, include_a_par).map(|t| t.values))
        .collect::<Result<_, _>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Table metadata: the command, the full configuration, and the unit rule
/// applied at parse time.
fn metadata(cfg: &ExperimentConfig, command: &str, extra: Value) -> Value {
    let mut m = json!({
        "command": command,
        "config": cfg,
        "units": "config frequencies in Hz, multiplied by 2 pi at parse; derived angular quantities in rad/s",
    });
    if let (Some(obj), Some(add)) = (m.as_object_mut(), extra.as_object()) {
        for (key, val) in add {
            obj.insert(key.clone(), val.clone());
        }
    }
    m
}

fn need_k(cfg: &ExperimentConfig, command: &str) -> Result<u32, CliError> {
    cfg.scan
        .k
        .ok_or_else(|| CliError::Invalid(format!("{command} needs scan.k in the config")))
}

fn kind_of(cfg: &ExperimentConfig) -> CrossingKind {
    cfg.scan
        .kind
        .unwrap_or(AnalyticKind::Spurious)
        .to_crossing()
}

fn kind_name(kind: CrossingKind) -> &'static str {
    match kind {
        CrossingKind::Expected => "expected",
        CrossingKind::Spurious => "spurious",
        CrossingKind::Closed => "closed",
    }
}

/// Closed-form coherence at abscissa value `x`: product over targets.
fn analytic_value(
    targets: &[SpinTarget],
    seq: &PulseSequence,
    k: u32,
    kind: CrossingKind,
    abscissa: AbscissaKind,
    n_p: u64,
    x: f64,
) -> Result<f64, CliError> {
    let (seq_x, n_p_x, t_x) = match abscissa {
        AbscissaKind::Period => (seq.clone(), n_p, x),
        AbscissaKind::PulseCount => (seq.clone(), x.round().max(0.0) as u64, seq.period()),
        AbscissaKind::GlobalPhase => (seq.with_global_phase(x), n_p, seq.period()),
    };
    let mut l = 1.0;
    for t in targets {
        let model = DipModel::new(t, &seq_x, k, kind)?;
        l *= model.coherence(n_p_x, t_x).l;
    }
    Ok(l)
}

/// Stroboscopic-propagator coherence at abscissa value `x`.
fn floquet_value(
    targets: &[SpinTarget],
    seq: &PulseSequence,
    k: u32,
    abscissa: AbscissaKind,
    n_p: u64,
    x: f64,
) -> Result<f64, CliError> {
    let (seq_x, n_p_x) = match abscissa {
        AbscissaKind::Period => (seq.scaled_to(x)?, n_p),
        AbscissaKind::PulseCount => (seq.clone(), x.round().max(0.0) as u64),
        AbscissaKind::GlobalPhase => (seq.with_global_phase(x), n_p),
    };
    let mut l = 1.0;
    for t in targets {
        let m = stroboscopic_propagator(t, &seq_x, k, n_p_x)?;
        l *= coherence_of(&m, 1);
    }
    Ok(l)
}

/// `trace`: exact propagation of the configured scan.
pub fn trace(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let targets = cfg.build_targets()?;
    let seq = cfg.build_sequence()?;
    let scan = &cfg.scan;
    let grid = scan.grid();
    let values = parallel_trace(
        &targets,
        &seq,
        scan.n_p,
        scan.abscissa.to_abscissa(),
        &grid,
        scan.include_a_par,
    )?;
    let rows: Vec<Vec<f64>> = grid.iter().zip(&values).map(|(&x, &l)| vec![x, l]).collect();
    Ok(Table::from_f64(
        "trace",
        metadata(cfg, "trace", json!({})),
        &[scan.abscissa.to_abscissa().label(), "coherence"],
        &rows,
    ))
}

/// `run`: the configured scan with its configured method.
pub fn run(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let targets = cfg.build_targets()?;
    let seq = cfg.build_sequence()?;
    let scan = &cfg.scan;
    let grid = scan.grid();
    let x_label = scan.abscissa.to_abscissa().label();
    let kind = kind_of(cfg);

    let exact = |out: &mut Vec<Vec<f64>>| -> Result<(), CliError> {
        let values = parallel_trace(
            &targets,
            &seq,
            scan.n_p,
            scan.abscissa.to_abscissa(),
            &grid,
            scan.include_a_par,
        )?;
        for (row, l) in out.iter_mut().zip(values) {
            row.push(l);
        }
        Ok(())
    };
    let analytic = |out: &mut Vec<Vec<f64>>, k: u32| -> Result<(), CliError> {
        for (row, &x) in out.iter_mut().zip(&grid) {
            row.push(analytic_value(
                &targets,
                &seq,
                k,
                kind,
                scan.abscissa,
                scan.n_p,
                x,
            )?);
        }
        Ok(())
    };
    let floquet = |out: &mut Vec<Vec<f64>>, k: u32| -> Result<(), CliError> {
        for (row, &x) in out.iter_mut().zip(&grid) {
            row.push(floquet_value(&targets, &seq, k, scan.abscissa, scan.n_p, x)?);
        }
        Ok(())
    };

    let mut rows: Vec<Vec<f64>> = grid.iter().map(|&x| vec![x]).collect();
    let columns: Vec<&str> = match scan.method {
        Method::Exact => {
            exact(&mut rows)?;
            vec![x_label, "coherence"]
        }
        Method::Analytic => {
            analytic(&mut rows, need_k(cfg, "method analytic")?)?;
            vec![x_label, "coherence"]
        }
        Method::Floquet => {
            floquet(&mut rows, need_k(cfg, "method floquet")?)?;
            vec![x_label, "coherence"]
        }
        Method::All => {
            let k = need_k(cfg, "method all")?;
            exact(&mut rows)?;
            analytic(&mut rows, k)?;
            floquet(&mut rows, k)?;
            vec![x_label, "exact", "analytic", "floquet"]
        }
    };
    Ok(Table::from_f64(
        "run",
        metadata(cfg, "run", json!({"kind": kind_name(kind)})),
        &columns,
        &rows,
    ))
}

/// `floquet-scan`: tracked quasienergy branches over the period grid.
pub fn floquet_scan(cfg: &ExperimentConfig, l_max: Option<usize>) -> Result<Table, CliError> {
    let targets = cfg.build_targets()?;
    let seq = cfg.build_sequence()?;
    let scan = &cfg.scan;
    if scan.abscissa != AbscissaKind::Period {
        return Err(CliError::Invalid(
            "floquet-scan needs scan.abscissa = \"period\"".into(),
        ));
    }
    let l_max = match (l_max, scan.k) {
        (Some(l), _) => l,
        (None, Some(k)) => (k as usize + 12).max(16),
        (None, None) => {
            return Err(CliError::Invalid(
                "floquet-scan needs scan.k or --l-max".into(),
            ))
        }
    };
    let grid = scan.grid();
    let spectrum = quasienergy_scan(&targets[0], &seq, &grid, l_max)?;
    Ok(spectrum_table(
        "floquet_scan",
        metadata(cfg, "floquet-scan", json!({"l_max": l_max})),
        &spectrum,
    ))
}

/// Table of folded quasienergy branches: the period column plus one
/// column per tracked branch (rad/s).
pub fn spectrum_table(name: &str, metadata: Value, spectrum: &FloquetSpectrum) -> Table {
    let mut columns = vec!["period_s".to_string()];
    columns.extend((1..=spectrum.tracked.len()).map(|i| format!("quasienergy_{i}")));
    let rows: Vec<Vec<f64>> = spectrum
        .periods
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let mut row = vec![t];
            row.extend(spectrum.tracked.iter().map(|branch| branch[j]));
            row
        })
        .collect();
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    Table::from_f64(name, metadata, &cols, &rows)
}

/// `gap`: avoided-crossing gap at the configured harmonic, one row per
/// target.
pub fn gap(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let targets = cfg.build_targets()?;
    let seq = cfg.build_sequence()?;
    let k = need_k(cfg, "gap")?;
    let mut rows = Vec::new();
    for t in &targets {
        let g = crossing_gap(t, &seq, k)?;
        rows.push(vec![
            json!(g.k),
            json_number(g.t_center),
            json_number(g.gap),
            json_number(g.predicted),
            json!(kind_name(g.kind)),
            json!(g.coincident),
            json!(g.l_max),
        ]);
    }
    Ok(Table {
        name: "gap".into(),
        metadata: metadata(cfg, "gap", json!({})),
        columns: [
            "k",
            "t_dip_s",
            "gap_rad_s",
            "predicted_gap_rad_s",
            "kind",
            "coincident",
            "l_max",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        rows,
    })
}

/// `modspec`: modulation-function Fourier table of the configured
/// sequence.
pub fn modspec(cfg: &ExperimentConfig, k_max: u32) -> Result<Table, CliError> {
    let seq = cfg.build_sequence()?;
    let spec = modulation_spectrum(&seq, k_max)?;
    let rows: Vec<Vec<Value>> = spec
        .entries
        .iter()
        .map(|e| {
            vec![
                json!(e.k),
                json_number(e.f_z.re),
                json_number(e.f_z.im),
                json_number(e.abs_perp),
                json_number(e.phi_perp),
            ]
        })
        .collect();
    Ok(Table {
        name: "modspec".into(),
        metadata: metadata(
            cfg,
            "modspec",
            json!({"k_max": k_max, "parseval": spec.parseval}),
        ),
        columns: ["k", "f_z_re", "f_z_im", "abs_f_perp", "phi_perp_rad"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows,
    })
}

/// `dip`: closed-form dip curve and envelope over the period grid.
pub fn dip(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let targets = cfg.build_targets()?;
    let seq = cfg.build_sequence()?;
    let scan = &cfg.scan;
    if scan.abscissa != AbscissaKind::Period {
        return Err(CliError::Invalid(
            "dip needs scan.abscissa = \"period\"".into(),
        ));
    }
    let k = need_k(cfg, "dip")?;
    let kind = kind_of(cfg);
    let models: Vec<DipModel> = targets
        .iter()
        .map(|t| DipModel::new(t, &seq, k, kind))
        .collect::<Result<_, _>>()?;

    let grid = scan.grid();
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .map(|&t| {
            let l: f64 = models.iter().map(|m| m.coherence(scan.n_p, t).l).product();
            let env: f64 = models.iter().map(|m| m.envelope(t).l).product();
            vec![t, l, env]
        })
        .collect();
    let dips: Vec<Value> = models
        .iter()
        .map(|m| {
            json!({
                "k": m.k,
                "kind": kind_name(m.kind),
                "t_dip_s": m.t_dip,
                "coupling_rad_s": m.coupling,
                "phi_perp_rad": m.phi_perp,
                "phi_g_rad": m.phi_g,
                "np_max": m.np_max,
                "w_t_s": m.w_t,
            })
        })
        .collect();
    Ok(Table::from_f64(
        "dip",
        metadata(cfg, "dip", json!({"dips": dips})),
        &["period_s", "coherence", "envelope"],
        &rows,
    ))
}

/// `suppress`: phase handles of the configured sequence at harmonic `k`.
pub fn suppress(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let seq = cfg.build_sequence()?;
    let k = need_k(cfg, "suppress")?;
    let bare = seq.with_global_phase(0.0);
    let rows = vec![vec![
        json!(k),
        json_number(bare.f_perp(k as i64).norm()),
        json_number(bare.phi_perp(k as i64)),
        json_number(suppressing_phase(&seq, k)),
        json_number(enhancing_phase(&seq, k)),
    ]];
    Ok(Table {
        name: "suppress".into(),
        metadata: metadata(cfg, "suppress", json!({})),
        columns: [
            "k",
            "abs_f_perp",
            "phi_perp_rad",
            "phi_g_suppress_rad",
            "phi_g_enhance_rad",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        rows,
    })
}
