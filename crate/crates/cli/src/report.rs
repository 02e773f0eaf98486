//! Composite experiment flows and their report files.
//!
//! - `run_threshold`: per slice of the fixed axis, sweep the coarse scan
//!   grid, bracket the crossing, sweep a 6-point refined grid across the
//!   bracket, and fit the scaling form; emits `threshold.csv` plus a
//!   self-describing `fig_threshold.json`.
//! - `run_teraquop`: per (cer, ber) cell, sweep all distances (boosted
//!   shots at the two largest) and extrapolate the teraquop footprint;
//!   non-suppressing cells are kept with their diagnosis, never dropped.
//! - `render_physics`: hardware parameters to suggested noise rates as a
//!   TOML fragment with the derivation in comments.
//!
//! Reports are derived purely from stored rows, so rerunning a finished
//! experiment rewrites byte-identical files.

use std::path::PathBuf;

use anyhow::{Context, Result};
use qeclab_core::analysis::{
    bracket_threshold, fit_threshold, teraquop, DataPoint, FitResult, ScanAxis, TeraquopEstimate,
};
use qeclab_core::circuit::ShuttleChannel;
use qeclab_core::physics::{
    dephasing_probability, idle_probabilities, relaxation_probability, suggested_ber,
    HardwareParams,
};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::engine::{collect_points, run_sweep};
use crate::store::Store;

/// Schema tag of the threshold report table.
pub const THRESHOLD_VERSION: &str = "threshold-v1";
/// Schema tag of the teraquop report table.
pub const TERAQUOP_VERSION: &str = "teraquop-v1";

fn shuttle_name(s: ShuttleChannel) -> &'static str {
    match s {
        ShuttleChannel::Unbiased => "Unbiased",
        ShuttleChannel::Biased => "Biased",
    }
}

/// One fitted slice of a threshold scan.
#[derive(Debug)]
pub struct SliceOutcome {
    /// Value of the fixed axis (cer when scanning ber, and vice versa).
    pub slice: f64,
    /// Coarse-scan bracket around the crossing.
    pub bracket: (f64, f64),
    /// Refined scan values across the bracket.
    pub refined: Vec<f64>,
    pub fit: FitResult,
    /// Points entering the fit.
    pub points: Vec<DataPoint>,
}

/// Full threshold run over every slice of the fixed axis.
#[derive(Debug)]
pub struct ThresholdOutcome {
    pub axis: ScanAxis,
    pub slices: Vec<SliceOutcome>,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

/// Config for one slice: the scan axis keeps its grid, the other collapses.
fn slice_config(cfg: &ExperimentConfig, axis: ScanAxis, slice: f64, grid: Vec<f64>) -> ExperimentConfig {
    let mut derived = cfg.clone();
    match axis {
        ScanAxis::Cer => {
            derived.cers = grid;
            derived.bers = vec![slice];
        }
        ScanAxis::Ber => {
            derived.bers = grid;
            derived.cers = vec![slice];
        }
    }
    derived
}

/// Bracket, refine, and fit the threshold for every slice of `cfg`.
pub fn run_threshold(
    cfg: &ExperimentConfig,
    axis: ScanAxis,
    workers: Option<usize>,
) -> Result<ThresholdOutcome> {
    cfg.validate()?;
    let (scan_grid, slices) = match axis {
        ScanAxis::Cer => (cfg.cers.clone(), cfg.bers.clone()),
        ScanAxis::Ber => (cfg.bers.clone(), cfg.cers.clone()),
    };
    let mut outcomes = vec![];
    for &slice in &slices {
        let label = format!("{}={slice}", fixed_label(axis));
        let coarse = slice_config(cfg, axis, slice, scan_grid.clone());
        run_sweep(&coarse, workers).with_context(|| format!("coarse scan at {label}"))?;
        let coarse_points = collect_points(&coarse)?;
        let (lo, hi) =
            bracket_threshold(&coarse_points, axis).with_context(|| format!("bracket at {label}"))?;
        // Six refined values spanning the bracket inclusively.
        let refined: Vec<f64> = (0..6).map(|k| lo + (hi - lo) * k as f64 / 5.0).collect();
        let fine = slice_config(cfg, axis, slice, refined.clone());
        run_sweep(&fine, workers).with_context(|| format!("refined scan at {label}"))?;
        let points = collect_points(&fine)?;
        let fit =
            fit_threshold(&points, axis).with_context(|| format!("threshold fit at {label}"))?;
        outcomes.push(SliceOutcome { slice, bracket: (lo, hi), refined, fit, points });
    }
    let (csv_path, json_path) = write_threshold_reports(cfg, axis, &outcomes)?;
    Ok(ThresholdOutcome { axis, slices: outcomes, csv_path, json_path })
}

fn fixed_label(axis: ScanAxis) -> &'static str {
    match axis {
        ScanAxis::Cer => "ber",
        ScanAxis::Ber => "cer",
    }
}

fn write_threshold_reports(
    cfg: &ExperimentConfig,
    axis: ScanAxis,
    slices: &[SliceOutcome],
) -> Result<(PathBuf, PathBuf)> {
    let store = Store::open(&cfg.out)?;

    let mut csv = format!(
        "# {THRESHOLD_VERSION}\n\
         axis,slice_axis,slice,shuttle,threshold,threshold_2sigma,nu0,nu0_lo,nu0_hi,converged,cost,points\n"
    );
    for s in slices {
        let (nu_lo, nu_hi) = s.fit.nu0_interval();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            axis.label(),
            fixed_label(axis),
            s.slice,
            shuttle_name(cfg.shuttle),
            s.fit.p_th,
            s.fit.p_th_uncertainty(),
            s.fit.nu0,
            nu_lo,
            nu_hi,
            s.fit.converged,
            s.fit.cost,
            s.points.len()
        ));
    }
    let csv_path = store.dir().join("threshold.csv");
    std::fs::write(&csv_path, csv)?;

    #[derive(Serialize)]
    struct PointJson {
        d: u32,
        x: f64,
        p_fail: f64,
        se: f64,
        shots: u64,
        failures: u64,
    }
    #[derive(Serialize)]
    struct FitJson {
        a: f64,
        b: f64,
        c: f64,
        threshold: f64,
        threshold_2sigma: f64,
        nu0: f64,
        nu0_lo: f64,
        nu0_hi: f64,
        cost: f64,
        converged: bool,
    }
    #[derive(Serialize)]
    struct SliceJson {
        slice_axis: &'static str,
        slice: f64,
        shuttle: &'static str,
        bracket: [f64; 2],
        refined: Vec<f64>,
        fit: FitJson,
        points: Vec<PointJson>,
    }
    #[derive(Serialize)]
    struct FigJson {
        schema: &'static str,
        axis: &'static str,
        config_hash: String,
        version: &'static str,
        slices: Vec<SliceJson>,
    }

    let fig = FigJson {
        schema: "fig-threshold-v1",
        axis: axis.label(),
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION"),
        slices: slices
            .iter()
            .map(|s| {
                let (nu_lo, nu_hi) = s.fit.nu0_interval();
                SliceJson {
                    slice_axis: fixed_label(axis),
                    slice: s.slice,
                    shuttle: shuttle_name(cfg.shuttle),
                    bracket: [s.bracket.0, s.bracket.1],
                    refined: s.refined.clone(),
                    fit: FitJson {
                        a: s.fit.a,
                        b: s.fit.b,
                        c: s.fit.c,
                        threshold: s.fit.p_th,
                        threshold_2sigma: s.fit.p_th_uncertainty(),
                        nu0: s.fit.nu0,
                        nu0_lo: nu_lo,
                        nu0_hi: nu_hi,
                        cost: s.fit.cost,
                        converged: s.fit.converged,
                    },
                    points: s
                        .points
                        .iter()
                        .map(|p| PointJson {
                            d: p.d,
                            x: axis.value(p),
                            p_fail: p.p_fail,
                            se: p.se,
                            shots: p.shots,
                            failures: p.failures,
                        })
                        .collect(),
                }
            })
            .collect(),
    };
    let json_path = store.dir().join("fig_threshold.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&fig)? + "\n")?;
    Ok((csv_path, json_path))
}

/// One (cer, ber) cell of a teraquop grid.
#[derive(Debug)]
pub struct TeraquopCell {
    pub cer: f64,
    pub ber: f64,
    /// "ok", or the diagnosis for cells that cannot be extrapolated.
    pub status: String,
    pub estimate: Option<TeraquopEstimate>,
    pub points: Vec<DataPoint>,
}

/// Full teraquop run over the (cer, ber) grid.
#[derive(Debug)]
pub struct TeraquopOutcome {
    pub cells: Vec<TeraquopCell>,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

/// Sweep and extrapolate every (cer, ber) cell of the config grid.
pub fn run_teraquop(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<TeraquopOutcome> {
    cfg.validate()?;
    let mut cells = vec![];
    for &cer in &cfg.cers {
        for &ber in &cfg.bers {
            let mut cell_cfg = cfg.clone();
            cell_cfg.cers = vec![cer];
            cell_cfg.bers = vec![ber];
            run_sweep(&cell_cfg, workers)
                .with_context(|| format!("sweep at cer={cer} ber={ber}"))?;
            let points = collect_points(&cell_cfg)?;
            // A cell that cannot be extrapolated stays in the report with
            // its diagnosis; later cells still run.
            let (status, estimate) = match teraquop(&points) {
                Ok(est) => ("ok".to_string(), Some(est)),
                Err(e) => (e.to_string(), None),
            };
            cells.push(TeraquopCell { cer, ber, status, estimate, points });
        }
    }
    let (csv_path, json_path) = write_teraquop_reports(cfg, &cells)?;
    Ok(TeraquopOutcome { cells, csv_path, json_path })
}

fn write_teraquop_reports(
    cfg: &ExperimentConfig,
    cells: &[TeraquopCell],
) -> Result<(PathBuf, PathBuf)> {
    let store = Store::open(&cfg.out)?;

    let mut csv = format!(
        "# {TERAQUOP_VERSION}\n\
         cer,ber,shuttle,status,slope,intercept,d_star,qubits,d_star_low,qubits_low,d_star_high,qubits_high,excluded\n"
    );
    for cell in cells {
        // Commas in a diagnosis would break the row shape.
        let status = cell.status.replace(',', ";");
        match &cell.estimate {
            Some(est) => {
                let excluded = est
                    .excluded_distances
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                csv.push_str(&format!(
                    "{},{},{},{status},{},{},{},{},{},{},{},{},{excluded}\n",
                    cell.cer,
                    cell.ber,
                    shuttle_name(cfg.shuttle),
                    est.slope,
                    est.intercept,
                    est.d_star,
                    est.qubits,
                    est.d_star_low,
                    est.qubits_low,
                    est.d_star_high,
                    est.qubits_high,
                ));
            }
            None => {
                csv.push_str(&format!(
                    "{},{},{},{status},,,,,,,,,\n",
                    cell.cer,
                    cell.ber,
                    shuttle_name(cfg.shuttle),
                ));
            }
        }
    }
    let csv_path = store.dir().join("teraquop.csv");
    std::fs::write(&csv_path, csv)?;

    #[derive(Serialize)]
    struct PointJson {
        d: u32,
        p_fail: f64,
        se: f64,
        shots: u64,
        failures: u64,
    }
    #[derive(Serialize)]
    struct EstimateJson {
        slope: f64,
        intercept: f64,
        d_star: u32,
        qubits: u64,
        d_star_low: u32,
        qubits_low: u64,
        d_star_high: u32,
        qubits_high: u64,
        excluded_distances: Vec<u32>,
    }
    #[derive(Serialize)]
    struct CellJson {
        cer: f64,
        ber: f64,
        shuttle: &'static str,
        status: String,
        estimate: Option<EstimateJson>,
        points: Vec<PointJson>,
    }
    #[derive(Serialize)]
    struct FigJson {
        schema: &'static str,
        config_hash: String,
        version: &'static str,
        series: Vec<CellJson>,
    }

    let fig = FigJson {
        schema: "fig-teraquop-v1",
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION"),
        series: cells
            .iter()
            .map(|cell| CellJson {
                cer: cell.cer,
                ber: cell.ber,
                shuttle: shuttle_name(cfg.shuttle),
                status: cell.status.clone(),
                estimate: cell.estimate.as_ref().map(|est| EstimateJson {
                    slope: est.slope,
                    intercept: est.intercept,
                    d_star: est.d_star,
                    qubits: est.qubits,
                    d_star_low: est.d_star_low,
                    qubits_low: est.qubits_low,
                    d_star_high: est.d_star_high,
                    qubits_high: est.qubits_high,
                    excluded_distances: est.excluded_distances.clone(),
                }),
                points: cell
                    .points
                    .iter()
                    .map(|p| PointJson {
                        d: p.d,
                        p_fail: p.p_fail,
                        se: p.se,
                        shots: p.shots,
                        failures: p.failures,
                    })
                    .collect(),
            })
            .collect(),
    };
    let json_path = store.dir().join("fig_teraquop.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&fig)? + "\n")?;
    Ok((csv_path, json_path))
}

/// Render hardware parameters as a suggested-rates TOML fragment.
pub fn render_physics(hp: &HardwareParams) -> Result<String> {
    let deph = dephasing_probability(hp)?;
    let rel = relaxation_probability(hp)?;
    let (idle_rel, idle_deph) = idle_probabilities(hp)?;
    let biased = suggested_ber(hp, ShuttleChannel::Biased)?;
    let unbiased = suggested_ber(hp, ShuttleChannel::Unbiased)?;
    let mut out = String::new();
    out.push_str(&format!(
        "# rates derived from hardware: t1={} t2={} l_c={} l_s={} v={} t_idle={}\n",
        hp.t1, hp.t2, hp.l_c, hp.l_s, hp.v, hp.t_idle
    ));
    out.push_str(&format!(
        "# per-shuttle dephasing 2*l_c*l_s/(v*t2)^2 = {}{}\n",
        sig(deph.p),
        if deph.clamped { " (clamped; outside perturbative regime)" } else { "" }
    ));
    out.push_str(&format!(
        "# per-shuttle relaxation l_s/(v*t1) = {}{}\n",
        sig(rel.p),
        if rel.clamped { " (clamped; outside perturbative regime)" } else { "" }
    ));
    out.push_str(&format!(
        "# idle window: relaxation t_idle/t1 = {}, dephasing (t_idle/t2)^2 = {}\n",
        sig(idle_rel.p),
        sig(idle_deph.p)
    ));
    out.push_str("# biased bus keeps dephasing only; unbiased adds relaxation;\n");
    out.push_str("# the idle floor lower-bounds any circuit error rate.\n");
    out.push_str("[suggested]\n");
    out.push_str(&format!("ber_biased = {}\n", sig(biased)));
    out.push_str(&format!("ber_unbiased = {}\n", sig(unbiased)));
    out.push_str(&format!("cer_idle_floor = {}\n", sig(idle_rel.p.max(idle_deph.p))));
    Ok(out)
}

/// Five significant figures, TOML-parseable; estimates carry no more.
fn sig(v: f64) -> String {
    if v == 0.0 {
        "0.0".to_string()
    } else {
        format!("{v:.4e}")
    }
}
