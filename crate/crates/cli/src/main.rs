//! Binary entry point: parse, dispatch, map outcomes to exit codes.
//!
//! 0 = success, 1 = usage error (bad flags or arguments), 2 = data or
//! validation failure (bad config contents, unreadable stores, failed
//! points, failed self-checks).

use std::fs::OpenOptions;
use std::io::Write;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::Parser;
use qeclab_core::analysis::{estimate_rate, ScanAxis};
use qeclab_core::circuit::serialize;
use qeclab_core::decode::{extract_graph, Decoder};
use qeclab_core::geom::{build_layout, build_layout_with, SlotOrder};
use qeclab_core::sim::sample_batch;
use serde::Serialize;

use qeclab::args::{Cli, Command};
use qeclab::engine::{build_pool, run_sweep};
use qeclab::report::{render_physics, run_teraquop, run_threshold};
use qeclab::verify::run_verify;
use qeclab::bits;

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let workers = cli.workers;
    match cli.command {
        Command::Layout { distance, misordered } => {
            let layout = if misordered {
                build_layout_with(distance, SlotOrder::ZSlotsSwapped)?
            } else {
                build_layout(distance)?
            };
            print!("{}", layout.dump_text());
            Ok(0)
        }
        Command::BuildCircuit { circuit } => {
            print!("{}", serialize(&circuit.build()?));
            Ok(0)
        }
        Command::Sample { circuit, shots, seed, out } => {
            if shots == 0 {
                bail!("shots must be >= 1");
            }
            let c = circuit.build()?;
            let n_detectors = c.detectors.len() as u32;
            let batches = (0..shots.div_ceil(64)).map(|b| sample_batch(&c, seed, b));
            bits::write_shots(&out, n_detectors, shots, batches)?;
            eprintln!("wrote {shots} shots ({n_detectors} detectors/shot) to {}", out.display());
            Ok(0)
        }
        Command::Decode { circuit, bits: dump } => {
            let c = circuit.build()?;
            let (n_detectors, shots, batches) = bits::read_shots(&dump)?;
            if n_detectors as usize != c.detectors.len() {
                bail!(
                    "dump has {n_detectors} detectors/shot but the circuit has {}; \
                     decode with the flags used for sampling",
                    c.detectors.len()
                );
            }
            let graph = extract_graph(&c)?;
            let decoder = Decoder::new(&graph)?;
            let mut failures = 0u64;
            let mut remaining = shots;
            for batch in &batches {
                let lanes = remaining.min(64) as u32;
                failures += decoder.decode_batch(batch, lanes)?;
                remaining -= u64::from(lanes);
            }
            let rate = estimate_rate(failures, shots)?;
            #[derive(Serialize)]
            struct DecodeJson {
                schema: &'static str,
                shots: u64,
                failures: u64,
                p_fail: f64,
                se: f64,
                zero_failure_upper: Option<f64>,
            }
            let report = DecodeJson {
                schema: "decode-v1",
                shots,
                failures,
                p_fail: rate.p_fail,
                se: rate.se,
                zero_failure_upper: rate.zero_failure_upper,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(0)
        }
        Command::Sweep { run } => {
            let cfg = run.resolve()?;
            let report = run_sweep(&cfg, workers)?;
            println!("results: {}", cfg.out.join("results.csv").display());
            if report.failed.is_empty() {
                Ok(0)
            } else {
                eprintln!("{} point(s) failed; rerun to retry them", report.failed.len());
                Ok(2)
            }
        }
        Command::Threshold { run, axis } => {
            let cfg = run.resolve()?;
            let scan: ScanAxis = axis.into();
            let fixed = match scan {
                ScanAxis::Cer => "ber",
                ScanAxis::Ber => "cer",
            };
            let outcome = run_threshold(&cfg, scan, workers)?;
            for slice in &outcome.slices {
                let (nu_lo, nu_hi) = slice.fit.nu0_interval();
                println!(
                    "{fixed}={}: {} threshold {:.6} +/- {:.6} (2 sigma), nu0 {:.3} [{:.3}, {:.3}], converged {}",
                    slice.slice,
                    scan.label(),
                    slice.fit.p_th,
                    slice.fit.p_th_uncertainty(),
                    slice.fit.nu0,
                    nu_lo,
                    nu_hi,
                    slice.fit.converged,
                );
            }
            println!("reports: {} {}", outcome.csv_path.display(), outcome.json_path.display());
            Ok(0)
        }
        Command::Teraquop { run } => {
            let cfg = run.resolve()?;
            let outcome = run_teraquop(&cfg, workers)?;
            for cell in &outcome.cells {
                match &cell.estimate {
                    Some(est) => println!(
                        "cer={} ber={}: d*={} qubits={} [{}, {}]",
                        cell.cer, cell.ber, est.d_star, est.qubits, est.qubits_low, est.qubits_high
                    ),
                    None => println!("cer={} ber={}: {}", cell.cer, cell.ber, cell.status),
                }
            }
            println!("reports: {} {}", outcome.csv_path.display(), outcome.json_path.display());
            Ok(0)
        }
        Command::EstimatePhysics { physics } => {
            let block = physics.resolve()?;
            let text = render_physics(&block.resolve())?;
            print!("{text}");
            if physics.write {
                let path = physics.config.as_ref().expect("checked in resolve");
                let mut file = OpenOptions::new()
                    .append(true)
                    .open(path)
                    .with_context(|| format!("opening {}", path.display()))?;
                write!(file, "\n{text}")?;
                eprintln!("appended suggestions to {}", path.display());
            }
            Ok(0)
        }
        Command::Verify => {
            // The pool is built here so QECLAB_WORKERS/--workers apply.
            let pool = build_pool(workers)?;
            let ok = pool.install(run_verify);
            Ok(if ok { 0 } else { 2 })
        }
    }
}
