//! Sweep engine: deterministic seeding, per-point Monte Carlo, coordination.
//!
//! - Each grid point derives its RNG stream from the master seed and its
//!   canonical key, so results never depend on scheduling or worker count.
//! - One coordinator thread owns the store; a rayon pool runs the points;
//!   failure counts cross back over a channel (single writer).
//! - A point failure is isolated: it is logged and reported, the sweep
//!   continues, and the command exits nonzero afterwards.

use std::sync::mpsc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use qeclab_core::circuit::build_memory_circuit;
use qeclab_core::decode::{extract_graph, Decoder};
use qeclab_core::geom::build_layout;
use qeclab_core::sim::sample_batch;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::store::{PointSpec, Row, Store};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "QECLAB_WORKERS";

/// Deterministic per-point RNG stream: FNV-1a over the key, mixed with the
/// master seed through a splitmix finalizer.
pub fn point_seed(master_seed: u64, key: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in key.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = h ^ master_seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// All grid points of a config in canonical plan order (d, cer, ber).
pub fn plan(cfg: &ExperimentConfig) -> Vec<PointSpec> {
    let mut points = vec![];
    for &d in &cfg.distances {
        for &cer in &cfg.cers {
            for &ber in &cfg.bers {
                points.push(PointSpec {
                    d,
                    rounds: cfg.rounds_at(d),
                    basis: cfg.basis,
                    shuttle: cfg.shuttle,
                    cz_source: cfg.cz_source,
                    cer,
                    ber,
                    shots: cfg.shots_at(d),
                });
            }
        }
    }
    points
}

/// Simulate and decode one grid point; returns the logical failure count.
///
/// Batches of 64 shots parallelize over the ambient rayon pool; the total is
/// a sum of per-batch counts, so it is independent of execution order.
pub fn run_point(spec: &PointSpec, master_seed: u64) -> Result<u64> {
    let layout = build_layout(spec.d)?;
    let circuit = build_memory_circuit(&layout, spec.rounds, spec.basis, &spec.noise())?;
    let graph = extract_graph(&circuit)?;
    let decoder = Decoder::new(&graph)?;
    let seed = point_seed(master_seed, &spec.key());
    let n_batches = spec.shots.div_ceil(64);
    let failures = (0..n_batches)
        .into_par_iter()
        .map(|batch| {
            let lanes = (spec.shots - batch * 64).min(64) as u32;
            let shots = sample_batch(&circuit, seed, batch);
            decoder.decode_batch(&shots, lanes)
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    Ok(failures)
}

/// Build a rayon pool: explicit count, else the environment variable, else
/// all available cores.
pub fn build_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = match workers {
        Some(n) => n,
        None => match std::env::var(WORKERS_ENV) {
            Ok(text) => text
                .trim()
                .parse()
                .with_context(|| format!("{WORKERS_ENV}={text:?} is not a worker count"))?,
            Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        },
    };
    if n == 0 {
        bail!("worker count must be >= 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build().context("building worker pool")
}

/// What a sweep did: counts plus any isolated point failures.
#[derive(Debug)]
pub struct SweepReport {
    /// Points newly simulated in this run.
    pub executed: usize,
    /// Points skipped because the store already held them.
    pub reused: usize,
    /// (key, error) for points that failed; the rest completed normally.
    pub failed: Vec<(String, String)>,
    /// Total rows in the finalized results table.
    pub rows: usize,
}

enum Msg {
    Done(Row, f64),
    Failed(String, String),
}

/// Run every missing point of the config and finalize the store.
///
/// Resume is keyed on (config hash, point key): rerunning a finished sweep
/// executes nothing and leaves the results file byte-identical.
pub fn run_sweep(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<SweepReport> {
    cfg.validate()?;
    let store = Store::open(&cfg.out)?;
    let hash = cfg.hash();
    let done = store.completed()?;
    let all = plan(cfg);
    let total = all.len();
    let todo: Vec<PointSpec> =
        all.into_iter().filter(|spec| !done.contains(&(hash.clone(), spec.key()))).collect();
    let reused = total - todo.len();
    let pool = build_pool(workers)?;
    let t0 = Instant::now();

    let (tx, rx) = mpsc::channel::<Msg>();
    let failed = std::thread::scope(|scope| -> Result<Vec<(String, String)>> {
        let todo_ref = &todo;
        let hash_ref = &hash;
        let seed = cfg.seed;
        scope.spawn(move || {
            pool.install(|| {
                todo_ref.par_iter().for_each_with(tx, |tx, spec| {
                    let start = Instant::now();
                    let msg = match run_point(spec, seed) {
                        Ok(failures) => Msg::Done(
                            Row {
                                spec: *spec,
                                failures,
                                point_seed: point_seed(seed, &spec.key()),
                                config_hash: hash_ref.clone(),
                                version: env!("CARGO_PKG_VERSION").to_string(),
                            },
                            start.elapsed().as_secs_f64(),
                        ),
                        Err(e) => Msg::Failed(spec.key(), format!("{e:#}")),
                    };
                    let _ = tx.send(msg);
                });
            });
        });
        // Single writer: only this thread touches the journal.
        let mut failed = vec![];
        let mut finished = 0usize;
        for msg in rx {
            match msg {
                Msg::Done(row, secs) => {
                    finished += 1;
                    eprintln!(
                        "[{finished}/{}] {} failures={} ({:.0} shots/s)",
                        todo.len(),
                        row.key(),
                        row.failures,
                        row.spec.shots as f64 / secs.max(1e-9),
                    );
                    store.append_journal(&row)?;
                }
                Msg::Failed(key, err) => {
                    eprintln!("point failed: {key}: {err}");
                    failed.push((key, err));
                }
            }
        }
        Ok(failed)
    })?;

    let rows = store.finalize()?;
    let executed = todo.len() - failed.len();
    eprintln!(
        "sweep {hash}: {executed} executed, {reused} reused, {} failed, {rows} rows, {:.1} s wall",
        failed.len(),
        t0.elapsed().as_secs_f64(),
    );
    Ok(SweepReport { executed, reused, failed, rows })
}

/// Finalized data points for one config, in canonical order.
pub fn collect_points(cfg: &ExperimentConfig) -> Result<Vec<qeclab_core::analysis::DataPoint>> {
    let store = Store::open(&cfg.out)?;
    store.rows_for(&cfg.hash())?.iter().map(|row| row.data_point()).collect()
}
