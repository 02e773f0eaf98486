//! Acceptance gates for the whole pipeline, one verdict line per criterion.
//!
//! - Heavy Monte Carlo: hours of single-core wall-clock; the rayon pool uses
//!   every available core, so desktop runs finish far faster.
//! - Verdicts and progress stream to `target/acceptance_report.txt` while the
//!   test runs, since libtest hides stdout of passing tests.
//! - Tolerances are fixed here, not tuned to runs: windows on fitted
//!   thresholds and footprints, exact equality for decoder and frame oracles,
//!   calibration bounds for the synthetic-recovery study.

use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Instant;

use qeclab::config::ExperimentConfig;
use qeclab::engine::{collect_points, run_sweep};
use qeclab_core::analysis::{fit_threshold, teraquop, DataPoint, ScanAxis};
use qeclab_core::circuit::{
    build_memory_circuit, circuit_distance, Basis, Circuit, CzErrorSource, DistanceBound,
    NoiseParams, ShuttleChannel,
};
use qeclab_core::decode::{extract_graph, Decoder, Edge, MatchingGraph, BOUNDARY};
use qeclab_core::geom::{build_layout, build_layout_with, SlotOrder};
use qeclab_core::sim::{inject, tableau_outcome};

/// Report sink: append-only file plus captured stdout.
struct Report {
    path: PathBuf,
    lines: Mutex<Vec<String>>,
}

impl Report {
    fn new() -> Report {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../target/acceptance_report.txt");
        let _ = std::fs::create_dir_all(path.parent().unwrap());
        let _ = std::fs::write(&path, "");
        Report { path, lines: Mutex::new(vec![]) }
    }

    fn line(&self, text: &str) {
        println!("{text}");
        let mut lines = self.lines.lock().unwrap();
        lines.push(text.to_string());
        let _ = std::fs::write(&self.path, lines.join("\n") + "\n");
    }
}

fn bus(cer: f64, ber: f64, shuttle: ShuttleChannel) -> NoiseParams {
    NoiseParams { cer, ber, shuttle, cz_source: CzErrorSource::Cer }
}

/// Monte Carlo configs share one store under target/, so an interrupted
/// acceptance run resumes instead of resimulating finished points.
fn mc_config() -> ExperimentConfig {
    ExperimentConfig {
        out: PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/acceptance_store"),
        seed: 0xACCE,
        shots: 100_000,
        bers: vec![0.0],
        ..ExperimentConfig::default()
    }
}

/// Sweep every missing point of the config and return all its data points.
fn sweep_collect(
    report: &Report,
    tag: &str,
    cfg: &ExperimentConfig,
) -> Result<Vec<DataPoint>, String> {
    let t = Instant::now();
    let rep = run_sweep(cfg, None).map_err(|e| e.to_string())?;
    if !rep.failed.is_empty() {
        let (key, err) = &rep.failed[0];
        return Err(format!("{} point(s) failed, first: {key}: {err}", rep.failed.len()));
    }
    report.line(&format!(
        "  {tag}: {} simulated + {} reused points in {:.0}s",
        rep.executed,
        rep.reused,
        t.elapsed().as_secs_f64()
    ));
    let points = collect_points(cfg).map_err(|e| e.to_string())?;
    for p in &points {
        report.line(&format!(
            "  {tag}: d={} cer={} ber={} shots={} failures={} p_fail={:.3e}",
            p.d, p.cer, p.ber, p.shots, p.failures, p.p_fail
        ));
    }
    Ok(points)
}

fn fmt_window(name: &str, value: f64, lo: f64, hi: f64) -> Result<String, String> {
    if value >= lo && value <= hi {
        Ok(format!("{name}={value:.5} in [{lo}, {hi}]"))
    } else {
        Err(format!("{name}={value:.5} outside [{lo}, {hi}]"))
    }
}

// Criterion 1: cer threshold without bus noise.
fn cer_threshold(report: &Report) -> Result<String, String> {
    let mut cfg = mc_config();
    cfg.distances = vec![7, 9, 11, 13];
    cfg.cers = vec![0.0030, 0.0033, 0.0036, 0.0039, 0.0042, 0.0045];
    let points = sweep_collect(report, "c1", &cfg)?;
    let fit = fit_threshold(&points, ScanAxis::Cer).map_err(|e| e.to_string())?;
    report.line(&format!(
        "  c1: p_th = {:.5} +/- {:.5} (2 sigma), nu0 = {:.3}, converged = {}",
        fit.p_th,
        fit.p_th_uncertainty(),
        fit.nu0,
        fit.converged
    ));
    fmt_window("p_th", fit.p_th, 0.0033, 0.0041)
}

// Criterion 2: ber thresholds at cer = 0.1%, both shuttle channels.
fn ber_thresholds(report: &Report) -> Result<String, String> {
    let fit_for = |shuttle: ShuttleChannel, bers: &[f64]| {
        let mut cfg = mc_config();
        cfg.distances = vec![7, 9, 11];
        cfg.cers = vec![0.001];
        cfg.bers = bers.to_vec();
        cfg.shuttle = shuttle;
        let points = sweep_collect(report, "c2", &cfg)?;
        fit_threshold(&points, ScanAxis::Ber).map_err(|e| e.to_string())
    };
    let unbiased = fit_for(
        ShuttleChannel::Unbiased,
        &[0.010, 0.012, 0.014, 0.016, 0.018, 0.020],
    )?;
    let biased =
        fit_for(ShuttleChannel::Biased, &[0.030, 0.036, 0.042, 0.048, 0.054, 0.060])?;
    let ratio = biased.p_th / unbiased.p_th;
    report.line(&format!(
        "  c2: unbiased ber_th = {:.5}, biased ber_th = {:.5}, ratio = {:.2}",
        unbiased.p_th, biased.p_th, ratio
    ));
    let u = fmt_window("unbiased_ber_th", unbiased.p_th, 0.010, 0.020)?;
    let b = fmt_window("biased_ber_th", biased.p_th, 0.030, 0.060)?;
    let r = fmt_window("ratio", ratio, 2.5, 5.5)?;
    Ok(format!("{u}; {b}; {r}"))
}

/// Teraquop points at one (cer, ber, shuttle) cell: 1e5 shots at the two
/// smaller distances, 1e6 at the two largest.
fn teraquop_points(
    report: &Report,
    tag: &str,
    ber: f64,
    shuttle: ShuttleChannel,
) -> Result<Vec<DataPoint>, String> {
    let mut cfg = mc_config();
    cfg.distances = vec![7, 9, 11, 13];
    cfg.cers = vec![0.001];
    cfg.bers = vec![ber];
    cfg.shuttle = shuttle;
    cfg.boost_shots = Some(1_000_000);
    sweep_collect(report, tag, &cfg)
}

// Criterion 3: teraquop footprint at cer = 0.1% without bus noise.
fn teraquop_baseline(report: &Report) -> Result<(String, u64), String> {
    let points = teraquop_points(report, "c3", 0.0, ShuttleChannel::Unbiased)?;
    let est = teraquop(&points).map_err(|e| e.to_string())?;
    report.line(&format!(
        "  c3: slope = {:.4}, d* = {} [{}, {}], qubits = {} [{}, {}], excluded = {:?}",
        est.slope,
        est.d_star,
        est.d_star_low,
        est.d_star_high,
        est.qubits,
        est.qubits_low,
        est.qubits_high,
        est.excluded_distances
    ));
    let msg = fmt_window("teraquop_qubits", est.qubits as f64, 2.5e3, 1.0e4)?;
    Ok((msg, est.qubits))
}

// Criterion 4: bounded footprint cost of bus noise at the spec endpoints.
fn teraquop_bus_overhead(report: &Report, baseline: u64) -> Result<String, String> {
    let cells = [
        ("biased ber=1%", ShuttleChannel::Biased, 0.010),
        ("unbiased ber=0.3%", ShuttleChannel::Unbiased, 0.003),
    ];
    let mut notes = vec![];
    for (name, shuttle, ber) in cells {
        let points = teraquop_points(report, "c4", ber, shuttle)?;
        let est = teraquop(&points).map_err(|e| format!("{name}: {e}"))?;
        let ratio = est.qubits as f64 / baseline as f64;
        report.line(&format!(
            "  c4: {name}: d* = {}, qubits = {}, ratio = {ratio:.3}",
            est.d_star, est.qubits
        ));
        if ratio > 2.0 {
            return Err(format!("{name}: footprint ratio {ratio:.3} exceeds 2"));
        }
        notes.push(format!("{name} ratio={ratio:.2}"));
    }
    Ok(notes.join("; "))
}

// Criterion 5: fault-distance preservation, with the misordered control.
fn distance_preservation(report: &Report) -> Result<String, String> {
    let noise = bus(0.002, 0.004, ShuttleChannel::Unbiased);
    let expect = |circuit: &Circuit, w: u32, want: u32, what: &str| {
        match circuit_distance(circuit, w).map_err(|e| e.to_string())? {
            DistanceBound::AtLeast(b) if b == want => Ok(()),
            other => Err(format!("{what}: expected AtLeast({want}), got {other:?}")),
        }
    };
    for basis in [Basis::Z, Basis::X] {
        let layout = build_layout(3).map_err(|e| e.to_string())?;
        let c3 = build_memory_circuit(&layout, 3, basis, &noise).map_err(|e| e.to_string())?;
        // No undetected logical below ceil(3/2) = 2, and none at full weight 2.
        expect(&c3, 1, 2, &format!("d=3 {basis:?} singles"))?;
        expect(&c3, 2, 3, &format!("d=3 {basis:?} pairs"))?;
        let layout5 = build_layout(5).map_err(|e| e.to_string())?;
        let c5 = build_memory_circuit(&layout5, 5, basis, &noise).map_err(|e| e.to_string())?;
        // No undetected logical below ceil(5/2) = 3.
        expect(&c5, 2, 3, &format!("d=5 {basis:?} pairs"))?;
        report.line(&format!("  c5: {basis:?} memory clean at d=3 and d=5"));
    }
    // The hook-unsafe slot order must lose distance where the proper
    // schedule provably keeps it.
    let swapped = build_layout_with(3, SlotOrder::ZSlotsSwapped).map_err(|e| e.to_string())?;
    let control =
        build_memory_circuit(&swapped, 3, Basis::X, &noise).map_err(|e| e.to_string())?;
    match circuit_distance(&control, 2).map_err(|e| e.to_string())? {
        DistanceBound::Found { weight: 2, faults } => {
            let outcome = inject(&control, &faults).map_err(|e| e.to_string())?;
            if !outcome.detectors.is_empty() || !outcome.observable {
                return Err("control witness is not an undetected logical".into());
            }
            report.line("  c5: misordered control breaks at weight 2 (witness verified)");
        }
        other => return Err(format!("misordered control: expected weight-2 break, got {other:?}")),
    }
    Ok("proper schedule distance-preserving, misordered control fails".into())
}

/// Splitmix64: tiny deterministic RNG for test-local sampling.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    /// Standard normal via Box-Muller.
    fn gauss(&mut self) -> f64 {
        let u1 = (self.next() >> 11) as f64 / (1u64 << 53) as f64;
        let u2 = (self.next() >> 11) as f64 / (1u64 << 53) as f64;
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Quantized edge weights exactly as the decoder builds them.
fn quantized(graph: &MatchingGraph) -> Vec<(u32, u32, i64)> {
    graph
        .edges
        .iter()
        .map(|e: &Edge| (e.u, e.v, ((e.weight * 65536.0).round() as i64).clamp(1, 1 << 24)))
        .collect()
}

/// Independent all-pairs shortest path over the quantized graph, boundary
/// included as node index n.
fn oracle_distances(graph: &MatchingGraph) -> Vec<Vec<i64>> {
    let n = graph.n_detectors as usize + 1;
    let mut dist = vec![vec![i64::MAX / 4; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (u, v, w) in quantized(graph) {
        let (u, v) = (u as usize, if v == BOUNDARY { n - 1 } else { v as usize });
        dist[u][v] = dist[u][v].min(w);
        dist[v][u] = dist[v][u].min(w);
    }
    // Floyd-Warshall: n <= 25 at distance 3.
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    dist
}

/// Minimum total weight over all pairings of the fired set, where any
/// detector may instead match the boundary; memoized over bitmasks.
fn oracle_min_weight(fired: &[u32], dist: &[Vec<i64>], boundary: usize) -> i64 {
    let k = fired.len();
    let mut memo = vec![i64::MIN; 1 << k];
    memo[0] = 0;
    fn solve(mask: usize, fired: &[u32], dist: &[Vec<i64>], boundary: usize, memo: &mut [i64]) -> i64 {
        if memo[mask] != i64::MIN {
            return memo[mask];
        }
        let first = mask.trailing_zeros() as usize;
        let a = fired[first] as usize;
        // Option 1: boundary.
        let mut best = dist[a][boundary]
            + solve(mask & !(1 << first), fired, dist, boundary, memo);
        // Option 2: pair with any other fired detector.
        let rest = mask & !(1 << first);
        let mut bits = rest;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let b = fired[j] as usize;
            let cand = dist[a][b] + solve(rest & !(1 << j), fired, dist, boundary, memo);
            best = best.min(cand);
        }
        memo[mask] = best;
        best
    }
    solve((1 << k) - 1, fired, dist, boundary, &mut memo)
}

// Criterion 6: matching weight equals the brute-force pairing minimum.
fn matching_exactness(report: &Report) -> Result<String, String> {
    let layout = build_layout(3).map_err(|e| e.to_string())?;
    let circuit = build_memory_circuit(&layout, 3, Basis::Z, &bus(0.002, 0.004, ShuttleChannel::Unbiased))
        .map_err(|e| e.to_string())?;
    let graph = extract_graph(&circuit).map_err(|e| e.to_string())?;
    let decoder = Decoder::new(&graph).map_err(|e| e.to_string())?;
    let dist = oracle_distances(&graph);
    let n = graph.n_detectors as usize;
    let boundary = n;
    let mut rng = Rng(0xACCE_0006);
    let mut mismatches = 0u32;
    for _ in 0..1000 {
        let k = rng.below(11) as usize;
        let mut fired: Vec<u32> = vec![];
        while fired.len() < k {
            let c = rng.below(n as u64) as u32;
            if !fired.contains(&c) {
                fired.push(c);
            }
        }
        fired.sort_unstable();
        let decoded = decoder.decode(&fired).map_err(|e| e.to_string())?;
        let oracle = oracle_min_weight(&fired, &dist, boundary);
        if decoded.weight != oracle {
            mismatches += 1;
            report.line(&format!(
                "  c6: MISMATCH fired={fired:?} mwpm={} oracle={oracle}",
                decoded.weight
            ));
        }
    }
    if mismatches == 0 {
        Ok("1000 random syndromes, decoder weight always equals pairing minimum".into())
    } else {
        Err(format!("{mismatches}/1000 syndromes decoded above the pairing minimum"))
    }
}

// Criterion 7: frame propagation agrees with the tableau oracle everywhere.
fn frame_vs_tableau(report: &Report) -> Result<String, String> {
    let layout = build_layout(3).map_err(|e| e.to_string())?;
    let circuit = build_memory_circuit(&layout, 3, Basis::Z, &bus(0.002, 0.004, ShuttleChannel::Unbiased))
        .map_err(|e| e.to_string())?;
    let mut total = 0u32;
    for (fault, _, _, _) in circuit.components() {
        let frame = inject(&circuit, &[fault]).map_err(|e| e.to_string())?;
        let (dense, observable) =
            tableau_outcome(&circuit, &[fault], 11).map_err(|e| e.to_string())?;
        let fired: Vec<u32> = dense
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i as u32))
            .collect();
        if frame.detectors != fired || frame.observable != observable {
            return Err(format!(
                "fault {fault:?}: frame ({:?}, {}) vs tableau ({fired:?}, {observable})",
                frame.detectors, frame.observable
            ));
        }
        total += 1;
    }
    report.line(&format!("  c7: {total} elementary faults, signatures identical"));
    Ok(format!("{total}/{total} fault signatures match the tableau oracle"))
}

// Criterion 8: the synthetic recovery study on a resolving scan. Counts are
// gated at the binomial floor (89/100, the 3-sigma rejection bound for true
// coverage 95.45%), the scaling exponent is judged on the s = 1/nu0 scale
// the fit actually constrains (nu0 itself via its exact interval), and two
// calibration checks make the gate strict where the raw count cannot be:
// reported sigmas within 35% of the cross-trial scatter, bias under 0.4 sd.
fn synthetic_recovery(report: &Report) -> Result<String, String> {
    let (a, b, c, p_th, nu0) = (0.25, 4.0, 40.0, 0.004, 1.5);
    let truth = |p: f64, d: u32| {
        let x = (p - p_th) * (d as f64).powf(1.0 / nu0);
        a + b * x + c * x * x
    };
    let mut rng = Rng(0xACCE_0008);
    let mut hits_pth = 0u32;
    let mut hits_nu0 = 0u32;
    let mut est_pth = vec![];
    let mut est_s = vec![];
    let mut sig_pth = vec![];
    let mut sig_s = vec![];
    for trial in 0..100 {
        let mut points = vec![];
        for &d in &[5u32, 7, 9, 11, 13, 15, 17] {
            for k in 0..9 {
                let p = 0.0030 + 0.00025 * k as f64;
                let f = truth(p, d);
                let se = 0.01 * f;
                let p_fail = f + se * rng.gauss();
                let failures = (p_fail.max(0.0) * 100_000.0) as u64;
                points.push(DataPoint { d, cer: p, ber: 0.0, shots: 100_000, failures, p_fail, se });
            }
        }
        let fit = fit_threshold(&points, ScanAxis::Cer)
            .map_err(|e| format!("trial {trial}: {e}"))?;
        if !fit.converged {
            return Err(format!("trial {trial} did not converge"));
        }
        if (fit.p_th - p_th).abs() <= fit.p_th_uncertainty() {
            hits_pth += 1;
        }
        let (lo, hi) = fit.nu0_interval();
        if lo <= nu0 && nu0 <= hi {
            hits_nu0 += 1;
        }
        est_pth.push(fit.p_th);
        est_s.push(1.0 / fit.nu0);
        sig_pth.push(fit.p_th_uncertainty() / 2.0);
        sig_s.push(fit.covariance[4][4].max(0.0).sqrt());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let sd = |v: &[f64]| {
        let m = mean(v);
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    };
    let ratio_pth = mean(&sig_pth) / sd(&est_pth);
    let ratio_s = mean(&sig_s) / sd(&est_s);
    let bias = (mean(&est_pth) - p_th).abs() / sd(&est_pth);
    report.line(&format!(
        "  c8: coverage p_th {hits_pth}/100, nu0 {hits_nu0}/100; sigma/scatter {ratio_pth:.2} / {ratio_s:.2}; bias {bias:.2} sd"
    ));
    if hits_pth < 89 {
        return Err(format!("p_th 2-sigma coverage {hits_pth}/100 below the binomial floor 89"));
    }
    if hits_nu0 < 89 {
        return Err(format!("nu0 2-sigma coverage {hits_nu0}/100 below the binomial floor 89"));
    }
    for (name, r) in [("p_th", ratio_pth), ("exponent", ratio_s)] {
        if !(0.65..=1.35).contains(&r) {
            return Err(format!("{name} reported sigma is {r:.2}x the observed scatter"));
        }
    }
    if bias > 0.4 {
        return Err(format!("threshold bias {bias:.2} sd exceeds 0.4"));
    }
    Ok(format!(
        "coverage {hits_pth}/100 and {hits_nu0}/100, calibrated sigmas, bias {bias:.2} sd"
    ))
}

// Criterion 9: closed-form physics numbers.
fn physics_numbers(report: &Report) -> Result<String, String> {
    use qeclab_core::physics::{dephasing_probability, relaxation_probability, HardwareParams};
    let hp = HardwareParams::typical();
    let deph = dephasing_probability(&hp).map_err(|e| e.to_string())?;
    let rel = relaxation_probability(&hp).map_err(|e| e.to_string())?;
    report.line(&format!("  c9: p_deph = {:e}, p_rel = {:e}", deph.p, rel.p));
    if (deph.p - 1.25e-3).abs() > 1e-15 {
        return Err(format!("p_deph = {:e}, expected 1.25e-3", deph.p));
    }
    if deph.clamped || rel.clamped {
        return Err("typical parameters should not clamp".into());
    }
    let ratio = deph.p / rel.p;
    if ratio < 100.0 {
        return Err(format!("p_deph/p_rel = {ratio:.1}, expected >= 100"));
    }
    Ok(format!("p_deph = 1.25e-3 exactly, dephasing dominates by {ratio:.0}x"))
}

// Criterion 10: the result store is byte-identical across worker counts.
fn store_determinism(report: &Report) -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = vec![];
    for workers in [1usize, 8] {
        let cfg = ExperimentConfig {
            distances: vec![3, 5],
            cers: vec![0.005, 0.02],
            bers: vec![0.0],
            shots: 20_000,
            seed: 9,
            out: dir.path().join(format!("w{workers}")),
            ..ExperimentConfig::default()
        };
        let rep = run_sweep(&cfg, Some(workers)).map_err(|e| e.to_string())?;
        if !rep.failed.is_empty() {
            return Err(format!("workers={workers}: {} points failed", rep.failed.len()));
        }
        bytes.push(std::fs::read(cfg.out.join("results.csv")).map_err(|e| e.to_string())?);
    }
    if bytes[0] != bytes[1] {
        return Err("results.csv differs between 1 and 8 workers".into());
    }
    report.line(&format!("  c10: {} identical bytes from both runs", bytes[0].len()));
    Ok("1-worker and 8-worker stores byte-identical".into())
}

#[test]
fn acceptance() {
    let report = Report::new();
    let started = Instant::now();
    let mut failures: Vec<String> = vec![];
    let mut verdict = |name: &str, outcome: Result<String, String>| {
        let elapsed = started.elapsed().as_secs();
        match outcome {
            Ok(detail) => report.line(&format!("PASS {name} [{elapsed}s]: {detail}")),
            Err(why) => {
                report.line(&format!("FAIL {name} [{elapsed}s]: {why}"));
                failures.push(format!("{name}: {why}"));
            }
        }
    };

    verdict("criterion 9 (physics closed forms)", physics_numbers(&report));
    verdict("criterion 5 (fault distance + misordered control)", distance_preservation(&report));
    verdict("criterion 6 (matching weight exactness)", matching_exactness(&report));
    verdict("criterion 7 (frame vs tableau signatures)", frame_vs_tableau(&report));
    verdict("criterion 8 (synthetic threshold recovery)", synthetic_recovery(&report));
    verdict("criterion 10 (store worker determinism)", store_determinism(&report));
    verdict("criterion 1 (cer threshold window)", cer_threshold(&report));
    verdict("criterion 2 (ber thresholds and bias ratio)", ber_thresholds(&report));
    let baseline = match teraquop_baseline(&report) {
        Ok((msg, qubits)) => {
            verdict("criterion 3 (teraquop footprint)", Ok(msg));
            Some(qubits)
        }
        Err(why) => {
            verdict("criterion 3 (teraquop footprint)", Err(why));
            None
        }
    };
    match baseline {
        Some(q) => {
            verdict("criterion 4 (bus-noise footprint overhead)", teraquop_bus_overhead(&report, q))
        }
        None => verdict(
            "criterion 4 (bus-noise footprint overhead)",
            Err("skipped: no baseline footprint from criterion 3".into()),
        ),
    }

    report.line(&format!("total wall-clock: {}s", started.elapsed().as_secs()));
    assert!(failures.is_empty(), "acceptance failures:\n{}", failures.join("\n"));
}
