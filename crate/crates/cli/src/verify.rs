//! Self-check suites: fast invariants over every pipeline stage.
//!
//! Each check is independent and prints one `ok` / `FAIL` line; the runner
//! reports whether all passed. These are sanity gates for a fresh build or
//! an unfamiliar machine, not statistical experiments: every check is
//! deterministic and finishes in seconds.

use qeclab_core::analysis::{fit_threshold, teraquop, DataPoint, ScanAxis};
use qeclab_core::circuit::{
    build_memory_circuit, circuit_distance, Basis, Circuit, CzErrorSource, DistanceBound,
    NoiseParams, Op, ShuttleChannel,
};
use qeclab_core::decode::{extract_graph, Decoder};
use qeclab_core::geom::{build_layout, build_layout_with, SlotOrder};
use qeclab_core::physics::{
    dephasing_probability, relaxation_probability, HardwareParams,
};
use qeclab_core::sim::{inject, tableau_outcome};

use crate::engine::run_point;
use crate::store::PointSpec;

type Check = (&'static str, fn() -> Result<(), String>);

fn bus_noise() -> NoiseParams {
    NoiseParams {
        cer: 0.002,
        ber: 0.004,
        shuttle: ShuttleChannel::Unbiased,
        cz_source: CzErrorSource::Cer,
    }
}

fn build(d: u32, rounds: u32, basis: Basis, noise: &NoiseParams) -> Result<Circuit, String> {
    let layout = build_layout(d).map_err(|e| e.to_string())?;
    build_memory_circuit(&layout, rounds, basis, noise).map_err(|e| e.to_string())
}

/// Every elementary fault of a circuit, in site order.
fn elementary_faults(circuit: &Circuit) -> Vec<qeclab_core::circuit::FaultRef> {
    let mut faults = vec![];
    for site in 0..circuit.sites.len() as u32 {
        let class = circuit.class_of(site);
        for component in 0..class.kind.components().len() as u8 {
            faults.push(qeclab_core::circuit::FaultRef { site, component });
        }
    }
    faults
}

fn check_layout_group_structure() -> Result<(), String> {
    for d in [3u32, 5, 7, 9, 11] {
        let layout = build_layout(d).map_err(|e| e.to_string())?;
        let issues = layout.validate_group();
        if !issues.is_empty() {
            return Err(format!("d={d}: {}", issues.join("; ")));
        }
        if layout.n_qubits() != 2 * d * d - 1 {
            return Err(format!("d={d}: {} qubits, expected {}", layout.n_qubits(), 2 * d * d - 1));
        }
        if layout.stabilizers().count() as u32 != d * d - 1 {
            return Err(format!("d={d}: wrong stabilizer count"));
        }
    }
    Ok(())
}

fn check_circuit_census() -> Result<(), String> {
    for d in [3u32, 5] {
        for basis in [Basis::Z, Basis::X] {
            let circuit = build(d, d, basis, &bus_noise())?;
            circuit.validate().map_err(|e| format!("d={d} {basis:?}: {e}"))?;
            let detectors = circuit.detectors.len() as u32;
            if detectors != (d * d - 1) * d {
                return Err(format!("d={d} {basis:?}: {detectors} detectors"));
            }
            // Every stabilizer contributes its weight in CZ gates per round:
            // 4 per bulk face, 2 per boundary face, totalling 4d(d-1).
            let czs = circuit.ops.iter().filter(|op| matches!(op, Op::Cz(_, _))).count() as u32;
            if czs != 4 * d * (d - 1) * d {
                return Err(format!("d={d} {basis:?}: {czs} CZ gates over {d} rounds"));
            }
        }
    }
    Ok(())
}

fn check_matching_graph_shape() -> Result<(), String> {
    for d in [3u32, 5] {
        for shuttle in [ShuttleChannel::Unbiased, ShuttleChannel::Biased] {
            let noise = NoiseParams { shuttle, ..bus_noise() };
            let circuit = build(d, d, Basis::Z, &noise)?;
            let graph = extract_graph(&circuit).map_err(|e| format!("d={d} {shuttle:?}: {e}"))?;
            if graph.n_detectors != (d * d - 1) * d {
                return Err(format!("d={d} {shuttle:?}: graph detector count"));
            }
            let mut boundary = 0usize;
            for e in &graph.edges {
                if !(e.p > 0.0 && e.p < 0.5 && e.weight.is_finite() && e.weight > 0.0) {
                    return Err(format!("d={d} {shuttle:?}: edge ({}, {}) p={} w={}", e.u, e.v, e.p, e.weight));
                }
                if e.v == qeclab_core::decode::BOUNDARY {
                    boundary += 1;
                }
            }
            if boundary == 0 {
                return Err(format!("d={d} {shuttle:?}: no boundary edges"));
            }
        }
    }
    Ok(())
}

fn check_single_faults_decoded() -> Result<(), String> {
    let circuit = build(3, 3, Basis::Z, &bus_noise())?;
    let graph = extract_graph(&circuit).map_err(|e| e.to_string())?;
    let decoder = Decoder::new(&graph).map_err(|e| e.to_string())?;
    for fault in elementary_faults(&circuit) {
        let outcome = inject(&circuit, &[fault]).map_err(|e| e.to_string())?;
        let result = decoder.decode(&outcome.detectors).map_err(|e| e.to_string())?;
        if result.flip != outcome.observable {
            return Err(format!(
                "site {} component {} decoded {} but flipped {}",
                fault.site, fault.component, result.flip, outcome.observable
            ));
        }
    }
    Ok(())
}

fn check_frame_matches_tableau() -> Result<(), String> {
    let circuit = build(3, 3, Basis::Z, &bus_noise())?;
    for fault in elementary_faults(&circuit) {
        let frame = inject(&circuit, &[fault]).map_err(|e| e.to_string())?;
        let (dense, observable) =
            tableau_outcome(&circuit, &[fault], 11).map_err(|e| e.to_string())?;
        let fired: Vec<u32> =
            dense.iter().enumerate().filter(|(_, &on)| on).map(|(i, _)| i as u32).collect();
        if frame.detectors != fired || frame.observable != observable {
            return Err(format!("site {} component {} disagrees", fault.site, fault.component));
        }
    }
    Ok(())
}

fn check_fault_distance_preserved() -> Result<(), String> {
    for basis in [Basis::Z, Basis::X] {
        let circuit = build(3, 3, basis, &bus_noise())?;
        match circuit_distance(&circuit, 2).map_err(|e| e.to_string())? {
            DistanceBound::AtLeast(3) => {}
            other => return Err(format!("{basis:?}: {other:?}")),
        }
    }
    // The hook-unsafe CZ order must lose distance at d=3.
    let bad = build_layout_with(3, SlotOrder::ZSlotsSwapped).map_err(|e| e.to_string())?;
    let circuit =
        build_memory_circuit(&bad, 3, Basis::X, &bus_noise()).map_err(|e| e.to_string())?;
    match circuit_distance(&circuit, 2).map_err(|e| e.to_string())? {
        DistanceBound::Found { weight: 2, .. } => Ok(()),
        other => Err(format!("misordered control: {other:?}")),
    }
}

fn check_physics_formulas() -> Result<(), String> {
    let hp = HardwareParams::typical();
    let deph = dephasing_probability(&hp).map_err(|e| e.to_string())?.p;
    if (deph - 1.25e-3).abs() > 1e-15 {
        return Err(format!("dephasing {deph}, expected 1.25e-3"));
    }
    let rel = relaxation_probability(&hp).map_err(|e| e.to_string())?.p;
    if (rel - 5e-6).abs() > 1e-18 {
        return Err(format!("relaxation {rel}, expected 5e-6"));
    }
    if deph / rel < 100.0 {
        return Err(format!("dephasing/relaxation ratio {}", deph / rel));
    }
    Ok(())
}

fn check_threshold_fit_round_trip() -> Result<(), String> {
    // Noise-free points drawn from the scaling form
    // p_fail = a + b x + c x^2, x = (cer - p_th) d^(1/nu0).
    let (a, b, c, p_th, nu0) = (0.25, 1.0, 0.5, 0.004, 1.5);
    let shots = 100_000u64;
    let mut points = vec![];
    for d in [5u32, 9, 13] {
        for k in 0..6 {
            let cer = 0.003 + 0.0004 * k as f64;
            let x = (cer - p_th) * (d as f64).powf(1.0 / nu0);
            let y = a + b * x + c * x * x;
            let failures = (y * shots as f64).round() as u64;
            points.push(
                DataPoint::from_counts(d, cer, 0.0, shots, failures).map_err(|e| e.to_string())?,
            );
        }
    }
    let fit = fit_threshold(&points, ScanAxis::Cer).map_err(|e| e.to_string())?;
    if !fit.converged {
        return Err("fit did not converge".into());
    }
    if (fit.p_th - p_th).abs() > 2e-4 || (fit.nu0 - nu0).abs() > 0.1 {
        return Err(format!("recovered p_th={} nu0={}", fit.p_th, fit.nu0));
    }
    Ok(())
}

fn check_teraquop_closed_form() -> Result<(), String> {
    // Exact exponential suppression ln p = -2 - 0.8 d: the teraquop distance
    // is the smallest odd d with -2 - 0.8 d <= ln 1e-12, which is 33.
    let shots = 10_000_000u64;
    let points: Vec<DataPoint> = [5u32, 7, 9]
        .iter()
        .map(|&d| {
            let p = (-2.0 - 0.8 * d as f64).exp();
            let failures = (p * shots as f64).round() as u64;
            DataPoint::from_counts(d, 0.001, 0.0, shots, failures).map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    let est = teraquop(&points).map_err(|e| e.to_string())?;
    if est.d_star != 33 || est.qubits != 2 * 33 * 33 - 1 {
        return Err(format!("d_star={} qubits={}", est.d_star, est.qubits));
    }
    if (est.slope + 0.8).abs() > 0.01 {
        return Err(format!("slope {}", est.slope));
    }
    Ok(())
}

fn check_sampler_determinism() -> Result<(), String> {
    let spec = PointSpec {
        d: 3,
        rounds: 3,
        basis: Basis::Z,
        shuttle: ShuttleChannel::Unbiased,
        cz_source: CzErrorSource::Cer,
        cer: 0.01,
        ber: 0.0,
        shots: 2_048,
    };
    let a = run_point(&spec, 42).map_err(|e| e.to_string())?;
    let b = run_point(&spec, 42).map_err(|e| e.to_string())?;
    if a != b {
        return Err(format!("failure counts {a} vs {b}"));
    }
    Ok(())
}

const CHECKS: &[Check] = &[
    ("layout group structure", check_layout_group_structure),
    ("circuit fault census", check_circuit_census),
    ("matching graph shape", check_matching_graph_shape),
    ("single faults decoded", check_single_faults_decoded),
    ("frame matches tableau", check_frame_matches_tableau),
    ("fault distance preserved", check_fault_distance_preserved),
    ("physics formulas", check_physics_formulas),
    ("threshold fit round trip", check_threshold_fit_round_trip),
    ("teraquop closed form", check_teraquop_closed_form),
    ("sampler determinism", check_sampler_determinism),
];

/// Run every suite, print one line each, and report overall success.
pub fn run_verify() -> bool {
    let mut all_ok = true;
    for (name, check) in CHECKS {
        match check() {
            Ok(()) => println!("ok   {name}"),
            Err(msg) => {
                all_ok = false;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    all_ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_all_suites_pass() {
        for (name, check) in CHECKS {
            check().unwrap_or_else(|msg| panic!("{name}: {msg}"));
        }
    }
}
