//! Line-based circuit text format with exact round-trip parsing.
//!
//! Format, one instruction per line:
//! - header: `CIRCUIT distance=3 rounds=2 basis=Z qubits=17 cer=0.001 ber=0.01
//!   shuttle=unbiased cz_source=cer`;
//! - gates: `RESET_Z q...`, `H q...`, `MEASURE_Z q...`, `IDLE_MARK q...`,
//!   `CZ a b a b ...` (targets paired);
//! - fault sites: `X_FLIP(p,ctx) q...`, `Z_FLIP(p,ctx) q...`,
//!   `DEPOLARIZE1(p,ctx) q...`, `DEPOLARIZE2(p,ctx) a b ...` where ctx is one
//!   of spam|gate|shuttle|cz|idle;
//! - `DETECTOR(kind,stab,round) rec[-k] ...` referencing earlier measurements
//!   backwards from the current position; `OBSERVABLE rec[-k] ...`;
//! - `TICK` closes each step; `#` starts a comment line.
//!
//! `parse(serialize(c)) == c` exactly; parse errors carry line and token.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::{QubitId, StabKind};

use super::{
    Basis, ChannelKind, Circuit, CzErrorSource, Detector, FaultCtx, FaultSite, NoiseParams, Op,
    ProbClass, ShuttleChannel,
};

fn kind_name(kind: ChannelKind) -> &'static str {
    match kind {
        ChannelKind::XFlip => "X_FLIP",
        ChannelKind::ZFlip => "Z_FLIP",
        ChannelKind::Depolarize1 => "DEPOLARIZE1",
        ChannelKind::Depolarize2 => "DEPOLARIZE2",
    }
}

/// Render a circuit in the documented line format.
pub fn serialize(circuit: &Circuit) -> String {
    let mut out = String::new();
    let noise = &circuit.noise;
    writeln!(
        out,
        "CIRCUIT distance={} rounds={} basis={} qubits={} cer={} ber={} shuttle={} cz_source={}",
        circuit.distance,
        circuit.rounds,
        match circuit.basis {
            Basis::Z => "Z",
            Basis::X => "X",
        },
        circuit.n_qubits,
        noise.cer,
        noise.ber,
        match noise.shuttle {
            ShuttleChannel::Unbiased => "unbiased",
            ShuttleChannel::Biased => "biased",
        },
        match noise.cz_source {
            CzErrorSource::Cer => "cer",
            CzErrorSource::Ber => "ber",
        },
    )
    .unwrap();

    // Group consecutive ops of one shape into single lines.
    #[derive(PartialEq, Clone, Copy)]
    enum Key {
        Gate(&'static str),
        Fault(u16),
    }
    type Pending = Option<(Key, Vec<QubitId>)>;
    fn flush(out: &mut String, pending: &mut Pending, circuit: &Circuit) {
        if let Some((key, targets)) = pending.take() {
            let head = match key {
                Key::Gate(name) => name.to_string(),
                Key::Fault(class) => {
                    let c = &circuit.classes[class as usize];
                    format!("{}({},{})", kind_name(c.kind), c.p, c.ctx.label())
                }
            };
            let ids: Vec<String> = targets.iter().map(|q| q.to_string()).collect();
            writeln!(out, "{head} {}", ids.join(" ")).unwrap();
        }
    }
    fn push(out: &mut String, pending: &mut Pending, circuit: &Circuit, key: Key, qs: &[QubitId]) {
        match pending {
            Some((k, targets)) if *k == key => targets.extend_from_slice(qs),
            _ => {
                flush(out, pending, circuit);
                *pending = Some((key, qs.to_vec()));
            }
        }
    }
    let mut pending: Pending = None;

    let mut records_seen: u32 = 0;
    let mut step: u32 = 0;
    let init_steps = match circuit.basis {
        Basis::Z => 1,
        Basis::X => 2,
    };
    for op in &circuit.ops {
        match *op {
            Op::Reset(q) => push(&mut out, &mut pending, circuit, Key::Gate("RESET_Z"), &[q]),
            Op::H(q) => push(&mut out, &mut pending, circuit, Key::Gate("H"), &[q]),
            Op::Measure(q) => {
                push(&mut out, &mut pending, circuit, Key::Gate("MEASURE_Z"), &[q]);
                records_seen += 1;
            }
            Op::IdleMark(q) => push(&mut out, &mut pending, circuit, Key::Gate("IDLE_MARK"), &[q]),
            Op::Cz(a, b) => push(&mut out, &mut pending, circuit, Key::Gate("CZ"), &[a, b]),
            Op::Fault(s) => {
                let site = &circuit.sites[s as usize];
                let class = &circuit.classes[site.class as usize];
                let targets: &[QubitId] = if class.kind.arity() == 2 {
                    &site.qubits
                } else {
                    &site.qubits[..1]
                };
                push(&mut out, &mut pending, circuit, Key::Fault(site.class), targets);
            }
            Op::Detector(id) => {
                flush(&mut out, &mut pending, circuit);
                let det = &circuit.detectors[id as usize];
                let kind = match det.kind {
                    StabKind::X => "X",
                    StabKind::Z => "Z",
                };
                let recs: Vec<String> = det
                    .records
                    .iter()
                    .map(|&r| format!("rec[-{}]", records_seen - r))
                    .collect();
                writeln!(out, "DETECTOR({kind},{},{}) {}", det.stab, det.round, recs.join(" "))
                    .unwrap();
            }
            Op::Tick => {
                flush(&mut out, &mut pending, circuit);
                // The observable line closes the final step.
                if step + 1 == circuit.n_steps {
                    let recs: Vec<String> = circuit
                        .observable
                        .iter()
                        .map(|&r| format!("rec[-{}]", records_seen - r))
                        .collect();
                    writeln!(out, "OBSERVABLE {}", recs.join(" ")).unwrap();
                }
                writeln!(out, "TICK").unwrap();
                step += 1;
                if step >= init_steps && (step - init_steps).is_multiple_of(10) {
                    let round = (step - init_steps) / 10 + 1;
                    if round <= circuit.rounds {
                        writeln!(out, "# round {round}").unwrap();
                    }
                }
            }
        }
    }
    out
}

struct Parser {
    line_no: usize,
}

impl Parser {
    fn err(&self, token: &str, msg: &str) -> Error {
        Error::Parse {
            line: self.line_no,
            token: token.to_string(),
            msg: msg.to_string(),
        }
    }

    fn parse_u32(&self, token: &str) -> Result<u32> {
        token.parse().map_err(|_| self.err(token, "expected an unsigned integer"))
    }

    fn parse_f64(&self, token: &str) -> Result<f64> {
        token.parse().map_err(|_| self.err(token, "expected a number"))
    }

    /// Split `NAME(a,b,...)` into name and raw args.
    fn split_call<'t>(&self, token: &'t str) -> Result<(&'t str, Vec<&'t str>)> {
        let open = token.find('(').ok_or_else(|| self.err(token, "expected '('"))?;
        if !token.ends_with(')') {
            return Err(self.err(token, "expected ')'"));
        }
        let name = &token[..open];
        let args = &token[open + 1..token.len() - 1];
        Ok((name, args.split(',').collect()))
    }

    fn parse_rec(&self, token: &str, records: u32) -> Result<u32> {
        let inner = token
            .strip_prefix("rec[-")
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| self.err(token, "expected rec[-k]"))?;
        let k: u32 = inner.parse().map_err(|_| self.err(token, "bad record offset"))?;
        if k == 0 || k > records {
            return Err(self.err(token, "record offset out of range"));
        }
        Ok(records - k)
    }
}

/// Parse the documented line format back into a circuit.
pub fn parse(text: &str) -> Result<Circuit> {
    let mut header: Option<(u32, u32, Basis, u32, NoiseParams)> = None;
    let mut ops: Vec<Op> = Vec::new();
    let mut sites: Vec<FaultSite> = Vec::new();
    let mut classes: Vec<ProbClass> = Vec::new();
    let mut class_ids: std::collections::HashMap<(FaultCtx, ChannelKind, u64), u16> =
        Default::default();
    let mut detectors: Vec<Detector> = Vec::new();
    let mut observable: Option<Vec<u32>> = None;
    let mut records: u32 = 0;
    let mut step: u32 = 0;

    for (idx, raw) in text.lines().enumerate() {
        let p = Parser { line_no: idx + 1 };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap();
        let rest: Vec<&str> = tokens.collect();

        if head == "CIRCUIT" {
            if header.is_some() {
                return Err(p.err(head, "duplicate CIRCUIT header"));
            }
            let mut fields: std::collections::HashMap<&str, &str> = Default::default();
            for kv in &rest {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| p.err(kv, "expected key=value"))?;
                fields.insert(k, v);
            }
            let get = |k: &str| -> Result<&str> {
                fields.get(k).copied().ok_or_else(|| p.err(k, "missing header field"))
            };
            let basis = match get("basis")? {
                "Z" => Basis::Z,
                "X" => Basis::X,
                other => return Err(p.err(other, "basis must be Z or X")),
            };
            let shuttle = match get("shuttle")? {
                "unbiased" => ShuttleChannel::Unbiased,
                "biased" => ShuttleChannel::Biased,
                other => return Err(p.err(other, "shuttle must be unbiased or biased")),
            };
            let cz_source = match get("cz_source")? {
                "cer" => CzErrorSource::Cer,
                "ber" => CzErrorSource::Ber,
                other => return Err(p.err(other, "cz_source must be cer or ber")),
            };
            header = Some((
                p.parse_u32(get("distance")?)?,
                p.parse_u32(get("rounds")?)?,
                basis,
                p.parse_u32(get("qubits")?)?,
                NoiseParams {
                    cer: p.parse_f64(get("cer")?)?,
                    ber: p.parse_f64(get("ber")?)?,
                    shuttle,
                    cz_source,
                },
            ));
            continue;
        }
        if header.is_none() {
            return Err(p.err(head, "CIRCUIT header must come first"));
        }

        match head {
            "TICK" => {
                if !rest.is_empty() {
                    return Err(p.err(rest[0], "TICK takes no arguments"));
                }
                ops.push(Op::Tick);
                step += 1;
            }
            "RESET_Z" | "H" | "MEASURE_Z" | "IDLE_MARK" => {
                if rest.is_empty() {
                    return Err(p.err(head, "gate needs at least one target"));
                }
                let mut seen = std::collections::HashSet::new();
                for t in &rest {
                    let q = p.parse_u32(t)?;
                    if !seen.insert(q) {
                        return Err(p.err(t, "repeated target"));
                    }
                    ops.push(match head {
                        "RESET_Z" => Op::Reset(q),
                        "H" => Op::H(q),
                        "MEASURE_Z" => {
                            records += 1;
                            Op::Measure(q)
                        }
                        _ => Op::IdleMark(q),
                    });
                }
            }
            "CZ" => {
                if rest.is_empty() || !rest.len().is_multiple_of(2) {
                    return Err(p.err(head, "CZ needs an even number of targets"));
                }
                let mut seen = std::collections::HashSet::new();
                for pair in rest.chunks(2) {
                    let a = p.parse_u32(pair[0])?;
                    let b = p.parse_u32(pair[1])?;
                    if a == b || !seen.insert(a) || !seen.insert(b) {
                        return Err(p.err(pair[1], "repeated target"));
                    }
                    ops.push(Op::Cz(a, b));
                }
            }
            "OBSERVABLE" => {
                if observable.is_some() {
                    return Err(p.err(head, "duplicate OBSERVABLE"));
                }
                let mut recs = Vec::new();
                for t in &rest {
                    recs.push(p.parse_rec(t, records)?);
                }
                observable = Some(recs);
            }
            _ if head.starts_with("DETECTOR") => {
                let (_, args) = p.split_call(head)?;
                if args.len() != 3 {
                    return Err(p.err(head, "DETECTOR takes (kind,stab,round)"));
                }
                let kind = match args[0] {
                    "X" => StabKind::X,
                    "Z" => StabKind::Z,
                    other => return Err(p.err(other, "detector kind must be X or Z")),
                };
                let mut recs = Vec::new();
                for t in &rest {
                    recs.push(p.parse_rec(t, records)?);
                }
                recs.sort_unstable();
                let id = detectors.len() as u32;
                detectors.push(Detector {
                    kind,
                    stab: p.parse_u32(args[1])?,
                    round: p.parse_u32(args[2])?,
                    records: recs,
                });
                ops.push(Op::Detector(id));
            }
            _ if head.contains('(') => {
                let (name, args) = p.split_call(head)?;
                let kind = match name {
                    "X_FLIP" => ChannelKind::XFlip,
                    "Z_FLIP" => ChannelKind::ZFlip,
                    "DEPOLARIZE1" => ChannelKind::Depolarize1,
                    "DEPOLARIZE2" => ChannelKind::Depolarize2,
                    other => return Err(p.err(other, "unknown noise channel")),
                };
                if args.len() != 2 {
                    return Err(p.err(head, "noise takes (probability,context)"));
                }
                let prob = p.parse_f64(args[0])?;
                let ctx = match args[1] {
                    "spam" => FaultCtx::Spam,
                    "gate" => FaultCtx::Gate,
                    "shuttle" => FaultCtx::Shuttle,
                    "cz" => FaultCtx::Cz,
                    "idle" => FaultCtx::Idle,
                    other => return Err(p.err(other, "unknown fault context")),
                };
                let key = (ctx, kind, prob.to_bits());
                let next_id = classes.len() as u16;
                let class = *class_ids.entry(key).or_insert_with(|| {
                    classes.push(ProbClass { ctx, kind, p: prob, sites: Vec::new() });
                    next_id
                });
                let arity = kind.arity();
                if rest.is_empty() || !rest.len().is_multiple_of(arity) {
                    return Err(p.err(head, "wrong number of noise targets"));
                }
                for group in rest.chunks(arity) {
                    let a = p.parse_u32(group[0])?;
                    let b = if arity == 2 { p.parse_u32(group[1])? } else { a };
                    if arity == 2 && a == b {
                        return Err(p.err(group[1], "repeated target"));
                    }
                    let site_id = sites.len() as u32;
                    classes[class as usize].sites.push(site_id);
                    sites.push(FaultSite { class, qubits: [a, b], step });
                    ops.push(Op::Fault(site_id));
                }
            }
            other => return Err(p.err(other, "unknown instruction")),
        }
    }

    let (distance, rounds, basis, n_qubits, noise) =
        header.ok_or_else(|| Error::Parse {
            line: 1,
            token: "CIRCUIT".into(),
            msg: "missing CIRCUIT header".into(),
        })?;
    let observable = observable.ok_or_else(|| Error::Parse {
        line: text.lines().count(),
        token: "OBSERVABLE".into(),
        msg: "missing OBSERVABLE".into(),
    })?;
    let circuit = Circuit {
        distance,
        rounds,
        basis,
        noise,
        n_qubits,
        ops,
        sites,
        classes,
        detectors,
        observable,
        n_records: records,
        n_steps: step,
    };
    circuit.validate()?;
    Ok(circuit)
}
