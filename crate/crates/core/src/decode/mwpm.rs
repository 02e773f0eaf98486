//! Exact minimum-weight perfect matching decoder.
//!
//! Fired detectors are paired up (or matched to the boundary) so that the
//! total path weight through the matching graph is minimal; the predicted
//! logical flip is the XOR of the observable masks along every matched path.
//!
//! Construction runs Dijkstra from every node once and stores all pairwise
//! distances plus the observable mask along each chosen shortest path, so a
//! shot costs only table lookups and tiny blossom instances:
//! - candidate pair (u, v) is kept only when d(u, v) < d(u, B) + d(v, B),
//!   otherwise routing both to the boundary never costs more;
//! - kept pairs split the fired set into independent components, each solved
//!   exactly with the blossom algorithm (odd components get one virtual
//!   boundary vertex, pairs may still realize through the boundary).
//!
//! Weights are quantized to integers (ln-ratio times 2^16) so the blossom
//! duals stay exact; ties resolve by node id, keeping decoding deterministic
//! regardless of worker count or shot order.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::decode::blossom::{maximum_weight_matching, NONE};
use crate::decode::graph::{MatchingGraph, BOUNDARY};
use crate::error::{Error, Result};
use crate::geom::StabKind;
use crate::sim::ShotBatch;

/// Unreachable distance sentinel in the tables.
const UNREACHABLE: u32 = u32::MAX;

/// Fixed-point scale for quantized edge weights.
const WEIGHT_SCALE: f64 = 65536.0;

/// Outcome of decoding one syndrome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    /// Predicted logical observable flip.
    pub flip: bool,
    /// Matched pairs, ascending; the second entry may be [`BOUNDARY`].
    pub matches: Vec<(u32, u32)>,
    /// Total quantized weight of all matched paths.
    pub weight: i64,
}

impl DecodeResult {
    fn identity() -> Self {
        DecodeResult { flip: false, matches: vec![], weight: 0 }
    }
}

/// Reusable matching decoder for one circuit's graph.
pub struct Decoder {
    n_detectors: u32,
    /// Node count including the boundary node at index `n_detectors`.
    n_nodes: usize,
    /// Flat [src * n_nodes + dst] shortest distances, saturating.
    dist: Vec<u32>,
    /// Observable mask along the chosen shortest path per (src, dst).
    mask: Vec<u8>,
    /// Families that own at least one observable-flipping edge.
    family_matters: [bool; 2],
    kinds: Vec<StabKind>,
}

/// Union-find with path halving.
struct Dsu(Vec<u32>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n as u32).collect())
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.0[x as usize] != x {
            self.0[x as usize] = self.0[self.0[x as usize] as usize];
            x = self.0[x as usize];
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[rb as usize] = ra;
        }
    }
}

/// One full Dijkstra sweep; fills a distance row and a path-mask row.
fn dijkstra_row(
    adjacency: &[Vec<(u32, u32)>],
    wq: &[u32],
    masks: &[u8],
    src: u32,
    dist: &mut [u32],
    mask: &mut [u8],
) {
    dist.fill(UNREACHABLE);
    mask.fill(0);
    let mut done = vec![false; dist.len()];
    let mut heap: BinaryHeap<Reverse<(u32, u32)>> = BinaryHeap::new();
    dist[src as usize] = 0;
    heap.push(Reverse((0, src)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if done[v as usize] {
            continue;
        }
        done[v as usize] = true;
        for &(nb, edge) in &adjacency[v as usize] {
            let nd = d.saturating_add(wq[edge as usize]);
            if nd < dist[nb as usize] && nd != UNREACHABLE {
                dist[nb as usize] = nd;
                mask[nb as usize] = mask[v as usize] ^ masks[edge as usize];
                heap.push(Reverse((nd, nb)));
            }
        }
    }
}

impl Decoder {
    /// Validate the graph and precompute all-pairs distances and masks.
    pub fn new(graph: &MatchingGraph) -> Result<Decoder> {
        let n_detectors = graph.n_detectors;
        let n_nodes = n_detectors as usize + 1;
        let boundary = n_detectors;
        let mut adjacency: Vec<Vec<(u32, u32)>> = vec![vec![]; n_nodes];
        let mut wq = Vec::with_capacity(graph.edges.len());
        let mut masks = Vec::with_capacity(graph.edges.len());
        let mut family_matters = [false; 2];
        for (id, e) in graph.edges.iter().enumerate() {
            if e.u >= n_detectors || (e.v != BOUNDARY && e.v >= n_detectors) {
                return Err(Error::Validation(format!(
                    "edge ({}, {}) references an unknown detector",
                    e.u, e.v
                )));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::Validation(format!(
                    "edge ({}, {}) has non-positive weight {}",
                    e.u, e.v, e.weight
                )));
            }
            let v = if e.v == BOUNDARY { boundary } else { e.v };
            adjacency[e.u as usize].push((v, id as u32));
            adjacency[v as usize].push((e.u, id as u32));
            // Clamped so path sums stay far from the u32 sentinel.
            wq.push(((e.weight * WEIGHT_SCALE).round() as i64).clamp(1, 1 << 24) as u32);
            masks.push(e.observable_mask);
            if e.observable_mask != 0 {
                family_matters[graph.kinds[e.u as usize] as usize] = true;
            }
        }
        let mut dist = vec![UNREACHABLE; n_nodes * n_nodes];
        let mut mask = vec![0u8; n_nodes * n_nodes];
        dist.par_chunks_mut(n_nodes)
            .zip(mask.par_chunks_mut(n_nodes))
            .enumerate()
            .for_each(|(src, (drow, mrow))| {
                dijkstra_row(&adjacency, &wq, &masks, src as u32, drow, mrow);
            });
        Ok(Decoder {
            n_detectors,
            n_nodes,
            dist,
            mask,
            family_matters,
            kinds: graph.kinds.clone(),
        })
    }

    fn d(&self, u: u32, v: u32) -> u32 {
        self.dist[u as usize * self.n_nodes + v as usize]
    }

    fn m(&self, u: u32, v: u32) -> u8 {
        self.mask[u as usize * self.n_nodes + v as usize]
    }

    /// Decode one syndrome: `fired` must be ascending unique detector ids.
    pub fn decode(&self, fired: &[u32]) -> Result<DecodeResult> {
        for (i, &d) in fired.iter().enumerate() {
            if d >= self.n_detectors {
                return Err(Error::Dimension(format!(
                    "detector {d} out of range ({} detectors)",
                    self.n_detectors
                )));
            }
            if i > 0 && fired[i - 1] >= d {
                return Err(Error::InvalidParameter(
                    "fired detectors must be ascending and unique".into(),
                ));
            }
        }
        if fired.is_empty() {
            return Ok(DecodeResult::identity());
        }
        let f = fired.len();
        let boundary = self.n_detectors;
        let db: Vec<i64> = fired.iter().map(|&u| self.d(u, boundary) as i64).collect();

        // Pairs cheaper than two boundary routes bind components together;
        // everything else routes through the boundary without loss.
        let mut dsu = Dsu::new(f);
        for i in 0..f {
            for j in i + 1..f {
                let direct = self.d(fired[i], fired[j]);
                if direct != UNREACHABLE && (direct as i64) < db[i] + db[j] {
                    dsu.union(i as u32, j as u32);
                }
            }
        }
        let mut components: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
        for i in 0..f {
            components.entry(dsu.find(i as u32)).or_default().push(i);
        }

        let mut matches: Vec<(u32, u32)> = vec![];
        let mut weight = 0i64;
        let mut flip = 0u8;
        for members in components.values() {
            let m = members.len();
            let odd = m % 2 == 1;
            let mut edges: Vec<(usize, usize, i64)> = vec![];
            let mut maxw = 0i64;
            for a in 0..m {
                for b in a + 1..m {
                    let (i, j) = (members[a], members[b]);
                    let direct = self.d(fired[i], fired[j]);
                    let via = db[i].saturating_add(db[j]);
                    let w = (direct as i64).min(via);
                    if w >= UNREACHABLE as i64 {
                        return Err(Error::Validation(format!(
                            "detector {} is disconnected from the matching graph",
                            fired[i]
                        )));
                    }
                    edges.push((a, b, w));
                    maxw = maxw.max(w);
                }
                if odd {
                    if db[members[a]] >= UNREACHABLE as i64 {
                        return Err(Error::Validation(format!(
                            "detector {} cannot reach the boundary",
                            fired[members[a]]
                        )));
                    }
                    edges.push((a, m, db[members[a]]));
                    maxw = maxw.max(db[members[a]]);
                }
            }
            if edges.is_empty() {
                // Singleton component: must route to the boundary.
                let i = members[0];
                if db[i] >= UNREACHABLE as i64 {
                    return Err(Error::Validation(format!(
                        "detector {} cannot reach the boundary",
                        fired[i]
                    )));
                }
                matches.push((fired[i], BOUNDARY));
                weight += db[i];
                flip ^= self.m(fired[i], boundary);
                continue;
            }
            // Minimum weight as maximum of (maxw + 1 - w); cardinality must
            // be perfect, which a complete even graph always allows.
            let transformed: Vec<(usize, usize, i64)> =
                edges.iter().map(|&(a, b, w)| (a, b, maxw + 1 - w)).collect();
            let mate = maximum_weight_matching(&transformed, true);
            for a in 0..m {
                let b = mate.get(a).copied().unwrap_or(NONE);
                debug_assert!(b != NONE, "imperfect matching in component");
                if b == m {
                    // Virtual boundary vertex.
                    let u = fired[members[a]];
                    matches.push((u, BOUNDARY));
                    weight += db[members[a]];
                    flip ^= self.m(u, boundary);
                } else if b > a {
                    let (i, j) = (members[a], members[b]);
                    let (u, v) = (fired[i], fired[j]);
                    let direct = self.d(u, v) as i64;
                    let via = db[i].saturating_add(db[j]);
                    if direct <= via {
                        matches.push((u, v));
                        weight += direct;
                        flip ^= self.m(u, v);
                    } else {
                        matches.push((u, BOUNDARY));
                        matches.push((v, BOUNDARY));
                        weight += via;
                        flip ^= self.m(u, boundary) ^ self.m(v, boundary);
                    }
                }
            }
        }
        matches.sort_unstable();
        Ok(DecodeResult { flip: flip & 1 == 1, matches, weight })
    }

    /// Predicted flip only, skipping families whose edges never carry an
    /// observable mask (their matchings cannot change the prediction).
    fn predict(&self, fired: &[u32]) -> Result<bool> {
        let relevant: Vec<u32> = fired
            .iter()
            .copied()
            .filter(|&d| self.family_matters[self.kinds[d as usize] as usize])
            .collect();
        Ok(self.decode(&relevant)?.flip)
    }

    /// Count decoding failures over the first `lanes` shots of a batch.
    pub fn decode_batch(&self, batch: &ShotBatch, lanes: u32) -> Result<u64> {
        if batch.detectors.len() != self.n_detectors as usize {
            return Err(Error::Dimension(format!(
                "batch carries {} detectors, graph has {}",
                batch.detectors.len(),
                self.n_detectors
            )));
        }
        if lanes == 0 || lanes > 64 {
            return Err(Error::InvalidParameter(format!(
                "lane count {lanes} must lie in 1..=64"
            )));
        }
        let lane_mask = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };
        if self.family_matters == [false; 2] {
            // No edge can flip the observable: the prediction is always 0.
            return Ok((batch.observable & lane_mask).count_ones() as u64);
        }
        let mut failures = 0;
        let mut fired: Vec<u32> = vec![];
        for lane in 0..lanes {
            fired.clear();
            for (d, &w) in batch.detectors.iter().enumerate() {
                if w >> lane & 1 == 1 {
                    fired.push(d as u32);
                }
            }
            let predicted = self.predict(&fired)?;
            let actual = batch.observable >> lane & 1 == 1;
            failures += (predicted != actual) as u64;
        }
        Ok(failures)
    }
}
