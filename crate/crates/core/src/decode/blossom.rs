//! Maximum-weight matching in general graphs: Edmonds' blossom algorithm
//! with the primal-dual weighted extension.
//!
//! Port of Joris van Rantwijk's reference implementation (O(V^3)), adapted
//! to i64 weights so quantized log-likelihood costs stay exact. Vertices are
//! consecutive integers; `NONE` marks "unmatched" or "no edge". With
//! `max_cardinality` the solver only considers matchings of maximum size,
//! which is what turns it into a perfect-matching solver on complete graphs
//! after a weight reversal.
//!
//! Variable names follow the original so the port can be audited line by
//! line; see Galil, "Efficient algorithms for finding maximum matching in
//! graphs" (ACM Computing Surveys, 1986) for the terminology.

pub type Weight = i64;

/// Sentinel vertex/endpoint value.
pub const NONE: usize = usize::MAX;

/// Returns `mate` with `mate[v] = w` iff v is matched to w, `NONE` if single.
///
/// Edges are `(i, j, weight)` with `i != j` and at most one edge per pair.
pub fn maximum_weight_matching(
    edges: &[(usize, usize, Weight)],
    max_cardinality: bool,
) -> Vec<usize> {
    if edges.is_empty() {
        return vec![];
    }
    Solver::new(edges, max_cardinality).solve()
}

struct Solver {
    nvertex: usize,
    nedge: usize,
    edges: Vec<(usize, usize, Weight)>,
    maxcardinality: bool,
    // endpoint[p] is the vertex to which endpoint p of edge p/2 is attached.
    endpoint: Vec<usize>,
    // neighbend[v] lists the remote endpoints of v's edges.
    neighbend: Vec<Vec<usize>>,
    // mate[v] is the remote ENDPOINT of v's matched edge until solve() ends.
    mate: Vec<usize>,
    // label per top-level blossom: 0 free, 1 S, 2 T (5 = S breadcrumb).
    label: Vec<usize>,
    // labelend[b] is the remote endpoint through which b got its label.
    labelend: Vec<usize>,
    // inblossom[v] is the top-level blossom containing vertex v.
    inblossom: Vec<usize>,
    // blossomparent/childs/base/endps describe the blossom forest.
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    // bestedge[b] is the least-slack edge for delta2/delta3 computation.
    bestedge: Vec<usize>,
    blossombestedges: Vec<Vec<usize>>,
    unusedblossoms: Vec<usize>,
    // dualvar[v] = 2u(v) for vertices, z(b) for blossoms.
    dualvar: Vec<Weight>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

/// Python-style indexing: negative offsets wrap from the back.
fn at(v: &[usize], index: i32) -> usize {
    if index >= 0 {
        v[index as usize]
    } else {
        v[v.len() - (-index) as usize]
    }
}

/// v = v[split..] + v[..split]
fn rotate(v: &mut [usize], split: usize) {
    v.rotate_left(split);
}

impl Solver {
    fn new(edges: &[(usize, usize, Weight)], maxcardinality: bool) -> Solver {
        let nedge = edges.len();
        let mut nvertex = 0;
        for &(i, j, _) in edges {
            assert!(i != j);
            nvertex = nvertex.max(i + 1).max(j + 1);
        }
        let maxweight = edges.iter().map(|e| e.2).max().unwrap().max(0);
        let endpoint: Vec<usize> =
            (0..2 * nedge).map(|p| if p % 2 == 0 { edges[p / 2].0 } else { edges[p / 2].1 }).collect();
        let mut neighbend = vec![vec![]; nvertex];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        let mut blossombase: Vec<usize> = (0..nvertex).collect();
        blossombase.extend(vec![NONE; nvertex]);
        let mut dualvar = vec![maxweight; nvertex];
        dualvar.extend(vec![0; nvertex]);
        Solver {
            nvertex,
            nedge,
            edges: edges.to_vec(),
            maxcardinality,
            endpoint,
            neighbend,
            mate: vec![NONE; nvertex],
            label: vec![0; 2 * nvertex],
            labelend: vec![NONE; 2 * nvertex],
            inblossom: (0..nvertex).collect(),
            blossomparent: vec![NONE; 2 * nvertex],
            blossomchilds: vec![vec![]; 2 * nvertex],
            blossombase,
            blossomendps: vec![vec![]; 2 * nvertex],
            bestedge: vec![NONE; 2 * nvertex],
            blossombestedges: vec![vec![]; 2 * nvertex],
            unusedblossoms: (nvertex..2 * nvertex).collect(),
            dualvar,
            allowedge: vec![false; nedge],
            queue: vec![],
        }
    }

    // 2 * slack of edge k (invalid inside blossoms).
    fn slack(&self, k: usize) -> Weight {
        let (i, j, wt) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2 * wt
    }

    fn blossom_leaves(&self, b: usize) -> Vec<usize> {
        let mut leaves = vec![];
        if b < self.nvertex {
            leaves.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                if t < self.nvertex {
                    leaves.push(t);
                } else {
                    leaves.extend(self.blossom_leaves(t));
                }
            }
        }
        leaves
    }

    /// Label the top-level blossom of w with t, reached via remote endpoint p.
    fn assign_label(&mut self, w: usize, t: usize, p: usize) {
        let b = self.inblossom[w];
        assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            // b became an S-blossom; scan its vertices.
            let leaves = self.blossom_leaves(b);
            self.queue.extend(leaves);
        } else if t == 2 {
            // b became a T-blossom; its base's mate becomes an S-vertex.
            let base = self.blossombase[b];
            assert!(self.mate[base] != NONE);
            let mbase = self.mate[base];
            let endpoint = self.endpoint[mbase];
            self.assign_label(endpoint, 1, mbase ^ 1);
        }
    }

    /// Trace back from v and w; returns the base of a new blossom or NONE if
    /// an augmenting path was discovered instead.
    fn scan_blossom(&mut self, v: usize, w: usize) -> usize {
        let mut path = vec![];
        let mut base = NONE;
        let (mut v, mut w) = (v, w);
        while v != NONE || w != NONE {
            // Breadcrumb check on v's blossom.
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            assert!(self.label[b] == 1);
            path.push(b);
            self.label[b] = 5;
            // Trace one step back.
            assert!(self.labelend[b] == self.mate[self.blossombase[b]]);
            if self.labelend[b] == NONE {
                // Base of b is single; this path ends.
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                assert!(self.label[b] == 2);
                assert!(self.labelend[b] != NONE);
                v = self.endpoint[self.labelend[b]];
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    /// Fold the S-vertices connected by edge k into a new blossom at `base`.
    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];

        let b = self.unusedblossoms.pop().unwrap();
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;

        self.blossomchilds[b] = vec![];
        self.blossomendps[b] = vec![];
        // Trace back from v to base.
        while bv != bb {
            self.blossomparent[bv] = b;
            self.blossomchilds[b].push(bv);
            self.blossomendps[b].push(self.labelend[bv]);
            assert!(
                self.label[bv] == 2
                    || (self.label[bv] == 1
                        && self.labelend[bv] == self.mate[self.blossombase[bv]])
            );
            assert!(self.labelend[bv] != NONE);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        self.blossomchilds[b].push(bb);
        self.blossomchilds[b].reverse();
        self.blossomendps[b].reverse();
        self.blossomendps[b].push(2 * k);
        // Trace back from w to base.
        while bw != bb {
            self.blossomparent[bw] = b;
            self.blossomchilds[b].push(bw);
            self.blossomendps[b].push(self.labelend[bw] ^ 1);
            assert!(
                self.label[bw] == 2
                    || (self.label[bw] == 1
                        && self.labelend[bw] == self.mate[self.blossombase[bw]])
            );
            assert!(self.labelend[bw] != NONE);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }

        assert!(self.label[bb] == 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0;

        for v in self.blossom_leaves(b) {
            if self.label[self.inblossom[v]] == 2 {
                // Former T-vertices become S-vertices; scan them.
                self.queue.push(v);
            }
            self.inblossom[v] = b;
        }

        // Recompute least-slack edges into neighbouring S-blossoms.
        let mut bestedgeto = vec![NONE; 2 * self.nvertex];
        for &bv in &self.blossomchilds[b].clone() {
            let nblists: Vec<Vec<usize>> = if self.blossombestedges[bv].is_empty() {
                self.blossom_leaves(bv)
                    .iter()
                    .map(|&v| self.neighbend[v].iter().map(|p| p / 2).collect())
                    .collect()
            } else {
                vec![self.blossombestedges[bv].clone()]
            };
            for nblist in nblists {
                for k in nblist {
                    let (mut i, mut j, _) = self.edges[k];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.blossombestedges[bv] = vec![];
            self.bestedge[bv] = NONE;
        }
        self.blossombestedges[b] = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        self.bestedge[b] = NONE;
        for &k in &self.blossombestedges[b] {
            if self.bestedge[b] == NONE || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
    }

    /// Undo a top-level blossom, promoting its children.
    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        for s in self.blossomchilds[b].clone() {
            self.blossomparent[s] = NONE;
            if s < self.nvertex {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for v in self.blossom_leaves(s) {
                    self.inblossom[v] = s;
                }
            }
        }
        // Mid-stage expansion of a T-blossom: relabel the even alternating
        // path from the entry child to the base, leave the rest free.
        if !endstage && self.label[b] == 2 {
            assert!(self.labelend[b] != NONE);
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let mut j =
                self.blossomchilds[b].iter().position(|&r| r == entrychild).unwrap() as i32;
            let jstep: i32;
            let endptrick: i32;
            if j & 1 != 0 {
                // Odd start: go forward and wrap around.
                j -= self.blossomchilds[b].len() as i32;
                jstep = 1;
                endptrick = 0;
            } else {
                jstep = -1;
                endptrick = 1;
            }
            let mut p = self.labelend[b];
            while j != 0 {
                // Relabel the T-sub-blossom.
                self.label[self.endpoint[p ^ 1]] = 0;
                self.label[self.endpoint
                    [at(&self.blossomendps[b], j - endptrick) ^ endptrick as usize ^ 1]] = 0;
                let ep = self.endpoint[p ^ 1];
                self.assign_label(ep, 2, p);
                // The connecting edges have zero slack inside the blossom.
                self.allowedge[at(&self.blossomendps[b], j - endptrick) / 2] = true;
                j += jstep;
                p = at(&self.blossomendps[b], j - endptrick) ^ endptrick as usize;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            // The base keeps label T without stepping to its mate.
            let bv = at(&self.blossomchilds[b], j);
            self.label[self.endpoint[p ^ 1]] = 2;
            self.label[bv] = 2;
            self.labelend[self.endpoint[p ^ 1]] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while at(&self.blossomchilds[b], j) != entrychild {
                // Sub-blossoms on the other path are free unless reachable
                // from outside; relabel reached ones as T.
                let bv = at(&self.blossomchilds[b], j);
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let mut v = NONE;
                for leaf in self.blossom_leaves(bv) {
                    v = leaf;
                    if self.label[v] != 0 {
                        break;
                    }
                }
                if self.label[v] != 0 {
                    assert!(self.label[v] == 2);
                    assert!(self.inblossom[v] == bv);
                    self.label[v] = 0;
                    self.label[self.endpoint[self.mate[self.blossombase[bv]]]] = 0;
                    let lblend = self.labelend[v];
                    self.assign_label(v, 2, lblend);
                }
                j += jstep;
            }
        }
        self.label[b] = NONE;
        self.labelend[b] = NONE;
        self.blossombase[b] = NONE;
        self.bestedge[b] = NONE;
        self.blossomchilds[b] = vec![];
        self.blossomendps[b] = vec![];
        self.blossombestedges[b] = vec![];
        self.unusedblossoms.push(b);
    }

    /// Swap matched/unmatched edges along the path from v to b's base.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nvertex && t != NONE {
            self.augment_blossom(t, v);
        }
        let i = self.blossomchilds[b].iter().position(|&r| r == t).unwrap();
        let mut j = i as i32;
        let jstep: i32;
        let endptrick: i32;
        if i & 1 != 0 {
            j -= self.blossomchilds[b].len() as i32;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        while j != 0 {
            j += jstep;
            let mut t = at(&self.blossomchilds[b], j);
            let p = at(&self.blossomendps[b], j - endptrick) ^ endptrick as usize;
            if t >= self.nvertex && t != NONE {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            t = at(&self.blossomchilds[b], j);
            if t >= self.nvertex && t != NONE {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        rotate(&mut self.blossomchilds[b], i);
        rotate(&mut self.blossomendps[b], i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        assert!(self.blossombase[b] == v);
    }

    /// Augment the matching along the path through zero-slack edge k.
    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for &(start, pstart) in &[(v, 2 * k + 1), (w, 2 * k)] {
            let (mut s, mut p) = (start, pstart);
            loop {
                let bs = self.inblossom[s];
                assert!(self.label[bs] == 1);
                assert!(self.labelend[bs] == self.mate[self.blossombase[bs]]);
                if bs >= self.nvertex && bs != NONE {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    // Reached a single vertex.
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                assert!(self.label[bt] == 2);
                assert!(self.labelend[bt] != NONE);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                assert!(self.blossombase[bt] == t);
                if bt >= self.nvertex && bt != NONE {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    /// Check the complementary-slackness conditions of the final solution.
    fn verify_optimum(&self) {
        let vdualoffset = if self.maxcardinality {
            (-self.dualvar[..self.nvertex].iter().min().unwrap()).max(0)
        } else {
            0
        };
        assert!(self.dualvar[..self.nvertex].iter().min().unwrap() + vdualoffset >= 0);
        assert!(*self.dualvar[self.nvertex..].iter().min().unwrap() >= 0);
        // Every edge has non-negative slack; matched edges have zero slack.
        for k in 0..self.nedge {
            let (i, j, wt) = self.edges[k];
            let mut s = self.dualvar[i] + self.dualvar[j] - 2 * wt;
            let mut iblossoms = vec![i];
            let mut jblossoms = vec![j];
            while self.blossomparent[*iblossoms.last().unwrap()] != NONE {
                iblossoms.push(self.blossomparent[*iblossoms.last().unwrap()]);
            }
            while self.blossomparent[*jblossoms.last().unwrap()] != NONE {
                jblossoms.push(self.blossomparent[*jblossoms.last().unwrap()]);
            }
            iblossoms.reverse();
            jblossoms.reverse();
            for (&bi, bj) in iblossoms.iter().zip(jblossoms) {
                if bi != bj {
                    break;
                }
                s += 2 * self.dualvar[bi];
            }
            assert!(s >= 0);
            if self.mate[i] / 2 == k || self.mate[j] / 2 == k {
                assert!(self.mate[i] / 2 == k && self.mate[j] / 2 == k);
                assert!(s == 0);
            }
        }
        // Single vertices have zero dual; positive-dual blossoms are full.
        for v in 0..self.nvertex {
            assert!(self.mate[v] != NONE || self.dualvar[v] + vdualoffset == 0);
        }
        for b in self.nvertex..2 * self.nvertex {
            if self.blossombase[b] != NONE && self.dualvar[b] > 0 {
                assert!(self.blossomendps[b].len() % 2 == 1);
                for &p in self.blossomendps[b].iter().skip(1).step_by(2) {
                    assert!(self.mate[self.endpoint[p]] == p ^ 1);
                    assert!(self.mate[self.endpoint[p ^ 1]] == p);
                }
            }
        }
    }

    fn solve(&mut self) -> Vec<usize> {
        for _ in 0..self.nvertex {
            // Stage: find one augmenting path and flip it.
            self.label = vec![0; 2 * self.nvertex];
            self.bestedge = vec![NONE; 2 * self.nvertex];
            for ll in self.nvertex..2 * self.nvertex {
                self.blossombestedges[ll] = vec![];
            }
            self.allowedge = vec![false; self.nedge];
            self.queue = vec![];
            for v in 0..self.nvertex {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }
            let mut augmented = false;
            loop {
                // Substage: grow the forest or pump dual slack.
                'scan: while let Some(v) = self.queue.pop() {
                    assert!(self.label[self.inblossom[v]] == 1);
                    for p in self.neighbend[v].clone() {
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = 0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= 0 {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            if self.label[self.inblossom[w]] == 0 {
                                // Free vertex: label T, its mate S.
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[self.inblossom[w]] == 1 {
                                // S-S edge: new blossom or augmenting path.
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break 'scan;
                                }
                            } else if self.label[w] == 0 {
                                // Unreached vertex inside a T-blossom.
                                assert!(self.label[self.inblossom[w]] == 2);
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == NONE
                                || kslack < self.slack(self.bestedge[b])
                            {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == NONE
                                || kslack < self.slack(self.bestedge[w]))
                        {
                            self.bestedge[w] = k;
                        }
                    }
                }
                if augmented {
                    break;
                }

                // Dual update: find the tightest constraint.
                let mut deltatype = -1;
                let mut delta = 0;
                let mut deltaedge = 0;
                let mut deltablossom = 0;
                if !self.maxcardinality {
                    deltatype = 1;
                    delta = *self.dualvar[..self.nvertex].iter().min().unwrap();
                }
                // delta2: least slack from an S-vertex to a free vertex.
                for v in 0..self.nvertex {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                // delta3: half the least slack between two S-blossoms.
                for b in 0..2 * self.nvertex {
                    if self.blossomparent[b] == NONE
                        && self.label[b] == 1
                        && self.bestedge[b] != NONE
                    {
                        let d = self.slack(self.bestedge[b]) / 2;
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                // delta4: least z of any top-level T-blossom.
                for b in self.nvertex..2 * self.nvertex {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && (deltatype == -1 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == -1 {
                    // Max-cardinality optimum; final update to verify duals.
                    assert!(self.maxcardinality);
                    deltatype = 1;
                    delta = (*self.dualvar[..self.nvertex].iter().min().unwrap()).max(0);
                }

                for v in 0..self.nvertex {
                    match self.label[self.inblossom[v]] {
                        0 => {}
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => unreachable!(),
                    }
                }
                for b in self.nvertex..2 * self.nvertex {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            0 => {}
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => unreachable!(),
                        }
                    }
                }
                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let (mut i, j, _) = self.edges[deltaedge];
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        assert!(self.label[self.inblossom[i]] == 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        assert!(self.label[self.inblossom[i]] == 1);
                        self.queue.push(i);
                    }
                    4 => self.expand_blossom(deltablossom, false),
                    _ => unreachable!(),
                }
            }
            if !augmented {
                break;
            }
            // End of stage: expand zero-dual S-blossoms.
            for b in self.nvertex..2 * self.nvertex {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] != NONE
                    && self.label[b] == 1
                    && self.dualvar[b] == 0
                {
                    self.expand_blossom(b, true);
                }
            }
        }
        if cfg!(debug_assertions) {
            self.verify_optimum();
        }
        // Convert endpoint-space mates to vertex-space.
        for v in 0..self.nvertex {
            if self.mate[v] != NONE {
                self.mate[v] = self.endpoint[self.mate[v]];
            }
        }
        for v in 0..self.nvertex {
            debug_assert!(self.mate[v] == NONE || self.mate[self.mate[v]] == v);
        }
        self.mate.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn solve(edges: &[(usize, usize, Weight)]) -> Vec<usize> {
        maximum_weight_matching(edges, false)
    }

    fn solve_maxcard(edges: &[(usize, usize, Weight)]) -> Vec<usize> {
        maximum_weight_matching(edges, true)
    }

    const X: usize = NONE;

    #[test]
    fn test_trivial_graphs() {
        assert_eq!(solve(&[]), Vec::<usize>::new());
        assert_eq!(solve(&[(0, 1, 1)]), vec![1, 0]);
        assert_eq!(solve(&[(1, 2, 10), (2, 3, 11)]), vec![X, X, 3, 2]);
        assert_eq!(solve(&[(1, 2, 5), (2, 3, 11), (3, 4, 5)]), vec![X, X, 3, 2, X]);
        assert_eq!(solve_maxcard(&[(1, 2, 5), (2, 3, 11), (3, 4, 5)]), vec![X, 2, 1, 4, 3]);
    }

    #[test]
    fn test_negative_weights() {
        let edges = [(1, 2, 2), (1, 3, -2), (2, 3, 1), (2, 4, -1), (3, 4, -6)];
        assert_eq!(solve(&edges), vec![X, 2, 1, X, X]);
        assert_eq!(solve_maxcard(&edges), vec![X, 3, 4, 1, 2]);
    }

    #[test]
    fn test_s_blossom_augmentation() {
        assert_eq!(
            solve(&[(1, 2, 8), (1, 3, 9), (2, 3, 10), (3, 4, 7)]),
            vec![X, 2, 1, 4, 3]
        );
        assert_eq!(
            solve(&[(1, 2, 8), (1, 3, 9), (2, 3, 10), (3, 4, 7), (1, 6, 5), (4, 5, 6)]),
            vec![X, 6, 3, 2, 5, 4, 1]
        );
    }

    #[test]
    fn test_s_to_t_relabel_augmentation() {
        assert_eq!(
            solve(&[(1, 2, 9), (1, 3, 8), (2, 3, 10), (1, 4, 5), (4, 5, 4), (1, 6, 3)]),
            vec![X, 6, 3, 2, 5, 4, 1]
        );
        assert_eq!(
            solve(&[(1, 2, 9), (1, 3, 8), (2, 3, 10), (1, 4, 5), (4, 5, 3), (1, 6, 4)]),
            vec![X, 6, 3, 2, 5, 4, 1]
        );
        assert_eq!(
            solve(&[(1, 2, 9), (1, 3, 8), (2, 3, 10), (1, 4, 5), (4, 5, 3), (3, 6, 4)]),
            vec![X, 2, 1, 6, 5, 4, 3]
        );
    }

    #[test]
    fn test_nested_s_blossom_augmentation() {
        assert_eq!(
            solve(&[(1, 2, 9), (1, 3, 9), (2, 3, 10), (2, 4, 8), (3, 5, 8), (4, 5, 10), (5, 6, 6)]),
            vec![X, 3, 4, 1, 2, 6, 5]
        );
    }

    #[test]
    fn test_nested_s_blossom_relabel_expand() {
        assert_eq!(
            solve(&[
                (1, 2, 10),
                (1, 7, 10),
                (2, 3, 12),
                (3, 4, 20),
                (3, 5, 20),
                (4, 5, 25),
                (5, 6, 10),
                (6, 7, 10),
                (7, 8, 8)
            ]),
            vec![X, 2, 1, 4, 3, 6, 5, 8, 7]
        );
        assert_eq!(
            solve(&[
                (1, 2, 8),
                (1, 3, 8),
                (2, 3, 10),
                (2, 4, 12),
                (3, 5, 12),
                (4, 5, 14),
                (4, 6, 12),
                (5, 7, 12),
                (6, 7, 14),
                (7, 8, 12)
            ]),
            vec![X, 2, 1, 5, 6, 3, 4, 8, 7]
        );
    }

    #[test]
    fn test_s_blossom_relabel_t_expand() {
        assert_eq!(
            solve(&[
                (1, 2, 23),
                (1, 5, 22),
                (1, 6, 15),
                (2, 3, 25),
                (3, 4, 22),
                (4, 5, 25),
                (4, 8, 14),
                (5, 7, 13)
            ]),
            vec![X, 6, 3, 2, 8, 7, 1, 5, 4]
        );
        assert_eq!(
            solve(&[
                (1, 2, 19),
                (1, 3, 20),
                (1, 8, 8),
                (2, 3, 25),
                (2, 4, 18),
                (3, 5, 18),
                (4, 5, 13),
                (4, 7, 7),
                (5, 6, 7)
            ]),
            vec![X, 8, 3, 2, 7, 6, 5, 4, 1]
        );
    }

    #[test]
    fn test_nasty_t_blossom_expansions() {
        assert_eq!(
            solve(&[
                (1, 2, 45),
                (1, 5, 45),
                (2, 3, 50),
                (3, 4, 45),
                (4, 5, 50),
                (1, 6, 30),
                (3, 9, 35),
                (4, 8, 35),
                (5, 7, 26),
                (9, 10, 5)
            ]),
            vec![X, 6, 3, 2, 8, 7, 1, 5, 4, 10, 9]
        );
        assert_eq!(
            solve(&[
                (1, 2, 45),
                (1, 5, 45),
                (2, 3, 50),
                (3, 4, 45),
                (4, 5, 50),
                (1, 6, 30),
                (3, 9, 35),
                (4, 8, 26),
                (5, 7, 40),
                (9, 10, 5)
            ]),
            vec![X, 6, 3, 2, 8, 7, 1, 5, 4, 10, 9]
        );
        assert_eq!(
            solve(&[
                (1, 2, 45),
                (1, 5, 45),
                (2, 3, 50),
                (3, 4, 45),
                (4, 5, 50),
                (1, 6, 30),
                (3, 9, 35),
                (4, 8, 28),
                (5, 7, 26),
                (9, 10, 5)
            ]),
            vec![X, 6, 3, 2, 8, 7, 1, 5, 4, 10, 9]
        );
        assert_eq!(
            solve(&[
                (1, 2, 45),
                (1, 7, 45),
                (2, 3, 50),
                (3, 4, 45),
                (4, 5, 95),
                (4, 6, 94),
                (5, 6, 94),
                (6, 7, 50),
                (1, 8, 30),
                (3, 11, 35),
                (5, 9, 36),
                (7, 10, 26),
                (11, 12, 5)
            ]),
            vec![X, 8, 3, 2, 6, 9, 4, 10, 1, 5, 7, 12, 11]
        );
        assert_eq!(
            solve(&[
                (1, 2, 40),
                (1, 3, 40),
                (2, 3, 60),
                (2, 4, 55),
                (3, 5, 55),
                (4, 5, 50),
                (1, 8, 15),
                (5, 7, 30),
                (7, 6, 10),
                (8, 10, 10),
                (4, 9, 30)
            ]),
            vec![X, 2, 1, 5, 9, 3, 7, 6, 10, 4, 8]
        );
    }

    /// Best (cardinality, weight) over all matchings by vertex recursion.
    fn brute_force(n: usize, edges: &[(usize, usize, Weight)], maxcard: bool) -> (usize, Weight) {
        #[allow(clippy::too_many_arguments)]
        fn go(
            v: usize,
            n: usize,
            used: u32,
            card: usize,
            weight: Weight,
            edges: &[(usize, usize, Weight)],
            best: &mut (usize, Weight),
            maxcard: bool,
        ) {
            if v == n {
                let better =
                    if maxcard { (card, weight) > *best } else { weight > best.1 };
                if better {
                    *best = (card, weight);
                }
                return;
            }
            if used >> v & 1 == 1 {
                go(v + 1, n, used, card, weight, edges, best, maxcard);
                return;
            }
            // Leave v single.
            go(v + 1, n, used | 1 << v, card, weight, edges, best, maxcard);
            for &(i, j, wt) in edges {
                let w = if i == v { j } else if j == v { i } else { continue };
                if w > v && used >> w & 1 == 0 {
                    go(v + 1, n, used | 1 << v | 1 << w, card + 1, weight + wt, edges, best, maxcard);
                }
            }
        }
        let mut best = (0, Weight::MIN);
        go(0, n, 0, 0, 0, edges, &mut best, maxcard);
        best
    }

    fn matching_stats(edges: &[(usize, usize, Weight)], mate: &[usize]) -> (usize, Weight) {
        let mut card = 0;
        let mut weight = 0;
        for &(i, j, wt) in edges {
            if i < mate.len() && mate[i] == j {
                card += 1;
                weight += wt;
            }
        }
        (card, weight)
    }

    #[test]
    fn test_matches_brute_force_on_random_graphs() {
        let mut rng = ChaCha12Rng::seed_from_u64(2024);
        for case in 0..200 {
            let n = rng.gen_range(2..9);
            let mut edges = vec![];
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.6) {
                        edges.push((i, j, rng.gen_range(-20..100)));
                    }
                }
            }
            if edges.is_empty() {
                continue;
            }
            for maxcard in [false, true] {
                let mate = maximum_weight_matching(&edges, maxcard);
                let got = matching_stats(&edges, &mate);
                let want = brute_force(n, &edges, maxcard);
                if maxcard {
                    assert_eq!(got, want, "case {case} maxcard edges {edges:?}");
                } else {
                    assert_eq!(got.1, want.1, "case {case} edges {edges:?}");
                }
            }
        }
    }
}
