//! Exact minimum-weight perfect matching on a complete graph of points.
//!
//! The solver is Edmonds' blossom algorithm in its primal-dual form
//! (the O(n^3) variant described by Galil), run as a maximum-weight,
//! maximum-cardinality matching on the transformed weights
//! `w'(i, j) = max(D) - D[i][j]`. On a complete graph with an even vertex
//! count every maximum-cardinality matching is perfect, so maximising the
//! transformed weight minimises the original one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest instance accepted by [`brute_force_matching`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Euclidean distances between every pair of `points`.
    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewPoints {
                required: 2,
                got: points.len(),
            });
        }
        let dim = points[0].as_ref().len();
        for (index, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    got: p.len(),
                });
            }
            if let Some(k) = p.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("point {index}, coordinate {k}"),
                });
            }
        }
        let n = points.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            let a = points[i].as_ref();
            for j in (i + 1)..n {
                let b = points[j].as_ref();
                let d = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        Ok(Self { n, entries })
    }

    /// Wraps a row-major `n x n` matrix after checking the invariants.
    /// Entries need not satisfy the triangle inequality.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidDistanceMatrix(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidDistanceMatrix(format!(
                    "diagonal entry {i} is not zero"
                )));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidDistanceMatrix(format!(
                        "entry ({i}, {j}) = {v} is not a finite non-negative number"
                    )));
                }
                if v != entries[j * n + i] {
                    return Err(Error::InvalidDistanceMatrix(format!(
                        "entries ({i}, {j}) and ({j}, {i}) differ"
                    )));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// Returns a copy with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    /// Applies `f(i, j, d)` to every off-diagonal entry, keeping symmetry.
    pub(crate) fn map_off_diagonal(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let n = self.n;
        let mut entries = self.entries.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j, self.get(i, j));
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Self { n, entries }
    }
}

/// A perfect matching; pairs are stored as `(low, high)` sorted by `low`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub total_weight: f64,
}

impl Matching {
    fn from_pairs(mut pairs: Vec<(usize, usize)>, d: &DistanceMatrix) -> Self {
        for p in &mut pairs {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        let total_weight = Self::weight_of(&pairs, d);
        Self {
            pairs,
            total_weight,
        }
    }

    /// Sum of `d` over `pairs` in the order given.
    pub fn weight_of(pairs: &[(usize, usize)], d: &DistanceMatrix) -> f64 {
        pairs.iter().map(|&(i, j)| d.get(i, j)).sum()
    }

    /// `mate[i]` is the partner of `i`.
    pub fn mates(&self) -> Vec<usize> {
        let n = self.pairs.len() * 2;
        let mut mate = vec![usize::MAX; n];
        for &(i, j) in &self.pairs {
            mate[i] = j;
            mate[j] = i;
        }
        mate
    }

    /// True when every index in `0..n` appears in exactly one pair.
    pub fn is_perfect(&self, n: usize) -> bool {
        if self.pairs.len() * 2 != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &(i, j) in &self.pairs {
            if i >= n || j >= n || i == j || seen[i] || seen[j] {
                return false;
            }
            seen[i] = true;
            seen[j] = true;
        }
        true
    }
}

fn check_even(d: &DistanceMatrix) -> Result<()> {
    if d.n < 2 {
        return Err(Error::TooFewPoints {
            required: 2,
            got: d.n,
        });
    }
    if !d.n.is_multiple_of(2) {
        return Err(Error::OddPointCount(d.n));
    }
    Ok(())
}

/// Globally minimal perfect matching. Deterministic for a given entry order.
pub fn min_weight_perfect_matching(d: &DistanceMatrix) -> Result<Matching> {
    check_even(d)?;
    let n = d.n;
    if n == 2 {
        return Ok(Matching::from_pairs(vec![(0, 1)], d));
    }
    let top = d.max_entry();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, top - d.get(i, j)));
        }
    }
    let mate = Blossom::new(n, edges).solve();
    let mut pairs = Vec::with_capacity(n / 2);
    for (i, &m) in mate.iter().enumerate() {
        debug_assert!(m != NONE, "maximum-cardinality matching on K_n must be perfect");
        if m == NONE {
            return Err(Error::InvalidDistanceMatrix(
                "solver failed to produce a perfect matching".into(),
            ));
        }
        if i < m {
            pairs.push((i, m));
        }
    }
    Ok(Matching::from_pairs(pairs, d))
}

/// Exhaustive search over all `(n-1)!!` perfect matchings, for `n <= 12`.
pub fn brute_force_matching(d: &DistanceMatrix) -> Result<Matching> {
    check_even(d)?;
    if d.n > BRUTE_FORCE_LIMIT {
        return Err(Error::BruteForceTooLarge {
            n: d.n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    struct Search<'a> {
        d: &'a DistanceMatrix,
        used: Vec<bool>,
        current: Vec<(usize, usize)>,
        best: Option<(f64, Vec<(usize, usize)>)>,
    }

    impl Search<'_> {
        fn run(&mut self) {
            let Some(i) = self.used.iter().position(|u| !u) else {
                let w = Matching::weight_of(&self.current, self.d);
                if self.best.as_ref().is_none_or(|(bw, _)| w < *bw) {
                    self.best = Some((w, self.current.clone()));
                }
                return;
            };
            self.used[i] = true;
            for j in (i + 1)..self.d.n {
                if self.used[j] {
                    continue;
                }
                self.used[j] = true;
                self.current.push((i, j));
                self.run();
                self.current.pop();
                self.used[j] = false;
            }
            self.used[i] = false;
        }
    }

    let mut search = Search {
        d,
        used: vec![false; d.n],
        current: Vec::with_capacity(d.n / 2),
        best: None,
    };
    search.run();
    let (_, pairs) = search.best.expect("at least one perfect matching exists");
    Ok(Matching::from_pairs(pairs, d))
}

const NONE: usize = usize::MAX;

/// Primal-dual maximum-weight matching state. Vertices are `0..n`, blossoms
/// `n..2n`. Edge `k` has endpoints `2k` and `2k + 1`.
struct Blossom {
    nvertex: usize,
    edges: Vec<(usize, usize, f64)>,
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Option<Vec<usize>>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<f64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

impl Blossom {
    fn new(nvertex: usize, edges: Vec<(usize, usize, f64)>) -> Self {
        let nedge = edges.len();
        let mut endpoint = Vec::with_capacity(2 * nedge);
        let mut neighbend = vec![Vec::new(); nvertex];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            endpoint.push(i);
            endpoint.push(j);
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        // Warm start: each vertex dual is its heaviest incident weight, which
        // keeps every slack non-negative and makes mutual-best edges tight.
        let mut dualvar = vec![f64::NEG_INFINITY; nvertex];
        for &(i, j, w) in &edges {
            dualvar[i] = dualvar[i].max(w);
            dualvar[j] = dualvar[j].max(w);
        }
        dualvar.extend(std::iter::repeat_n(0.0, nvertex));
        let mut mate = vec![NONE; nvertex];
        for (k, &(i, j, w)) in edges.iter().enumerate() {
            if mate[i] == NONE && mate[j] == NONE && w == dualvar[i] && w == dualvar[j] {
                mate[i] = 2 * k + 1;
                mate[j] = 2 * k;
            }
        }
        let mut blossombase: Vec<usize> = (0..nvertex).collect();
        blossombase.extend(std::iter::repeat_n(NONE, nvertex));
        Self {
            nvertex,
            endpoint,
            neighbend,
            mate,
            label: vec![0; 2 * nvertex],
            labelend: vec![NONE; 2 * nvertex],
            inblossom: (0..nvertex).collect(),
            blossomparent: vec![NONE; 2 * nvertex],
            blossomchilds: vec![Vec::new(); 2 * nvertex],
            blossombase,
            blossomendps: vec![Vec::new(); 2 * nvertex],
            bestedge: vec![NONE; 2 * nvertex],
            blossombestedges: vec![None; 2 * nvertex],
            unusedblossoms: (nvertex..2 * nvertex).collect(),
            dualvar,
            allowedge: vec![false; nedge],
            queue: Vec::new(),
            edges,
        }
    }

    #[inline]
    fn slack(&self, k: usize) -> f64 {
        let (i, j, wt) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2.0 * wt
    }

    fn leaves(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![b];
        while let Some(t) = stack.pop() {
            if t < self.nvertex {
                out.push(t);
            } else {
                stack.extend(self.blossomchilds[t].iter().rev());
            }
        }
        out
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let leaves = self.leaves(b);
            self.queue.extend(leaves);
        } else if t == 2 {
            let base = self.blossombase[b];
            let mb = self.mate[base];
            debug_assert!(mb != NONE);
            self.assign_label(self.endpoint[mb], 1, mb ^ 1);
        }
    }

    /// Traces back from `v` and `w` to find either a new blossom base or an
    /// augmenting path (returns `NONE`).
    fn scan_blossom(&mut self, mut v: usize, mut w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        while v != NONE || w != NONE {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            debug_assert_eq!(self.label[b], 1);
            path.push(b);
            self.label[b] = 5;
            if self.labelend[b] == NONE {
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                debug_assert_eq!(self.label[b], 2);
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

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("blossom slots exhausted");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;
        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            path.push(bv);
            endps.push(self.labelend[bv]);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            path.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }
        debug_assert_eq!(self.label[bb], 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0.0;
        self.blossomchilds[b] = path.clone();
        self.blossomendps[b] = endps;
        for leaf in self.leaves(b) {
            if self.label[self.inblossom[leaf]] == 2 {
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }

        let mut bestedgeto = vec![NONE; 2 * self.nvertex];
        for &sub in &path {
            let nblists: Vec<Vec<usize>> = match self.blossombestedges[sub].take() {
                Some(list) => vec![list],
                None => self
                    .leaves(sub)
                    .into_iter()
                    .map(|leaf| self.neighbend[leaf].iter().map(|p| p / 2).collect())
                    .collect(),
            };
            for nblist in nblists {
                for kk in nblist {
                    let (mut i, mut j, _) = self.edges[kk];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = i;
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(kk) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = kk;
                    }
                }
            }
            self.bestedge[sub] = NONE;
        }
        let list: Vec<usize> = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        self.bestedge[b] = NONE;
        for &kk in &list {
            if self.bestedge[b] == NONE || self.slack(kk) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = kk;
            }
        }
        self.blossombestedges[b] = Some(list);
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let childs = self.blossomchilds[b].clone();
        for &s in &childs {
            self.blossomparent[s] = NONE;
            if s < self.nvertex {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == 0.0 {
                self.expand_blossom(s, endstage);
            } else {
                for leaf in self.leaves(s) {
                    self.inblossom[leaf] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            let len = childs.len() as isize;
            let at = |j: isize| -> usize { j.rem_euclid(len) as usize };
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let mut j = childs
                .iter()
                .position(|&c| c == entrychild)
                .expect("entry child belongs to blossom") as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 != 0 {
                j -= len;
                (1, 0)
            } else {
                (-1, 1)
            };
            let endps = self.blossomendps[b].clone();
            let mut p = self.labelend[b];
            while j != 0 {
                let ep = self.endpoint[p ^ 1];
                self.label[ep] = 0;
                let q = endps[at(j - endptrick as isize)];
                self.label[self.endpoint[q ^ endptrick ^ 1]] = 0;
                self.assign_label(ep, 2, p);
                self.allowedge[q / 2] = true;
                j += jstep;
                p = endps[at(j - endptrick as isize)] ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = childs[at(j)];
            let ep = self.endpoint[p ^ 1];
            self.label[ep] = 2;
            self.label[bv] = 2;
            self.labelend[ep] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while childs[at(j)] != entrychild {
                let bv = childs[at(j)];
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let leaves = self.leaves(bv);
                let labelled = leaves.iter().copied().find(|&v| self.label[v] != 0);
                if let Some(v) = labelled {
                    debug_assert_eq!(self.label[v], 2);
                    debug_assert_eq!(self.inblossom[v], bv);
                    self.label[v] = 0;
                    let mb = self.mate[self.blossombase[bv]];
                    self.label[self.endpoint[mb]] = 0;
                    let le = self.labelend[v];
                    self.assign_label(v, 2, le);
                }
                j += jstep;
            }
        }
        self.label[b] = u8::MAX;
        self.labelend[b] = NONE;
        self.blossomchilds[b].clear();
        self.blossomendps[b].clear();
        self.blossombase[b] = NONE;
        self.blossombestedges[b] = None;
        self.bestedge[b] = NONE;
        self.unusedblossoms.push(b);
    }

    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nvertex {
            self.augment_blossom(t, v);
        }
        let len = self.blossomchilds[b].len() as isize;
        let at = |j: isize| -> usize { j.rem_euclid(len) as usize };
        let i = self.blossomchilds[b]
            .iter()
            .position(|&c| c == t)
            .expect("child belongs to blossom");
        let mut j = i as isize;
        let (jstep, endptrick): (isize, usize) = if i & 1 != 0 {
            j -= len;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = self.blossomchilds[b][at(j)];
            let p = self.blossomendps[b][at(j - endptrick as isize)] ^ endptrick;
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            let t = self.blossomchilds[b][at(j)];
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                debug_assert_eq!(self.label[bs], 1);
                if bs >= self.nvertex {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert_eq!(self.label[bt], 2);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                debug_assert_eq!(self.blossombase[bt], t);
                if bt >= self.nvertex {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    /// Runs the stages and returns `mate[v]` as a vertex index.
    fn solve(mut self) -> Vec<usize> {
        let n = self.nvertex;
        for _stage in 0..n {
            self.label.iter_mut().for_each(|l| *l = 0);
            self.bestedge.iter_mut().for_each(|e| *e = NONE);
            for b in n..2 * n {
                self.blossombestedges[b] = None;
            }
            self.allowedge.iter_mut().for_each(|a| *a = false);
            self.queue.clear();

            for v in 0..n {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }

            let mut augmented = false;
            loop {
                while !augmented {
                    let Some(v) = self.queue.pop() else { break };
                    debug_assert_eq!(self.label[self.inblossom[v]], 1);
                    for idx in 0..self.neighbend[v].len() {
                        let p = self.neighbend[v][idx];
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = 0.0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= 0.0 {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            if self.label[self.inblossom[w]] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[self.inblossom[w]] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == NONE || kslack < self.slack(self.bestedge[b]) {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == NONE || kslack < self.slack(self.bestedge[w]))
                        {
                            self.bestedge[w] = k;
                        }
                    }
                }
                if augmented {
                    break;
                }

                // Dual adjustment. Maximum cardinality is always requested, so
                // the vertex-dual bound (delta type 1) is only a fallback.
                let mut deltatype = 0u8;
                let mut delta = 0.0;
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;
                for v in 0..n {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * n {
                    if self.blossomparent[b] == NONE
                        && self.label[b] == 1
                        && self.bestedge[b] != NONE
                    {
                        let d = self.slack(self.bestedge[b]) / 2.0;
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && (deltatype == 0 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == 0 {
                    deltatype = 1;
                    delta = self.dualvar[..n].iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
                }

                for v in 0..n {
                    match self.label[self.inblossom[v]] {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => {}
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
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    _ => self.expand_blossom(deltablossom, false),
                }
            }

            if !augmented {
                break;
            }

            for b in n..2 * n {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] != NONE
                    && self.label[b] == 1
                    && self.dualvar[b] == 0.0
                {
                    self.expand_blossom(b, true);
                }
            }
        }

        self.mate
            .iter()
            .map(|&m| if m == NONE { NONE } else { self.endpoint[m] })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(points: &[f64]) -> DistanceMatrix {
        let pts: Vec<Vec<f64>> = points.iter().map(|&x| vec![x]).collect();
        DistanceMatrix::from_points(&pts).unwrap()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v: f64 = rng.random();
                e[i * n + j] = v;
                e[j * n + i] = v;
            }
        }
        DistanceMatrix::from_entries(n, e).unwrap()
    }

    #[test]
    fn distance_examples() {
        let d = DistanceMatrix::from_points(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(d.get(0, 1), 5.0);
        let d = DistanceMatrix::from_points(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
        let d = line(&[0.0, 1.0, 4.0]);
        assert_eq!(d.row(0), &[0.0, 1.0, 4.0]);
        assert_eq!(d.row(1), &[1.0, 0.0, 3.0]);
        assert_eq!(d.row(2), &[4.0, 3.0, 0.0]);
    }

    #[test]
    fn distance_errors() {
        assert!(matches!(
            DistanceMatrix::from_points(&[vec![0.0, 0.0], vec![1.0]]),
            Err(Error::DimensionMismatch { index: 1, .. })
        ));
        assert!(matches!(
            DistanceMatrix::from_points(&[vec![0.0], vec![f64::NAN]]),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            DistanceMatrix::from_points(&[vec![0.0]]),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(DistanceMatrix::from_entries(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_entries(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_entries(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
    }

    #[test]
    fn separated_clusters() {
        let m = min_weight_perfect_matching(&line(&[0.0, 1.0, 10.0, 11.0])).unwrap();
        assert_eq!(m.pairs, vec![(0, 1), (2, 3)]);
        assert_eq!(m.total_weight, 2.0);
    }

    #[test]
    fn two_points() {
        let d = line(&[2.0, 7.5]);
        let m = min_weight_perfect_matching(&d).unwrap();
        assert_eq!(m.pairs, vec![(0, 1)]);
        assert_eq!(m.total_weight, 5.5);
        assert_eq!(brute_force_matching(&d).unwrap(), m);
    }

    #[test]
    fn brute_force_small() {
        let mut e = vec![10.0; 16];
        for i in 0..4 {
            e[i * 4 + i] = 0.0;
        }
        e[1] = 1.0;
        e[4] = 1.0;
        e[2 * 4 + 3] = 1.0;
        e[3 * 4 + 2] = 1.0;
        let d = DistanceMatrix::from_entries(4, e).unwrap();
        let m = brute_force_matching(&d).unwrap();
        assert_eq!(m.total_weight, 2.0);
        assert_eq!(m.pairs, vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn odd_and_oversized_inputs_rejected() {
        let d = line(&[0.0, 1.0, 2.0]);
        assert!(matches!(min_weight_perfect_matching(&d), Err(Error::OddPointCount(3))));
        assert!(matches!(brute_force_matching(&d), Err(Error::OddPointCount(3))));
        let pts: Vec<f64> = (0..14).map(f64::from).collect();
        assert!(matches!(
            brute_force_matching(&line(&pts)),
            Err(Error::BruteForceTooLarge { n: 14, .. })
        ));
    }

    #[test]
    fn all_zero_distances() {
        let d = DistanceMatrix::from_points(&vec![vec![0.5, 0.5]; 10]).unwrap();
        let m = min_weight_perfect_matching(&d).unwrap();
        assert!(m.is_perfect(10));
        assert_eq!(m.total_weight, 0.0);
    }

    #[test]
    fn agrees_with_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [4, 6, 8, 10] {
            for _ in 0..50 {
                let d = random_matrix(&mut rng, n);
                let fast = min_weight_perfect_matching(&d).unwrap();
                let slow = brute_force_matching(&d).unwrap();
                assert!(fast.is_perfect(n));
                assert_eq!(fast.total_weight, slow.total_weight);
            }
        }
    }

    #[test]
    fn subsamples_of_planar_points_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<[f64; 2]> = (0..100).map(|_| [rng.random(), rng.random()]).collect();
        let full = DistanceMatrix::from_points(&pts).unwrap();
        assert!(min_weight_perfect_matching(&full).unwrap().is_perfect(100));
        for chunk in pts.chunks(8) {
            let d = DistanceMatrix::from_points(chunk).unwrap();
            assert_eq!(
                min_weight_perfect_matching(&d).unwrap().total_weight,
                brute_force_matching(&d).unwrap().total_weight
            );
        }
    }

    #[test]
    fn deterministic_on_ties() {
        let d = DistanceMatrix::from_points(&vec![vec![1.0]; 12]).unwrap();
        let a = min_weight_perfect_matching(&d).unwrap();
        let b = min_weight_perfect_matching(&d).unwrap();
        assert_eq!(a, b);
    }
}
