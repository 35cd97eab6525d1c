//! Constructive gadgets: edge colouring, the graph `Q_F` attached to an
//! `H`-free subgraph, the centre-neighbourhood hypergraph, the high-degree
//! residual family and random sparsification of copy families.
//!
//! Every `ηnp`-type count is rounded up to `⌈ηnp⌉`; degree caps of the form
//! `κnp/ln n` are rounded down.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::bounds::{is_ql2, upper_tail_rho};
use crate::error::{Error, Result};
use crate::extremal::{max_r_cut, CutMode, EXACT_CUT_LIMIT};
use crate::graph::{pair_index, ColoredGraph, Graph, PartTuple};
use crate::hypergraph::{residual_family, CopyHypergraph, Residual, StarRecipe};
use crate::iso;

/// A proper edge colouring, aligned with `g.edges()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeColouring {
    pub edges: Vec<(usize, usize)>,
    pub colours: Vec<usize>,
    /// Number of distinct colours used.
    pub used: usize,
}

impl EdgeColouring {
    pub fn is_proper(&self, n: usize) -> bool {
        let mut seen = BTreeSet::new();
        self.edges.iter().zip(&self.colours).all(|(&(u, v), &c)| {
            u < n && v < n && seen.insert((u, c)) && seen.insert((v, c))
        })
    }

    /// Edge lists per colour.
    pub fn classes(&self) -> Vec<Vec<(usize, usize)>> {
        let k = self.colours.iter().max().map_or(0, |c| c + 1);
        let mut out = vec![Vec::new(); k];
        for (&e, &c) in self.edges.iter().zip(&self.colours) {
            out[c].push(e);
        }
        out
    }
}

struct Palette {
    n: usize,
    k: usize,
    /// `at[x * k + c]` is the other endpoint of the `c`-coloured edge at `x`.
    at: Vec<Option<usize>>,
    colour: BTreeMap<(usize, usize), usize>,
}

impl Palette {
    fn new(n: usize, k: usize) -> Self {
        Palette {
            n,
            k,
            at: vec![None; n * k],
            colour: BTreeMap::new(),
        }
    }

    fn key(u: usize, v: usize) -> (usize, usize) {
        (u.min(v), u.max(v))
    }

    fn get(&self, u: usize, v: usize) -> Option<usize> {
        self.colour.get(&Self::key(u, v)).copied()
    }

    fn is_free(&self, x: usize, c: usize) -> bool {
        self.at[x * self.k + c].is_none()
    }

    fn free(&self, x: usize) -> usize {
        (0..self.k).find(|&c| self.is_free(x, c)).expect("a vertex of degree at most Δ has a free colour")
    }

    fn set(&mut self, u: usize, v: usize, c: usize) {
        self.unset(u, v);
        self.colour.insert(Self::key(u, v), c);
        self.at[u * self.k + c] = Some(v);
        self.at[v * self.k + c] = Some(u);
    }

    fn unset(&mut self, u: usize, v: usize) {
        if let Some(c) = self.colour.remove(&Self::key(u, v)) {
            for (x, y) in [(u, v), (v, u)] {
                let slot = &mut self.at[x * self.k + c];
                if *slot == Some(y) {
                    *slot = None;
                }
            }
        }
    }

    fn is_fan(&self, u: usize, fan: &[usize]) -> bool {
        fan.windows(2).all(|w| self.get(u, w[1]).is_some_and(|c| self.is_free(w[0], c)))
    }

    /// Swaps colours `c` and `d` along the maximal path from `u` that starts
    /// with its `d` edge.
    fn invert_path(&mut self, u: usize, c: usize, d: usize) {
        let mut path = Vec::new();
        let (mut x, mut want) = (u, d);
        while let Some(y) = self.at[x * self.k + want] {
            path.push((x, y, want));
            x = y;
            want = if want == d { c } else { d };
            if path.len() > self.n * self.k {
                break;
            }
        }
        for &(a, b, _) in &path {
            self.unset(a, b);
        }
        for (a, b, col) in path {
            self.set(a, b, if col == d { c } else { d });
        }
    }
}

/// Misra–Gries edge colouring with at most `Δ(g) + 1` colours, processing
/// edges in lexicographic order.
pub fn vizing_color(g: &Graph) -> EdgeColouring {
    let n = g.n();
    let edges = g.edges();
    let k = g.max_degree() + 1;
    let mut pal = Palette::new(n, k);
    for &(u, v) in &edges {
        let mut fan = vec![v];
        loop {
            let last = *fan.last().unwrap();
            let next = g.neighbours(u).iter().find(|&w| {
                !fan.contains(&w) && pal.get(u, w).is_some_and(|c| pal.is_free(last, c))
            });
            match next {
                Some(w) => fan.push(w),
                None => break,
            }
        }
        let c = pal.free(u);
        let d = pal.free(*fan.last().unwrap());
        if c != d {
            pal.invert_path(u, c, d);
        }
        let idx = (0..fan.len())
            .find(|&i| pal.is_free(fan[i], d) && pal.is_fan(u, &fan[..=i]))
            .expect("rotation target exists");
        for i in 0..idx {
            let next = pal.get(u, fan[i + 1]).unwrap();
            pal.set(u, fan[i], next);
        }
        pal.set(u, fan[idx], d);
    }
    let colours: Vec<usize> = edges.iter().map(|&(u, v)| pal.get(u, v).unwrap()).collect();
    let used = colours.iter().collect::<BTreeSet<_>>().len();
    EdgeColouring { edges, colours, used }
}

/// A subgraph with maximum degree exactly `d` keeping at least a
/// `d/(Δ+1)` fraction of the edges: the `d` largest colour classes, topped
/// up greedily in edge order.
pub fn bounded_degree_subgraph(i: &Graph, d: usize) -> Result<Graph> {
    let big_d = i.max_degree();
    if d == 0 || d > big_d {
        return Err(Error::Domain(format!("d = {d} outside 1..={big_d}")));
    }
    let colouring = vizing_color(i);
    let mut classes = colouring.classes();
    classes.sort_by_key(|c| core::cmp::Reverse(c.len()));
    let mut q = Graph::new(i.n());
    for class in classes.iter().take(d) {
        for &(u, v) in class {
            q.add_edge(u, v);
        }
    }
    for (u, v) in i.edges() {
        if q.max_degree() == d {
            break;
        }
        if !q.has_edge(u, v) && q.degree(u) < d && q.degree(v) < d {
            q.add_edge(u, v);
        }
    }
    debug_assert_eq!(q.max_degree(), d);
    Ok(q)
}

/// Search budget for [`largest_capped_subgraph`].
pub const CAPPED_NODE_BUDGET: u64 = 2_000_000;

/// A largest subgraph of `i` with maximum degree at most `cap`, and whether
/// it is certified largest (the search fell back to greedy otherwise).
pub fn largest_capped_subgraph(i: &Graph, cap: usize) -> (Graph, bool) {
    let n = i.n();
    let mut base = Graph::new(n);
    let mut open = Vec::new();
    for (u, v) in i.edges() {
        // edges between vertices of degree at most `cap` can always be kept
        if i.degree(u) <= cap && i.degree(v) <= cap {
            base.add_edge(u, v);
        } else {
            open.push((u, v));
        }
    }
    let mut greedy = base.clone();
    for &(u, v) in &open {
        if greedy.degree(u) < cap && greedy.degree(v) < cap {
            greedy.add_edge(u, v);
        }
    }
    struct Dfs<'a> {
        open: &'a [(usize, usize)],
        best: usize,
        best_set: Vec<bool>,
        cur: Vec<bool>,
        cap: usize,
        deg: Vec<usize>,
        nodes: u64,
    }
    impl Dfs<'_> {
        fn go(&mut self, i: usize, taken: usize) -> bool {
            self.nodes += 1;
            if self.nodes > CAPPED_NODE_BUDGET {
                return false;
            }
            if taken > self.best {
                self.best = taken;
                self.best_set.clone_from(&self.cur);
            }
            if i == self.open.len() || taken + (self.open.len() - i) <= self.best {
                return true;
            }
            let (u, v) = self.open[i];
            if self.deg[u] < self.cap && self.deg[v] < self.cap {
                self.deg[u] += 1;
                self.deg[v] += 1;
                self.cur[i] = true;
                let ok = self.go(i + 1, taken + 1);
                self.cur[i] = false;
                self.deg[u] -= 1;
                self.deg[v] -= 1;
                if !ok {
                    return false;
                }
            }
            self.go(i + 1, taken)
        }
    }
    let greedy_extra = greedy.edge_count() - base.edge_count();
    let mut s = Dfs {
        open: &open,
        best: greedy_extra,
        best_set: open.iter().map(|&(u, v)| greedy.has_edge(u, v)).collect(),
        cur: vec![false; open.len()],
        cap,
        deg: (0..n).map(|v| base.degree(v)).collect(),
        nodes: 0,
    };
    let exact = s.go(0, 0);
    let mut out = base;
    for (k, &(u, v)) in open.iter().enumerate() {
        if s.best_set[k] {
            out.add_edge(u, v);
        }
    }
    (out, exact)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QKind {
    Ql1,
    Ql2,
    Qh,
}

/// Which of the three guarantees the construction delivers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clause {
    /// Low degree, at least half of the first-part edges.
    Low,
    /// Low degree after trimming to the degree cap.
    Medium,
    /// Centred stars.
    High,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QfParams {
    pub kappa: f64,
    pub eta: f64,
    pub p: f64,
}

impl QfParams {
    /// `⌈ηnp⌉`.
    pub fn eta_np(&self, n: usize) -> usize {
        libm::ceil(self.eta * n as f64 * self.p - 1e-9).max(0.0) as usize
    }

    /// `⌈2ηnp⌉`, the degree cap separating the two cases.
    pub fn two_eta_np(&self, n: usize) -> usize {
        libm::ceil(2.0 * self.eta * n as f64 * self.p - 1e-9).max(0.0) as usize
    }

    /// `κnp/ln n`.
    pub fn low_cap(&self, n: usize) -> f64 {
        self.kappa * n as f64 * self.p / libm::log(n as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QFamily {
    pub q: ColoredGraph,
    pub kind: QKind,
    pub clause: Clause,
    pub e_q: usize,
    pub max_degree: usize,
    pub k_q: usize,
    /// `e(F[V₁])`.
    pub e_first: usize,
    /// Whether the degree-capped subgraph was certified largest.
    pub capped_exact: bool,
    /// Both sides of the clause's size guarantee.
    pub clause_lhs: f64,
    pub clause_rhs: f64,
    pub clause_holds: bool,
    /// `⌈ηnp⌉`.
    pub eta_np: usize,
}

fn low_family(q: Graph, cut: &PartTuple, clause: Clause, lhs_rhs: (f64, f64), e_first: usize, exact: bool, prm: &QfParams) -> Result<QFamily> {
    let n = q.n();
    let e_q = q.edge_count();
    let kind = if is_ql2(e_q, n, prm.p, prm.kappa) { QKind::Ql2 } else { QKind::Ql1 };
    Ok(QFamily {
        max_degree: q.max_degree(),
        q: ColoredGraph::from_cut(q, cut)?,
        kind,
        clause,
        e_q,
        k_q: 0,
        e_first,
        capped_exact: exact,
        clause_lhs: lhs_rhs.0,
        clause_rhs: lhs_rhs.1,
        clause_holds: lhs_rhs.0 >= lhs_rhs.1 - 1e-9,
        eta_np: prm.eta_np(n),
    })
}

/// Builds `Q_F ⊆ F` from the (canonical) largest cut of `F`, following the
/// low-degree / high-degree case split.
pub fn construct_qf(f: &Graph, cut: &PartTuple, prm: &QfParams) -> Result<QFamily> {
    let n = f.n();
    if cut.n() != n || !cut.is_complete() {
        return Err(Error::InvalidPartition(String::from("cut must partition V(F)")));
    }
    if !(prm.p > 0.0 && prm.p <= 1.0 && prm.kappa > 0.0 && prm.eta > 0.0) {
        return Err(Error::Domain(String::from("need p in (0, 1] and positive kappa, eta")));
    }
    let v1 = cut.part(0);
    let i = f.restrict_to(v1);
    let e_first = i.edge_count();
    if e_first == 0 {
        return low_family(Graph::new(n), cut, Clause::Low, (0.0, 0.0), 0, true, prm);
    }
    let t = prm.eta_np(n);
    let cap = prm.two_eta_np(n);
    let (i_l, exact) = largest_capped_subgraph(&i, cap);
    let d = prm.low_cap(n);
    let ln_n = libm::log(n as f64);

    if 2 * i_l.edge_count() >= e_first {
        if i_l.max_degree() as f64 <= d {
            let e = i_l.edge_count() as f64;
            return low_family(i_l, cut, Clause::Low, (e, e_first as f64 / 2.0), e_first, exact, prm);
        }
        let d_int = libm::floor(d) as usize;
        if d_int == 0 {
            return Err(Error::Infeasible(format!("degree cap kappa*n*p/ln n = {d:.4} is below 1")));
        }
        let q = bounded_degree_subgraph(&i_l, d_int)?;
        let rhs = d.max(prm.kappa / (4.0 * prm.eta * ln_n) * e_first as f64);
        let e = q.edge_count() as f64;
        return low_family(q, cut, Clause::Medium, (e, rhs), e_first, exact, prm);
    }

    // Case 2: stars around the vertices of large degree.
    let y = BitSet::from_iter(n, (0..n).filter(|&v| i.degree(v) > cap));
    let mut tilde = Graph::new(n);
    for (u, v) in i.edges() {
        if y.contains(u) || y.contains(v) {
            tilde.add_edge(u, v);
        }
    }
    let support: Vec<usize> = tilde.support().iter().collect();
    let local = tilde.induced(&support);
    let mode = if support.len() <= EXACT_CUT_LIMIT { CutMode::Exact } else { CutMode::Local };
    let (sigma, _) = max_r_cut(&local, 2, mode)?;
    let mut side = vec![usize::MAX; n];
    for (k, &v) in support.iter().enumerate() {
        side[v] = sigma.part_of(k).unwrap_or(0);
    }
    let star_edges = |j: usize| -> Vec<(usize, usize)> {
        tilde
            .edges()
            .into_iter()
            .filter_map(|(a, b)| {
                if side[a] == j && y.contains(a) && side[b] == 1 - j {
                    Some((a, b))
                } else if side[b] == j && y.contains(b) && side[a] == 1 - j {
                    Some((b, a))
                } else {
                    None
                }
            })
            .collect()
    };
    let (s0, s1) = (star_edges(0), star_edges(1));
    let (j, stars) = if s1.len() > s0.len() { (1, s1) } else { (0, s0) };
    let centres = BitSet::from_iter(n, (0..n).filter(|&v| side[v] == j && y.contains(v)));

    let mut qf = Graph::new(n);
    for x in centres.iter() {
        let own: Vec<usize> = stars.iter().filter(|e| e.0 == x).map(|e| e.1).collect();
        if own.len() < t {
            return Err(Error::Infeasible(format!("centre {x} has {} star neighbours, needs {t}", own.len())));
        }
        for &u in own.iter().take(t) {
            qf.add_edge(x, u);
        }
        for class in 1..cut.r() {
            let nb: Vec<usize> = f.neighbours(x).intersection(cut.part(class)).iter().collect();
            if nb.len() < t {
                return Err(Error::Infeasible(format!(
                    "centre {x} has {} neighbours in part {}, needs {t}",
                    nb.len(),
                    class + 1
                )));
            }
            for &u in nb.iter().take(t) {
                qf.add_edge(x, u);
            }
        }
    }
    let k_q = centres.count();
    let lhs = k_q as f64;
    let rhs = e_first as f64 / (16.0 * f.max_degree() as f64);
    let e_q = qf.edge_count();
    let max_degree = qf.max_degree();
    let q = ColoredGraph::from_cut(qf, cut)?.with_centres(centres)?;
    Ok(QFamily {
        q,
        kind: QKind::Qh,
        clause: Clause::High,
        e_q,
        max_degree,
        k_q,
        e_first,
        capped_exact: exact,
        clause_lhs: lhs,
        clause_rhs: rhs,
        clause_holds: lhs >= rhs - 1e-9,
        eta_np: t,
    })
}

/// One centre processed by [`neighbourhood_hypergraph`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentreStep {
    pub vertex: usize,
    pub good: bool,
    /// `ℓ`-subsets of the fresh neighbourhood that lie in the closure.
    pub closure_hits: u64,
    /// `½(⌈ηnp⌉/ℓ)^ℓ`.
    pub allowance: f64,
    pub added: usize,
    /// Sets the centre should have contributed but could not.
    pub shortfall: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighbourhoodHypergraph {
    pub n: usize,
    pub l: Vec<usize>,
    /// Sorted vertex sets.
    pub sets: Vec<Vec<u32>>,
    /// The centre each set was drawn from.
    pub centre: Vec<usize>,
    pub trace: Vec<CentreStep>,
    pub rho: f64,
    pub big_d: f64,
    /// `Δ_j(𝒢)` for `j = 0..=ℓ`.
    pub codegrees: Vec<usize>,
    /// `e(𝒢) / min{n^ℓ, k(np)^ℓ}`.
    pub fitted_c: f64,
    /// Smallest `C ≥ 1` with `Δ_j ≤ max{4(np)^{ℓ−j}, C·e(𝒢)/n^j}` for all `j`.
    pub fitted_big_c: f64,
}

fn for_each_subset(items: &[u32], k: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(items: &[u32], k: usize, start: usize, cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), f);
}

struct Closure {
    ell: usize,
    hat: BTreeSet<Vec<u32>>,
    /// `deg[j][T]` for `|T| = j`, `1 ≤ j < ℓ`.
    deg: Vec<BTreeMap<Vec<u32>, usize>>,
    caps: Vec<f64>,
}

impl Closure {
    fn new(ell: usize) -> Self {
        Closure {
            ell,
            hat: BTreeSet::new(),
            deg: vec![BTreeMap::new(); ell],
            caps: vec![f64::INFINITY; ell],
        }
    }

    fn refresh_caps(&mut self, n: f64, np: f64, big_d: f64) {
        let e = self.hat.len() as f64;
        for j in 1..self.ell {
            self.caps[j] = (2.0 * libm::pow(np, (self.ell - j) as f64)).max(big_d * e / libm::pow(n, j as f64));
        }
    }

    fn contains(&self, u: &[u32]) -> bool {
        if self.hat.contains(u) {
            return true;
        }
        (1..self.ell).any(|j| {
            let mut hit = false;
            for_each_subset(u, j, &mut |t| {
                if !hit && self.deg[j].get(t).is_some_and(|&d| d as f64 >= self.caps[j]) {
                    hit = true;
                }
            });
            hit
        })
    }

    fn absorb(&mut self, nbhd: &[u32]) {
        let ell = self.ell;
        let mut fresh = Vec::new();
        for_each_subset(nbhd, ell, &mut |u| {
            if !self.hat.contains(u) {
                fresh.push(u.to_vec());
            }
        });
        for u in fresh {
            for j in 1..ell {
                for_each_subset(&u, j, &mut |t| *self.deg[j].entry(t.to_vec()).or_default() += 1);
            }
            self.hat.insert(u);
        }
    }
}

/// The sets `U` with exactly `l[k]` vertices among the `k`-coloured
/// `Q`-neighbours of `v`, in lexicographic order.
fn profile_sets(q: &ColoredGraph, v: usize, l: &[usize]) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = vec![Vec::new()];
    for (k, &lk) in l.iter().enumerate() {
        let pool: Vec<u32> = q.class_neighbours(v, k).iter().map(|x| x as u32).collect();
        let mut picks = Vec::new();
        for_each_subset(&pool, lk, &mut |s| picks.push(s.to_vec()));
        out = out
            .into_iter()
            .flat_map(|base| {
                picks.iter().map(move |s| {
                    let mut u = base.clone();
                    u.extend_from_slice(s);
                    u
                })
            })
            .collect();
    }
    for u in &mut out {
        u.sort_unstable();
    }
    out.sort();
    out
}

/// Runs the good/bad centre classification over the centres of `q` in
/// increasing order and collects the fresh neighbourhood sets of good
/// centres.
pub fn neighbourhood_hypergraph(g: &Graph, q: &ColoredGraph, l: &[usize], eta: f64, p: f64) -> Result<NeighbourhoodHypergraph> {
    let n = g.n();
    let ell: usize = l.iter().sum();
    if ell == 0 || l.len() != q.r() {
        return Err(Error::Domain(format!("profile {l:?} must have {} entries summing to at least 1", q.r())));
    }
    if q.n() != n || !q.graph().is_subgraph_of(g) {
        return Err(Error::InvalidQ(String::from("Q must be a subgraph of the host")));
    }
    if !(eta > 0.0 && p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(String::from("need eta > 0 and p in (0, 1]")));
    }
    let centres = q.centres().ok_or(Error::MissingCentres)?;
    let (nf, np) = (n as f64, n as f64 * p);
    let t = QfParams { kappa: 1.0, eta, p }.eta_np(n);
    for v in centres.iter() {
        for k in 0..q.r() {
            let got = q.class_neighbours(v, k).count();
            if got != t {
                return Err(Error::InvalidQ(format!("centre {v} has {got} neighbours of colour {k}, expected {t}")));
            }
        }
    }
    let rho = upper_tail_rho(libm::pow(eta / ell as f64, ell as f64) / 2.0, ell)?;
    let big_d = libm::pow(2.0, ell as f64 + 1.0) / rho;
    let allowance = 0.5 * libm::pow(t as f64 / ell as f64, ell as f64);
    let quota = libm::ceil(allowance - 1e-9) as usize;

    let mut closure = Closure::new(ell);
    let mut sets = Vec::new();
    let mut owner = Vec::new();
    let mut trace = Vec::new();
    let mut processed = BitSet::new(n);
    for v in centres.iter() {
        closure.refresh_caps(nf, np, big_d);
        let hits = if processed.is_empty() {
            0
        } else {
            let fresh: Vec<u32> = g.neighbours(v).difference(&processed).iter().map(|x| x as u32).collect();
            let mut c = 0u64;
            for_each_subset(&fresh, ell, &mut |u| c += closure.contains(u) as u64);
            c
        };
        let good = processed.is_empty() || hits as f64 <= allowance;
        let mut added = 0;
        if good {
            for u in profile_sets(q, v, l) {
                if added == quota {
                    break;
                }
                if !closure.contains(&u) {
                    sets.push(u);
                    owner.push(v);
                    added += 1;
                }
            }
            let nb: Vec<u32> = g.neighbours(v).iter().map(|x| x as u32).collect();
            closure.absorb(&nb);
        }
        trace.push(CentreStep {
            vertex: v,
            good,
            closure_hits: hits,
            allowance,
            added,
            shortfall: if good { quota - added } else { 0 },
        });
        processed.insert(v);
    }

    let codegrees = CopyHypergraph::from_sets(n, sets.iter().cloned()).degree_profile();
    let e = sets.len() as f64;
    let k = centres.count() as f64;
    let scale = libm::pow(nf, ell as f64).min(k * libm::pow(np, ell as f64));
    let mut big_c: f64 = 1.0;
    for (j, &dj) in codegrees.iter().enumerate() {
        if dj as f64 > 4.0 * libm::pow(np, (ell - j.min(ell)) as f64) && e > 0.0 {
            big_c = big_c.max(dj as f64 * libm::pow(nf, j as f64) / e);
        }
    }
    Ok(NeighbourhoodHypergraph {
        n,
        l: l.to_vec(),
        sets,
        centre: owner,
        trace,
        rho,
        big_d,
        codegrees,
        fitted_c: e / scale,
        fitted_big_c: big_c,
    })
}

/// Residuals `ω ⊆ K_n ∖ Q` completing a star from `v_U` to some `U ∈ 𝒢` to a
/// copy of `h`, the other vertices lying outside the centres. Each `ω` has
/// `e_H − ℓ` edges.
pub fn build_high_family(q: &ColoredGraph, h: &Graph, g_hyper: &NeighbourhoodHypergraph) -> Result<CopyHypergraph> {
    let n = q.n();
    let recipe = StarRecipe::new(h)?;
    if g_hyper.l != recipe.profile {
        return Err(Error::Domain(format!(
            "hypergraph profile {:?} does not match the pattern's {:?}",
            g_hyper.l, recipe.profile
        )));
    }
    let centres = q.centres().ok_or(Error::MissingCentres)?;
    let outside = centres.complement();
    let kn = Graph::complete(n);
    let q_edges = q.graph().edge_set();
    let mut out = Vec::new();
    for (u_set, &v) in g_hyper.sets.iter().zip(&g_hyper.centre) {
        let u_bits = BitSet::from_iter(n, u_set.iter().map(|&x| x as usize));
        let mut dom = vec![outside.clone(); h.n()];
        dom[recipe.apex] = BitSet::from_iter(n, [v]);
        for w in h.neighbours(recipe.apex).iter() {
            dom[w] = u_bits.intersection(&q.class(recipe.phi[w]));
        }
        let star: BTreeSet<u32> = u_set.iter().map(|&x| pair_index(n, v, x as usize) as u32).collect();
        for copy in iso::copies_within(h, &kn, Some(&dom)) {
            let omega: Vec<u32> = copy.into_iter().filter(|e| !star.contains(e)).collect();
            if omega.iter().all(|&e| !q_edges.contains(e as usize)) {
                out.push(omega);
            }
        }
    }
    Ok(CopyHypergraph::from_sets(n, out))
}

/// `count` independent `q`-samples of `copies`; sample `i` uses stream `i`
/// of a ChaCha8 generator seeded with `seed`.
pub fn sparsify_families(copies: &CopyHypergraph, q_prob: f64, count: usize, seed: u64) -> Result<Vec<CopyHypergraph>> {
    if !(0.0..=1.0).contains(&q_prob) {
        return Err(Error::Domain(format!("q = {q_prob} outside [0, 1]")));
    }
    Ok((0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            copies.sample_with(|| rng.random_bool(q_prob))
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleCheck {
    /// Smallest `μ_p(sample[ext(S)]) / μ_p(full[ext(S)])` over the cuts.
    pub b1_ratio: f64,
    pub b1: bool,
    /// `Δ_p(sample) / Δ_p(full)`.
    pub b2_ratio: f64,
    pub b2: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsifyReport {
    pub samples: Vec<SampleCheck>,
    pub first_passing: Option<usize>,
}

/// Checks, per sample, that the low-degree residual family keeps a
/// `q/2` share of `μ` on every supplied cut and at most `2q²` of `Δ`.
pub fn check_sparsified(
    samples: &[CopyHypergraph],
    full: &CopyHypergraph,
    q: &ColoredGraph,
    h: &Graph,
    cuts: &[PartTuple],
    p: f64,
    q_prob: f64,
) -> Result<SparsifyReport> {
    let base = residual_family(full, q, Residual::Low, h)?;
    let base_delta = base.janson_moments(p)?.delta;
    let exts: Vec<BitSet> = cuts.iter().map(|s| s.ext_int().0).collect();
    let base_mu: Vec<f64> = exts
        .iter()
        .map(|x| base.induce(x).janson_moments(p).map(|m| m.mu))
        .collect::<Result<_>>()?;
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else if a > 0.0 { f64::INFINITY } else { 1.0 };
    let mut out = Vec::with_capacity(samples.len());
    for s in samples {
        let fam = residual_family(s, q, Residual::Low, h)?;
        let mut b1 = true;
        let mut b1_ratio = f64::INFINITY;
        for (x, &mu0) in exts.iter().zip(&base_mu) {
            let mu = fam.induce(x).janson_moments(p)?.mu;
            b1 &= mu >= q_prob / 2.0 * mu0 - 1e-12;
            b1_ratio = b1_ratio.min(ratio(mu, mu0));
        }
        let d = fam.janson_moments(p)?.delta;
        out.push(SampleCheck {
            b1_ratio,
            b1,
            b2_ratio: ratio(d, base_delta),
            b2: d <= 2.0 * q_prob * q_prob * base_delta + 1e-12,
        });
    }
    let first_passing = out.iter().position(|c| c.b1 && c.b2);
    Ok(SparsifyReport { samples: out, first_passing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::canonical_cut;
    use proptest::prelude::*;

    fn star(k: usize) -> Graph {
        let mut g = Graph::new(k + 1);
        for v in 1..=k {
            g.add_edge(0, v);
        }
        g
    }

    #[test]
    fn vizing_examples() {
        let c5 = vizing_color(&Graph::cycle(5));
        assert!(c5.is_proper(5));
        assert_eq!(c5.used, 3);
        let k4 = vizing_color(&Graph::complete(4));
        assert!(k4.is_proper(4) && k4.used <= 4);
        let s = vizing_color(&star(5));
        assert!(s.is_proper(6));
        assert_eq!(s.used, 5);
        let k7 = vizing_color(&Graph::complete(7));
        assert!(k7.is_proper(7) && k7.used <= 7);
    }

    #[test]
    fn bounded_degree_examples() {
        let k4 = Graph::complete(4);
        let q = bounded_degree_subgraph(&k4, 1).unwrap();
        assert_eq!(q.max_degree(), 1);
        assert!(q.edge_count() >= 2);
        let q = bounded_degree_subgraph(&k4, 3).unwrap();
        assert!(q.edge_count() * 4 >= 3 * 6);
        let m = Graph::from_edges(6, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        assert_eq!(bounded_degree_subgraph(&m, 1).unwrap(), m);
        assert!(bounded_degree_subgraph(&m, 2).is_err());
        assert!(bounded_degree_subgraph(&m, 0).is_err());
    }

    #[test]
    fn capped_subgraph_is_largest() {
        let (g, exact) = largest_capped_subgraph(&star(5), 2);
        assert!(exact);
        assert_eq!(g.edge_count(), 2);
        let (g, _) = largest_capped_subgraph(&Graph::complete(5), 2);
        assert_eq!(g.edge_count(), 5);
    }

    fn prm(kappa: f64, eta: f64, p: f64) -> QfParams {
        QfParams { kappa, eta, p }
    }

    #[test]
    fn qf_bipartite_is_empty() {
        let f = Graph::complete_multipartite(&[3, 3]);
        let cut = canonical_cut(&f, 2).unwrap();
        let q = construct_qf(&f, &cut, &prm(0.5, 0.1, 0.5)).unwrap();
        assert_eq!((q.e_q, q.kind, q.clause), (0, QKind::Ql1, Clause::Low));
    }

    #[test]
    fn qf_single_internal_edge() {
        let mut f = Graph::complete_multipartite(&[4, 4]);
        f.add_edge(0, 1);
        let cut = canonical_cut(&f, 2).unwrap();
        // κnp/ln n ≥ 1 at n = 8 and p = 1 needs κ ≥ ln 8 / 8
        let q = construct_qf(&f, &cut, &prm(0.3, 0.1, 1.0)).unwrap();
        assert_eq!(q.e_q, 1);
        assert_eq!(q.kind, QKind::Ql1);
        assert_eq!(q.clause, Clause::Low);
        assert!(q.clause_holds);
        assert!(q.q.graph().is_subgraph_of(&f));
    }

    /// `K_4` inside the first part of a 12-vertex graph, plus all crossing
    /// edges, so the high-degree branch runs when `ηnp` is small.
    fn k4_instance() -> (Graph, PartTuple) {
        let n = 12;
        let mut f = Graph::complete_multipartite(&[6, 6]);
        for u in 0..4 {
            for v in u + 1..4 {
                f.add_edge(u, v);
            }
        }
        let cut = PartTuple::new(n, vec![(0..6).collect(), (6..12).collect()]).unwrap();
        (f, cut)
    }

    #[test]
    fn qf_high_branch() {
        let (f, cut) = k4_instance();
        // 2ηnp < 1, so the capped subgraph is a matching and every K4 vertex
        // has degree above the cap
        let q = construct_qf(&f, &cut, &prm(0.05, 0.04, 1.0)).unwrap();
        assert_eq!(q.kind, QKind::Qh);
        assert!(q.k_q >= 1);
        assert!(q.clause_holds, "{} < {}", q.clause_lhs, q.clause_rhs);
        assert!(q.q.graph().is_subgraph_of(&f));
        let centres = q.q.centres().unwrap();
        for v in centres.iter() {
            for k in 0..2 {
                assert_eq!(q.q.class_neighbours(v, k).count(), 1);
            }
        }
    }

    #[test]
    fn qf_medium_branch() {
        let (f, cut) = k4_instance();
        // ⌈2ηnp⌉ = 3 keeps all of K4; κnp/ln n ≈ 2.4 caps the degree at 2
        let q = construct_qf(&f, &cut, &prm(0.5, 0.1, 1.0)).unwrap();
        assert_eq!(q.clause, Clause::Medium);
        assert_eq!(q.max_degree, 2);
        assert!(q.clause_holds);
    }

    fn centred(n: usize, edges: &[(usize, usize)], parts: Vec<Vec<usize>>, centres: &[usize]) -> ColoredGraph {
        let q = Graph::from_edges(n, edges).unwrap();
        let cut = PartTuple::new(n, parts).unwrap();
        ColoredGraph::from_cut(q, &cut).unwrap().with_centres(BitSet::from_iter(n, centres.iter().copied())).unwrap()
    }

    #[test]
    fn single_centre_is_good() {
        let n = 8;
        let q = centred(n, &[(0, 1), (0, 2), (0, 5), (0, 6)], vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]], &[0]);
        let g = Graph::complete(n);
        // ⌈ηnp⌉ = 2 with η = 0.25, p = 1
        let hyp = neighbourhood_hypergraph(&g, &q, &[1, 1], 0.25, 1.0).unwrap();
        assert!(hyp.trace[0].good);
        assert_eq!(hyp.sets.len(), 1);
        assert_eq!(hyp.sets[0], vec![1, 5]);
        let singles = neighbourhood_hypergraph(&g, &q, &[1, 0], 0.25, 1.0).unwrap();
        assert_eq!(singles.codegrees[1], 1);
    }

    #[test]
    fn twin_centre_is_bad() {
        let n = 20;
        let mut edges = Vec::new();
        for c in [0, 1] {
            for u in [2, 3, 10, 11] {
                edges.push((c, u));
            }
        }
        let q = centred(n, &edges, vec![(0..10).collect(), (10..20).collect()], &[0, 1]);
        let mut g = q.graph().clone();
        for &(a, b) in &[(2, 3), (10, 11)] {
            g.add_edge(a, b);
        }
        // ⌈ηnp⌉ = 2 at η = 0.1, p = 1; allowance ½(2/2)² = 1/2
        let hyp = neighbourhood_hypergraph(&g, &q, &[1, 1], 0.1, 1.0).unwrap();
        assert!(hyp.trace[0].good);
        assert!(!hyp.trace[1].good);
        assert!(hyp.trace[1].closure_hits as f64 > hyp.trace[1].allowance);
        for (u, &v) in hyp.sets.iter().zip(&hyp.centre) {
            assert!(u.iter().all(|&x| q.graph().has_edge(v, x as usize)));
        }
    }

    #[test]
    fn high_family_closes_triangles() {
        let n = 8;
        let q = centred(n, &[(0, 1), (0, 2), (0, 5), (0, 6)], vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]], &[0]);
        let k3 = Graph::complete(3);
        let g = Graph::complete(n);
        let hyp = neighbourhood_hypergraph(&g, &q, &[1, 1], 0.25, 1.0).unwrap();
        let fam = build_high_family(&q, &k3, &hyp).unwrap();
        assert_eq!(fam.len(), hyp.sets.len());
        for (omega, u) in fam.edges().iter().zip(&hyp.sets) {
            assert_eq!(omega.len(), 3 - 2);
            assert_eq!(omega[0] as usize, pair_index(n, u[0] as usize, u[1] as usize));
        }
        let empty = NeighbourhoodHypergraph { sets: vec![], centre: vec![], ..hyp };
        assert!(build_high_family(&q, &k3, &empty).unwrap().is_empty());
    }

    #[test]
    fn sparsify_extremes() {
        let n = 10;
        let k3 = Graph::complete(3);
        let copies = CopyHypergraph::enumerate_copies(&k3, &Graph::complete(n));
        let all = sparsify_families(&copies, 1.0, 3, 7).unwrap();
        assert!(all.iter().all(|s| s == &copies));
        let q = ColoredGraph::new(Graph::from_edges(n, &[(0, 1)]).unwrap(), 2, {
            let mut c = vec![None; n];
            c[0] = Some(0);
            c[1] = Some(0);
            c
        })
        .unwrap();
        let cut = PartTuple::new(n, vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9]]).unwrap();
        let rep = check_sparsified(&all, &copies, &q, &k3, core::slice::from_ref(&cut), 0.3, 1.0).unwrap();
        assert_eq!(rep.first_passing, Some(0));
        let none = sparsify_families(&copies, 0.0, 2, 7).unwrap();
        assert!(none.iter().all(|s| s.is_empty()));
        // (q/2)·μ vanishes at q = 0, so the first condition holds trivially
        let rep = check_sparsified(&none, &copies, &q, &k3, core::slice::from_ref(&cut), 0.3, 0.0).unwrap();
        assert!(rep.samples.iter().all(|s| s.b1));
        let half = sparsify_families(&copies, 0.5, 20, 11).unwrap();
        let rep = check_sparsified(&half, &copies, &q, &k3, &[cut], 0.3, 0.5).unwrap();
        assert!(rep.first_passing.is_some());
        assert!(sparsify_families(&copies, 1.5, 1, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn vizing_proper(n in 2usize..25, bits in proptest::collection::vec(any::<bool>(), 300)) {
            let mut g = Graph::new(n);
            let mut k = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[k % bits.len()] { g.add_edge(u, v); }
                    k += 1;
                }
            }
            let c = vizing_color(&g);
            prop_assert!(c.is_proper(n));
            prop_assert!(c.used <= g.max_degree() + 1);
            if g.max_degree() > 0 {
                for d in 1..=g.max_degree() {
                    let q = bounded_degree_subgraph(&g, d).unwrap();
                    prop_assert_eq!(q.max_degree(), d);
                    prop_assert!(q.edge_count() * (g.max_degree() + 1) >= d * g.edge_count());
                    prop_assert!(q.is_subgraph_of(&g));
                }
            }
        }
    }
}
