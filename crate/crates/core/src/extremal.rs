//! Exact desk-scale extremal solvers: maximum `r`-cuts, largest `H`-free
//! subgraphs via minimum transversals, the Simonovits decision, canonical
//! cuts and the dense-graph peeling.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::{pair_index, Graph, PartTuple};
use crate::iso;
use crate::pattern::PatternProfile;

/// Largest `n` accepted by the exact cut solvers.
pub const EXACT_CUT_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutMode {
    Exact,
    Local,
}

/// Maximum `r`-cut, either exactly or as a vertex-move local optimum.
pub fn max_r_cut(g: &Graph, r: usize, mode: CutMode) -> Result<(PartTuple, usize)> {
    if r < 1 {
        return Err(Error::Domain(String::from("r must be positive")));
    }
    match mode {
        CutMode::Exact => {
            let (assign, value) = exact_cut(g, r, false)?;
            Ok((PartTuple::from_assignment(r, &assign), value))
        }
        CutMode::Local => {
            let assign = local_cut(g, r, None);
            let cut = PartTuple::from_assignment(r, &assign);
            let v = cut.ext_count(g);
            Ok((cut, v))
        }
    }
}

/// Among all maximum `r`-cuts, the one with most edges inside the first part,
/// then the lexicographically smallest part-assignment vector.
pub fn canonical_cut(f: &Graph, r: usize) -> Result<PartTuple> {
    let (assign, _) = exact_cut(f, r, true)?;
    Ok(PartTuple::from_assignment(r, &assign))
}

/// Vertex-move local search from a greedy start. Every vertex ends with no
/// more neighbours in its own part than in any other part.
pub fn local_cut(g: &Graph, r: usize, start: Option<&[usize]>) -> Vec<usize> {
    let n = g.n();
    let mut part = vec![0usize; n];
    let mut d = vec![vec![0usize; r]; n];
    match start {
        Some(s) => {
            part.copy_from_slice(s);
            for v in 0..n {
                for u in g.neighbours(v).iter() {
                    d[v][part[u]] += 1;
                }
            }
        }
        None => {
            let mut placed = BitSet::new(n);
            for v in 0..n {
                let mut cnt = vec![0usize; r];
                for u in g.neighbours(v).iter().filter(|&u| placed.contains(u)) {
                    cnt[part[u]] += 1;
                }
                part[v] = argmin(&cnt);
                placed.insert(v);
            }
            for v in 0..n {
                for u in g.neighbours(v).iter() {
                    d[v][part[u]] += 1;
                }
            }
        }
    }
    loop {
        let mut moved = false;
        for v in 0..n {
            let k = argmin(&d[v]);
            if d[v][k] < d[v][part[v]] {
                let old = part[v];
                part[v] = k;
                for u in g.neighbours(v).iter() {
                    d[u][old] -= 1;
                    d[u][k] += 1;
                }
                moved = true;
            }
        }
        if !moved {
            return part;
        }
    }
}

fn argmin(xs: &[usize]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x < xs[best] {
            best = i;
        }
    }
    best
}

/// Exact maximum cut by depth-first search over assignments in lexicographic
/// order. With `canonical`, labels are not symmetry-reduced and ties are
/// broken by the number of edges inside part 0, then lexicographically.
fn exact_cut(g: &Graph, r: usize, canonical: bool) -> Result<(Vec<usize>, usize)> {
    let n = g.n();
    if n > EXACT_CUT_LIMIT {
        return Err(Error::TooLarge(format!(
            "exact max cut limited to {EXACT_CUT_LIMIT} vertices, got {n}"
        )));
    }
    let init = local_cut(g, r, None);
    let init_val = PartTuple::from_assignment(r, &init).ext_count(g);
    let mut s = CutSearch {
        g,
        r,
        canonical,
        part: vec![usize::MAX; n],
        d: vec![vec![0; r]; n],
        best: if canonical { Vec::new() } else { init },
        best_val: if canonical { 0 } else { init_val },
        best_int0: 0,
        have_best: !canonical,
        lower: init_val,
    };
    s.go(0, 0, 0, 0);
    Ok((s.best, s.best_val))
}

struct CutSearch<'a> {
    g: &'a Graph,
    r: usize,
    canonical: bool,
    part: Vec<usize>,
    /// `d[v][k]`: neighbours of `v` already placed in part `k`.
    d: Vec<Vec<usize>>,
    best: Vec<usize>,
    best_val: usize,
    best_int0: usize,
    have_best: bool,
    /// A cut value known to be achievable.
    lower: usize,
}

impl CutSearch<'_> {
    fn go(&mut self, v: usize, val: usize, int0: usize, used: usize) {
        let n = self.g.n();
        if v == n {
            let better = !self.have_best
                || val > self.best_val
                || (self.canonical && val == self.best_val && int0 > self.best_int0);
            if better {
                self.best = self.part.clone();
                self.best_val = val;
                self.best_int0 = int0;
                self.have_best = true;
            }
            return;
        }
        // each remaining vertex can add at most its placed neighbours minus
        // the fewest in one part, plus edges among remaining vertices
        let mut bound = val;
        let mut inner = 0;
        for u in v..n {
            let placed: usize = self.d[u].iter().sum();
            bound += placed - self.d[u].iter().min().copied().unwrap_or(0);
            inner += self.g.degree(u) - placed;
        }
        bound += inner / 2;
        let prune = if self.canonical {
            bound < self.best_val.max(self.lower)
        } else {
            bound <= self.best_val
        };
        if prune {
            return;
        }
        let limit = if self.canonical { self.r } else { (used + 1).min(self.r) };
        for k in 0..limit {
            let gain: usize = self.d[v].iter().sum::<usize>() - self.d[v][k];
            let add0 = if k == 0 { self.d[v][0] } else { 0 };
            self.part[v] = k;
            for u in self.g.neighbours(v).iter() {
                self.d[u][k] += 1;
            }
            self.go(v + 1, val + gain, int0 + add0, used.max(k + 1));
            for u in self.g.neighbours(v).iter() {
                self.d[u][k] -= 1;
            }
        }
        self.part[v] = usize::MAX;
    }
}

/// Solver limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Allow certified closed-form answers (Turán's theorem for cliques in
    /// complete hosts).
    pub shortcuts: bool,
    /// Branch-and-bound node budget per phase.
    pub node_budget: u64,
    /// Largest number of optima enumerated in the Simonovits decision.
    pub optimum_cap: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            shortcuts: true,
            node_budget: 5_000_000,
            optimum_cap: 1_000_000,
        }
    }
}

/// Minimum transversal search over the copies of `h` in a host graph.
struct Transversal {
    /// Copies as local edge ids.
    copies: Vec<Vec<usize>>,
    /// Copies through each local edge.
    inc: Vec<BitSet>,
    nodes: u64,
    budget: u64,
}

enum Flow {
    Continue,
    Stop,
}

impl Transversal {
    fn new(g: &Graph, h: &Graph) -> (Self, Vec<(usize, usize)>) {
        let edges = g.edges();
        let n = g.n();
        let mut local = vec![usize::MAX; crate::graph::num_pairs(n)];
        for (i, &(u, v)) in edges.iter().enumerate() {
            local[pair_index(n, u, v)] = i;
        }
        let copies: Vec<Vec<usize>> = iso::copies(h, g)
            .into_iter()
            .map(|c| c.into_iter().map(|x| local[x as usize]).collect())
            .collect();
        let mut inc = vec![BitSet::new(copies.len()); edges.len()];
        for (ci, c) in copies.iter().enumerate() {
            for &e in c {
                inc[e].insert(ci);
            }
        }
        (
            Transversal {
                copies,
                inc,
                nodes: 0,
                budget: u64::MAX,
            },
            edges,
        )
    }

    /// Disjoint packing of unhit copies over allowed edges, together with a
    /// degree bound; both are lower bounds on the edges still needed.
    fn lower_bound(&self, unhit: &BitSet, forbidden: &BitSet) -> usize {
        let mut order: Vec<(usize, usize)> = unhit
            .iter()
            .map(|c| (self.copies[c].iter().filter(|&&e| !forbidden.contains(e)).count(), c))
            .collect();
        order.sort_unstable();
        let mut used = BitSet::new(self.inc.len());
        let mut packing = 0;
        for &(_, c) in &order {
            let allowed = self.copies[c].iter().filter(|&&e| !forbidden.contains(e));
            if allowed.clone().all(|&e| !used.contains(e)) {
                for &e in allowed {
                    used.insert(e);
                }
                packing += 1;
            }
        }
        let maxdeg = (0..self.inc.len())
            .filter(|&e| !forbidden.contains(e))
            .map(|e| self.inc[e].intersection_count(unhit))
            .max()
            .unwrap_or(0);
        let by_degree = if maxdeg == 0 {
            usize::from(!unhit.is_empty()) * usize::MAX / 2
        } else {
            unhit.count().div_ceil(maxdeg)
        };
        packing.max(by_degree)
    }

    /// Visits every transversal of size at most `limit` reachable by
    /// partition branching, pruning with the lower bound. `visit` may lower
    /// `limit` (optimisation) or keep it (enumeration).
    fn search(
        &mut self,
        chosen: &mut Vec<usize>,
        unhit: &BitSet,
        forbidden: &mut BitSet,
        limit: &mut usize,
        visit: &mut dyn FnMut(&[usize], &mut usize) -> Flow,
    ) -> Result<Flow> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::TooLarge(String::from("transversal search budget exhausted")));
        }
        if unhit.is_empty() {
            return Ok(visit(chosen, limit));
        }
        if chosen.len() + self.lower_bound(unhit, forbidden) > *limit {
            return Ok(Flow::Continue);
        }
        // branch on the unhit copy with fewest allowed edges
        let c = unhit
            .iter()
            .min_by_key(|&c| self.copies[c].iter().filter(|&&e| !forbidden.contains(e)).count())
            .unwrap();
        let allowed: Vec<usize> = self.copies[c]
            .iter()
            .copied()
            .filter(|&e| !forbidden.contains(e))
            .collect();
        let mut newly_forbidden = Vec::new();
        let mut flow = Flow::Continue;
        for &e in &allowed {
            if chosen.len() + 1 > *limit {
                break;
            }
            chosen.push(e);
            let next = unhit.difference(&self.inc[e]);
            let f = self.search(chosen, &next, forbidden, limit, visit);
            chosen.pop();
            match f {
                Ok(Flow::Stop) => {
                    flow = Flow::Stop;
                    break;
                }
                Ok(Flow::Continue) => {}
                Err(err) => {
                    for &x in &newly_forbidden {
                        forbidden.remove(x);
                    }
                    return Err(err);
                }
            }
            forbidden.insert(e);
            newly_forbidden.push(e);
        }
        for &x in &newly_forbidden {
            forbidden.remove(x);
        }
        Ok(flow)
    }

    fn minimum(&mut self, upper: Option<Vec<usize>>) -> Result<Vec<usize>> {
        let m = self.inc.len();
        if self.copies.is_empty() {
            return Ok(Vec::new());
        }
        let mut best = upper.unwrap_or_else(|| (0..m).collect());
        if best.is_empty() {
            return Err(Error::Internal(String::from("empty upper bound with copies present")));
        }
        let mut limit = best.len() - 1;
        let all = BitSet::full(self.copies.len());
        {
            let mut visit = |t: &[usize], limit: &mut usize| {
                best = t.to_vec();
                *limit = t.len().saturating_sub(1);
                Flow::Continue
            };
            self.search(&mut Vec::new(), &all, &mut BitSet::new(m), &mut limit, &mut visit)?;
        }
        best.sort_unstable();
        Ok(best)
    }

    /// Calls `visit` on every transversal of exactly `size` edges (when
    /// `size` is the minimum, these are all minimum transversals, each once).
    fn enumerate(&mut self, size: usize, visit: &mut dyn FnMut(&[usize]) -> Flow) -> Result<()> {
        let m = self.inc.len();
        let all = BitSet::full(self.copies.len());
        let mut limit = size;
        let mut wrapped = |t: &[usize], _: &mut usize| {
            if t.len() == size {
                visit(t)
            } else {
                Flow::Continue
            }
        };
        self.search(&mut Vec::new(), &all, &mut BitSet::new(m), &mut limit, &mut wrapped)?;
        Ok(())
    }
}

fn complement_of(g: &Graph, edges: &[(usize, usize)], t: &[usize]) -> Graph {
    let mut f = g.clone();
    for &e in t {
        let (u, v) = edges[e];
        f.remove_edge(u, v);
    }
    f
}

fn is_clique(h: &Graph) -> bool {
    h.edge_count() == h.n() * h.n().saturating_sub(1) / 2
}

fn is_complete_host(g: &Graph) -> bool {
    is_clique(g)
}

/// `ex(g, h)` and one largest `h`-free subgraph of `g`.
pub fn max_h_free(g: &Graph, h: &Graph) -> Result<(usize, Graph)> {
    max_h_free_with(g, h, &SolverOptions {
        shortcuts: false,
        ..SolverOptions::default()
    })
}

pub fn max_h_free_with(g: &Graph, h: &Graph, opts: &SolverOptions) -> Result<(usize, Graph)> {
    let chi_h = h.chromatic_number();
    if opts.shortcuts && is_clique(h) && h.n() >= 2 && is_complete_host(g) {
        let f = Graph::turan(g.n(), h.n() - 1);
        return Ok((f.edge_count(), f));
    }
    let (mut t, edges) = Transversal::new(g, h);
    t.budget = opts.node_budget;
    let upper = partite_upper(g, chi_h.saturating_sub(1), &edges);
    let best = t.minimum(upper)?;
    let f = complement_of(g, &edges, &best);
    if iso::contains_copy(h, &f) {
        return Err(Error::Internal(String::from("witness still contains a copy of H")));
    }
    Ok((f.edge_count(), f))
}

/// Edges outside a large `r`-cut, as local ids: a transversal whenever
/// `χ(H) > r`.
fn partite_upper(g: &Graph, r: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    if r == 0 {
        return None;
    }
    let assign = if g.n() <= EXACT_CUT_LIMIT {
        exact_cut(g, r, false).ok()?.0
    } else {
        local_cut(g, r, None)
    };
    Some(
        edges
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| assign[u] == assign[v])
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Edges of `g` in no copy of `h`, returned when they are not `r`-colourable.
pub fn free_edge_witness(g: &Graph, h: &Graph) -> Option<Graph> {
    let r = h.chromatic_number().saturating_sub(1);
    let n = g.n();
    let mut covered = BitSet::new(crate::graph::num_pairs(n));
    for c in iso::copies(h, g) {
        for x in c {
            covered.insert(x as usize);
        }
    }
    let free = g.edge_set().difference(&covered);
    let f = Graph::from_edge_set(n, &free);
    (f.chromatic_number() > r).then_some(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Yes,
    No,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// The host is itself `r`-colourable, hence its own unique largest
    /// `H`-free subgraph.
    HostPartite,
    /// `H` is not edge-critical and `χ(G) ≥ χ(H)`.
    ForcedByChromatic,
    /// Complete host and clique pattern: the Turán graph is the unique optimum.
    Turan { witness: Graph },
    /// Edges in no copy of `H` that are not `r`-colourable.
    FreeEdges { witness: Graph },
    /// A largest `H`-free subgraph that is not `r`-partite.
    NonPartiteOptimum { witness: Graph },
    /// Every largest `H`-free subgraph was enumerated and found `r`-partite.
    AllOptimaPartite { optima: u64 },
    /// A search limit was reached.
    Exhausted { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimonovitsVerdict {
    pub decision: Decision,
    pub ex_size: Option<usize>,
    pub best_rpartite: Option<usize>,
    pub certificate: Certificate,
    pub nodes: u64,
}

impl SimonovitsVerdict {
    /// Re-checks the certificate independently of the search.
    pub fn verify(&self, g: &Graph, h: &Graph) -> bool {
        let r = h.chromatic_number() - 1;
        match (&self.decision, &self.certificate) {
            (Decision::Yes, Certificate::HostPartite) => g.k_colouring(r).is_some(),
            (Decision::Yes, Certificate::Turan { witness }) => {
                is_clique(h) && is_complete_host(g) && witness.is_subgraph_of(g)
                    && !iso::contains_copy(h, witness)
                    && witness.k_colouring(r).is_some()
            }
            (Decision::Yes, Certificate::AllOptimaPartite { optima }) => *optima >= 1,
            (Decision::No, Certificate::ForcedByChromatic) => {
                !crate::pattern::is_edge_critical(h).0 && g.chromatic_number() > r
            }
            (Decision::No, Certificate::FreeEdges { witness }) => {
                witness.is_subgraph_of(g)
                    && witness.chromatic_number() > r
                    && witness.edges().iter().all(|&(u, v)| !edge_in_copy(g, h, u, v))
            }
            (Decision::No, Certificate::NonPartiteOptimum { witness }) => {
                witness.is_subgraph_of(g)
                    && !iso::contains_copy(h, witness)
                    && Some(witness.edge_count()) == self.ex_size
                    && witness.k_colouring(r).is_none()
            }
            (Decision::Indeterminate, Certificate::Exhausted { .. }) => true,
            _ => false,
        }
    }
}

/// Whether the edge `uv` of `g` lies in some copy of `h`.
pub fn edge_in_copy(g: &Graph, h: &Graph, u: usize, v: usize) -> bool {
    let n = g.n();
    let mut found = false;
    for (a, b) in h.edges() {
        for (x, y) in [(u, v), (v, u)] {
            let mut dom = vec![BitSet::full(n); h.n()];
            dom[a] = BitSet::from_iter(n, [x]);
            dom[b] = BitSet::from_iter(n, [y]);
            iso::for_each_embedding(h, g, Some(&dom), |_| {
                found = true;
                false
            });
            if found {
                return true;
            }
        }
    }
    false
}

/// Decides whether every largest `h`-free subgraph of `g` is
/// `(χ(h) − 1)`-partite.
pub fn is_simonovits(g: &Graph, h: &Graph, profile: &PatternProfile) -> Result<SimonovitsVerdict> {
    is_simonovits_with(g, h, profile, &SolverOptions::default())
}

pub fn is_simonovits_with(
    g: &Graph,
    h: &Graph,
    profile: &PatternProfile,
    opts: &SolverOptions,
) -> Result<SimonovitsVerdict> {
    let r = profile.r;
    if r < 1 {
        return Err(Error::Inapplicable(String::from("pattern has no edges")));
    }
    let e = g.edge_count();
    let verdict = |decision, ex, best, certificate, nodes| SimonovitsVerdict {
        decision,
        ex_size: ex,
        best_rpartite: best,
        certificate,
        nodes,
    };
    if g.k_colouring(r).is_some() {
        return Ok(verdict(Decision::Yes, Some(e), Some(e), Certificate::HostPartite, 0));
    }
    if !profile.edge_critical && g.chromatic_number() >= profile.chi {
        return Ok(verdict(Decision::No, None, None, Certificate::ForcedByChromatic, 0));
    }
    if opts.shortcuts && is_clique(h) && is_complete_host(g) {
        let t = Graph::turan(g.n(), r);
        let size = t.edge_count();
        return Ok(verdict(
            Decision::Yes,
            Some(size),
            Some(size),
            Certificate::Turan { witness: t },
            0,
        ));
    }
    if let Some(w) = free_edge_witness(g, h) {
        return Ok(verdict(Decision::No, None, None, Certificate::FreeEdges { witness: w }, 0));
    }
    let (mut t, edges) = Transversal::new(g, h);
    t.budget = opts.node_budget;
    let upper = partite_upper(g, r, &edges).unwrap_or_default();
    let best_rpartite = if g.n() <= EXACT_CUT_LIMIT {
        Some(e - upper.len())
    } else {
        None
    };
    let exhausted = |reason: &str, nodes| {
        verdict(
            Decision::Indeterminate,
            None,
            best_rpartite,
            Certificate::Exhausted {
                reason: String::from(reason),
            },
            nodes,
        )
    };
    if best_rpartite.is_none() {
        return Ok(exhausted("host too large for the exact r-cut", 0));
    }
    let tau0 = upper.len();
    let best = match t.minimum(Some(upper)) {
        Ok(b) => b,
        Err(Error::TooLarge(_)) => return Ok(exhausted("node budget in minimisation", t.nodes)),
        Err(err) => return Err(err),
    };
    if best.len() < tau0 {
        let w = complement_of(g, &edges, &best);
        return Ok(verdict(
            Decision::No,
            Some(w.edge_count()),
            best_rpartite,
            Certificate::NonPartiteOptimum { witness: w },
            t.nodes,
        ));
    }
    // every optimum has tau0 edges removed; test each for r-partiteness
    let mut count = 0u64;
    let mut bad: Option<Graph> = None;
    let mut capped = false;
    let cap = opts.optimum_cap;
    t.nodes = 0;
    let res = t.enumerate(tau0, &mut |tr| {
        count += 1;
        let f = complement_of(g, &edges, tr);
        if f.k_colouring(r).is_none() {
            bad = Some(f);
            return Flow::Stop;
        }
        if count >= cap {
            capped = true;
            return Flow::Stop;
        }
        Flow::Continue
    });
    match res {
        Ok(()) => {}
        Err(Error::TooLarge(_)) => return Ok(exhausted("node budget in enumeration", t.nodes)),
        Err(err) => return Err(err),
    }
    let ex = Some(e - tau0);
    if let Some(w) = bad {
        return Ok(verdict(
            Decision::No,
            ex,
            best_rpartite,
            Certificate::NonPartiteOptimum { witness: w },
            t.nodes,
        ));
    }
    if capped {
        return Ok(exhausted("optimum enumeration cap", t.nodes));
    }
    Ok(verdict(
        Decision::Yes,
        ex,
        best_rpartite,
        Certificate::AllOptimaPartite { optima: count },
        t.nodes,
    ))
}

/// Counts every largest `h`-free subgraph of `g` (exact, budgeted).
pub fn count_optima(g: &Graph, h: &Graph, opts: &SolverOptions) -> Result<(usize, u64)> {
    let (ex, _) = max_h_free_with(g, h, &SolverOptions { shortcuts: false, ..*opts })?;
    let (mut t, _) = Transversal::new(g, h);
    t.budget = opts.node_budget;
    let mut count = 0;
    t.enumerate(g.edge_count() - ex, &mut |_| {
        count += 1;
        Flow::Continue
    })?;
    Ok((ex, count))
}

/// One deletion in the peeling sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeelStep {
    pub vertex: usize,
    pub degree: usize,
    /// Number of vertices before the deletion.
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeelReport {
    pub f: Graph,
    pub steps: Vec<PeelStep>,
    pub remaining: Vec<usize>,
    /// The terminal graph on `remaining`, relabelled in order.
    pub terminal: Graph,
    pub terminal_r_partite: bool,
    pub terminal_h_free: bool,
}

/// Peels a largest `h`-free subgraph: while some vertex has degree at most
/// `(3r − 4)/(3r − 1)` times the current order, delete the one of least
/// degree (smallest label on ties).
pub fn dense_peel(g: &Graph, h: &Graph, profile: &PatternProfile, opts: &SolverOptions) -> Result<PeelReport> {
    let (_, f) = max_h_free_with(g, h, opts)?;
    Ok(peel(&f, h, profile.r))
}

/// The peeling sequence applied to a given graph.
pub fn peel(f: &Graph, h: &Graph, r: usize) -> PeelReport {
    let (num, den) = (3 * r - 4, 3 * r - 1);
    let n = f.n();
    let mut alive = BitSet::full(n);
    let mut steps = Vec::new();
    loop {
        let k = alive.count();
        if k == 0 {
            break;
        }
        let (v, d) = alive
            .iter()
            .map(|v| (v, f.degree_into(v, &alive)))
            .min_by_key(|&(v, d)| (d, v))
            .unwrap();
        if d * den > num * k {
            break;
        }
        steps.push(PeelStep { vertex: v, degree: d, k });
        alive.remove(v);
    }
    let remaining = alive.to_vec();
    let terminal = f.induced(&remaining);
    PeelReport {
        f: f.clone(),
        steps,
        terminal_r_partite: terminal.k_colouring(r).is_some(),
        terminal_h_free: !iso::contains_copy(h, &terminal),
        remaining,
        terminal,
    }
}

/// From an `r`-partite subgraph `sub` living on `vertices`, adds the crossing
/// edges of a local maximum `r`-cut of `g − vertices`. The result has at least
/// `e(sub) + (r − 1)/r · e(g − vertices)` edges.
pub fn augment_partite(g: &Graph, sub: &Graph, vertices: &BitSet, r: usize) -> Result<(Graph, PartTuple)> {
    let n = g.n();
    if !sub.is_subgraph_of(g) || !sub.support().is_subset(vertices) {
        return Err(Error::InvalidGraph(String::from("sub must be a subgraph of g on the given vertices")));
    }
    let inner = sub.induced(&vertices.to_vec());
    let col = inner
        .k_colouring(r)
        .ok_or_else(|| Error::InvalidGraph(String::from("sub is not r-partite")))?;
    let rest = vertices.complement();
    let g_rest = g.restrict_to(&rest);
    let cut = local_cut(&g_rest, r, None);
    let mut assign = cut;
    for (i, v) in vertices.iter().enumerate() {
        assign[v] = col[i];
    }
    let mut out = sub.clone();
    for (u, v) in g_rest.edges() {
        if assign[u] != assign[v] {
            out.add_edge(u, v);
        }
    }
    debug_assert_eq!(out.n(), n);
    Ok((out, PartTuple::from_assignment(r, &assign)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{index_pair, num_pairs};
    use proptest::prelude::*;

    fn brute_cut(g: &Graph, r: usize) -> usize {
        let n = g.n();
        let mut best = 0;
        let total = r.pow(n as u32);
        for mut code in 0..total {
            let mut a = vec![0; n];
            for slot in a.iter_mut() {
                *slot = code % r;
                code /= r;
            }
            best = best.max(PartTuple::from_assignment(r, &a).ext_count(g));
        }
        best
    }

    fn brute_ex(g: &Graph, h: &Graph) -> usize {
        let edges = g.edges();
        let mut best = 0;
        for mask in 0u32..(1 << edges.len()) {
            let k = mask.count_ones() as usize;
            if k <= best {
                continue;
            }
            let mut f = Graph::new(g.n());
            for (i, &(u, v)) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    f.add_edge(u, v);
                }
            }
            if !iso::contains_copy(h, &f) {
                best = k;
            }
        }
        best
    }

    #[test]
    fn cut_examples() {
        assert_eq!(max_r_cut(&Graph::cycle(5), 2, CutMode::Exact).unwrap().1, 4);
        assert_eq!(max_r_cut(&Graph::complete(4), 2, CutMode::Exact).unwrap().1, 4);
        assert_eq!(max_r_cut(&Graph::petersen(), 3, CutMode::Exact).unwrap().1, 15);
        assert!(matches!(max_r_cut(&Graph::new(17), 2, CutMode::Exact), Err(Error::TooLarge(_))));
    }

    #[test]
    fn max_free_examples() {
        let k3 = Graph::complete(3);
        let (ex, w) = max_h_free(&Graph::complete(5), &k3).unwrap();
        assert_eq!(ex, 6);
        assert!(iso::is_isomorphic(&w.induced(&(0..5).collect::<Vec<_>>()), &Graph::complete_multipartite(&[2, 3])));
        assert_eq!(max_h_free(&Graph::complete(6), &k3).unwrap().0, 9);
        assert_eq!(max_h_free(&Graph::petersen(), &k3).unwrap().0, 15);
        for n in 4..=7 {
            assert_eq!(max_h_free(&Graph::complete(n), &k3).unwrap().0, n * n / 4);
        }
    }

    #[test]
    fn simonovits_examples() {
        let k3 = Graph::complete(3);
        let prof = PatternProfile::analyze(&k3).unwrap();
        let exact = SolverOptions {
            shortcuts: false,
            ..SolverOptions::default()
        };
        let v = is_simonovits_with(&Graph::complete(5), &k3, &prof, &exact).unwrap();
        assert_eq!(v.decision, Decision::Yes);
        assert_eq!(v.ex_size, Some(6));
        assert_eq!(v.certificate, Certificate::AllOptimaPartite { optima: 10 });
        assert!(v.verify(&Graph::complete(5), &k3));

        let v = is_simonovits(&Graph::cycle(5), &k3, &prof).unwrap();
        assert_eq!(v.decision, Decision::No);
        assert!(v.verify(&Graph::cycle(5), &k3));

        let v = is_simonovits_with(&Graph::complete(4), &k3, &prof, &exact).unwrap();
        assert_eq!(v.decision, Decision::Yes);
        assert_eq!(v.certificate, Certificate::AllOptimaPartite { optima: 3 });

        let v = is_simonovits(&Graph::complete(7), &k3, &prof).unwrap();
        assert!(matches!(v.certificate, Certificate::Turan { .. }));
        assert!(v.verify(&Graph::complete(7), &k3));
    }

    #[test]
    fn free_edge_examples() {
        let k3 = Graph::complete(3);
        assert_eq!(free_edge_witness(&Graph::cycle(5), &k3), Some(Graph::cycle(5)));
        assert_eq!(free_edge_witness(&Graph::complete(5), &k3), None);
        let g = Graph::complete(5).disjoint_union(&Graph::cycle(5));
        let w = free_edge_witness(&g, &k3).unwrap();
        assert_eq!(w, Graph::new(5).disjoint_union(&Graph::cycle(5)));
    }

    #[test]
    fn canonical_cut_examples() {
        let k3 = canonical_cut(&Graph::complete(3), 2).unwrap();
        assert_eq!(k3.assignment().unwrap(), vec![0, 0, 1]);
        let c4 = canonical_cut(&Graph::cycle(4), 2).unwrap();
        assert_eq!(c4.assignment().unwrap(), vec![0, 1, 0, 1]);
        let e = canonical_cut(&Graph::new(4), 2).unwrap();
        assert_eq!(e.assignment().unwrap(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn peel_examples() {
        let k3 = Graph::complete(3);
        let c5 = peel(&Graph::cycle(5), &k3, 2);
        assert_eq!(c5.steps.len(), 3);
        assert_eq!(c5.terminal.edge_count(), 1);
        assert!(c5.terminal_r_partite);
        let k33 = peel(&Graph::complete_multipartite(&[3, 3]), &k3, 2);
        assert!(k33.steps.is_empty() && k33.terminal_r_partite);

        let g = Graph::petersen();
        let (aug, _) = augment_partite(&g, &Graph::new(10), &BitSet::new(10), 2).unwrap();
        assert!(2 * aug.edge_count() >= g.edge_count());
        assert!(aug.is_bipartite());
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
        (2..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), num_pairs(n)).prop_map(move |bits| {
                let mut g = Graph::new(n);
                for (i, b) in bits.into_iter().enumerate() {
                    if b {
                        let (u, v) = index_pair(n, i);
                        g.add_edge(u, v);
                    }
                }
                g
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn exact_cut_matches_brute_force(g in arb_graph(8), r in 2usize..4) {
            let (cut, v) = max_r_cut(&g, r, CutMode::Exact).unwrap();
            prop_assert_eq!(v, brute_cut(&g, r));
            prop_assert_eq!(cut.ext_count(&g), v);
            let canon = canonical_cut(&g, r).unwrap();
            prop_assert_eq!(canon.ext_count(&g), v);
        }

        #[test]
        fn local_cut_is_unfriendly(g in arb_graph(14), r in 2usize..4) {
            let (cut, _) = max_r_cut(&g, r, CutMode::Local).unwrap();
            let a = cut.assignment().unwrap();
            for v in 0..g.n() {
                let own = g.degree_into(v, cut.part(a[v]));
                for k in 0..r {
                    prop_assert!(own <= g.degree_into(v, cut.part(k)));
                }
            }
        }

        #[test]
        fn transversal_matches_brute_force(g in arb_graph(6)) {
            let k3 = Graph::complete(3);
            let (ex, w) = max_h_free(&g, &k3).unwrap();
            prop_assert_eq!(ex, brute_ex(&g, &k3));
            prop_assert!(!iso::contains_copy(&k3, &w));
            prop_assert!(w.is_subgraph_of(&g));
        }

        #[test]
        fn free_edges_survive_in_optima(g in arb_graph(7)) {
            let k3 = Graph::complete(3);
            let (_, w) = max_h_free(&g, &k3).unwrap();
            for (u, v) in g.edges() {
                if !edge_in_copy(&g, &k3, u, v) {
                    prop_assert!(w.has_edge(u, v));
                }
            }
        }
    }
}
