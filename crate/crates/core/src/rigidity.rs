//! Balanced cut families, deficits, rigidity and cores, critical edges, and
//! the edge-switching process with its trace validator.
//!
//! Cut families are enumerated explicitly; every graph involved has at most
//! 64 vertices so a part fits in one machine word.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::{index_pair, num_pairs, pair_index, ColoredGraph, Graph, PartTuple};
use crate::hypergraph::CopyHypergraph;
use crate::random::RngStream;

/// Largest number of assignments a family enumeration may visit.
pub const FAMILY_STATE_LIMIT: f64 = 1e8;

/// All `δ`-balanced ordered `r`-cuts of `0..n` compatible with an optional
/// coloured graph (`V^k(Q) ⊆ V_k`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutFamily {
    n: usize,
    r: usize,
    delta_bits: u64,
    // `r` part masks per cut.
    masks: Vec<u64>,
}

impl CutFamily {
    pub fn enumerate(n: usize, r: usize, delta: f64, q: Option<&ColoredGraph>) -> Result<Self> {
        if r == 0 {
            return Err(Error::Domain(String::from("r must be positive")));
        }
        if n > 64 {
            return Err(Error::TooLarge(format!("cut families need n <= 64, got {n}")));
        }
        let fixed: Vec<Option<usize>> = match q {
            Some(q) => {
                if q.n() != n || q.r() != r {
                    return Err(Error::InvalidQ(String::from("Q does not match (n, r)")));
                }
                q.colours().to_vec()
            }
            None => alloc::vec![None; n],
        };
        let free = fixed.iter().filter(|c| c.is_none()).count();
        let states = libm::pow(r as f64, free as f64);
        if states > FAMILY_STATE_LIMIT {
            return Err(Error::TooLarge(format!("{r}^{free} cut assignments exceed the guard")));
        }
        let tol = 1e-9;
        let lo = libm::ceil((1.0 - delta) * n as f64 / r as f64 - tol).max(0.0) as usize;
        let hi = libm::floor((1.0 + delta) * n as f64 / r as f64 + tol) as usize;
        let mut fam = CutFamily {
            n,
            r,
            delta_bits: delta.to_bits(),
            masks: Vec::new(),
        };
        if lo > hi || lo * r > n || hi * r < n {
            return Ok(fam);
        }
        let mut parts = alloc::vec![0u64; r];
        let mut sizes = alloc::vec![0usize; r];
        fam.fill(0, &fixed, lo, hi, &mut parts, &mut sizes);
        Ok(fam)
    }

    fn fill(&mut self, v: usize, fixed: &[Option<usize>], lo: usize, hi: usize, parts: &mut [u64], sizes: &mut [usize]) {
        let n = self.n;
        if v == n {
            self.masks.extend_from_slice(parts);
            return;
        }
        let left = n - v - 1;
        let try_part = |k: usize, this: &mut Self, parts: &mut [u64], sizes: &mut [usize]| {
            if sizes[k] == hi {
                return;
            }
            sizes[k] += 1;
            let short: usize = sizes.iter().map(|&s| lo.saturating_sub(s)).sum();
            if short <= left {
                parts[k] |= 1 << v;
                this.fill(v + 1, fixed, lo, hi, parts, sizes);
                parts[k] &= !(1 << v);
            }
            sizes[k] -= 1;
        };
        match fixed[v] {
            Some(k) => try_part(k, self, parts, sizes),
            None => {
                for k in 0..self.r {
                    try_part(k, self, parts, sizes);
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn delta(&self) -> f64 {
        f64::from_bits(self.delta_bits)
    }

    pub fn len(&self) -> usize {
        self.masks.len() / self.r
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    fn parts_of(&self, i: usize) -> &[u64] {
        &self.masks[i * self.r..(i + 1) * self.r]
    }

    /// Part of `v` in cut `i`.
    pub fn part_of(&self, i: usize, v: usize) -> usize {
        self.parts_of(i).iter().position(|&m| m >> v & 1 == 1).unwrap_or(0)
    }

    pub fn cut(&self, i: usize) -> PartTuple {
        let assign: Vec<usize> = (0..self.n).map(|v| self.part_of(i, v)).collect();
        PartTuple::from_assignment(self.r, &assign)
    }

    pub fn index_of(&self, cut: &PartTuple) -> Option<usize> {
        if cut.n() != self.n || cut.r() != self.r || !cut.is_complete() {
            return None;
        }
        let want: Vec<u64> = cut.parts().iter().map(mask_of).collect();
        (0..self.len()).find(|&i| self.parts_of(i) == want.as_slice())
    }

    /// `e(ext(Π) ∩ g)` for every member, in enumeration order.
    pub fn values(&self, g: &Graph) -> Vec<usize> {
        let adj: Vec<u64> = (0..self.n).map(|v| mask_of(g.neighbours(v))).collect();
        let total = g.edge_count();
        (0..self.len())
            .map(|i| {
                let mut twice_int = 0u32;
                for &m in self.parts_of(i) {
                    let mut rest = m;
                    while rest != 0 {
                        let v = rest.trailing_zeros() as usize;
                        rest &= rest - 1;
                        twice_int += (adj[v] & m).count_ones();
                    }
                }
                total - twice_int as usize / 2
            })
            .collect()
    }

    /// `b(g)`, the largest cut value over the family (zero when empty).
    pub fn best(&self, g: &Graph) -> usize {
        self.values(g).into_iter().max().unwrap_or(0)
    }

    /// Indices of the maximum cuts of `g`.
    pub fn maxcut(&self, g: &Graph) -> Vec<usize> {
        let values = self.values(g);
        let best = values.iter().copied().max().unwrap_or(0);
        (0..values.len()).filter(|&i| values[i] == best).collect()
    }
}

fn mask_of(set: &BitSet) -> u64 {
    set.words().first().copied().unwrap_or(0)
}

/// `(b(g), b(g) − e(ext(cut) ∩ g))`.
pub fn deficit(cut: &PartTuple, g: &Graph, fam: &CutFamily) -> Result<(usize, usize)> {
    let i = fam.index_of(cut).ok_or(Error::NotInFamily)?;
    let values = fam.values(g);
    let best = values.iter().copied().max().unwrap_or(0);
    Ok((best, best - values[i]))
}

/// Which equivalent-pair threshold decides rigidity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    /// `(1−α)·r·C(⌈n/r⌉, 2)`.
    #[default]
    Corrected,
    /// `(1−α)·n²/(2r)`.
    Literal,
}

impl Threshold {
    pub fn value(self, n: usize, r: usize, alpha: f64) -> f64 {
        match self {
            Threshold::Corrected => {
                let m = n.div_ceil(r) as f64;
                (1.0 - alpha) * r as f64 * m * (m - 1.0) / 2.0
            }
            Threshold::Literal => (1.0 - alpha) * (n * n) as f64 / (2 * r) as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidityReport {
    pub best: usize,
    pub maxcuts: Vec<usize>,
    /// Equivalence classes, ordered by smallest vertex.
    pub components: Vec<Vec<usize>>,
    pub pairs: usize,
    pub threshold: f64,
    pub rigid: bool,
    /// The `r` large components, ordered by smallest vertex.
    pub core: Option<PartTuple>,
    /// Exactly `r` components exceed the core size bound.
    pub core_unique: bool,
    pub core_bound: f64,
}

/// Max cuts, equivalence classes (`x ≡ y` iff every max cut puts them in the
/// same part), the equivalent-pair count and, for rigid graphs, the core.
pub fn equivalence_and_rigidity(g: &Graph, fam: &CutFamily, alpha: f64, threshold: Threshold) -> Result<RigidityReport> {
    if fam.is_empty() {
        return Err(Error::Infeasible(String::from("the cut family is empty")));
    }
    let (n, r) = (fam.n(), fam.r());
    let values = fam.values(g);
    let best = values.iter().copied().max().unwrap_or(0);
    let maxcuts: Vec<usize> = (0..values.len()).filter(|&i| values[i] == best).collect();
    let mut classes: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        let sig = maxcuts.iter().map(|&i| fam.part_of(i, v) as u8).collect();
        classes.entry(sig).or_default().push(v);
    }
    let mut components: Vec<Vec<usize>> = classes.into_values().collect();
    components.sort();
    let pairs = components.iter().map(|c| c.len() * (c.len() - 1) / 2).sum();
    let thr = threshold.value(n, r, alpha);
    let rigid = pairs as f64 >= thr - 1e-9;
    let core_bound = (1.0 - 4.0 * r as f64 * alpha) * n as f64 / r as f64;
    let mut large: Vec<&Vec<usize>> = components.iter().filter(|c| c.len() as f64 > core_bound).collect();
    let core_unique = large.len() == r;
    let core = if rigid && large.len() >= r {
        large.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        let mut parts: Vec<Vec<usize>> = large[..r].iter().map(|c| (*c).clone()).collect();
        parts.sort();
        Some(PartTuple::new(n, parts)?)
    } else {
        None
    };
    Ok(RigidityReport {
        best,
        maxcuts,
        components,
        pairs,
        threshold: thr,
        rigid,
        core,
        core_unique,
        core_bound,
    })
}

/// Pairs separated by every maximum cut, as pair indices.
fn crit_set(g: &Graph, fam: &CutFamily, maxcuts: &[usize]) -> BitSet {
    let n = g.n();
    let mut out = BitSet::new(num_pairs(n));
    for (u, v) in g.edges() {
        if maxcuts.iter().all(|&i| fam.part_of(i, u) != fam.part_of(i, v)) {
            out.insert(pair_index(n, u, v));
        }
    }
    out
}

/// `crit(g)`: edges of `g` crossing every maximum cut.
pub fn crit_edges(g: &Graph, fam: &CutFamily) -> Graph {
    Graph::from_edge_set(g.n(), &crit_set(g, fam, &fam.maxcut(g)))
}

/// Edges of `g` crossing the core that are not critical (empty when
/// `crit ⊇ ext(core) ∩ g`).
pub fn uncovered_core_edges(g: &Graph, crit: &Graph, core: &PartTuple) -> Vec<(usize, usize)> {
    g.edges()
        .into_iter()
        .filter(|&(u, v)| match (core.part_of(u), core.part_of(v)) {
            (Some(a), Some(b)) => a != b && !crit.has_edge(u, v),
            _ => false,
        })
        .collect()
}

/// Each nonempty colour class of `q` lies in a distinct core element.
pub fn q_in_core(q: &ColoredGraph, core: &PartTuple) -> bool {
    let mut used = BitSet::new(core.r());
    for k in 0..q.r() {
        let class = q.class(k);
        if class.is_empty() {
            continue;
        }
        match (0..core.r()).find(|&j| class.is_subset(core.part(j))) {
            Some(j) if used.insert(j) => {}
            _ => return false,
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    A,
    B,
    C,
    D,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchStep {
    pub kind: StepKind,
    pub edge: (usize, usize),
    /// Size of the set the edge was drawn from.
    pub choices: usize,
    /// Generator word position before the draw.
    pub rng_word: u64,
    /// Deficit of the cut after the step.
    pub deficit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    /// Rigid with `Q` inside the core.
    Settled,
    /// The branch selected at this step had nothing to choose from.
    Stuck { branch: StepKind },
    StepLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchParams {
    /// `None` disables branch (a).
    pub m: Option<usize>,
    pub max_steps: usize,
    pub alpha: f64,
    /// Defaults to `α/(24r)`.
    pub gamma: Option<f64>,
    pub p: f64,
    pub threshold: Threshold,
    pub seed: u64,
    pub stream: u64,
}

impl SwitchParams {
    pub fn gamma_for(&self, r: usize) -> f64 {
        self.gamma.unwrap_or(self.alpha / (24.0 * r as f64))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchTrace {
    pub n: usize,
    pub r: usize,
    pub rng: RngStream,
    pub g0: Vec<(usize, usize)>,
    pub initial_deficit: usize,
    pub steps: Vec<SwitchStep>,
    pub stop: StopReason,
    pub final_g: Vec<(usize, usize)>,
    pub final_f: Vec<(usize, usize)>,
}

impl SwitchTrace {
    /// `(G_i, F_i)` for `i = 0..=t`, replaying the steps.
    pub fn states(&self) -> Vec<(Graph, Graph)> {
        let mut g = Graph::from_edges(self.n, &self.g0).unwrap_or_else(|_| Graph::new(self.n));
        let mut f = Graph::new(self.n);
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push((g.clone(), f.clone()));
        for s in &self.steps {
            let (u, v) = s.edge;
            if u < self.n && v < self.n && u != v {
                match s.kind {
                    StepKind::D => {
                        f.add_edge(u, v);
                    }
                    _ => {
                        g.remove_edge(u, v);
                    }
                }
            }
            out.push((g.clone(), f.clone()));
        }
        out
    }

    pub fn count(&self, kind: StepKind) -> usize {
        self.steps.iter().filter(|s| s.kind == kind).count()
    }
}

fn pick<R: Rng>(rng: &mut R, set: &BitSet) -> Option<(usize, usize)> {
    let len = set.count();
    if len == 0 {
        return None;
    }
    let k = rng.random_range(0..len);
    set.iter().nth(k).map(|x| (x, len))
}

/// Runs the switching process from `(g0, ∅)` for cut `cut` against the
/// residual family `resid`, all cuts taken from `fam`.
pub fn run_switching(
    g0: &Graph,
    q: &ColoredGraph,
    cut: &PartTuple,
    resid: &CopyHypergraph,
    fam: &CutFamily,
    params: &SwitchParams,
) -> Result<SwitchTrace> {
    let n = g0.n();
    let r = fam.r();
    if params.max_steps == 0 {
        return Err(Error::Domain(String::from("the step limit must be at least 1")));
    }
    if q.n() != n || !q.graph().is_subgraph_of(g0) {
        return Err(Error::InvalidQ(String::from("Q is not a subgraph of G_0")));
    }
    let (_, d0) = deficit(cut, g0, fam)?;
    let stream = RngStream::new(params.seed, params.stream);
    let mut rng = stream.rng();
    let (ext, int) = cut.ext_int();
    let q_set = q.graph().edge_set();
    let gamma_cap = params.gamma_for(r) * (n * n) as f64 * params.p;
    let cut_index = fam.index_of(cut).ok_or(Error::NotInFamily)?;

    let mut g = g0.clone();
    let mut f = Graph::new(n);
    let mut steps = Vec::new();
    let mut stop = StopReason::StepLimit;
    for _ in 0..params.max_steps {
        let h = g.union(&f);
        let rep = equivalence_and_rigidity(&h, fam, params.alpha, params.threshold)?;
        let crit = crit_set(&h, fam, &rep.maxcuts);
        let g_set = g.edge_set();
        let g_crit = g_set.intersection(&crit);
        let mut u_set = BitSet::new(num_pairs(n));
        for omega in resid.edges() {
            if omega.iter().all(|&x| g_crit.contains(x as usize)) && omega.iter().any(|&x| int.contains(x as usize)) {
                for &x in omega {
                    if int.contains(x as usize) {
                        u_set.insert(x as usize);
                    }
                }
            }
        }
        let (kind, choices) = if params.m.is_some_and(|m| u_set.count() >= m) {
            (StepKind::A, u_set)
        } else if crit.intersection_count(&int) as f64 >= gamma_cap {
            (StepKind::B, g_crit.intersection(&int).difference(&q_set))
        } else if !rep.rigid {
            (StepKind::C, g_set.intersection(&int).difference(&crit).difference(&q_set))
        } else {
            match &rep.core {
                Some(core) if q_in_core(q, core) => {
                    stop = StopReason::Settled;
                    break;
                }
                Some(core) => (StepKind::D, add_candidates(q, core, fam, &rep.maxcuts, &ext, &h)),
                None => (StepKind::D, BitSet::new(num_pairs(n))),
            }
        };
        let word = rng.get_word_pos() as u64;
        let Some((x, len)) = pick(&mut rng, &choices) else {
            stop = StopReason::Stuck { branch: kind };
            break;
        };
        let (a, b) = index_pair(n, x);
        if kind == StepKind::D {
            f.add_edge(a, b);
        } else {
            g.remove_edge(a, b);
        }
        let values = fam.values(&g.union(&f));
        let best = values.iter().copied().max().unwrap_or(0);
        steps.push(SwitchStep {
            kind,
            edge: (a, b),
            choices: len,
            rng_word: word,
            deficit: best - values[cut_index],
        });
    }
    Ok(SwitchTrace {
        n,
        r,
        rng: stream,
        g0: g0.edges(),
        initial_deficit: d0,
        steps,
        stop,
        final_g: g.edges(),
        final_f: f.edges(),
    })
}

/// Pairs of `ext(cut) ∖ h` joining `V^k(Q)` to the union of the core
/// elements `S_j` that share a part with it in some but not every max cut,
/// for the smallest eligible `k`.
fn add_candidates(q: &ColoredGraph, core: &PartTuple, fam: &CutFamily, maxcuts: &[usize], ext: &BitSet, h: &Graph) -> BitSet {
    let n = q.n();
    let mut out = BitSet::new(num_pairs(n));
    for k in 0..q.r() {
        let class = q.class(k);
        let Some(anchor) = class.first() else { continue };
        let mut targets = BitSet::new(n);
        for j in 0..core.r() {
            let Some(rep) = core.part(j).first() else { continue };
            let shared = maxcuts
                .iter()
                .filter(|&&i| fam.part_of(i, rep) == fam.part_of(i, anchor))
                .count();
            if shared > 0 && shared < maxcuts.len() {
                targets.union_with(core.part(j));
            }
        }
        if targets.is_empty() {
            continue;
        }
        for a in class.iter() {
            for b in targets.iter() {
                if a == b {
                    continue;
                }
                let x = pair_index(n, a, b);
                if ext.contains(x) && !h.has_edge(a, b) {
                    out.insert(x);
                }
            }
        }
        return out;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceProperty {
    /// `Q ⊆ G_t`.
    KeepsQ,
    /// `i = e(G_0) − e(G_i) + e(F_i)` and `G_i ∩ F_i = ∅`.
    EdgeBalance,
    /// At most `d` removal steps of kinds a and b, with the deficit behaving.
    Deficit,
    /// Addition steps: at most `r²(d+1)`, blocks of at most `r²`, never followed by c.
    Additions,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub property: TraceProperty,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceReport {
    pub length: usize,
    pub counts: [usize; 4],
    pub violations: Vec<Violation>,
}

impl TraceReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_bad(&self) -> Option<usize> {
        self.violations.iter().map(|v| v.index).min()
    }
}

/// Checks the structural properties every trace of the switching process
/// must have; `d` bounds the initial deficit of `cut`.
pub fn validate_trace(trace: &SwitchTrace, q: &ColoredGraph, cut: &PartTuple, d: usize, fam: &CutFamily) -> TraceReport {
    let mut violations = Vec::new();
    let mut bad = |index, property, detail: String| violations.push(Violation { index, property, detail });
    let states = trace.states();
    let t = trace.steps.len();
    let e0 = states[0].0.edge_count();
    let cut_index = fam.index_of(cut);
    if cut_index.is_none() {
        bad(0, TraceProperty::Deficit, String::from("cut is not in the family"));
    }
    let deficit_of = |g: &Graph, f: &Graph| {
        cut_index.map(|i| {
            let values = fam.values(&g.union(f));
            values.iter().copied().max().unwrap_or(0) - values[i]
        })
    };

    let (gt, _) = &states[t];
    if !q.graph().is_subgraph_of(gt) {
        bad(t, TraceProperty::KeepsQ, String::from("an edge of Q was removed"));
    }

    let mut prev_def = deficit_of(&states[0].0, &states[0].1);
    for (i, (g, f)) in states.iter().enumerate() {
        let lhs = e0 as isize - g.edge_count() as isize + f.edge_count() as isize;
        if lhs != i as isize {
            bad(i, TraceProperty::EdgeBalance, format!("e(G_0) - e(G_i) + e(F_i) = {lhs}"));
        }
        if g.edges().iter().any(|&(u, v)| f.has_edge(u, v)) {
            bad(i, TraceProperty::EdgeBalance, String::from("G_i and F_i share an edge"));
        }
        if i == 0 {
            continue;
        }
        let kind = trace.steps[i - 1].kind;
        let def = deficit_of(g, f);
        if let (Some(before), Some(after)) = (prev_def, def) {
            let strict = matches!(kind, StepKind::A | StepKind::B);
            if after > before || (strict && after >= before) {
                bad(i, TraceProperty::Deficit, format!("deficit {before} -> {after} on a {kind:?} step"));
            }
        }
        prev_def = def;
    }

    let counts = [StepKind::A, StepKind::B, StepKind::C, StepKind::D].map(|k| trace.count(k));
    if counts[0] + counts[1] > d {
        let idx = trace
            .steps
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s.kind, StepKind::A | StepKind::B))
            .nth(d)
            .map_or(t, |(i, _)| i + 1);
        bad(idx, TraceProperty::Deficit, format!("{} removal steps of kinds a/b exceed d = {d}", counts[0] + counts[1]));
    }
    let r2 = trace.r * trace.r;
    if counts[3] > r2 * (d + 1) {
        bad(t, TraceProperty::Additions, format!("{} addition steps exceed r^2 (d + 1)", counts[3]));
    }
    let mut run = 0;
    for (i, s) in trace.steps.iter().enumerate() {
        if s.kind == StepKind::D {
            run += 1;
            if run == r2 + 1 {
                bad(i + 1, TraceProperty::Additions, format!("more than {r2} consecutive addition steps"));
            }
        } else {
            if run > 0 && s.kind == StepKind::C {
                bad(i + 1, TraceProperty::Additions, String::from("a c step directly follows addition steps"));
            }
            run = 0;
        }
    }
    violations.sort_by_key(|v| v.index);
    TraceReport {
        length: t,
        counts,
        violations,
    }
}
