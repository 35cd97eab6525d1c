//! Hypergraphs on the edge set of `K_n`: copies of `H`, residual families,
//! links, matchings and Janson moments.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::graph::{num_pairs, pair_index, ColoredGraph, Graph};
use crate::iso;

/// Search-node budget for [`CopyHypergraph::matching_number`].
pub const MATCHING_NODE_BUDGET: u64 = 20_000_000;

/// A family of sets of pair indices of `K_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyHypergraph {
    n: usize,
    ground: usize,
    edges: Vec<Vec<u32>>,
    /// Number of coinciding sets dropped when the family was built.
    #[serde(default)]
    duplicates: usize,
}

/// Which residual family to extract from a copy family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Residual {
    All,
    Low,
    High,
}

/// `μ_p`, `Δ_p` and the degree profile of a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JansonMoments {
    pub mu: f64,
    pub delta: f64,
    /// `Δ_j` for `j = 0..=k`, the largest number of sets containing a fixed
    /// `j`-set of ground elements.
    pub degree_profile: Vec<usize>,
}

/// The distinguished vertex data used to build high-degree copies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarRecipe {
    pub critical_edge: (usize, usize),
    pub apex: usize,
    pub ell: usize,
    /// Proper `r`-colouring of `H` minus the critical edge with the apex in class 0.
    pub phi: Vec<usize>,
    /// Class profile of the apex's neighbours.
    pub profile: Vec<usize>,
}

impl StarRecipe {
    pub fn new(h: &Graph) -> Result<Self> {
        let (crit, f) = crate::pattern::is_edge_critical(h);
        let f = match (crit, f) {
            (true, Some(f)) => f,
            _ => return Err(Error::Inapplicable(String::from("pattern is not edge-critical"))),
        };
        let r = h.chromatic_number() - 1;
        let apex = f.0;
        let mut hf = h.clone();
        hf.remove_edge(f.0, f.1);
        let phi = hf
            .k_colouring_with(r, &[(apex, 0)])
            .ok_or_else(|| Error::Internal(String::from("no colouring of H minus f")))?;
        let mut profile = vec![0; r];
        for u in h.neighbours(apex).iter() {
            profile[phi[u]] += 1;
        }
        Ok(StarRecipe {
            critical_edge: f,
            apex,
            ell: h.degree(apex),
            phi,
            profile,
        })
    }
}

impl CopyHypergraph {
    /// Normalises each set, drops repeats and counts them.
    pub fn from_sets(n: usize, sets: impl IntoIterator<Item = Vec<u32>>) -> Self {
        let mut seen = BTreeSet::new();
        let mut total = 0;
        for mut s in sets {
            s.sort_unstable();
            s.dedup();
            seen.insert(s);
            total += 1;
        }
        let edges: Vec<Vec<u32>> = seen.into_iter().collect();
        CopyHypergraph {
            n,
            ground: num_pairs(n),
            duplicates: total - edges.len(),
            edges,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sets(n, [])
    }

    /// All copies of `h` in `host`, as edge sets.
    pub fn enumerate_copies(h: &Graph, host: &Graph) -> Self {
        Self::from_sets(host.n(), iso::copies(h, host))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn contains(&self, set: &[u32]) -> bool {
        self.edges.binary_search_by(|e| e.as_slice().cmp(set)).is_ok()
    }

    /// Common size of all sets, if there is one.
    pub fn uniformity(&self) -> Option<usize> {
        let k = self.edges.first()?.len();
        self.edges.iter().all(|e| e.len() == k).then_some(k)
    }

    pub fn max_size(&self) -> usize {
        self.edges.iter().map(|e| e.len()).max().unwrap_or(0)
    }

    /// `𝒢[W]`: the sets lying inside `allowed`.
    pub fn induce(&self, allowed: &BitSet) -> Self {
        CopyHypergraph {
            n: self.n,
            ground: self.ground,
            edges: self
                .edges
                .iter()
                .filter(|e| e.iter().all(|&x| allowed.contains(x as usize)))
                .cloned()
                .collect(),
            duplicates: 0,
        }
    }

    /// Number of sets inside `allowed`.
    pub fn count_inside(&self, allowed: &BitSet) -> usize {
        self.edges
            .iter()
            .filter(|e| e.iter().all(|&x| allowed.contains(x as usize)))
            .count()
    }

    /// Link at a ground element (`∂_e`), or the union of all links (`∂`).
    pub fn link(&self, at: Option<u32>) -> Self {
        let sets = self.edges.iter().flat_map(|e| {
            let picks: Vec<u32> = match at {
                Some(x) => e.iter().copied().filter(|&y| y == x).collect(),
                None => e.clone(),
            };
            picks
                .into_iter()
                .map(move |x| e.iter().copied().filter(|&y| y != x).collect::<Vec<u32>>())
        });
        Self::from_sets(self.n, sets)
    }

    /// Sets indexed by ground element.
    fn incidence(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut inc: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            for &x in e {
                inc.entry(x).or_default().push(i);
            }
        }
        inc
    }

    /// Unordered pairs `(i, j)`, `i < j`, of intersecting sets with the size
    /// of their intersection.
    pub fn intersecting_pairs(&self) -> Vec<(usize, usize, usize)> {
        let inc = self.incidence();
        let mut out = Vec::new();
        let mut shared = vec![0usize; self.edges.len()];
        for (i, e) in self.edges.iter().enumerate() {
            let mut touched = Vec::new();
            for x in e {
                for &j in &inc[x] {
                    if j > i {
                        if shared[j] == 0 {
                            touched.push(j);
                        }
                        shared[j] += 1;
                    }
                }
            }
            touched.sort_unstable();
            for j in touched {
                out.push((i, j, shared[j]));
                shared[j] = 0;
            }
        }
        out
    }

    /// `μ_p`, `Δ_p` over unordered intersecting pairs, and `Δ_j` for `j = 0..=k`.
    pub fn janson_moments(&self, p: f64) -> Result<JansonMoments> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
        }
        let pw = |k: usize| libm::pow(p, k as f64);
        let mu = self.edges.iter().map(|e| pw(e.len())).sum();
        let delta = self
            .intersecting_pairs()
            .into_iter()
            .map(|(i, j, s)| pw(self.edges[i].len() + self.edges[j].len() - s))
            .sum();
        Ok(JansonMoments {
            mu,
            delta,
            degree_profile: self.degree_profile(),
        })
    }

    /// `Δ_j(𝒢)` for `j = 0..=max set size`.
    pub fn degree_profile(&self) -> Vec<usize> {
        let k = self.max_size();
        let mut out = vec![0; k + 1];
        out[0] = self.edges.len();
        for (j, slot) in out.iter_mut().enumerate().skip(1) {
            let mut counts: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
            for e in &self.edges {
                for_each_subset(e, j, &mut |s| *counts.entry(s.to_vec()).or_default() += 1);
            }
            *slot = counts.values().copied().max().unwrap_or(0);
        }
        out
    }

    /// Exact matching number by branching on the least-covered element.
    pub fn matching_number(&self) -> Result<usize> {
        Ok(self.maximum_matching()?.len())
    }

    /// A maximum matching (indices into [`edges`](Self::edges)).
    pub fn maximum_matching(&self) -> Result<Vec<usize>> {
        let m = self.edges.len();
        if m == 0 {
            return Ok(Vec::new());
        }
        if self.edges.iter().any(|e| e.is_empty()) {
            // the empty set is disjoint from everything, itself included once
            let rest = CopyHypergraph::from_sets(
                self.n,
                self.edges.iter().filter(|e| !e.is_empty()).cloned(),
            );
            let mut sub = rest.maximum_matching()?;
            let map: Vec<usize> = (0..m).filter(|&i| !self.edges[i].is_empty()).collect();
            for s in sub.iter_mut() {
                *s = map[*s];
            }
            sub.push(self.edges.iter().position(|e| e.is_empty()).unwrap());
            sub.sort_unstable();
            return Ok(sub);
        }
        // compress ground elements
        let elems: Vec<u32> = self.incidence().keys().copied().collect();
        let idx = |x: u32| elems.binary_search(&x).unwrap();
        let mut inc = vec![BitSet::new(m); elems.len()];
        for (i, e) in self.edges.iter().enumerate() {
            for &x in e {
                inc[idx(x)].insert(i);
            }
        }
        let mut conflict = vec![BitSet::new(m); m];
        for (i, e) in self.edges.iter().enumerate() {
            for &x in e {
                conflict[i].union_with(&inc[idx(x)]);
            }
        }
        let min_size = self.edges.iter().map(|e| e.len()).min().unwrap_or(1);
        let mut s = MatchSearch {
            inc: &inc,
            conflict: &conflict,
            min_size,
            best: greedy_matching(&conflict, m),
            cur: Vec::new(),
            nodes: 0,
        };
        s.go(BitSet::full(m))?;
        let mut best = s.best;
        best.sort_unstable();
        Ok(best)
    }

    /// Independent `p`-random subfamily keyed by a caller-supplied coin.
    pub fn sample_with(&self, mut keep: impl FnMut() -> bool) -> Self {
        CopyHypergraph {
            n: self.n,
            ground: self.ground,
            edges: self.edges.iter().filter(|_| keep()).cloned().collect(),
            duplicates: 0,
        }
    }

    /// Restricts to the sets also present in `other`.
    pub fn intersect(&self, other: &CopyHypergraph) -> Self {
        CopyHypergraph {
            n: self.n,
            ground: self.ground,
            edges: self.edges.iter().filter(|e| other.contains(e)).cloned().collect(),
            duplicates: 0,
        }
    }

    /// Ground elements used by at least one set.
    pub fn support(&self) -> BitSet {
        let mut s = BitSet::new(self.ground);
        for e in &self.edges {
            for &x in e {
                s.insert(x as usize);
            }
        }
        s
    }
}

fn greedy_matching(conflict: &[BitSet], m: usize) -> Vec<usize> {
    let mut free = BitSet::full(m);
    let mut out = Vec::new();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| conflict[i].count());
    for i in order {
        if free.contains(i) {
            out.push(i);
            free.difference_with(&conflict[i]);
        }
    }
    out
}

struct MatchSearch<'a> {
    inc: &'a [BitSet],
    conflict: &'a [BitSet],
    min_size: usize,
    best: Vec<usize>,
    cur: Vec<usize>,
    nodes: u64,
}

impl MatchSearch<'_> {
    fn go(&mut self, rem: BitSet) -> Result<()> {
        self.nodes += 1;
        if self.nodes > MATCHING_NODE_BUDGET {
            return Err(Error::TooLarge(String::from("matching search budget exhausted")));
        }
        if rem.is_empty() {
            if self.cur.len() > self.best.len() {
                self.best = self.cur.clone();
            }
            return Ok(());
        }
        // bound: disjoint sets cover distinct elements
        let covered = self
            .inc
            .iter()
            .filter(|s| !s.is_disjoint(&rem))
            .count();
        let ub = rem.count().min(covered / self.min_size);
        if self.cur.len() + ub <= self.best.len() {
            return Ok(());
        }
        let through = self
            .inc
            .iter()
            .map(|s| s.intersection(&rem))
            .filter(|s| !s.is_empty())
            .min_by_key(|s| s.count())
            .unwrap();
        for e in through.iter() {
            self.cur.push(e);
            self.go(rem.difference(&self.conflict[e]))?;
            self.cur.pop();
        }
        self.go(rem.difference(&through))
    }
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

/// Vertices spanned by a set of pair indices of `K_n`.
pub fn spanned_vertices(n: usize, set: &[u32]) -> BitSet {
    let mut s = BitSet::new(n);
    for &x in set {
        let (u, v) = crate::graph::index_pair(n, x as usize);
        s.insert(u);
        s.insert(v);
    }
    s
}

/// Residual families `{K ∖ Q}` of the copies in `copies`.
///
/// * `All`: every copy.
/// * `Low`: copies meeting `Q` in exactly one edge and spanning exactly one
///   edge of `Q`; all of `Q`'s vertices must be in class 0.
/// * `High`: copies built by mapping the apex of a critical edge of `h` to a
///   centre, its neighbours into the centre's coloured `Q`-neighbourhoods as
///   prescribed by the colouring, and the rest outside the centres.
pub fn residual_family(
    copies: &CopyHypergraph,
    q: &ColoredGraph,
    variant: Residual,
    h: &Graph,
) -> Result<CopyHypergraph> {
    let n = copies.n();
    if q.n() != n {
        return Err(Error::InvalidQ(format!("Q has {} vertices, copies live on {n}", q.n())));
    }
    let q_edges = q.graph().edge_set();
    let minus_q = |e: &Vec<u32>| -> Vec<u32> {
        e.iter().copied().filter(|&x| !q_edges.contains(x as usize)).collect()
    };
    match variant {
        Residual::All => Ok(CopyHypergraph::from_sets(n, copies.edges().iter().map(minus_q))),
        Residual::Low => {
            if let Some(v) = (0..n).find(|&v| q.colour(v).is_some_and(|c| c != 0)) {
                return Err(Error::InvalidQ(format!("vertex {v} of Q is not in class 0")));
            }
            let kept = copies.edges().iter().filter(|e| {
                let meet = e.iter().filter(|&&x| q_edges.contains(x as usize)).count();
                meet == 1 && q.graph().edges_within(&spanned_vertices(n, e)) == 1
            });
            Ok(CopyHypergraph::from_sets(n, kept.map(minus_q)))
        }
        Residual::High => {
            let high = high_copies(q, h)?;
            let kept = high.edges().iter().filter(|e| copies.contains(e));
            Ok(CopyHypergraph::from_sets(n, kept.map(minus_q)))
        }
    }
}

/// The copies of `h` in `K_n` produced by the high-degree recipe.
pub fn high_copies(q: &ColoredGraph, h: &Graph) -> Result<CopyHypergraph> {
    let centres = q.centres().ok_or(Error::MissingCentres)?.clone();
    let recipe = StarRecipe::new(h)?;
    if recipe.phi.iter().any(|&c| c >= q.r()) {
        return Err(Error::InvalidQ(String::from("colour classes of Q do not fit H")));
    }
    let n = q.n();
    let kn = Graph::complete(n);
    let outside = centres.complement();
    let classes: Vec<BitSet> = (0..q.r()).map(|k| q.class(k)).collect();
    let mut sets = Vec::new();
    for v in centres.iter() {
        let mut dom = vec![outside.clone(); h.n()];
        dom[recipe.apex] = BitSet::from_iter(n, [v]);
        for u in h.neighbours(recipe.apex).iter() {
            dom[u] = q.graph().neighbours(v).intersection(&classes[recipe.phi[u]]);
        }
        sets.extend(iso::copies_within(h, &kn, Some(&dom)));
    }
    Ok(CopyHypergraph::from_sets(n, sets))
}

/// Pair indices of the edges of `g`, in lexicographic order.
pub fn edge_indices(g: &Graph) -> Vec<u32> {
    g.edges().into_iter().map(|(u, v)| pair_index(g.n(), u, v) as u32).collect()
}
