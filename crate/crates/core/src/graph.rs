//! Simple graphs on `0..n`, vertex partitions and coloured graphs.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};

/// Number of unordered pairs in `0..n`.
#[inline]
pub fn num_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Lexicographic index of the pair `{u, v}` among all pairs of `0..n`.
#[inline]
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    debug_assert!(u != v && v < n);
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

/// Inverse of [`pair_index`].
pub fn index_pair(n: usize, mut idx: usize) -> (usize, usize) {
    let mut u = 0;
    loop {
        let row = n - u - 1;
        if idx < row {
            return (u, u + 1 + idx);
        }
        idx -= row;
        u += 1;
    }
}

/// Undirected simple graph with bit-set adjacency.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<BitSet>,
}

impl core::fmt::Debug for Graph {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges())
    }
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        GraphRepr {
            n: self.n,
            edges: self.edges(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let r = GraphRepr::deserialize(d)?;
        Graph::from_edges(r.n, &r.edges).map_err(serde::de::Error::custom)
    }
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            adj: vec![BitSet::new(n); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("loop at vertex {u}")));
            }
            if g.has_edge(u, v) {
                return Err(Error::InvalidGraph(format!("duplicate edge {u} {v}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// Builds a graph from a set of pair indices (see [`pair_index`]).
    pub fn from_edge_set(n: usize, set: &BitSet) -> Self {
        let mut g = Graph::new(n);
        for idx in set.iter() {
            let (u, v) = index_pair(n, idx);
            g.add_edge(u, v);
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::new(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    pub fn petersen() -> Self {
        let mut g = Graph::new(10);
        for i in 0..5 {
            g.add_edge(i, (i + 1) % 5);
            g.add_edge(i, i + 5);
            g.add_edge(5 + i, 5 + (i + 2) % 5);
        }
        g
    }

    /// Complete multipartite graph with the given part sizes, parts laid out
    /// consecutively.
    pub fn complete_multipartite(sizes: &[usize]) -> Self {
        let n = sizes.iter().sum();
        let mut part = Vec::with_capacity(n);
        for (k, &s) in sizes.iter().enumerate() {
            part.extend(core::iter::repeat_n(k, s));
        }
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if part[u] != part[v] {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    /// The balanced blow-up `K_r(m)`.
    pub fn blowup(r: usize, m: usize) -> Self {
        Self::complete_multipartite(&vec![m; r])
    }

    /// `K_r(m)` plus one edge inside the first part (between vertices 0 and 1).
    pub fn blowup_plus(r: usize, m: usize) -> Self {
        let mut g = Self::blowup(r, m);
        if m >= 2 {
            g.add_edge(0, 1);
        }
        g
    }

    /// Turán graph `T(n, r)`: parts of sizes differing by at most one.
    pub fn turan(n: usize, r: usize) -> Self {
        let sizes: Vec<usize> = (0..r).map(|k| n / r + usize::from(k < n % r)).collect();
        Self::complete_multipartite(&sizes)
    }

    /// Built-in graphs available by name.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "triangle" | "k3" => Some(Self::complete(3)),
            "c5" => Some(Self::cycle(5)),
            "k4" => Some(Self::complete(4)),
            "k5" => Some(Self::complete(5)),
            "petersen" => Some(Self::petersen()),
            _ => None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn neighbours(&self, v: usize) -> &BitSet {
        &self.adj[v]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        assert!(u != v, "loops are not allowed");
        self.adj[v].insert(u);
        self.adj[u].insert(v)
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        self.adj[v].remove(u);
        self.adj[u].remove(v)
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count()).sum::<usize>() / 2
    }

    /// Edges as lexicographically ordered pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in self.adj[u].iter() {
                if v > u {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Edge set as pair indices of `K_n`.
    pub fn edge_set(&self) -> BitSet {
        let mut s = BitSet::new(num_pairs(self.n));
        for (u, v) in self.edges() {
            s.insert(pair_index(self.n, u, v));
        }
        s
    }

    pub fn degree_into(&self, v: usize, set: &BitSet) -> usize {
        self.adj[v].intersection_count(set)
    }

    /// Number of edges with both endpoints in `set`.
    pub fn edges_within(&self, set: &BitSet) -> usize {
        set.iter().map(|v| self.adj[v].intersection_count(set)).sum::<usize>() / 2
    }

    /// Subgraph on the same vertex labels keeping only edges inside `set`.
    pub fn restrict_to(&self, set: &BitSet) -> Graph {
        let mut g = Graph::new(self.n);
        for v in set.iter() {
            g.adj[v] = self.adj[v].intersection(set);
        }
        g
    }

    /// Induced subgraph relabelled to `0..vertices.len()` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut g = Graph::new(vertices.len());
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Graph with `u`'s edges removed (the vertex stays, isolated).
    pub fn isolate(&mut self, v: usize) {
        let nb = self.adj[v].clone();
        for u in nb.iter() {
            self.remove_edge(u, v);
        }
    }

    pub fn union(&self, other: &Graph) -> Graph {
        assert_eq!(self.n, other.n);
        let mut g = self.clone();
        for v in 0..self.n {
            g.adj[v].union_with(&other.adj[v]);
        }
        g
    }

    pub fn difference(&self, other: &Graph) -> Graph {
        assert_eq!(self.n, other.n);
        let mut g = self.clone();
        for v in 0..self.n {
            g.adj[v].difference_with(&other.adj[v]);
        }
        g
    }

    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n == other.n && (0..self.n).all(|v| self.adj[v].is_subset(&other.adj[v]))
    }

    /// Disjoint union, with `other` relabelled to start at `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let mut g = Graph::new(self.n + other.n);
        for (u, v) in self.edges() {
            g.add_edge(u, v);
        }
        for (u, v) in other.edges() {
            g.add_edge(self.n + u, self.n + v);
        }
        g
    }

    /// Vertices incident to at least one edge.
    pub fn support(&self) -> BitSet {
        BitSet::from_iter(self.n, (0..self.n).filter(|&v| !self.adj[v].is_empty()))
    }

    pub fn is_bipartite(&self) -> bool {
        self.k_colouring(2).is_some()
    }

    /// A proper colouring with at most `k` colours, if one exists.
    pub fn k_colouring(&self, k: usize) -> Option<Vec<usize>> {
        self.k_colouring_with(k, &[])
    }

    /// A proper `k`-colouring in which vertex `v` gets colour `c` for every
    /// `(v, c)` in `fixed`.
    pub fn k_colouring_with(&self, k: usize, fixed: &[(usize, usize)]) -> Option<Vec<usize>> {
        if self.n == 0 {
            return Some(Vec::new());
        }
        if k == 0 {
            return None;
        }
        let mut col = vec![usize::MAX; self.n];
        for &(v, c) in fixed {
            if c >= k {
                return None;
            }
            if col[v] != usize::MAX && col[v] != c {
                return None;
            }
            col[v] = c;
        }
        for &(v, _) in fixed {
            for u in self.adj[v].iter() {
                if col[u] == col[v] {
                    return None;
                }
            }
        }
        // Without pinned vertices, colours are interchangeable and a new
        // colour only needs to be tried once.
        let symmetric = fixed.is_empty();
        let mut search = Colouring {
            g: self,
            k,
            col,
            symmetric,
        };
        if search.run() {
            Some(search.col)
        } else {
            None
        }
    }

    /// Exact chromatic number.
    pub fn chromatic_number(&self) -> usize {
        chromatic_number(self)
    }

    /// Lexicographic edge-list key, handy for hashing and ordering.
    pub fn edge_key(&self) -> Vec<(usize, usize)> {
        self.edges()
    }
}

struct Colouring<'a> {
    g: &'a Graph,
    k: usize,
    col: Vec<usize>,
    symmetric: bool,
}

impl Colouring<'_> {
    fn run(&mut self) -> bool {
        // pick the uncoloured vertex with largest saturation, then degree
        let n = self.g.n;
        let mut best: Option<(usize, usize, usize)> = None;
        for v in 0..n {
            if self.col[v] != usize::MAX {
                continue;
            }
            let mut used = 0u128;
            let mut sat = 0;
            for u in self.g.adj[v].iter() {
                let c = self.col[u];
                if c != usize::MAX && c < 128 && used >> c & 1 == 0 {
                    used |= 1 << c;
                    sat += 1;
                }
            }
            let deg = self.g.degree(v);
            if best.is_none_or(|(_, s, d)| (sat, deg) > (s, d)) {
                best = Some((v, sat, deg));
            }
        }
        let Some((v, sat, _)) = best else {
            return true;
        };
        if sat >= self.k {
            return false;
        }
        let max_used = self.col.iter().filter(|&&c| c != usize::MAX).max().copied();
        let limit = if self.symmetric {
            max_used.map_or(1, |m| m + 2).min(self.k)
        } else {
            self.k
        };
        for c in 0..limit {
            if self.g.adj[v].iter().any(|u| self.col[u] == c) {
                continue;
            }
            self.col[v] = c;
            if self.run() {
                return true;
            }
        }
        self.col[v] = usize::MAX;
        false
    }
}

/// Exact chromatic number by iterated `k`-colourability between a greedy
/// clique bound and a greedy colouring bound.
pub fn chromatic_number(g: &Graph) -> usize {
    let n = g.n();
    if n == 0 {
        return 0;
    }
    if g.edge_count() == 0 {
        return 1;
    }
    let lb = greedy_clique(g).max(2);
    let ub = greedy_colour_count(g);
    for k in lb..ub {
        if g.k_colouring(k).is_some() {
            return k;
        }
    }
    ub
}

fn greedy_clique(g: &Graph) -> usize {
    let mut best = 1;
    for start in 0..g.n() {
        let mut cand = g.neighbours(start).clone();
        let mut size = 1;
        while let Some(v) = cand.iter().max_by_key(|&v| g.neighbours(v).intersection_count(&cand)) {
            size += 1;
            cand.intersect_with(g.neighbours(v));
        }
        best = best.max(size);
    }
    best
}

fn greedy_colour_count(g: &Graph) -> usize {
    let n = g.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| core::cmp::Reverse(g.degree(v)));
    let mut col = vec![usize::MAX; n];
    let mut used = 0;
    for &v in &order {
        let mut c = 0;
        while g.neighbours(v).iter().any(|u| col[u] == c) {
            c += 1;
        }
        col[v] = c;
        used = used.max(c + 1);
    }
    used
}

/// Ordered tuple of pairwise-disjoint vertex sets over `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartTuple {
    n: usize,
    parts: Vec<BitSet>,
}

impl PartTuple {
    pub fn new(n: usize, parts: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = BitSet::new(n);
        let mut out = Vec::with_capacity(parts.len());
        for part in parts {
            let mut s = BitSet::new(n);
            for v in part {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
                if !seen.insert(v) {
                    return Err(Error::InvalidPartition(format!("vertex {v} appears twice")));
                }
                s.insert(v);
            }
            out.push(s);
        }
        Ok(PartTuple { n, parts: out })
    }

    pub fn from_sets(n: usize, parts: Vec<BitSet>) -> Result<Self> {
        let mut seen = BitSet::new(n);
        for p in &parts {
            if p.capacity() != n {
                return Err(Error::InvalidPartition(String::from("part over wrong universe")));
            }
            if !seen.is_disjoint(p) {
                return Err(Error::InvalidPartition(String::from("parts overlap")));
            }
            seen.union_with(p);
        }
        Ok(PartTuple { n, parts })
    }

    /// Complete cut from a part index per vertex.
    pub fn from_assignment(r: usize, assign: &[usize]) -> Self {
        let n = assign.len();
        let mut parts = vec![BitSet::new(n); r];
        for (v, &k) in assign.iter().enumerate() {
            parts[k].insert(v);
        }
        PartTuple { n, parts }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[BitSet] {
        &self.parts
    }

    pub fn part(&self, k: usize) -> &BitSet {
        &self.parts[k]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.count()).collect()
    }

    pub fn covered(&self) -> BitSet {
        let mut s = BitSet::new(self.n);
        for p in &self.parts {
            s.union_with(p);
        }
        s
    }

    /// True when the parts cover every vertex, i.e. the tuple is a cut.
    pub fn is_complete(&self) -> bool {
        self.covered().count() == self.n
    }

    pub fn part_of(&self, v: usize) -> Option<usize> {
        self.parts.iter().position(|p| p.contains(v))
    }

    pub fn assignment(&self) -> Option<Vec<usize>> {
        (0..self.n).map(|v| self.part_of(v)).collect()
    }

    /// `(ext, int)` as sets of pair indices of `K_n`.
    pub fn ext_int(&self) -> (BitSet, BitSet) {
        let n = self.n;
        let mut ext = BitSet::new(num_pairs(n));
        let mut int = BitSet::new(num_pairs(n));
        let owner: Vec<Option<usize>> = (0..n).map(|v| self.part_of(v)).collect();
        for u in 0..n {
            let Some(a) = owner[u] else { continue };
            for v in u + 1..n {
                let Some(b) = owner[v] else { continue };
                if a == b {
                    int.insert(pair_index(n, u, v));
                } else {
                    ext.insert(pair_index(n, u, v));
                }
            }
        }
        (ext, int)
    }

    /// Number of edges of `g` crossing between distinct parts.
    pub fn ext_count(&self, g: &Graph) -> usize {
        let mut total = 0;
        for (i, a) in self.parts.iter().enumerate() {
            for b in &self.parts[i + 1..] {
                total += a.iter().map(|v| g.neighbours(v).intersection_count(b)).sum::<usize>();
            }
        }
        total
    }

    /// Number of edges of `g` inside a single part.
    pub fn int_count(&self, g: &Graph) -> usize {
        self.parts.iter().map(|p| g.edges_within(p)).sum()
    }

    /// Every part has size within `(1 ± delta) n / r`.
    pub fn is_delta_balanced(&self, delta: f64) -> bool {
        is_delta_balanced(self, delta)
    }
}

/// `(ext(Π), int(Π))` as sets of pair indices.
pub fn ext_int(parts: &PartTuple) -> (BitSet, BitSet) {
    parts.ext_int()
}

/// Every part of the cut has size within `[(1−δ)n/r, (1+δ)n/r]`.
pub fn is_delta_balanced(cut: &PartTuple, delta: f64) -> bool {
    let r = cut.r() as f64;
    let n = cut.n() as f64;
    let tol = 1e-9;
    cut.parts().iter().all(|p| {
        let s = p.count() as f64 * r;
        s >= (1.0 - delta) * n - tol && s <= (1.0 + delta) * n + tol
    })
}

/// An `[r]`-coloured graph: a graph on `0..n` whose vertices carry colour
/// classes, optionally with a set of centre vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredGraph {
    graph: Graph,
    r: usize,
    colour: Vec<Option<usize>>,
    centres: Option<BitSet>,
}

impl ColoredGraph {
    /// Every vertex incident to an edge must be coloured with a class below `r`.
    pub fn new(graph: Graph, r: usize, colour: Vec<Option<usize>>) -> Result<Self> {
        if colour.len() != graph.n() {
            return Err(Error::InvalidQ(String::from("colour vector has wrong length")));
        }
        for v in 0..graph.n() {
            match colour[v] {
                Some(c) if c >= r => {
                    return Err(Error::InvalidQ(format!("vertex {v} has colour {c} >= r = {r}")))
                }
                None if graph.degree(v) > 0 => {
                    return Err(Error::InvalidQ(format!("vertex {v} of Q is uncoloured")))
                }
                _ => {}
            }
        }
        Ok(ColoredGraph {
            graph,
            r,
            colour,
            centres: None,
        })
    }

    /// Colours the non-isolated vertices of `q` by their part in `cut`.
    pub fn from_cut(q: Graph, cut: &PartTuple) -> Result<Self> {
        let colour = (0..q.n())
            .map(|v| if q.degree(v) > 0 { cut.part_of(v) } else { None })
            .collect();
        Self::new(q, cut.r(), colour)
    }

    /// Attaches centre vertices; they must be coloured, independent and
    /// dominate every edge.
    pub fn with_centres(mut self, centres: BitSet) -> Result<Self> {
        for v in centres.iter() {
            if self.colour[v].is_none() {
                return Err(Error::InvalidQ(format!("centre {v} is uncoloured")));
            }
            if !self.graph.neighbours(v).is_disjoint(&centres) {
                return Err(Error::InvalidQ(String::from("centres are not independent")));
            }
        }
        for (u, v) in self.graph.edges() {
            if !centres.contains(u) && !centres.contains(v) {
                return Err(Error::InvalidQ(format!("edge {u} {v} avoids the centres")));
            }
        }
        self.centres = Some(centres);
        Ok(self)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn colour(&self, v: usize) -> Option<usize> {
        self.colour[v]
    }

    pub fn colours(&self) -> &[Option<usize>] {
        &self.colour
    }

    pub fn centres(&self) -> Option<&BitSet> {
        self.centres.as_ref()
    }

    /// Number of centre vertices `k(Q)` (zero without centres).
    pub fn k(&self) -> usize {
        self.centres.as_ref().map_or(0, |c| c.count())
    }

    /// Coloured vertices `V(Q)`.
    pub fn vertices(&self) -> BitSet {
        BitSet::from_iter(self.n(), (0..self.n()).filter(|&v| self.colour[v].is_some()))
    }

    /// The colour class `V^k(Q)`.
    pub fn class(&self, k: usize) -> BitSet {
        BitSet::from_iter(self.n(), (0..self.n()).filter(|&v| self.colour[v] == Some(k)))
    }

    /// `N_Q(v) ∩ V^k(Q)`.
    pub fn class_neighbours(&self, v: usize, k: usize) -> BitSet {
        self.graph.neighbours(v).intersection(&self.class(k))
    }

    /// `V^k(Q) ⊆ V_k` for every class `k`.
    pub fn compatible_with(&self, cut: &PartTuple) -> bool {
        (0..self.n()).all(|v| match self.colour[v] {
            Some(k) => k < cut.r() && cut.part(k).contains(v),
            None => true,
        })
    }

    /// Smallest nonempty colour class size.
    pub fn v_min(&self) -> usize {
        (0..self.r).map(|k| self.class(k).count()).filter(|&s| s > 0).min().unwrap_or(0)
    }
}
