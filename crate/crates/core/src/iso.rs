//! Subgraph embeddings, copy enumeration and small-graph canonical forms.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::graph::{pair_index, Graph};

/// Order pattern vertices so each one (after the first of its component)
/// has as many already-placed neighbours as possible.
fn search_order(h: &Graph) -> Vec<usize> {
    let n = h.n();
    let mut placed = BitSet::new(n);
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| !placed.contains(v))
            .max_by_key(|&v| (h.degree_into(v, &placed), h.degree(v), core::cmp::Reverse(v)))
            .unwrap();
        placed.insert(next);
        order.push(next);
    }
    order
}

struct Search<'a, F> {
    h: &'a Graph,
    host: &'a Graph,
    order: Vec<usize>,
    domains: Option<&'a [BitSet]>,
    map: Vec<usize>,
    used: BitSet,
    visit: F,
}

impl<F: FnMut(&[usize]) -> bool> Search<'_, F> {
    fn go(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return (self.visit)(&self.map);
        }
        let v = self.order[depth];
        let mut cand = match self.domains {
            Some(d) => d[v].clone(),
            None => BitSet::full(self.host.n()),
        };
        cand.difference_with(&self.used);
        for &u in &self.order[..depth] {
            if self.h.has_edge(u, v) {
                cand.intersect_with(self.host.neighbours(self.map[u]));
            }
        }
        let need = self.h.degree(v);
        for x in cand.iter() {
            if self.host.degree(x) < need {
                continue;
            }
            self.map[v] = x;
            self.used.insert(x);
            let go_on = self.go(depth + 1);
            self.used.remove(x);
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// Calls `visit` on every injective edge-preserving map `V(h) → V(host)`,
/// given as `map[v]`, until it returns `false`. When `domains` is given,
/// vertex `v` may only map into `domains[v]`.
pub fn for_each_embedding<F: FnMut(&[usize]) -> bool>(
    h: &Graph,
    host: &Graph,
    domains: Option<&[BitSet]>,
    visit: F,
) {
    if h.n() > host.n() {
        return;
    }
    let mut s = Search {
        h,
        host,
        order: search_order(h),
        domains,
        map: vec![usize::MAX; h.n()],
        used: BitSet::new(host.n()),
        visit,
    };
    s.go(0);
}

pub fn count_embeddings(h: &Graph, host: &Graph) -> u64 {
    let mut c = 0u64;
    for_each_embedding(h, host, None, |_| {
        c += 1;
        true
    });
    c
}

pub fn automorphism_count(h: &Graph) -> u64 {
    count_embeddings(h, h)
}

/// Number of subgraphs of `host` isomorphic to `h`.
pub fn count_copies(h: &Graph, host: &Graph) -> u64 {
    count_embeddings(h, host) / automorphism_count(h)
}

pub fn contains_copy(h: &Graph, host: &Graph) -> bool {
    let mut found = false;
    for_each_embedding(h, host, None, |_| {
        found = true;
        false
    });
    found
}

/// Sorted pair indices (over `n`) of the image of `h`'s edges under `map`.
pub fn image_edges(h: &Graph, map: &[usize], n: usize) -> Vec<u32> {
    let mut e: Vec<u32> = h
        .edges()
        .into_iter()
        .map(|(a, b)| pair_index(n, map[a], map[b]) as u32)
        .collect();
    e.sort_unstable();
    e
}

/// Edge sets of all copies of `h` in `host`, each once, in sorted order.
pub fn copies(h: &Graph, host: &Graph) -> Vec<Vec<u32>> {
    copies_within(h, host, None)
}

/// Like [`copies`] with per-vertex domain restrictions.
pub fn copies_within(h: &Graph, host: &Graph, domains: Option<&[BitSet]>) -> Vec<Vec<u32>> {
    let n = host.n();
    let mut seen = BTreeSet::new();
    let h_edges = h.edges();
    for_each_embedding(h, host, domains, |map| {
        let mut e: Vec<u32> = h_edges
            .iter()
            .map(|&(a, b)| pair_index(n, map[a], map[b]) as u32)
            .collect();
        e.sort_unstable();
        seen.insert(e);
        true
    });
    seen.into_iter().collect()
}

/// Lexicographically least sorted edge list over all relabellings.
/// Exponential in `n`; meant for graphs on at most about 8 vertices.
pub fn canonical_form(g: &Graph) -> (usize, Vec<(usize, usize)>) {
    let n = g.n();
    let edges = g.edges();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    loop {
        let mut e: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (perm[a], perm[b]);
                if x < y {
                    (x, y)
                } else {
                    (y, x)
                }
            })
            .collect();
        e.sort_unstable();
        if best.as_ref().is_none_or(|b| e < *b) {
            best = Some(e);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    (n, best.unwrap_or_default())
}

pub fn is_isomorphic(a: &Graph, b: &Graph) -> bool {
    a.n() == b.n() && a.edge_count() == b.edge_count() && canonical_form(a) == canonical_form(b)
}

pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
