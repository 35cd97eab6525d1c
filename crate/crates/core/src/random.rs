//! Seeded `G(n, p)` sampling and a finite-`n` typicality checker.
//!
//! Asymptotic `o(·)` slack is replaced by a fixed number of binomial
//! standard deviations, recorded in every report.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{num_pairs, pair_index, ColoredGraph, Graph, PartTuple};
use crate::hypergraph::spanned_vertices;
use crate::iso;

pub const ALGORITHM: &str = "chacha8";

/// Upper limit on `C(n, v_H)·v_H!` embeddings enumerated by the link-count check.
pub const LINK_EMBEDDING_LIMIT: f64 = 5e7;

/// A reproducible random stream: ChaCha8 keyed by `seed`, on stream `stream`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
    pub algorithm: alloc::string::String,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream {
            seed,
            stream,
            algorithm: alloc::string::String::from(ALGORITHM),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// The same seed on another stream.
    pub fn fork(&self, stream: u64) -> Self {
        Self::new(self.seed, stream)
    }
}

/// `G(n, p)`: pairs are visited in index order, one Bernoulli draw each.
pub fn sample_gnp(n: usize, p: f64, stream: &RngStream) -> Result<Graph> {
    let mut rng = stream.rng();
    sample_gnp_with(n, p, &mut rng)
}

pub fn sample_gnp_with<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(alloc::format!("p = {p} outside [0, 1]")));
    }
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    Ok(g)
}

/// FNV-1a over the edge list; stable across platforms.
pub fn graph_hash(g: &Graph) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    eat(g.n() as u64);
    for (u, v) in g.edges() {
        eat(pair_index(g.n(), u, v) as u64);
    }
    h
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypicalityParams {
    pub p: f64,
    /// Slack in binomial standard deviations.
    pub sigmas: f64,
    /// Cuts (or any sequences of disjoint sets) for the concentration checks.
    pub cuts: Vec<PartTuple>,
    /// High-degree instances for the class-size check.
    pub qs: Vec<ColoredGraph>,
}

impl TypicalityParams {
    pub fn new(p: f64) -> Self {
        TypicalityParams {
            p,
            sigmas: 3.0,
            cuts: Vec::new(),
            qs: Vec::new(),
        }
    }
}

/// Degrees against `Bin(n−1, p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeCheck {
    pub expected: f64,
    pub sigma: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    pub worst_deviation: f64,
    pub violations: usize,
    pub holds: bool,
}

/// Edge counts inside and across parts against their binomial means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutCheck {
    pub cuts: usize,
    pub worst_int_z: f64,
    pub worst_ext_z: f64,
    pub violations: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkCheck {
    pub skipped: bool,
    pub edge_cap: f64,
    pub vertex_cap: f64,
    pub max_edge_count: usize,
    pub max_vertex_count: usize,
    pub edge_violations: usize,
    pub vertex_violations: usize,
    pub holds: bool,
}

/// Per-instance class sizes against `min{n, k(Q)·np}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSizeCheck {
    pub instances: usize,
    /// Smallest `|⋃ N_Q(v) ∩ V^k(Q)| / min{n, k(Q)·np}` over contained instances and nonempty classes.
    pub fitted_c: Option<f64>,
    /// `|V^k(Q)| ≥ |⋃ N_Q(v) ∩ V^k(Q)|` for all of them.
    pub chain_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub applicable: bool,
    pub pairs: usize,
    pub worst_relative: f64,
    pub violations: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalityReport {
    pub n: usize,
    pub p: f64,
    pub sigmas: f64,
    pub degrees: DegreeCheck,
    pub cuts: CutCheck,
    pub links: LinkCheck,
    pub class_sizes: ClassSizeCheck,
    pub pairs: PairCheck,
}

impl TypicalityReport {
    pub fn holds(&self) -> bool {
        self.degrees.holds && self.cuts.holds && self.links.holds && self.pairs.holds && self.class_sizes.chain_holds
    }
}

fn binomial_z(count: usize, trials: usize, p: f64) -> f64 {
    let mean = trials as f64 * p;
    let dev = (count as f64 - mean).abs();
    let sigma = libm::sqrt(trials as f64 * p * (1.0 - p));
    if dev <= 1e-9 {
        0.0
    } else if sigma == 0.0 {
        f64::INFINITY
    } else {
        dev / sigma
    }
}

/// Evaluates the finite-`n` typicality checks for `g` against pattern `h`.
pub fn typicality_report(g: &Graph, h: &Graph, params: &TypicalityParams) -> TypicalityReport {
    let n = g.n();
    let p = params.p;
    TypicalityReport {
        n,
        p,
        sigmas: params.sigmas,
        degrees: degree_check(g, p, params.sigmas),
        cuts: cut_check(g, p, params.sigmas, &params.cuts),
        links: link_check(g, h, p),
        class_sizes: class_size_check(g, p, &params.qs),
        pairs: pair_check(g, h, p, params.sigmas, &params.cuts),
    }
}

fn degree_check(g: &Graph, p: f64, sigmas: f64) -> DegreeCheck {
    let n = g.n();
    let trials = n.saturating_sub(1);
    let expected = trials as f64 * p;
    let sigma = libm::sqrt(trials as f64 * p * (1.0 - p));
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for v in 0..n {
        let dev = (g.degree(v) as f64 - expected).abs();
        worst = worst.max(dev);
        if dev > sigmas * sigma + 1e-9 {
            violations += 1;
        }
    }
    DegreeCheck {
        expected,
        sigma,
        min_degree: if n == 0 { 0 } else { g.min_degree() },
        max_degree: g.max_degree(),
        worst_deviation: worst,
        violations,
        holds: violations == 0,
    }
}

fn cut_check(g: &Graph, p: f64, sigmas: f64, cuts: &[PartTuple]) -> CutCheck {
    let mut worst_int: f64 = 0.0;
    let mut worst_ext: f64 = 0.0;
    let mut violations = 0;
    for cut in cuts {
        let (ext, int) = cut.ext_int();
        let zi = binomial_z(cut.int_count(g), int.count(), p);
        let ze = binomial_z(cut.ext_count(g), ext.count(), p);
        worst_int = worst_int.max(zi);
        worst_ext = worst_ext.max(ze);
        if zi > sigmas || ze > sigmas {
            violations += 1;
        }
    }
    CutCheck {
        cuts: cuts.len(),
        worst_int_z: worst_int,
        worst_ext_z: worst_ext,
        violations,
        holds: violations == 0,
    }
}

fn embedding_count(n: usize, v: usize) -> f64 {
    (0..v).map(|i| n.saturating_sub(i) as f64).product()
}

fn link_check(g: &Graph, h: &Graph, p: f64) -> LinkCheck {
    let n = g.n();
    let vh = h.support().count() as i32;
    let eh = h.edge_count() as i32;
    let edge_cap = 4.0 * (eh * eh) as f64 * libm::pow(n as f64, (vh - 2) as f64) * libm::pow(p, (eh - 2) as f64);
    let vertex_cap =
        2.0 * (vh * eh) as f64 * libm::pow(n as f64, (vh - 1) as f64) * libm::pow(p, (eh - 1) as f64);
    let skipped = eh < 2 || embedding_count(n, vh as usize) > LINK_EMBEDDING_LIMIT;
    let mut out = LinkCheck {
        skipped,
        edge_cap,
        vertex_cap,
        max_edge_count: 0,
        max_vertex_count: 0,
        edge_violations: 0,
        vertex_violations: 0,
        holds: true,
    };
    if skipped {
        return out;
    }
    let inside = |s: &[u32]| s.iter().all(|&x| g_edge(g, x as usize));
    let all = iso::copies(h, &Graph::complete(n));
    // (edge, set) and (vertex, set) pairs whose set lies in g, deduplicated below.
    let mut by_edge: Vec<(u32, Vec<u32>)> = Vec::new();
    let mut by_vertex: Vec<(u32, Vec<u32>)> = Vec::new();
    for omega in &all {
        for (i, &e) in omega.iter().enumerate() {
            for (j, _) in omega.iter().enumerate() {
                if j == i {
                    continue;
                }
                let rest: Vec<u32> = omega
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i && k != j)
                    .map(|(_, &x)| x)
                    .collect();
                if inside(&rest) {
                    by_edge.push((e, rest));
                }
            }
        }
        let verts = spanned_vertices(n, omega);
        for (i, _) in omega.iter().enumerate() {
            let rest: Vec<u32> = omega
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &x)| x)
                .collect();
            if inside(&rest) {
                for v in verts.iter() {
                    by_vertex.push((v as u32, rest.clone()));
                }
            }
        }
    }
    let tally = |mut list: Vec<(u32, Vec<u32>)>, slots: usize| {
        list.sort_unstable();
        list.dedup();
        let mut counts = alloc::vec![0usize; slots];
        for (k, _) in list {
            counts[k as usize] += 1;
        }
        counts
    };
    let edge_counts = tally(by_edge, num_pairs(n));
    let vertex_counts = tally(by_vertex, n);
    out.max_edge_count = edge_counts.iter().copied().max().unwrap_or(0);
    out.max_vertex_count = vertex_counts.iter().copied().max().unwrap_or(0);
    out.edge_violations = edge_counts.iter().filter(|&&c| c as f64 > edge_cap + 1e-9).count();
    out.vertex_violations = vertex_counts.iter().filter(|&&c| c as f64 > vertex_cap + 1e-9).count();
    out.holds = out.edge_violations == 0 && out.vertex_violations == 0;
    out
}

fn g_edge(g: &Graph, idx: usize) -> bool {
    let (u, v) = crate::graph::index_pair(g.n(), idx);
    g.has_edge(u, v)
}

fn class_size_check(g: &Graph, p: f64, qs: &[ColoredGraph]) -> ClassSizeCheck {
    let n = g.n();
    let mut fitted: Option<f64> = None;
    let mut chain = true;
    let mut instances = 0;
    for q in qs {
        if q.n() != n || !q.graph().is_subgraph_of(g) {
            continue;
        }
        instances += 1;
        let scale = (n as f64).min(q.k() as f64 * n as f64 * p);
        let verts = q.vertices();
        for k in 0..q.r() {
            let class = q.class(k);
            if class.is_empty() {
                continue;
            }
            let mut covered = crate::bitset::BitSet::new(n);
            for v in verts.iter() {
                covered.union_with(&q.class_neighbours(v, k));
            }
            chain &= class.count() >= covered.count();
            if scale > 0.0 {
                let c = covered.count() as f64 / scale;
                fitted = Some(fitted.map_or(c, |f: f64| f.min(c)));
            }
        }
    }
    ClassSizeCheck {
        instances,
        fitted_c: fitted,
        chain_holds: chain,
    }
}

/// Pairs of parts `(A, B)` from the supplied cuts with `|A||B| ≥ n ln n`;
/// only evaluated when `p > 1/(10 r³)`, `r = χ(h) − 1`.
fn pair_check(g: &Graph, h: &Graph, p: f64, sigmas: f64, cuts: &[PartTuple]) -> PairCheck {
    let n = g.n();
    let r = h.chromatic_number().saturating_sub(1).max(1);
    let applicable = p > 1.0 / (10.0 * (r * r * r) as f64);
    let mut out = PairCheck {
        applicable,
        pairs: 0,
        worst_relative: 0.0,
        violations: 0,
        holds: true,
    };
    if !applicable || n < 2 {
        return out;
    }
    let floor = n as f64 * libm::log(n as f64);
    let mut seen = BTreeSet::new();
    for cut in cuts {
        for i in 0..cut.r() {
            for j in i + 1..cut.r() {
                let (a, b) = (cut.part(i), cut.part(j));
                let size = a.count() * b.count();
                if (size as f64) < floor || !seen.insert((a.clone(), b.clone())) {
                    continue;
                }
                let count: usize = a.iter().map(|v| g.degree_into(v, b)).sum();
                let mean = size as f64 * p;
                let rel = if mean > 0.0 { (count as f64 - mean).abs() / mean } else { 0.0 };
                out.pairs += 1;
                out.worst_relative = out.worst_relative.max(rel);
                if binomial_z(count, size, p) > sigmas {
                    out.violations += 1;
                }
            }
        }
    }
    out.holds = out.violations == 0;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes() {
        let s = RngStream::new(7, 0);
        assert_eq!(sample_gnp(9, 0.0, &s).unwrap().edge_count(), 0);
        assert_eq!(sample_gnp(9, 1.0, &s).unwrap(), Graph::complete(9));
        assert!(sample_gnp(9, 1.5, &s).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = sample_gnp(30, 0.5, &RngStream::new(1, 4)).unwrap();
        let b = sample_gnp(30, 0.5, &RngStream::new(1, 4)).unwrap();
        let c = sample_gnp(30, 0.5, &RngStream::new(1, 5)).unwrap();
        assert_eq!(graph_hash(&a), graph_hash(&b));
        assert_ne!(graph_hash(&a), graph_hash(&c));
    }

    #[test]
    fn mean_edge_count() {
        let trials = 2000;
        let total: usize = (0..trials)
            .map(|i| sample_gnp(100, 0.5, &RngStream::new(3, i)).unwrap().edge_count())
            .sum();
        let mean = total as f64 / trials as f64;
        let se = libm::sqrt(4950.0 * 0.25 / trials as f64);
        assert!((mean - 2475.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn complete_graph_report() {
        let g = Graph::complete(8);
        let r = typicality_report(&g, &Graph::complete(3), &TypicalityParams::new(1.0));
        assert_eq!(r.degrees.min_degree, 7);
        assert_eq!(r.degrees.sigma, 0.0);
        assert!(r.degrees.holds);
        assert!(r.links.holds);
    }

    #[test]
    fn edgeless_caps_hold() {
        let g = Graph::new(10);
        let mut params = TypicalityParams::new(0.0);
        params.cuts.push(PartTuple::from_assignment(2, &[0, 1, 0, 1, 0, 1, 0, 1, 0, 1]));
        let r = typicality_report(&g, &Graph::complete(3), &params);
        assert!(r.holds());
        assert_eq!(r.links.max_edge_count, 0);
    }

    #[test]
    fn triangle_link_counts() {
        // In K_5 each edge lies in 3 triangles, each contributing 2 singletons,
        // all 6 other edges meeting it.
        let g = Graph::complete(5);
        let r = link_check(&g, &Graph::complete(3), 1.0);
        assert_eq!(r.max_edge_count, 6);
        // Paths of length two whose triangle contains v: all 2-edge paths
        // inside a triangle through v, or edges meeting v.
        assert!(r.max_vertex_count > 0);
    }

    #[test]
    fn degree_violation_detected() {
        let mut g = Graph::complete(20);
        g.isolate(0);
        let r = degree_check(&g, 1.0, 3.0);
        assert!(!r.holds);
        assert_eq!(r.violations, 20);
    }
}
