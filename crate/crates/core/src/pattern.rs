//! Closed-form constants attached to a forbidden pattern graph `H`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::iso;
use crate::rational::{self, from_int, Rational};

/// Largest pattern order accepted by the subgraph enumerations here.
pub const MAX_PATTERN_VERTICES: usize = 10;

/// Everything the rest of the crate needs to know about `H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternProfile {
    pub h: Graph,
    pub v_h: usize,
    pub e_h: usize,
    pub chi: usize,
    pub r: usize,
    pub edge_critical: bool,
    pub critical_edge: Option<(usize, usize)>,
    #[serde(with = "rational::serde_opt_str")]
    pub m2: Option<Rational>,
    /// Maximisers of the 2-density, as canonical edge lists.
    pub m2_witnesses: Vec<Graph>,
    pub strictly_2_balanced: bool,
    #[serde(with = "rational::serde_opt_str")]
    pub pi_h: Option<Rational>,
    pub theta_h: Option<f64>,
}

impl PatternProfile {
    /// Computes every field that is defined for `h`; undefined ones are `None`.
    pub fn analyze(h: &Graph) -> Result<Self> {
        if h.n() > MAX_PATTERN_VERTICES {
            return Err(Error::TooLarge(format!(
                "pattern has {} vertices, limit {MAX_PATTERN_VERTICES}",
                h.n()
            )));
        }
        let chi = h.chromatic_number();
        let (edge_critical, critical_edge) = is_edge_critical(h);
        let (m2, m2_witnesses, strictly_2_balanced) = match two_density(h) {
            Ok((m, w, s)) => (Some(m), w, s),
            Err(Error::UndefinedDensity(_)) => (None, Vec::new(), false),
            Err(e) => return Err(e),
        };
        let pi = match pi_h(h) {
            Ok(p) => Some(p),
            Err(Error::Inapplicable(_)) => None,
            Err(e) => return Err(e),
        };
        let mut prof = PatternProfile {
            h: h.clone(),
            v_h: h.n(),
            e_h: h.edge_count(),
            chi,
            r: chi.saturating_sub(1),
            edge_critical,
            critical_edge,
            m2,
            m2_witnesses,
            strictly_2_balanced,
            pi_h: pi,
            theta_h: None,
        };
        prof.theta_h = theta_h(&prof).ok();
        Ok(prof)
    }

    pub fn m2_f64(&self) -> Option<f64> {
        self.m2.as_ref().map(rational::to_f64)
    }

    /// The hypotheses under which the threshold statement applies.
    pub fn threshold_applicable(&self) -> bool {
        self.edge_critical && self.strictly_2_balanced && self.chi >= 3
    }
}

/// Maximum of `(e_F − 1)/(v_F − 2)` over subgraphs with at least two edges,
/// the maximisers up to isomorphism, and whether `H` is the unique maximiser.
///
/// Maximisers are always induced and free of isolated vertices (adding an
/// edge or dropping an isolated vertex raises the ratio), so scanning induced
/// subgraphs over vertex subsets finds the same maximum and witness set.
pub fn two_density(h: &Graph) -> Result<(Rational, Vec<Graph>, bool)> {
    let e_h = h.edge_count();
    if e_h < 2 {
        return Err(Error::UndefinedDensity(e_h));
    }
    let n = h.n();
    if n > MAX_PATTERN_VERTICES {
        return Err(Error::TooLarge(format!("pattern has {n} vertices")));
    }
    let mut best: Option<Rational> = None;
    let mut maximisers: Vec<u32> = Vec::new();
    for mask in 1u32..(1 << n) {
        let vs: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if vs.len() < 3 {
            continue;
        }
        let f = h.induced(&vs);
        let e = f.edge_count();
        if e < 2 || f.min_degree() == 0 {
            continue;
        }
        let d = Rational::new((e as i64 - 1).into(), (vs.len() as i64 - 2).into());
        match &best {
            Some(b) if d < *b => {}
            Some(b) if d == *b => maximisers.push(mask),
            _ => {
                best = Some(d);
                maximisers.clear();
                maximisers.push(mask);
            }
        }
    }
    let best = best.ok_or_else(|| Error::Internal(String::from("no subgraph with two edges")))?;
    let full = (1u32 << n) - 1;
    let strict = maximisers == [full];
    let mut classes = BTreeSet::new();
    let mut witnesses = Vec::new();
    for mask in maximisers {
        let vs: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let f = h.induced(&vs);
        let (k, edges) = iso::canonical_form(&f);
        if classes.insert((k, edges.clone())) {
            witnesses.push(Graph::from_edges(k, &edges)?);
        }
    }
    Ok((best, witnesses, strict))
}

/// Whether deleting some edge lowers the chromatic number, with the first
/// such edge in lexicographic order.
pub fn is_edge_critical(h: &Graph) -> (bool, Option<(usize, usize)>) {
    let chi = h.chromatic_number();
    for (u, v) in h.edges() {
        let mut g = h.clone();
        g.remove_edge(u, v);
        if g.chromatic_number() < chi {
            return (true, Some((u, v)));
        }
    }
    (false, None)
}

/// Exact copy counts of `H` in `K_r(m)^+` and the interpolating polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct PiInterpolation {
    pub r: usize,
    pub samples: Vec<(usize, u64)>,
    pub check: (usize, u64),
    /// Coefficients, lowest degree first.
    pub coeffs: Vec<Rational>,
    pub pi: Rational,
}

/// Leading coefficient at degree `v_H − 2` of `m ↦ N(H, K_r(m)^+)`.
pub fn pi_h(h: &Graph) -> Result<Rational> {
    let v = h.n();
    let ms: Vec<usize> = (v..=2 * v - 2).collect();
    Ok(pi_h_interpolation(h, &ms, 2 * v - 1)?.pi)
}

/// As [`pi_h`] with explicit sample points and a held-out check point.
pub fn pi_h_interpolation(h: &Graph, ms: &[usize], check_m: usize) -> Result<PiInterpolation> {
    let chi = h.chromatic_number();
    if chi < 3 {
        return Err(Error::Inapplicable(String::from("pattern is bipartite")));
    }
    if !is_edge_critical(h).0 {
        return Err(Error::Inapplicable(String::from("pattern is not edge-critical")));
    }
    let r = chi - 1;
    let v = h.n();
    if ms.len() < v - 1 {
        return Err(Error::Domain(format!("need at least {} sample points", v - 1)));
    }
    let aut = iso::automorphism_count(h);
    let count = |m: usize| iso::count_embeddings(h, &Graph::blowup_plus(r, m)) / aut;
    let samples: Vec<(usize, u64)> = ms.iter().map(|&m| (m, count(m))).collect();
    let pts: Vec<(Rational, Rational)> = samples
        .iter()
        .map(|&(m, c)| (from_int(m as i64), from_int(c as i64)))
        .collect();
    let coeffs = rational::interpolate(&pts);
    if coeffs.len() > v - 1 {
        return Err(Error::Internal(format!(
            "copy count polynomial has degree {} > v_H − 2 = {}",
            coeffs.len() - 1,
            v - 2
        )));
    }
    let check = (check_m, count(check_m));
    if rational::eval_poly(&coeffs, &from_int(check_m as i64)) != from_int(check.1 as i64) {
        return Err(Error::Internal(String::from(
            "interpolated copy count disagrees at the held-out point",
        )));
    }
    let pi = coeffs.get(v - 2).cloned().unwrap_or_else(Rational::zero);
    Ok(PiInterpolation {
        r,
        samples,
        check,
        coeffs,
        pi,
    })
}

/// `θ_H = ((2 − 1/m₂)·r^{v_H−2}/π_H)^{1/(e_H−1)}`.
pub fn theta_h(p: &PatternProfile) -> Result<f64> {
    let (Some(m2), Some(pi)) = (&p.m2, &p.pi_h) else {
        return Err(Error::Inapplicable(String::from("m2 or pi_H undefined")));
    };
    if p.e_h < 2 {
        return Err(Error::UndefinedDensity(p.e_h));
    }
    let lhs = from_int(2) - m2.recip();
    let val = lhs * Rational::from_integer(num_bigint::BigInt::from(p.r).pow(p.v_h as u32 - 2)) / pi;
    let val = val.to_f64().unwrap_or(f64::NAN);
    Ok(libm::pow(val, 1.0 / (p.e_h as f64 - 1.0)))
}

/// `(θ_H + eps)·n^{−1/m₂}·(ln n)^{1/(e_H−1)}`, clipped to `[0, 1]`.
pub fn p_threshold(p: &PatternProfile, n: usize, eps: f64) -> Result<f64> {
    p_threshold_in_base(p, n, eps, core::f64::consts::E)
}

/// As [`p_threshold`] with `log_base n` in place of `ln n`.
pub fn p_threshold_in_base(p: &PatternProfile, n: usize, eps: f64, base: f64) -> Result<f64> {
    Ok(p_threshold_unclipped(p, n, eps, base)?.clamp(0.0, 1.0))
}

pub fn p_threshold_unclipped(p: &PatternProfile, n: usize, eps: f64, base: f64) -> Result<f64> {
    let theta = p
        .theta_h
        .ok_or_else(|| Error::Inapplicable(String::from("theta_H undefined")))?;
    let m2 = p.m2_f64().ok_or(Error::UndefinedDensity(p.e_h))?;
    let nf = n as f64;
    let lg = libm::log(nf) / libm::log(base);
    Ok((theta + eps) * libm::pow(nf, -1.0 / m2) * libm::pow(lg.max(0.0), 1.0 / (p.e_h as f64 - 1.0)))
}

/// `⌈(1 − 3/(4(r−1)(3r−1)))·n⌉ + 1`, computed exactly.
pub fn dense_min_degree_bound(r: usize, n: usize) -> usize {
    assert!(r >= 2);
    let d = 4 * (r - 1) * (3 * r - 1);
    ((d - 3) * n).div_ceil(d) + 1
}

/// `(3r − 4)/(3r − 1)`: the minimum-degree ratio above which `K_{r+1}`-free
/// graphs are `r`-partite.
pub fn peel_ratio(r: usize) -> Rational {
    Rational::new((3 * r as i64 - 4).into(), (3 * r as i64 - 1).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::index_pair;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn two_k4() -> Graph {
        Graph::complete(4).disjoint_union(&Graph::complete(4))
    }

    fn k4_pendant() -> Graph {
        let mut g = Graph::new(5);
        for (u, v) in Graph::complete(4).edges() {
            g.add_edge(u, v);
        }
        g.add_edge(3, 4);
        g
    }

    #[test]
    fn two_density_examples() {
        let (m, w, s) = two_density(&Graph::complete(3)).unwrap();
        assert_eq!((m, w.len(), s), (ratio(2, 1), 1, true));
        let (m, _, s) = two_density(&Graph::cycle(5)).unwrap();
        assert_eq!((m, s), (ratio(4, 3), true));
        let (m, _, s) = two_density(&Graph::complete(4)).unwrap();
        assert_eq!((m, s), (ratio(5, 2), true));
        let (m, w, s) = two_density(&k4_pendant()).unwrap();
        assert_eq!((m, s), (ratio(5, 2), false));
        assert!(iso::is_isomorphic(&w[0], &Graph::complete(4)));
        assert_eq!(
            two_density(&Graph::from_edges(2, &[(0, 1)]).unwrap()),
            Err(Error::UndefinedDensity(1))
        );
    }

    #[test]
    fn edge_critical_examples() {
        assert!(is_edge_critical(&Graph::complete(4)).0);
        assert!(is_edge_critical(&Graph::cycle(5)).0);
        // deleting a clique edge already drops the chromatic number
        assert_eq!(is_edge_critical(&k4_pendant()), (true, Some((0, 1))));
        assert_eq!(is_edge_critical(&two_k4()), (false, None));
    }

    #[test]
    fn pi_examples() {
        for g in [Graph::complete(3), Graph::cycle(5), Graph::complete(4)] {
            assert_eq!(pi_h(&g).unwrap(), ratio(1, 1));
        }
        let c5 = pi_h_interpolation(&Graph::cycle(5), &[5, 6, 7, 8], 9).unwrap();
        for &(m, c) in &c5.samples {
            let m = m as u64;
            assert_eq!(c, m * (m - 1) * (m - 2));
        }
        assert!(matches!(pi_h(&two_k4()), Err(Error::Inapplicable(_))));
        assert!(matches!(pi_h(&Graph::cycle(4)), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn theta_and_threshold_examples() {
        let k3 = PatternProfile::analyze(&Graph::complete(3)).unwrap();
        let c5 = PatternProfile::analyze(&Graph::cycle(5)).unwrap();
        let k4 = PatternProfile::analyze(&Graph::complete(4)).unwrap();
        let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol * b.abs();
        // r^{2-v} θ^{e-1} π = 2 - 1/m2
        assert!(close(k3.theta_h.unwrap(), libm::sqrt(3.0), 1e-12));
        assert!(close(c5.theta_h.unwrap(), libm::pow(10.0, 0.25), 1e-12));
        assert!(close(k4.theta_h.unwrap(), libm::pow(14.4, 0.2), 1e-12));
        let want = libm::sqrt(3.0) * libm::pow(7.0, -0.5) * libm::sqrt(libm::log(7.0));
        assert!((p_threshold(&k3, 7, 0.0).unwrap() - want).abs() < 1e-12);
        let want = libm::pow(10.0, 0.25) * libm::pow(100.0, -0.75) * libm::pow(libm::log(100.0), 0.25);
        assert!((p_threshold(&c5, 100, 0.0).unwrap() - want).abs() < 1e-12);
        assert_eq!(p_threshold(&k3, 3, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn theta_solves_defining_equation() {
        for g in [Graph::complete(3), Graph::cycle(5), Graph::complete(4), Graph::cycle(7)] {
            let p = PatternProfile::analyze(&g).unwrap();
            let t = p.theta_h.unwrap();
            let lhs = libm::pow(p.r as f64, 2.0 - p.v_h as f64)
                * rational::to_f64(p.pi_h.as_ref().unwrap())
                * libm::pow(t, p.e_h as f64 - 1.0);
            let rhs = 2.0 - 1.0 / p.m2_f64().unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs);
        }
    }

    #[test]
    fn min_degree_bound_examples() {
        assert_eq!(dense_min_degree_bound(2, 20), 18);
        assert_eq!(dense_min_degree_bound(3, 100), 97);
        assert_eq!(dense_min_degree_bound(2, 0), 1);
        assert_eq!(peel_ratio(2), ratio(2, 5));
    }

    fn arb_pattern() -> impl Strategy<Value = Graph> {
        (3usize..=6).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
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
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn density_monotone_under_edge_addition(g in arb_pattern(), pick in any::<usize>()) {
            let missing: Vec<(usize, usize)> = (0..g.n())
                .flat_map(|u| (u + 1..g.n()).map(move |v| (u, v)))
                .filter(|&(u, v)| !g.has_edge(u, v))
                .collect();
            prop_assume!(g.edge_count() >= 2 && !missing.is_empty());
            let (u, v) = missing[pick % missing.len()];
            let mut g2 = g.clone();
            g2.add_edge(u, v);
            prop_assert!(two_density(&g).unwrap().0 <= two_density(&g2).unwrap().0);
        }

        #[test]
        fn deleting_an_edge_drops_chi_by_at_most_one(g in arb_pattern()) {
            let chi = g.chromatic_number();
            for (u, v) in g.edges() {
                let mut h = g.clone();
                h.remove_edge(u, v);
                let c = h.chromatic_number();
                prop_assert!(c + 1 >= chi && c <= chi);
            }
        }
    }
}
