//! Numeric evaluators for the explicit probability bounds, the parameter
//! table and the finite-n lemma checks.
//!
//! Every bound is computed in log-space and reported as a [`BoundReport`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, Graph, PartTuple};
use crate::hypergraph::{residual_family, CopyHypergraph, Residual};
use crate::iso;
use crate::pattern::{self, PatternProfile};
use crate::rational;

const TOL: f64 = 1e-9;

/// A probability bound `exp(log_bound)`, clipped to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub log_bound: f64,
    pub probability: f64,
    /// The raw bound was at least 1 and carries no information.
    pub clipped: bool,
}

impl BoundReport {
    pub fn from_log(log_bound: f64) -> Self {
        BoundReport {
            log_bound,
            probability: libm::exp(log_bound.min(0.0)),
            clipped: log_bound >= 0.0,
        }
    }
}

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(what()))
    }
}

/// `α·ln(e/α)`, extended continuously by 0 at `α = 0`.
fn alpha_log_term(alpha: f64) -> f64 {
    if alpha == 0.0 {
        0.0
    } else {
        alpha * (1.0 - libm::log(alpha))
    }
}

/// Upper bound `exp(−(1 − α ln(e/α))μ)` on `Pr(Pois(μ) ≤ αμ)`.
pub fn poisson_lower_tail(mu: f64, alpha: f64) -> Result<BoundReport> {
    check(mu >= 0.0, || format!("mu = {mu} must be nonnegative"))?;
    check((0.0..=1.0).contains(&alpha), || format!("alpha = {alpha} outside [0, 1]"))?;
    Ok(BoundReport::from_log(-(1.0 - alpha_log_term(alpha)) * mu))
}

/// Upper bound on `Pr(ν(ℋ[V_p]) ≤ αμ)` in terms of `μ_p(ℋ)` and `Δ_p(ℋ)`.
pub fn janson_matching_bound(mu: f64, delta: f64, alpha: f64, eta: f64, p: f64) -> Result<BoundReport> {
    check(mu >= 0.0 && delta >= 0.0, || format!("mu = {mu}, delta = {delta} must be nonnegative"))?;
    check((0.0..=1.0).contains(&alpha), || format!("alpha = {alpha} outside [0, 1]"))?;
    check(eta > 0.0 && eta <= 1.0, || format!("eta = {eta} outside (0, 1]"))?;
    check((0.0..=1.0).contains(&p), || format!("p = {p} outside [0, 1]"))?;
    let lead = 1.0 - alpha_log_term(alpha) - alpha * p - eta;
    Ok(BoundReport::from_log(-lead * mu + (1.0 + 2.0 * alpha * p / eta) * delta))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JansonCorollaries {
    /// Bound on `Pr(ν ≤ γ²μ)`.
    pub bound34: BoundReport,
    /// `min{μ, μ²/Δ}`.
    pub lambda: f64,
    /// Bound on `Pr(ν ≤ Λ/1000)`.
    pub bound35: BoundReport,
}

pub fn janson_corollaries(mu: f64, delta: f64, gamma: f64) -> Result<JansonCorollaries> {
    check(gamma > 0.0 && gamma <= 0.1, || format!("gamma = {gamma} outside (0, 1/10]"))?;
    check(mu >= 0.0 && delta >= 0.0, || format!("mu = {mu}, delta = {delta} must be nonnegative"))?;
    let lambda = if delta == 0.0 { mu } else { mu.min(mu * mu / delta) };
    Ok(JansonCorollaries {
        bound34: BoundReport::from_log(-(1.0 - gamma) * mu + 2.0 * delta),
        lambda,
        bound35: BoundReport::from_log(-lambda / 10.0),
    })
}

/// `ρ = min{α, 1}/((2ℓ + 1)e)` for the upper tail of induced edge counts in
/// `ℓ`-uniform hypergraphs.
pub fn upper_tail_rho(alpha: f64, ell: usize) -> Result<f64> {
    check(alpha > 0.0, || format!("alpha = {alpha} must be positive"))?;
    check(ell >= 1, || String::from("ell must be at least 1"))?;
    Ok(alpha.min(1.0) / ((2 * ell + 1) as f64 * core::f64::consts::E))
}

/// `exp(−ρnp)`.
pub fn upper_tail_bound(rho: f64, n: usize, p: f64) -> BoundReport {
    BoundReport::from_log(-rho * n as f64 * p)
}

/// One `(v', e')` class of subgraphs in [`balanced_condition_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgraphMargin {
    pub v: usize,
    pub e: usize,
    /// Number of edge subsets of `H` in this class.
    pub count: usize,
    /// `ln(n^{v'−2}p^{e'−1}/C^{e'−1})`.
    pub log_margin: f64,
    pub holds: bool,
    /// `log_margin / ln n`, for proper subgraphs with `1 < e' < e_H`.
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalancedReport {
    /// `p ≥ C·n^{−1/m₂}`.
    pub applicable: bool,
    pub margins: Vec<SubgraphMargin>,
    /// Single-edge subsets, which hold vacuously.
    pub skipped: usize,
    pub all_hold: bool,
    pub min_lambda: Option<f64>,
}

/// Largest pattern edge count whose subsets are enumerated.
pub const MAX_SUBSET_EDGES: usize = 24;

/// Checks `n^{v'−2}p^{e'−1} ≥ C^{e'−1}` for every subgraph `H' ⊆ H` with
/// at least two edges, grouped by `(v', e')` since the margin only depends
/// on those.
pub fn balanced_condition_check(profile: &PatternProfile, n: usize, p: f64, c: f64) -> Result<BalancedReport> {
    let m2 = profile.m2_f64().ok_or(Error::UndefinedDensity(profile.e_h))?;
    check(n >= 2 && p > 0.0 && p <= 1.0 && c > 0.0, || format!("need n >= 2, p in (0, 1], C > 0; got n = {n}, p = {p}, C = {c}"))?;
    let edges = profile.h.edges();
    if edges.len() > MAX_SUBSET_EDGES {
        return Err(Error::TooLarge(format!("{} pattern edges", edges.len())));
    }
    let ln_n = libm::log(n as f64);
    let applicable = libm::log(p) >= libm::log(c) - ln_n / m2 - TOL;
    let mut classes: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut skipped = 0;
    for mask in 1u32..(1u32 << edges.len()) {
        let e = mask.count_ones() as usize;
        if e == 1 {
            skipped += 1;
            continue;
        }
        let mut verts = 0u32;
        for (i, &(a, b)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                verts |= 1 << a | 1 << b;
            }
        }
        *classes.entry((verts.count_ones() as usize, e)).or_default() += 1;
    }
    let margins: Vec<SubgraphMargin> = classes
        .into_iter()
        .map(|((v, e), count)| {
            let log_margin = (v as f64 - 2.0) * ln_n + (e as f64 - 1.0) * (libm::log(p) - libm::log(c));
            SubgraphMargin {
                v,
                e,
                count,
                log_margin,
                holds: log_margin >= -TOL,
                lambda: (e < profile.e_h).then(|| log_margin / ln_n),
            }
        })
        .collect();
    let min_lambda = margins.iter().filter_map(|m| m.lambda).reduce(f64::min);
    Ok(BalancedReport {
        applicable,
        all_hold: margins.iter().all(|m| m.holds),
        margins,
        skipped,
        min_lambda,
    })
}

/// Name of the shipped constants bundle.
pub const PAPER_DEFAULTS: &str = "paper-defaults";

/// The proof's tunable constants. Only their dependency order is fixed, so
/// the defaults are toy values meant to be overridden.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Constants {
    /// Rigidity slack.
    pub alpha: f64,
    /// Cut balance.
    pub delta: f64,
    /// Distance above the threshold.
    pub epsilon: f64,
    /// Low-degree cap.
    pub kappa: f64,
    /// High-degree cap.
    pub eta: f64,
    /// Interior density of largest `H`-free subgraphs.
    pub beta: f64,
    pub c_theta: f64,
    pub c_hat: f64,
    pub c_partial: f64,
    pub c_low: f64,
    /// Upper density limit.
    pub p0: f64,
}

impl Constants {
    pub fn paper_defaults() -> Self {
        Constants {
            alpha: 0.1,
            delta: 0.05,
            epsilon: 0.1,
            kappa: 0.05,
            eta: 0.05,
            beta: 0.05,
            c_theta: 2.0,
            c_hat: 4.0,
            c_partial: 8.0,
            c_low: 1.0,
            p0: 0.9,
        }
    }

    pub fn named(name: &str) -> Option<Self> {
        (name == PAPER_DEFAULTS).then(Self::paper_defaults)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("alpha", self.alpha),
            ("delta", self.delta),
            ("kappa", self.kappa),
            ("eta", self.eta),
            ("beta", self.beta),
            ("p0", self.p0),
        ];
        for (name, v) in unit {
            check(v > 0.0 && v <= 1.0, || format!("{name} = {v} outside (0, 1]"))?;
        }
        let pos = [
            ("epsilon", self.epsilon),
            ("c_theta", self.c_theta),
            ("c_hat", self.c_hat),
            ("c_partial", self.c_partial),
            ("c_low", self.c_low),
        ];
        for (name, v) in pos {
            check(v > 0.0 && v.is_finite(), || format!("{name} = {v} must be positive"))?;
        }
        Ok(())
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::paper_defaults()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    QlSparse,
    Ql1Dense,
    Ql2Dense,
    Qh,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamTable {
    pub regime: Regime,
    pub q: Option<f64>,
    pub d_q: f64,
    pub m_q: f64,
    pub big_d_q: f64,
    pub nu_q: f64,
    pub n: usize,
    pub p: f64,
    pub e_q: usize,
    pub k_q: usize,
    pub r: usize,
    /// The unclipped threshold `p_H` used to separate sparse from dense.
    pub p_h: f64,
    pub constants: Constants,
}

/// `e(Q) ≥ κnp/ln n`, closed on the dense side.
pub fn is_ql2(e_q: usize, n: usize, p: f64, kappa: f64) -> bool {
    let t = kappa * n as f64 * p / libm::log(n as f64);
    e_q as f64 >= t * (1.0 - 1e-12)
}

/// Fills the parameter row matching `Q`: high-degree when `k_q > 0`,
/// otherwise low-degree split by density and by `e(Q)`.
pub fn param_table(
    profile: &PatternProfile,
    n: usize,
    p: f64,
    e_q: usize,
    k_q: usize,
    c: &Constants,
) -> Result<ParamTable> {
    c.validate()?;
    check(n >= 2 && p > 0.0 && p <= 1.0, || format!("need n >= 2 and p in (0, 1]; got n = {n}, p = {p}"))?;
    if e_q == 0 && k_q == 0 {
        return Err(Error::Domain(String::from("regime is ambiguous: Q has no edges and no centres")));
    }
    let r = profile.r;
    let (nf, v, e) = (n as f64, profile.v_h as f64, profile.e_h as f64);
    let ln_n = libm::log(nf);
    let eqf = e_q as f64;
    let p_h = pattern::p_threshold_unclipped(profile, n, 0.0, core::f64::consts::E)?;
    let link = libm::pow(nf, v - 2.0) * libm::pow(p, e - 1.0);
    let d_low = (libm::sqrt(c.eta) * eqf * ln_n).min(c.beta * nf * nf * p);
    let (regime, q, d_q, m_q, big_d_q) = if k_q > 0 {
        let k = k_q as f64;
        let m = 32.0 * k * nf * p;
        let big_m = (k * libm::pow(nf, v - 1.0) * libm::pow(p, e)).min(nf * nf * p);
        (Regime::Qh, None, m, m, 2.0 * v * big_m / m)
    } else if p <= c.c_theta * p_h {
        (Regime::QlSparse, None, d_low, c.kappa * link * eqf, 4.0 * e * e / c.kappa)
    } else if !is_ql2(e_q, n, p, c.kappa) {
        let d = 8.0 * r as f64 * eqf;
        (Regime::Ql1Dense, None, d, d, nf * nf * p / d)
    } else {
        let q = c.c_hat * ln_n / (c.kappa * link);
        (Regime::Ql2Dense, Some(q), d_low, c.kappa * link * q * eqf, c.c_partial / c.kappa)
    };
    let nu_q = m_q + ((r * r + 1) as f64) * (d_q + 1.0);
    Ok(ParamTable {
        regime,
        q,
        d_q,
        m_q,
        big_d_q,
        nu_q,
        n,
        p,
        e_q,
        k_q,
        r,
        p_h,
        constants: c.clone(),
    })
}

/// Exact check of the low-degree family against its counting bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FqlReport {
    pub applicable: bool,
    /// `Q` has no edges; the bound is trivially met.
    pub vacuous: bool,
    /// `|ℱ_Q^low[ext(S)]|`.
    pub restricted_size: usize,
    /// `|ℱ_Q^low|`.
    pub family_size: usize,
    /// Copies of `H` in `ext(S)` plus one edge inside `S₁`.
    pub copies_in_k_s_plus: u64,
    pub count_lower_bound: f64,
    pub count_holds: bool,
    /// `μ_p(ℱ_Q^low[ext(S)])`.
    pub mu: f64,
    /// `Δ_p(ℱ_Q^low)`.
    pub delta: f64,
    /// `μ / (e(Q)·(min|S_i|)^{v_H−2}p^{e_H−1})`, to compare with `π_H`.
    pub fitted_pi: Option<f64>,
    pub pi_h: Option<f64>,
    /// `(Δ/μ) / (κ n^{v_H−2}p^{e_H−1}/ln n)`.
    pub fitted_c_low: Option<f64>,
}

fn all_copies(h: &Graph, n: usize) -> CopyHypergraph {
    CopyHypergraph::enumerate_copies(h, &Graph::complete(n))
}

/// Low-degree lemma check for `Q` (all of whose vertices lie in `S₁`).
pub fn fql_check(profile: &PatternProfile, q: &ColoredGraph, s: &PartTuple, p: f64, kappa: f64) -> Result<FqlReport> {
    let n = q.n();
    check(s.n() == n, || format!("S lives on {} vertices, Q on {n}", s.n()))?;
    check(s.r() == profile.r, || format!("S has {} parts, expected {}", s.r(), profile.r))?;
    check(p > 0.0 && p <= 1.0, || format!("p = {p} outside (0, 1]"))?;
    if !profile.edge_critical {
        return Err(Error::Inapplicable(String::from("H is not edge-critical")));
    }
    let qg = q.graph();
    let s1 = s.part(0);
    if let Some(v) = qg.support().iter().find(|&v| !s1.contains(v)) {
        return Err(Error::InvalidQ(format!("vertex {v} of Q lies outside S_1")));
    }
    let mut report = FqlReport {
        applicable: s1.count() > profile.v_h,
        vacuous: qg.edge_count() == 0,
        restricted_size: 0,
        family_size: 0,
        copies_in_k_s_plus: 0,
        count_lower_bound: 0.0,
        count_holds: true,
        mu: 0.0,
        delta: 0.0,
        fitted_pi: None,
        pi_h: profile.pi_h.as_ref().map(rational::to_f64),
        fitted_c_low: None,
    };
    if !report.applicable || report.vacuous {
        return Ok(report);
    }
    let h = &profile.h;
    let family = residual_family(&all_copies(h, n), q, Residual::Low, h)?;
    let (ext, _) = s.ext_int();
    let restricted = family.induce(&ext);

    let mut k_plus = Graph::from_edge_set(n, &ext);
    let mut s1_iter = s1.iter();
    let (u, v) = (s1_iter.next().unwrap(), s1_iter.next().unwrap());
    k_plus.add_edge(u, v);
    let n_plus = iso::count_copies(h, &k_plus);

    let vh = profile.v_h as f64;
    let eq = qg.edge_count() as f64;
    let factor = 1.0 - vh * vh * qg.max_degree() as f64 / (s1.count() as f64 - vh);
    let lower = factor * eq * n_plus as f64;

    let m_full = family.janson_moments(p)?;
    let m_res = restricted.janson_moments(p)?;
    let min_part = s.sizes().into_iter().min().unwrap_or(0) as f64;
    let e = profile.e_h as f64;
    let scale = eq * libm::pow(min_part, vh - 2.0) * libm::pow(p, e - 1.0);
    let nf = n as f64;
    let ratio_scale = kappa * libm::pow(nf, vh - 2.0) * libm::pow(p, e - 1.0) / libm::log(nf);

    report.restricted_size = restricted.len();
    report.family_size = family.len();
    report.copies_in_k_s_plus = n_plus;
    report.count_lower_bound = lower;
    report.count_holds = restricted.len() as f64 >= lower - TOL;
    report.mu = m_res.mu;
    report.delta = m_full.delta;
    report.fitted_pi = (scale > 0.0).then(|| m_res.mu / scale);
    report.fitted_c_low = (m_res.mu > 0.0 && ratio_scale > 0.0).then(|| m_full.delta / m_res.mu / ratio_scale);
    Ok(report)
}

/// Descriptive check of the high-degree family bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighReport {
    pub k: usize,
    pub restricted_size: usize,
    pub family_size: usize,
    /// `μ_p(ℱ_Q^high[ext(S)])`.
    pub mu: f64,
    /// `Δ_p(ℱ_Q^high)`.
    pub delta: f64,
    /// `min{k n^{v_H−1}p^{e_H}, n²p}`.
    pub mu_scale: f64,
    /// `min{k n^{v_H−1}p^{e_H}, k n^{1+λ}p, n²p}`.
    pub ratio_scale: f64,
    /// `min{μ/mu_scale, (μ²/Δ)/ratio_scale}`.
    pub fitted_c_high: f64,
    /// `μ/(k·np)`; the lemma asks for this to be large.
    pub mu_over_knp: f64,
    /// `(μ²/Δ)/(k·np)`.
    pub ratio_over_knp: f64,
}

/// High-degree lemma check for a centred `Q` compatible with `S`.
pub fn high_check(profile: &PatternProfile, q: &ColoredGraph, s: &PartTuple, p: f64, lambda: f64) -> Result<HighReport> {
    let n = q.n();
    check(s.n() == n, || format!("S lives on {} vertices, Q on {n}", s.n()))?;
    check(p > 0.0 && p <= 1.0, || format!("p = {p} outside (0, 1]"))?;
    if !q.compatible_with(s) {
        return Err(Error::InvalidQ(String::from("Q is not compatible with S")));
    }
    let h = &profile.h;
    let family = residual_family(&all_copies(h, n), q, Residual::High, h)?;
    let (ext, _) = s.ext_int();
    let restricted = family.induce(&ext);
    let m_full = family.janson_moments(p)?;
    let m_res = restricted.janson_moments(p)?;

    let k = q.k();
    let (kf, nf) = (k as f64, n as f64);
    let (v, e) = (profile.v_h as f64, profile.e_h as f64);
    let first = kf * libm::pow(nf, v - 1.0) * libm::pow(p, e);
    let mu_scale = first.min(nf * nf * p);
    let ratio_scale = mu_scale.min(kf * libm::pow(nf, 1.0 + lambda) * p);
    let ratio = if m_full.delta > 0.0 { m_res.mu * m_res.mu / m_full.delta } else { f64::INFINITY };
    let knp = kf * nf * p;
    Ok(HighReport {
        k,
        restricted_size: restricted.len(),
        family_size: family.len(),
        mu: m_res.mu,
        delta: m_full.delta,
        mu_scale,
        ratio_scale,
        fitted_c_high: (m_res.mu / mu_scale).min(ratio / ratio_scale),
        mu_over_knp: m_res.mu / knp,
        ratio_over_knp: ratio / knp,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumReport {
    pub log_total: f64,
    pub total: f64,
    pub below_one: bool,
}

impl SumReport {
    fn from_log(log_total: f64) -> Self {
        SumReport {
            log_total,
            total: libm::exp(log_total),
            below_one: log_total < 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficiencySums {
    /// `Σ_{m=1}^{⌊βNp⌋} exp(m − cm·ln(Np/m))` with `N = C(n, 2)`.
    pub low: SumReport,
    /// `(1 + e^{−np})^n − 1`.
    pub high: SumReport,
    pub terms: u64,
}

/// Cap on the number of terms in the low-degree sum.
pub const MAX_SUM_TERMS: u64 = 100_000_000;

fn log_sum_exp(acc: f64, x: f64) -> f64 {
    if acc == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if acc > x { (acc, x) } else { (x, acc) };
    hi + libm::log1p(libm::exp(lo - hi))
}

pub fn sufficiency_sum(n: usize, p: f64, beta: f64, c: f64) -> Result<SufficiencySums> {
    check(p > 0.0 && p <= 1.0, || format!("p = {p} outside (0, 1]"))?;
    check(beta >= 0.0 && c > 0.0, || format!("need beta >= 0 and c > 0; got {beta}, {c}"))?;
    let big_np = crate::graph::num_pairs(n) as f64 * p;
    let terms = libm::floor(beta * big_np) as u64;
    if terms > MAX_SUM_TERMS {
        return Err(Error::TooLarge(format!("{terms} summands")));
    }
    let mut low = f64::NEG_INFINITY;
    for m in 1..=terms {
        let mf = m as f64;
        low = log_sum_exp(low, mf - c * mf * libm::log(big_np / mf));
    }
    let x = n as f64 * libm::log1p(libm::exp(-(n as f64) * p));
    let high = if x > 30.0 { x + libm::log1p(-libm::exp(-x)) } else { libm::log(libm::expm1(x)) };
    Ok(SufficiencySums {
        low: SumReport::from_log(low),
        high: SumReport::from_log(high),
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::BitSet;
    use alloc::vec;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn poisson_examples() {
        assert_eq!(poisson_lower_tail(2.0, 1.0).unwrap().probability, 1.0);
        assert!(close(poisson_lower_tail(3.0, 0.0).unwrap().probability, libm::exp(-3.0), 1e-12));
        let b = poisson_lower_tail(10.0, 0.1).unwrap();
        assert!(close(b.probability, 1.23e-3, 5e-3), "{b:?}");
        assert!(poisson_lower_tail(-1.0, 0.5).is_err());
    }

    #[test]
    fn janson_examples() {
        let b = janson_matching_bound(10.0, 1.0, 0.01, 0.1, 0.5).unwrap();
        let expect = -(1.0 - 0.01 * libm::log(100.0 * core::f64::consts::E) - 0.005 - 0.1) * 10.0 + 1.1;
        assert!(close(b.log_bound, expect, 1e-12));
        assert!(close(b.probability, 6.83e-4, 5e-3), "{b:?}");
        assert!(janson_matching_bound(1.0, 0.0, 0.0, 0.0, 0.5).is_err());
        let tiny = janson_matching_bound(5.0, 0.0, 0.0, 1e-12, 0.5).unwrap();
        assert!(close(tiny.probability, libm::exp(-5.0), 1e-9));
        let big = janson_matching_bound(1.0, 10.0, 0.1, 0.1, 0.5).unwrap();
        assert!(big.clipped && big.probability == 1.0);
    }

    #[test]
    fn corollary_examples() {
        let c = janson_corollaries(100.0, 0.0, 0.1).unwrap();
        assert!(close(c.bound34.log_bound, -90.0, 1e-12));
        assert_eq!(c.lambda, 100.0);
        assert!(close(c.bound35.log_bound, -10.0, 1e-12));
        assert_eq!(janson_corollaries(4.0, 8.0, 0.1).unwrap().lambda, 2.0);
        let z = janson_corollaries(0.0, 0.0, 0.05).unwrap();
        assert_eq!((z.bound34.probability, z.lambda, z.bound35.probability), (1.0, 0.0, 1.0));
        assert!(janson_corollaries(1.0, 0.0, 0.2).is_err());
    }

    #[test]
    fn upper_tail_examples() {
        let e = core::f64::consts::E;
        assert!(close(upper_tail_rho(1.0, 1).unwrap(), 1.0 / (3.0 * e), 1e-12));
        assert_eq!(upper_tail_rho(7.0, 3).unwrap(), upper_tail_rho(1.0, 3).unwrap());
        assert!(close(upper_tail_rho(0.5, 2).unwrap(), 0.0368, 1e-2));
        assert!(close(upper_tail_bound(0.1, 100, 0.5).log_bound, -5.0, 1e-12));
    }

    #[test]
    fn balanced_triangle() {
        let prof = PatternProfile::analyze(&Graph::complete(3)).unwrap();
        let p = libm::pow(100.0, -0.5);
        let rep = balanced_condition_check(&prof, 100, p, 1.0).unwrap();
        assert!(rep.applicable && rep.all_hold);
        assert_eq!(rep.skipped, 3);
        assert_eq!(rep.margins.len(), 2);
        let full = rep.margins.iter().find(|m| m.e == 3).unwrap();
        assert!(full.log_margin.abs() < 1e-9 && full.lambda.is_none());
        assert!(close(rep.min_lambda.unwrap(), 0.5, 1e-9));
        assert!(!balanced_condition_check(&prof, 100, p / 2.0, 1.0).unwrap().applicable);
    }

    #[test]
    fn param_rows() {
        let k3 = PatternProfile::analyze(&Graph::complete(3)).unwrap();
        let c = Constants::paper_defaults();
        let t = param_table(&k3, 100, 0.1, 0, 1, &c).unwrap();
        assert_eq!(t.regime, Regime::Qh);
        assert!(close(t.d_q, 320.0, 1e-12));
        // dense enough that p > C_θ·p_H, with a single edge in Q
        let t = param_table(&k3, 1000, 0.9, 1, 0, &c).unwrap();
        assert_eq!(t.regime, Regime::Ql1Dense);
        assert_eq!(t.d_q, 16.0);
        assert!(close(t.big_d_q, 1000.0 * 1000.0 * 0.9 / 16.0, 1e-12));
        assert_eq!(t.nu_q - t.m_q, 5.0 * (t.d_q + 1.0));
        let t = param_table(&k3, 100, 0.9, 400, 0, &c).unwrap();
        assert_eq!(t.regime, Regime::Ql2Dense);
        assert!(t.q.is_some());
        let t = param_table(&k3, 100, 0.05, 3, 0, &c).unwrap();
        assert_eq!(t.regime, Regime::QlSparse);
        assert!(close(t.big_d_q, 36.0 / c.kappa, 1e-12));
        assert!(param_table(&k3, 100, 0.5, 0, 0, &c).is_err());
    }

    #[test]
    fn ql2_boundary_is_dense_side() {
        let (n, p, e_q) = (200usize, 0.7, 37usize);
        let kappa = e_q as f64 * libm::log(n as f64) / (n as f64 * p);
        assert!(is_ql2(e_q, n, p, kappa));
        assert!(!is_ql2(e_q - 1, n, p, kappa));
    }

    fn fql_instance(q_edges: &[(usize, usize)], s1_extra: usize) -> (ColoredGraph, PartTuple) {
        let n = 10;
        let q = Graph::from_edges(n, q_edges).unwrap();
        let qv: Vec<usize> = q.support().iter().collect();
        let rest: Vec<usize> = (0..n).filter(|v| !qv.contains(v)).collect();
        let cut = s1_extra.min(rest.len());
        let mut s1 = qv.clone();
        s1.extend_from_slice(&rest[..cut]);
        let s2 = rest[cut..].to_vec();
        let s = PartTuple::new(n, vec![s1, s2]).unwrap();
        let cq = ColoredGraph::from_cut(q, &s).unwrap();
        (cq, s)
    }

    #[test]
    fn fql_single_edge_triangle() {
        let k3 = PatternProfile::analyze(&Graph::complete(3)).unwrap();
        let (q, s) = fql_instance(&[(0, 1)], 3);
        let rep = fql_check(&k3, &q, &s, 0.3, 0.05).unwrap();
        assert!(rep.applicable && !rep.vacuous);
        // triangles on edge 01 whose apex lies in S_2
        assert_eq!(rep.restricted_size, 5);
        assert_eq!(rep.copies_in_k_s_plus, 5);
        assert!(rep.count_holds);
        assert!(close(rep.mu, 5.0 * 0.09, 1e-12));
    }

    #[test]
    fn fql_guards() {
        let k3 = PatternProfile::analyze(&Graph::complete(3)).unwrap();
        let (q, s) = fql_instance(&[], 4);
        assert!(fql_check(&k3, &q, &s, 0.3, 0.05).unwrap().vacuous);
        let (q, s) = fql_instance(&[(0, 1)], 1);
        assert!(!fql_check(&k3, &q, &s, 0.3, 0.05).unwrap().applicable);
    }

    #[test]
    fn high_star_triangle() {
        let k3 = PatternProfile::analyze(&Graph::complete(3)).unwrap();
        let n = 8;
        let q = Graph::from_edges(n, &[(0, 1), (0, 2), (0, 5)]).unwrap();
        let s = PartTuple::new(n, vec![vec![0, 3, 4, 5], vec![1, 2, 6, 7]]).unwrap();
        let cq = ColoredGraph::from_cut(q, &s).unwrap().with_centres(BitSet::from_iter(n, [0])).unwrap();
        let rep = high_check(&k3, &cq, &s, 0.5, 0.5).unwrap();
        assert_eq!(rep.k, 1);
        assert!(rep.family_size > 0 && rep.mu > 0.0);
        assert!(rep.fitted_c_high > 0.0);
    }

    #[test]
    fn sufficiency_examples() {
        let s = sufficiency_sum(50, 0.5, 0.01, 1.0).unwrap();
        assert!(close(s.high.total, 50.0 * libm::exp(-25.0), 1e-6));
        assert!(s.high.below_one);
        assert!(s.terms == 6 && s.low.total > 0.0);
        let z = sufficiency_sum(50, 0.5, 0.0, 1.0).unwrap();
        assert_eq!(z.low.total, 0.0);
        let sparse = sufficiency_sum(30, 1e-6, 0.0, 1.0).unwrap();
        assert!(close(sparse.high.total, libm::pow(2.0, 30.0) - 1.0, 1e-3));
        assert!(!sparse.high.below_one);
    }

    proptest! {
        #[test]
        fn poisson_monotone(mu in 0.0f64..50.0, d in 0.0f64..10.0, alpha in 0.0f64..0.99) {
            let a = poisson_lower_tail(mu, alpha).unwrap().probability;
            let b = poisson_lower_tail(mu + d, alpha).unwrap().probability;
            prop_assert!(b <= a + 1e-15);
            prop_assert_eq!(poisson_lower_tail(mu, 1.0).unwrap().probability, 1.0);
        }

        #[test]
        fn lambda_at_most_mu(mu in 0.0f64..100.0, delta in 0.0f64..100.0, gamma in 0.001f64..0.1) {
            prop_assert!(janson_corollaries(mu, delta, gamma).unwrap().lambda <= mu);
        }

        #[test]
        fn nu_identity(k_q in 0usize..3, e_q in 1usize..50, p in 0.05f64..1.0) {
            let prof = PatternProfile::analyze(&Graph::complete(4)).unwrap();
            let t = param_table(&prof, 60, p, e_q, k_q, &Constants::default()).unwrap();
            let extra = 10.0 * (t.d_q + 1.0);
            prop_assert!((t.nu_q - t.m_q - extra).abs() <= 1e-9 * t.nu_q.max(1.0));
        }
    }
}
