//! Numeric instantiations of the probabilistic and counting lemmas, each
//! producing a JSON report of the same shape.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use simonovits_core::bitset::BitSet;
use simonovits_core::bounds::{
    balanced_condition_check, fql_check, high_check, janson_corollaries, poisson_lower_tail, sufficiency_sum,
    upper_tail_bound, upper_tail_rho, Constants,
};
use simonovits_core::extremal::{canonical_cut, max_h_free};
use simonovits_core::graph::num_pairs;
use simonovits_core::pattern::PatternProfile;
use simonovits_core::random::{sample_gnp, RngStream};
use simonovits_core::{ColoredGraph, CopyHypergraph, Graph, PartTuple};

use crate::error::AppError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    Janson,
    Poisson,
    Uppertail,
    Fql,
    High,
    Balanced,
    Sum,
    PifBalanced,
}

#[derive(Clone, Debug)]
pub struct LemmaOptions {
    pub pattern: Graph,
    pub n: usize,
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    /// Random hypergraphs in the matching-bound experiment.
    pub hypergraphs: usize,
    /// Balance tolerance for the optimum-cut experiment.
    pub delta: f64,
    pub constants: Constants,
}

impl LemmaOptions {
    pub fn new(pattern: Graph) -> Self {
        LemmaOptions {
            pattern,
            n: 12,
            p: 0.6,
            trials: 1000,
            seed: 0,
            hypergraphs: 20,
            delta: 0.4,
            constants: Constants::paper_defaults(),
        }
    }
}

/// Empirical frequencies compared against bounds, in units of MC standard error.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub trials: usize,
    pub checks: usize,
    pub failures: usize,
    /// Largest `(empirical − bound)/se` seen (negative when always below).
    pub worst_excess: f64,
}

impl McSummary {
    fn record(&mut self, empirical: f64, bound: f64) {
        let t = self.trials.max(1) as f64;
        let var = (empirical * (1.0 - empirical)).max(bound.min(1.0) * (1.0 - bound.min(1.0)));
        let se = (var / t).sqrt().max(1.0 / t);
        let excess = (empirical - bound) / se;
        if self.checks == 0 || excess > self.worst_excess {
            self.worst_excess = excess;
        }
        self.checks += 1;
        if excess > 3.0 {
            self.failures += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub instance: Value,
    pub exact: Value,
    pub bound: Value,
    /// `None` for descriptive (fit-and-report) checks.
    pub pass: Option<bool>,
    pub fitted: Value,
    pub mc: Option<McSummary>,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

pub fn verify_lemma(lemma: Lemma, opts: &LemmaOptions) -> Result<LemmaReport, AppError> {
    match lemma {
        Lemma::Poisson => poisson(),
        Lemma::Janson => janson(opts),
        Lemma::Uppertail => upper_tail(opts),
        Lemma::Fql => fql(opts),
        Lemma::High => high(opts),
        Lemma::Balanced => balanced(opts),
        Lemma::Sum => sum(opts),
        Lemma::PifBalanced => pif_balanced(opts),
    }
}

fn poisson() -> Result<LemmaReport, AppError> {
    let cases = [(2.0, 1.0), (3.0, 0.0), (10.0, 0.1)];
    let mut rows = Vec::new();
    let mut ok = true;
    for (mu, alpha) in cases {
        let got = poisson_lower_tail(mu, alpha)?;
        let expect = if alpha == 0.0 {
            (-mu).exp()
        } else {
            (-(1.0 - alpha * (std::f64::consts::E / alpha).ln()) * mu).exp()
        };
        let good = (got.probability - expect).abs() <= 1e-12 * expect.max(1e-300);
        ok &= good;
        rows.push(json!({ "mu": mu, "alpha": alpha, "bound": got.probability, "expected": expect, "pass": good }));
    }
    Ok(LemmaReport {
        lemma: Lemma::Poisson,
        instance: json!({ "cases": cases.len() }),
        exact: Value::Null,
        bound: Value::Array(rows),
        pass: Some(ok),
        fitted: Value::Null,
        mc: None,
    })
}

/// A random hypergraph on the pairs of `K_5` with up to 12 sets of size at most 4.
pub fn random_hypergraph<R: Rng>(rng: &mut R) -> CopyHypergraph {
    let n = 5;
    let ground = num_pairs(n) as u32;
    let k = rng.random_range(1..=12);
    let sets = (0..k).map(|_| {
        let size = rng.random_range(1..=4);
        let mut s: Vec<u32> = Vec::with_capacity(size);
        while s.len() < size {
            let x = rng.random_range(0..ground);
            if !s.contains(&x) {
                s.push(x);
            }
        }
        s
    });
    let sets: Vec<Vec<u32>> = sets.collect();
    CopyHypergraph::from_sets(n, sets)
}

/// Empirical check of the matching lower-tail corollary and of the two
/// moments on one hypergraph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JansonCase {
    pub hyperedges: usize,
    pub p: f64,
    pub mu: f64,
    pub delta: f64,
    pub bound34: f64,
    /// The raw bound was at least 1.
    pub clipped: bool,
    pub empirical: f64,
    pub mean_x: f64,
    pub mean_pairs: f64,
    /// Largest `|mean − exact|/se` over the two moments.
    pub moment_z: f64,
    pub moments_ok: bool,
}

pub const JANSON_GAMMA: f64 = 0.1;
pub const JANSON_PS: [f64; 3] = [0.3, 0.5, 0.7];

pub const MOMENT_SIGMAS: f64 = 3.0;

/// Exact standard deviation of the number of `sets` kept when every ground
/// element survives independently with probability `p`.
fn count_sd(sets: &[Vec<u32>], p: f64) -> f64 {
    let var: f64 = sets
        .iter()
        .flat_map(|a| {
            sets.iter().map(move |b| {
                let union = a.len() + b.iter().filter(|x| !a.contains(x)).count();
                p.powi(union as i32) - p.powi((a.len() + b.len()) as i32)
            })
        })
        .sum();
    var.max(0.0).sqrt()
}

fn z_score(mean: f64, exact: f64, sd: f64, trials: usize) -> f64 {
    let diff = (mean - exact).abs();
    if diff <= 1e-9 {
        return 0.0;
    }
    diff / (sd / (trials as f64).sqrt())
}

pub fn janson_case(h: &CopyHypergraph, p: f64, trials: usize, stream: &RngStream) -> Result<JansonCase, AppError> {
    let m = h.janson_moments(p)?;
    let cor = janson_corollaries(m.mu, m.delta, JANSON_GAMMA)?;
    let cut = JANSON_GAMMA * JANSON_GAMMA * m.mu;
    let pairs = h.intersecting_pairs();
    let mut rng = stream.rng();
    let (mut low, mut sx, mut sy) = (0usize, 0.0, 0.0);
    for _ in 0..trials {
        let kept = BitSet::from_iter(h.ground(), (0..h.ground()).filter(|_| rng.random_bool(p)));
        let alive: Vec<bool> = h.edges().iter().map(|e| e.iter().all(|&x| kept.contains(x as usize))).collect();
        let x = alive.iter().filter(|&&a| a).count() as f64;
        let y = pairs.iter().filter(|&&(i, j, _)| alive[i] && alive[j]).count() as f64;
        let nu = if x == 0.0 { 0 } else { h.induce(&kept).matching_number()? };
        if nu as f64 <= cut {
            low += 1;
        }
        sx += x;
        sy += y;
    }
    let t = trials as f64;
    let (mx, my) = (sx / t, sy / t);
    let unions: Vec<Vec<u32>> = pairs
        .iter()
        .map(|&(i, j, _)| {
            let mut u = h.edges()[i].clone();
            u.extend(h.edges()[j].iter().filter(|x| !h.edges()[i].contains(x)));
            u
        })
        .collect();
    let moment_z = z_score(mx, m.mu, count_sd(h.edges(), p), trials)
        .max(z_score(my, m.delta, count_sd(&unions, p), trials));
    Ok(JansonCase {
        hyperedges: h.len(),
        p,
        mu: m.mu,
        delta: m.delta,
        bound34: cor.bound34.probability,
        clipped: cor.bound34.clipped,
        empirical: low as f64 / t,
        mean_x: mx,
        mean_pairs: my,
        moment_z,
        moments_ok: moment_z <= MOMENT_SIGMAS,
    })
}

/// Runs [`janson_case`] on `count` random hypergraphs at every `p` in
/// [`JANSON_PS`]; hypergraph `i` comes from stream `i` and its trials from
/// stream `i·4 + 1 + j`.
pub fn janson_suite(count: usize, trials: usize, seed: u64) -> Result<(Vec<JansonCase>, McSummary, usize), AppError> {
    let cases: Vec<Vec<JansonCase>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let h = random_hypergraph(&mut RngStream::new(seed, i as u64 * 4).rng());
            JANSON_PS
                .iter()
                .enumerate()
                .map(|(j, &p)| janson_case(&h, p, trials, &RngStream::new(seed, i as u64 * 4 + 1 + j as u64)))
                .collect()
        })
        .collect::<Result<_, AppError>>()?;
    let cases: Vec<JansonCase> = cases.into_iter().flatten().collect();
    let mut mc = McSummary {
        trials,
        ..McSummary::default()
    };
    for c in &cases {
        if !c.clipped {
            mc.record(c.empirical, c.bound34);
        }
    }
    let moment_failures = cases.iter().filter(|c| !c.moments_ok).count();
    Ok((cases, mc, moment_failures))
}

fn janson(opts: &LemmaOptions) -> Result<LemmaReport, AppError> {
    let (cases, mc, moment_failures) = janson_suite(opts.hypergraphs, opts.trials, opts.seed)?;
    let applicable = cases.iter().filter(|c| !c.clipped).count();
    Ok(LemmaReport {
        lemma: Lemma::Janson,
        instance: json!({ "hypergraphs": opts.hypergraphs, "ps": JANSON_PS, "gamma": JANSON_GAMMA, "trials": opts.trials }),
        exact: json!({ "cases": cases.len(), "moment_failures": moment_failures }),
        bound: json!({ "nontrivial_bounds": applicable }),
        pass: Some(mc.failures == 0 && moment_failures == 0),
        fitted: Value::Null,
        mc: Some(mc),
    })
}

fn upper_tail(opts: &LemmaOptions) -> Result<LemmaReport, AppError> {
    let plug = [
        (1.0, 1, 1.0 / (3.0 * std::f64::consts::E)),
        (0.5, 2, 0.5 / (5.0 * std::f64::consts::E)),
        (3.0, 2, 1.0 / (5.0 * std::f64::consts::E)),
    ];
    let mut ok = true;
    let mut rows = Vec::new();
    for (alpha, ell, expect) in plug {
        let rho = upper_tail_rho(alpha, ell)?;
        let good = (rho - expect).abs() < 1e-12;
        ok &= good;
        rows.push(json!({ "alpha": alpha, "ell": ell, "rho": rho, "pass": good }));
    }
    let n = opts.n.max(4);
    let mut mc = McSummary {
        trials: opts.trials,
        ..McSummary::default()
    };
    let mut cases = Vec::new();
    let mut stream_id = 0;
    for ell in [1usize, 2] {
        for alpha in [0.1, 1.0] {
            let rho = upper_tail_rho(alpha, ell)?;
            let size = (rho * (n as f64).powi(ell as i32)).floor() as usize;
            let mut rng = RngStream::new(opts.seed, stream_id).rng();
            stream_id += 1;
            let mut sets: Vec<Vec<usize>> = Vec::new();
            while sets.len() < size {
                let mut s: Vec<usize> = Vec::new();
                while s.len() < ell {
                    let x = rng.random_range(0..n);
                    if !s.contains(&x) {
                        s.push(x);
                    }
                }
                s.sort_unstable();
                if !sets.contains(&s) {
                    sets.push(s);
                }
            }
            for p in [0.05, 0.1, 0.2, 0.4] {
                let target = alpha * (n as f64 * p).powi(ell as i32);
                let bound = upper_tail_bound(rho, n, p).probability;
                let mut hits = 0;
                for _ in 0..opts.trials {
                    let kept: Vec<bool> = (0..n).map(|_| rng.random_bool(p)).collect();
                    let x = sets.iter().filter(|s| s.iter().all(|&v| kept[v])).count() as f64;
                    if x >= target {
                        hits += 1;
                    }
                }
                let empirical = hits as f64 / opts.trials.max(1) as f64;
                mc.record(empirical, bound);
                cases.push(json!({ "ell": ell, "alpha": alpha, "edges": size, "p": p, "empirical": empirical, "bound": bound }));
            }
        }
    }
    Ok(LemmaReport {
        lemma: Lemma::Uppertail,
        instance: json!({ "n": n, "trials": opts.trials }),
        exact: Value::Array(rows),
        bound: Value::Array(cases),
        pass: Some(ok && mc.failures == 0),
        fitted: Value::Null,
        mc: Some(mc),
    })
}

/// `Q` = one edge `{0, 1}` inside `S₁`; the other vertices split evenly with
/// the extra one going to `S₁`.
pub fn fql_instance(n: usize) -> Result<(ColoredGraph, PartTuple), AppError> {
    let rest: Vec<usize> = (2..n).collect();
    let half = rest.len().div_ceil(2);
    let mut s1 = vec![0, 1];
    s1.extend_from_slice(&rest[..half]);
    let s = PartTuple::new(n, vec![s1, rest[half..].to_vec()])?;
    let q = ColoredGraph::from_cut(Graph::from_edges(n, &[(0, 1)])?, &s)?;
    Ok((q, s))
}

fn fql(opts: &LemmaOptions) -> Result<LemmaReport, AppError> {
    let profile = PatternProfile::analyze(&opts.pattern)?;
    let n = opts.n.min(10);
    let (q, s) = fql_instance(n)?;
    let rep = fql_check(&profile, &q, &s, opts.p, opts.constants.kappa)?;
    Ok(LemmaReport {
        lemma: Lemma::Fql,
        instance: json!({ "n": n, "p": opts.p, "q_edges": q.graph().edges(), "s": s.sizes() }),
        exact: json!({ "restricted_size": rep.restricted_size, "family_size": rep.family_size, "copies_in_k_s_plus": rep.copies_in_k_s_plus, "mu": rep.mu, "delta": rep.delta }),
        bound: json!({ "count_lower_bound": rep.count_lower_bound }),
        pass: Some(rep.applicable && rep.count_holds),
        fitted: json!({ "pi": rep.fitted_pi, "pi_h": rep.pi_h, "c_low": rep.fitted_c_low }),
        mc: None,
    })
}

/// A star `Q` centred at 0 with two leaves in `S₂` and one in `S₁`.
pub fn high_instance(n: usize) -> Result<(ColoredGraph, PartTuple), AppError> {
    let n = n.max(8);
    let half = n / 2;
    let s1: Vec<usize> = (0..half).collect();
    let s2: Vec<usize> = (half..n).collect();
    let s = PartTuple::new(n, vec![s1, s2])?;
    let q = Graph::from_edges(n, &[(0, 1), (0, half), (0, half + 1)])?;
    let cq = ColoredGraph::from_cut(q, &s)?.with_centres(BitSet::from_iter(n, [0]))?;
    Ok((cq, s))
}

fn high(opts: &LemmaOptions) -> Result<LemmaReport, AppError> {
    let profile = PatternProfile::analyze(&opts.pattern)?;
    let (q, s) = high_instance(opts.n.min(12))?;
    let lambda = 0.5;
    let rep = high_check(&profile, &q, &s, opts.p, lambda)?;
    Ok(LemmaReport {
        lemma: Lemma::High,
        instance: json!({ "n": q.n(), "p": opts.p, "k": rep.k, "lambda": lambda }),
        exact: json!({ "restricted_size": rep.restricted_size, "family_size": rep.family_size, "mu": rep.mu, "delta": rep.delta }),
        bound: json!({ "mu_scale": rep.mu_scale, "ratio_scale": rep.ratio_scale }),
        pass: None,
        fitted: json!({ "c_high": rep.fitted_c_high, "mu_over_knp": rep.mu_over_knp, "ratio_over_knp": rep.ratio_over_knp }),
        mc: None,
    })
}

fn balanced(opts: &LemmaOptions) -> Result<LemmaReport, AppError> {
    let profile = PatternProfile::analyze(&opts.pattern)?;
    let rep = balanced_condition_check(&profile, opts.n, opts.p, 1.0)?;
    Ok(LemmaReport {
        lemma: Lemma::Balanced,
        instance: json!({ "n": opts.n, "p": opts.p, "c": 1.0 }),
        exact: to_value(&rep.margins),
        bound: json!({ "applicable": rep.applicable, "skipped": rep.skipped }),
        pass: rep.applicable.then_some(rep.all_hold),
        fitted: json!({ "min_lambda": rep.min_lambda }),
        mc: None,
    })
}

fn sum(opts: &LemmaOptions) -> Result<LemmaReport, AppError> {
    let c = &opts.constants;
    let rep = sufficiency_sum(opts.n, opts.p, c.beta, c.c_low)?;
    Ok(LemmaReport {
        lemma: Lemma::Sum,
        instance: json!({ "n": opts.n, "p": opts.p, "beta": c.beta, "c": c.c_low }),
        exact: to_value(&rep),
        bound: json!({ "limit": 1.0 }),
        pass: Some(rep.low.below_one && rep.high.below_one),
        fitted: Value::Null,
        mc: None,
    })
}

fn pif_balanced(opts: &LemmaOptions) -> Result<LemmaReport, AppError> {
    let profile = PatternProfile::analyze(&opts.pattern)?;
    let r = profile.r;
    let seeds = opts.trials;
    let flags: Vec<bool> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let g = sample_gnp(opts.n, opts.p, &RngStream::new(opts.seed, i as u64))?;
            let (_, f) = max_h_free(&g, &opts.pattern)?;
            let cut = canonical_cut(&f, r)?;
            Ok(cut.is_delta_balanced(opts.delta))
        })
        .collect::<Result<_, AppError>>()?;
    let good = flags.iter().filter(|&&b| b).count();
    Ok(LemmaReport {
        lemma: Lemma::PifBalanced,
        instance: json!({ "n": opts.n, "p": opts.p, "delta": opts.delta, "seeds": seeds }),
        exact: json!({ "balanced": good }),
        bound: Value::Null,
        pass: None,
        fitted: json!({ "balanced_fraction": good as f64 / seeds.max(1) as f64 }),
        mc: None,
    })
}
