//! One PASS/FAIL line per acceptance criterion. Tolerances and time limits
//! are fixed here; the process exits nonzero when any line fails.

use std::time::{Duration, Instant};

use rand::Rng;
use simonovits::config::{ConstantsSpec, ExperimentConfig, Format, Output, Task};
use simonovits::lemmas::janson_suite;
use simonovits::scan::{scan_threshold, to_csv};
use simonovits::switching::{simulate, QShape, SwitchSetup};
use simonovits_core::bitset::BitSet;
use simonovits_core::extremal::{is_simonovits_with, max_h_free_with, Certificate, Decision, SolverOptions};
use simonovits_core::graph::{index_pair, num_pairs};
use simonovits_core::pattern::{dense_min_degree_bound, pi_h_interpolation};
use simonovits_core::random::{sample_gnp, RngStream};
use simonovits_core::rational::{ratio, to_f64};
use simonovits_core::rigidity::{
    crit_edges, equivalence_and_rigidity, uncovered_core_edges, validate_trace, CutFamily, StepKind, SwitchStep,
    SwitchTrace, Threshold,
};
use simonovits_core::structure::{bounded_degree_subgraph, construct_qf, neighbourhood_hypergraph, vizing_color, QKind, QfParams};
use simonovits_core::{ColoredGraph, Graph, PartTuple, PatternProfile};

const FLOAT_TOL: f64 = 1e-9;
const MC_SIGMAS: f64 = 3.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn no_shortcuts() -> SolverOptions {
    SolverOptions {
        shortcuts: false,
        ..SolverOptions::default()
    }
}

fn constants_suite() -> Outcome {
    let cases = [
        ("K3", Graph::complete(3), ratio(2, 1), 1.5f64.sqrt()),
        ("C5", Graph::cycle(5), ratio(4, 3), 1.25f64.powf(0.25)),
        ("K4", Graph::complete(4), ratio(5, 2), (72.0f64 / 5.0).powf(0.2)),
    ];
    let mut bad = Vec::new();
    for (name, h, m2, theta) in cases {
        let p = match PatternProfile::analyze(&h) {
            Ok(p) => p,
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        if p.m2.as_ref() != Some(&m2) {
            bad.push(format!("{name} m2 = {:?}", p.m2.as_ref().map(to_f64)));
        }
        if !p.strictly_2_balanced || !p.edge_critical {
            bad.push(format!("{name} balance/criticality"));
        }
        if p.pi_h != Some(ratio(1, 1)) {
            bad.push(format!("{name} pi_h = {:?}", p.pi_h.as_ref().map(to_f64)));
        }
        if p.theta_h.is_none_or(|t| (t - theta).abs() > FLOAT_TOL) {
            bad.push(format!("{name} theta = {:?}", p.theta_h));
        }
        let v = h.n();
        let ms: Vec<usize> = (v..v + 4).collect();
        match pi_h_interpolation(&h, &ms, v + 4) {
            Ok(fit) if fit.pi == ratio(1, 1) => {}
            Ok(fit) => bad.push(format!("{name} interpolated pi = {}", to_f64(&fit.pi))),
            Err(e) => bad.push(format!("{name} interpolation: {e}")),
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "K3, C5, K4 profiles exact".into() } else { bad.join("; ") })
}

/// Largest `K_4`-free edge subset of `K_n` by trying every subset.
fn brute_force_ex_k4(n: usize) -> usize {
    let pairs: Vec<(usize, usize)> = (0..num_pairs(n)).map(|i| index_pair(n, i)).collect();
    let quads: Vec<[usize; 6]> = {
        let mut out = Vec::new();
        let idx = |a: usize, b: usize| pairs.iter().position(|&e| e == (a.min(b), a.max(b))).unwrap();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        out.push([idx(a, b), idx(a, c), idx(a, d), idx(b, c), idx(b, d), idx(c, d)]);
                    }
                }
            }
        }
        out
    };
    let masks: Vec<u32> = quads.iter().map(|q| q.iter().fold(0, |m, &i| m | (1 << i))).collect();
    (0u32..1 << pairs.len())
        .filter(|s| masks.iter().all(|m| s & m != *m))
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn turan_oracle() -> Outcome {
    let k3 = Graph::complete(3);
    for n in 4..=9 {
        match max_h_free_with(&Graph::complete(n), &k3, &no_shortcuts()) {
            Ok((ex, _)) if ex == n * n / 4 => {}
            other => return outcome(false, format!("ex(K_{n}, K3): {:?}", other.map(|x| x.0))),
        }
    }
    let k4 = Graph::complete(4);
    for n in [5, 6] {
        let brute = brute_force_ex_k4(n);
        match max_h_free_with(&Graph::complete(n), &k4, &no_shortcuts()) {
            Ok((ex, _)) if ex == brute => {}
            other => return outcome(false, format!("ex(K_{n}, K4) = {:?}, brute force {brute}", other.map(|x| x.0))),
        }
    }
    outcome(true, "K3 for n = 4..9 and K4 for n = 5, 6 exact")
}

fn simonovits_decisions() -> Outcome {
    let k3 = Graph::complete(3);
    let profile = PatternProfile::analyze(&k3).expect("triangle profile");
    for n in 4..=8 {
        let g = Graph::complete(n);
        match is_simonovits_with(&g, &k3, &profile, &no_shortcuts()) {
            Ok(v) if v.decision == Decision::Yes
                && matches!(v.certificate, Certificate::AllOptimaPartite { .. })
                && v.verify(&g, &k3) => {}
            other => return outcome(false, format!("K_{n}: {other:?}")),
        }
    }
    let hosts = [("C5", Graph::cycle(5)), ("K5+C5", Graph::complete(5).disjoint_union(&Graph::cycle(5)))];
    for (name, g) in hosts {
        match is_simonovits_with(&g, &k3, &profile, &no_shortcuts()) {
            Ok(v) if v.decision == Decision::No && v.verify(&g, &k3) => {}
            other => return outcome(false, format!("{name}: {other:?}")),
        }
    }
    outcome(true, "yes for K_4..K_8 by enumeration; no for C5 and K5+C5 with checked certificates")
}

fn janson() -> Outcome {
    match janson_suite(200, 10_000, 2024) {
        Ok((cases, mc, moment_failures)) => outcome(
            mc.failures == 0 && moment_failures == 0,
            format!(
                "{} cases, {} with an unclipped bound, worst excess {:.2} se (limit {MC_SIGMAS}); {} moment z-scores above {MC_SIGMAS}, worst {:.2}",
                cases.len(),
                mc.checks,
                mc.worst_excess,
                moment_failures,
                cases.iter().map(|c| c.moment_z).fold(0.0, f64::max)
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn step(kind: StepKind, edge: (usize, usize)) -> SwitchStep {
    SwitchStep {
        kind,
        edge,
        choices: 1,
        rng_word: 0,
        deficit: 0,
    }
}

/// Corrupted copies of a valid trace; each must be rejected.
fn corruptions(trace: &SwitchTrace, q: &ColoredGraph, cut: &PartTuple) -> Vec<(&'static str, SwitchTrace, usize)> {
    let d = trace.initial_deficit;
    let states = trace.states();
    let (g, f) = states.last().unwrap().clone();
    let h = g.union(&f);
    let mut out = Vec::new();

    let mut t = trace.clone();
    let qe = q.graph().edges()[0];
    t.steps.push(step(StepKind::B, qe));
    out.push(("removes an edge of Q", t, d + 1));

    if let Some(last) = trace.steps.last() {
        let mut t = trace.clone();
        t.steps.push(last.clone());
        out.push(("repeats a step", t, d + 1));
    }

    if let Some(&(u, v)) = g
        .edges()
        .iter()
        .find(|&&(u, v)| cut.part_of(u) != cut.part_of(v) && !q.graph().has_edge(u, v))
    {
        let mut t = trace.clone();
        t.steps.push(step(StepKind::B, (u, v)));
        out.push(("b step that cannot lower the deficit", t, d + 1));
    }

    let absent: Vec<(usize, usize)> = (0..num_pairs(trace.n))
        .map(|i| index_pair(trace.n, i))
        .filter(|&(u, v)| !h.has_edge(u, v))
        .collect();
    let r2 = trace.r * trace.r;
    if absent.len() > r2 {
        let mut t = trace.clone();
        t.steps.extend(absent.iter().take(r2 + 1).map(|&e| step(StepKind::D, e)));
        out.push(("too many consecutive additions", t, d));
        if let Some(&(u, v)) = g.edges().iter().find(|&&(u, v)| !q.graph().has_edge(u, v)) {
            let mut t = trace.clone();
            t.steps.push(step(StepKind::D, absent[0]));
            t.steps.push(step(StepKind::C, (u, v)));
            out.push(("c step right after an addition", t, d));
        }
    }
    out
}

fn switching() -> Outcome {
    let shapes = [QShape::Low, QShape::Star];
    let ps = [0.3, 0.5, 0.8];
    let (mut runs, mut violations, mut increases, mut controls, mut missed) = (0, 0, 0, 0, 0);
    let mut steps = 0;
    for i in 0..100u64 {
        let mut s = SwitchSetup::new(Graph::complete(3));
        s.n = 12;
        s.shape = shapes[i as usize % 2];
        s.p = ps[i as usize % 3];
        s.max_steps = 200;
        s.seed = 7;
        s.stream = i;
        let (inst, out) = match simulate(&s) {
            Ok(x) => x,
            Err(e) => return outcome(false, format!("run {i}: {e}")),
        };
        runs += 1;
        steps += out.trace.steps.len();
        violations += out.validation.violations.len();
        let mut prev = out.trace.initial_deficit;
        for st in &out.trace.steps {
            if st.deficit > prev {
                increases += 1;
            }
            prev = st.deficit;
        }
        for (_, bad, d) in corruptions(&out.trace, &inst.q, &inst.cut) {
            controls += 1;
            if validate_trace(&bad, &inst.q, &inst.cut, d, &inst.family).ok() {
                missed += 1;
            }
        }
    }
    outcome(
        violations == 0 && increases == 0 && missed == 0 && controls > 0,
        format!(
            "{runs} runs ({steps} steps): {violations} violations, {increases} deficit increases; {missed} of {controls} corrupted traces accepted"
        ),
    )
}

fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

fn structure() -> Outcome {
    let mut rng = RngStream::new(31, 0).rng();
    let mut notes = Vec::new();
    let mut pass = true;

    let mut worst_slack = i64::MAX;
    for _ in 0..500 {
        let n = rng.random_range(2..=60);
        let g = {
            let p = rng.random_range(0.02..0.9);
            random_graph(&mut rng, n, p)
        };
        let c = vizing_color(&g);
        if !c.is_proper(n) || c.used > g.max_degree() + 1 || c.edges.len() != g.edge_count() {
            pass = false;
            notes.push(format!("vizing failed on n = {n}"));
            break;
        }
        worst_slack = worst_slack.min(g.max_degree() as i64 + 1 - c.used as i64);
    }
    notes.push(format!("vizing ok on 500 graphs (min spare colours {worst_slack})"));

    let mut done = 0;
    while done < 200 {
        let n = rng.random_range(4..=30);
        let i = {
            let p = rng.random_range(0.1..0.9);
            random_graph(&mut rng, n, p)
        };
        let big_d = i.max_degree();
        if big_d == 0 {
            continue;
        }
        let d = rng.random_range(1..=big_d);
        match bounded_degree_subgraph(&i, d) {
            Ok(q) if q.edge_count() * (big_d + 1) >= d * i.edge_count() && q.max_degree() <= d && q.is_subgraph_of(&i) => {}
            other => {
                pass = false;
                notes.push(format!("bounded degree failed: n = {n}, d = {d}, {:?}", other.map(|q| q.edge_count())));
                break;
            }
        }
        done += 1;
    }
    notes.push("bounded-degree inequality on 200 instances".into());

    let k3 = Graph::complete(3);
    let (mut built, mut kinds) = (0, [0usize; 3]);
    for s in 0..100u64 {
        let n = 8 + (s as usize % 7);
        let p = [0.3, 0.6, 0.9][s as usize % 3];
        let g = match sample_gnp(n, p, &RngStream::new(41, s)) {
            Ok(g) => g,
            Err(e) => return outcome(false, e.to_string()),
        };
        let f = if s % 2 == 0 { g.clone() } else { max_h_free_with(&g, &k3, &no_shortcuts()).unwrap().1 };
        let cut = simonovits_core::extremal::canonical_cut(&f, 2).unwrap();
        let prm = QfParams {
            kappa: [0.05, 0.5][s as usize % 2],
            eta: [0.04, 0.1, 0.25][s as usize % 3],
            p,
        };
        if let Ok(qf) = construct_qf(&f, &cut, &prm) {
            built += 1;
            kinds[match qf.kind {
                QKind::Ql1 => 0,
                QKind::Ql2 => 1,
                QKind::Qh => 2,
            }] += 1;
            if !qf.clause_holds {
                pass = false;
                notes.push(format!("clause {:?} fails on seed {s}: {} < {}", qf.clause, qf.clause_lhs, qf.clause_rhs));
            }
        }
    }
    notes.push(format!("Q_F clauses on {built}/100 constructions (L1/L2/H = {kinds:?})"));

    let mut worst_c: f64 = 1.0;
    let mut cases = 0;
    for s in 0..30u64 {
        let mut rng = RngStream::new(43, s).rng();
        let n = 24;
        let (eta, p) = (0.25, 0.5);
        let t = QfParams { kappa: 1.0, eta, p }.eta_np(n);
        let cut = PartTuple::new(n, vec![(0..n / 2).collect(), (n / 2..n).collect()]).unwrap();
        let k = rng.random_range(1..=4);
        let centres: Vec<usize> = (0..k).collect();
        let mut qg = Graph::new(n);
        for &c in &centres {
            for (lo, hi) in [(k, n / 2), (n / 2, n)] {
                let mut picked = 0;
                while picked < t {
                    let u = rng.random_range(lo..hi);
                    if qg.add_edge(c, u) {
                        picked += 1;
                    }
                }
            }
        }
        let q = ColoredGraph::from_cut(qg, &cut)
            .unwrap()
            .with_centres(BitSet::from_iter(n, centres.iter().copied()))
            .unwrap();
        let g = random_graph(&mut rng, n, p).union(q.graph());
        for l in [[1usize, 1], [2, 0], [1, 0]] {
            let hyp = match neighbourhood_hypergraph(&g, &q, &l, eta, p) {
                Ok(h) => h,
                Err(e) => return outcome(false, format!("neighbourhood hypergraph: {e}")),
            };
            cases += 1;
            let ell: usize = l.iter().sum();
            let np = n as f64 * p;
            let e = hyp.sets.len() as f64;
            for (set, &v) in hyp.sets.iter().zip(&hyp.centre) {
                let profile: Vec<usize> = (0..2)
                    .map(|c| set.iter().filter(|&&x| q.graph().has_edge(v, x as usize) && q.colour(x as usize) == Some(c)).count())
                    .collect();
                if profile != l || set.len() != ell {
                    pass = false;
                    notes.push(format!("hyperedge {set:?} of centre {v} has profile {profile:?}"));
                }
            }
            for (j, &dj) in hyp.codegrees.iter().enumerate() {
                let cap = (4.0 * np.powi((ell - j.min(ell)) as i32)).max(hyp.fitted_big_c * e / (n as f64).powi(j as i32));
                if dj as f64 > cap + FLOAT_TOL {
                    pass = false;
                    notes.push(format!("level {j}: degree {dj} above cap {cap}"));
                }
            }
            worst_c = worst_c.max(hyp.fitted_big_c);
        }
    }
    notes.push(format!("degree caps on {cases} neighbourhood hypergraphs, fitted C <= {worst_c:.3}"));
    outcome(pass, notes.join("; "))
}

/// Rigidity checks on one graph; returns whether the graph was rigid.
fn rigidity_case(g: &Graph, fam: &CutFamily, alpha: f64) -> Result<bool, String> {
    let rep = equivalence_and_rigidity(g, fam, alpha, Threshold::Corrected).map_err(|e| e.to_string())?;
    if !rep.rigid {
        return Ok(false);
    }
    let core = rep.core.as_ref().ok_or_else(|| format!("rigid without a core: {:?}", g.edges()))?;
    if !rep.core_unique {
        return Err(format!("core not unique: {:?}", g.edges()));
    }
    if core.sizes().iter().any(|&s| s as f64 <= rep.core_bound) {
        return Err(format!("core part sizes {:?} not above {}", core.sizes(), rep.core_bound));
    }
    let crit = crit_edges(g, fam);
    let missing = uncovered_core_edges(g, &crit, core);
    if !missing.is_empty() {
        return Err(format!("crossing core edges {missing:?} not critical in {:?}", g.edges()));
    }
    Ok(true)
}

const RIGIDITY_ALPHA: f64 = 0.1;
/// Smallest round value giving every `n <= 8` a nonempty balanced family.
const RIGIDITY_DELTA: f64 = 0.35;

fn rigidity() -> Outcome {
    let (mut graphs, mut rigid) = (0, 0);
    for n in 2..=5 {
        let fam = CutFamily::enumerate(n, 2, RIGIDITY_DELTA, None).expect("small family");
        let m = num_pairs(n);
        for mask in 0u32..1 << m {
            let g = Graph::from_edge_set(n, &BitSet::from_iter(m, (0..m).filter(|&i| mask >> i & 1 == 1)));
            graphs += 1;
            match rigidity_case(&g, &fam, RIGIDITY_ALPHA) {
                Ok(r) => rigid += r as usize,
                Err(e) => return outcome(false, format!("n = {n}: {e}")),
            }
        }
    }
    let exhaustive = (graphs, rigid);
    let mut rng = RngStream::new(53, 0).rng();
    let fams: Vec<CutFamily> = (6..=8).map(|n| CutFamily::enumerate(n, 2, RIGIDITY_DELTA, None).unwrap()).collect();
    let mut sampled_rigid = 0;
    for _ in 0..500 {
        let n = rng.random_range(6..=8);
        let g = {
            let p = rng.random_range(0.2..=1.0);
            random_graph(&mut rng, n, p)
        };
        match rigidity_case(&g, &fams[n - 6], RIGIDITY_ALPHA) {
            Ok(r) => sampled_rigid += r as usize,
            Err(e) => return outcome(false, format!("n = {n}: {e}")),
        }
    }
    outcome(
        true,
        format!(
            "all {} labelled graphs on n <= 5 ({} rigid) and 500 sampled on n = 6..8 ({sampled_rigid} rigid); alpha {RIGIDITY_ALPHA}, delta {RIGIDITY_DELTA}",
            exhaustive.0, exhaustive.1
        ),
    )
}

fn scan_smoke() -> Outcome {
    let cfg = ExperimentConfig {
        task: Task::ScanThreshold,
        pattern: "triangle".into(),
        n_grid: vec![12],
        p_grid: None,
        p_multipliers: Some(vec![0.25, 0.5, 1.0, 2.0, 4.0]),
        trials: 20,
        seed: 12,
        constants: ConstantsSpec::default(),
        lemma: None,
        output: Output {
            path: "scan.csv".into(),
            format: Format::Csv,
        },
    };
    let h = Graph::complete(3);
    let run = || scan_threshold(&cfg, &h, &SolverOptions::default()).and_then(|t| Ok((to_csv(&t)?, t)));
    let (a, b) = match (run(), run()) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
    };
    let rows = &a.1.rows;
    let (bottom, top) = (rows[0].yes_rate(), rows[rows.len() - 1].yes_rate());
    let rates: Vec<String> = rows.iter().map(|r| format!("{:.2}", r.yes_rate())).collect();
    outcome(
        top >= bottom && a.0 == b.0,
        format!("yes-rates [{}], reruns identical: {}", rates.join(", "), a.0 == b.0),
    )
}

fn peeling() -> Outcome {
    let k3 = Graph::complete(3);
    let mut rng = RngStream::new(61, 0).rng();
    let (mut bipartite, mut complete) = (0, 0);
    for i in 0..50 {
        let n = 5 + i % 10;
        let min_deg = dense_min_degree_bound(2, n).min(n - 1);
        let mut g = Graph::complete(n);
        let mut pairs: Vec<(usize, usize)> = g.edges();
        for k in (1..pairs.len()).rev() {
            pairs.swap(k, rng.random_range(0..=k));
        }
        for (u, v) in pairs {
            if g.degree(u) > min_deg && g.degree(v) > min_deg {
                g.remove_edge(u, v);
            }
        }
        complete += (g.edge_count() == num_pairs(n)) as usize;
        match max_h_free_with(&g, &k3, &no_shortcuts()) {
            Ok((_, f)) if f.is_bipartite() => bipartite += 1,
            Ok(_) => return outcome(false, format!("non-bipartite optimum on {:?}", g.edges())),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    outcome(
        bipartite == 50,
        format!("50 of 50 optima bipartite, n = 5..14; {complete} hosts are complete because the degree bound exceeds n - 1"),
    )
}

type Criterion = (&'static str, fn() -> Outcome, u64);

fn main() {
    let criteria: [Criterion; 9] = [
        ("constants", constants_suite, 10),
        ("turan-oracle", turan_oracle, 60),
        ("simonovits-decisions", simonovits_decisions, 60),
        ("janson-suite", janson, 600),
        ("switching-validator", switching, 300),
        ("structure-suite", structure, 600),
        ("rigidity-suite", rigidity, 600),
        ("threshold-scan-smoke", scan_smoke, 900),
        ("dense-peeling", peeling, 600),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let mut out = check();
        let took = start.elapsed();
        if took > Duration::from_secs(limit) {
            out.pass = false;
            out.detail.push_str(&format!("; over the {limit} s limit"));
        }
        failed += !out.pass as usize;
        println!(
            "{} {name} ({:.1} s): {}",
            if out.pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            out.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
