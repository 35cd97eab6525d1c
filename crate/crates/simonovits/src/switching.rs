//! Builds switching-process instances on small random hosts and runs them.

use rand::Rng;
use serde::{Deserialize, Serialize};
use simonovits_core::bitset::BitSet;
use simonovits_core::bounds::Constants;
use simonovits_core::hypergraph::{residual_family, Residual};
use simonovits_core::random::{sample_gnp, RngStream};
use simonovits_core::rigidity::{
    run_switching, validate_trace, CutFamily, SwitchParams, SwitchTrace, Threshold, TraceReport,
};
use simonovits_core::{ColoredGraph, CopyHypergraph, Graph, PartTuple};

use crate::error::AppError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QShape {
    /// One edge `{0, 1}` with both ends in class 0; low residual family.
    Low,
    /// Centre 0 in class 0 joined to leaves 1 and 2 in class 1; high residual family.
    Star,
}

#[derive(Clone, Debug)]
pub struct SwitchSetup {
    pub pattern: Graph,
    pub n: usize,
    pub p: f64,
    pub shape: QShape,
    pub m: Option<usize>,
    pub max_steps: usize,
    pub seed: u64,
    pub stream: u64,
    pub constants: Constants,
}

impl SwitchSetup {
    pub fn new(pattern: Graph) -> Self {
        SwitchSetup {
            pattern,
            n: 12,
            p: 0.5,
            shape: QShape::Low,
            m: Some(3),
            max_steps: 200,
            seed: 0,
            stream: 0,
            constants: Constants::paper_defaults(),
        }
    }
}

pub struct Instance {
    pub g0: Graph,
    pub q: ColoredGraph,
    pub cut: PartTuple,
    pub family: CutFamily,
    pub residual: CopyHypergraph,
}

pub fn shape_q(shape: QShape, n: usize, r: usize) -> Result<ColoredGraph, AppError> {
    let mut colour = vec![None; n];
    let q = match shape {
        QShape::Low => {
            colour[0] = Some(0);
            colour[1] = Some(0);
            ColoredGraph::new(Graph::from_edges(n, &[(0, 1)])?, r, colour)?
        }
        QShape::Star => {
            colour[0] = Some(0);
            colour[1] = Some(1);
            colour[2] = Some(1);
            ColoredGraph::new(Graph::from_edges(n, &[(0, 1), (0, 2)])?, r, colour)?
                .with_centres(BitSet::from_iter(n, [0]))?
        }
    };
    Ok(q)
}

/// Host `G(n, p) ∪ Q` drawn from stream `2·stream`; the cut is a uniform
/// member of the `Q`-compatible balanced family drawn from `2·stream + 1`.
pub fn build_instance(s: &SwitchSetup) -> Result<Instance, AppError> {
    let r = s.pattern.chromatic_number().saturating_sub(1).max(1);
    let q = shape_q(s.shape, s.n, r)?;
    let g0 = sample_gnp(s.n, s.p, &RngStream::new(s.seed, 2 * s.stream))?.union(q.graph());
    let family = CutFamily::enumerate(s.n, r, s.constants.delta, Some(&q))?;
    if family.is_empty() {
        return Err(AppError::Core(simonovits_core::Error::Infeasible(
            "no balanced cut is compatible with Q".into(),
        )));
    }
    let k = RngStream::new(s.seed, 2 * s.stream + 1).rng().random_range(0..family.len());
    let cut = family.cut(k);
    let copies = CopyHypergraph::enumerate_copies(&s.pattern, &Graph::complete(s.n));
    let variant = match s.shape {
        QShape::Low => Residual::Low,
        QShape::Star => Residual::High,
    };
    let residual = residual_family(&copies, &q, variant, &s.pattern)?;
    Ok(Instance {
        g0,
        q,
        cut,
        family,
        residual,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SwitchOutcome {
    pub trace: SwitchTrace,
    pub validation: TraceReport,
}

pub fn params_for(s: &SwitchSetup) -> SwitchParams {
    SwitchParams {
        m: s.m,
        max_steps: s.max_steps,
        alpha: s.constants.alpha,
        gamma: None,
        p: s.p,
        threshold: Threshold::Corrected,
        seed: s.seed,
        stream: s.stream,
    }
}

/// Runs the process and validates the trace against its own initial deficit.
pub fn simulate(s: &SwitchSetup) -> Result<(Instance, SwitchOutcome), AppError> {
    let inst = build_instance(s)?;
    let trace = run_switching(&inst.g0, &inst.q, &inst.cut, &inst.residual, &inst.family, &params_for(s))?;
    let validation = validate_trace(&trace, &inst.q, &inst.cut, trace.initial_deficit, &inst.family);
    Ok((inst, SwitchOutcome { trace, validation }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_shapes_validate() {
        for shape in [QShape::Low, QShape::Star] {
            for stream in 0..3 {
                let mut s = SwitchSetup::new(Graph::complete(3));
                s.shape = shape;
                s.stream = stream;
                let (inst, out) = simulate(&s).unwrap();
                assert!(inst.q.compatible_with(&inst.cut));
                assert!(out.validation.ok(), "{shape:?} {stream}: {:?}", out.validation.violations);
            }
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let s = SwitchSetup::new(Graph::complete(3));
        let a = simulate(&s).unwrap().1.trace;
        let b = simulate(&s).unwrap().1.trace;
        assert_eq!(a, b);
    }
}
