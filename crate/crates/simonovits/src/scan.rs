//! Monte Carlo scan of the Simonovits property over an `(n, p)` grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use simonovits_core::extremal::{is_simonovits_with, Certificate, Decision, SolverOptions};
use simonovits_core::pattern::{p_threshold_unclipped, PatternProfile};
use simonovits_core::random::{sample_gnp, RngStream};
use simonovits_core::Graph;

use crate::config::{ExperimentConfig, PAxis};
use crate::error::AppError;

/// Hosts above this order are refused outright.
pub const MAX_SCAN_N: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    pub p: f64,
    #[serde(rename = "p/p_H")]
    pub p_over_ph: f64,
    pub yes: usize,
    pub no: usize,
    pub indeterminate: usize,
    pub witness_rate: f64,
    /// Mean branch-and-bound nodes per trial; a deterministic cost measure.
    pub mean_runtime: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// Cells in which every trial was indeterminate.
    pub flagged: Vec<(usize, f64)>,
}

impl ScanRow {
    pub fn yes_rate(&self) -> f64 {
        self.yes as f64 / (self.yes + self.no + self.indeterminate).max(1) as f64
    }
}

/// `θ_H·n^{−1/m₂}·(ln n)^{1/(e_H−1)}`, unclipped.
pub fn p_h(profile: &PatternProfile, n: usize) -> Result<f64, AppError> {
    Ok(p_threshold_unclipped(profile, n, 0.0, std::f64::consts::E)?)
}

/// The `(n, p)` cells of a scan in row order.
pub fn cells(cfg: &ExperimentConfig, profile: &PatternProfile) -> Result<Vec<(usize, f64)>, AppError> {
    let mut out = Vec::new();
    for &n in &cfg.n_grid {
        match cfg.p_axis() {
            PAxis::Absolute(ps) => out.extend(ps.iter().map(|&p| (n, p))),
            PAxis::Multipliers(ms) => {
                let base = p_h(profile, n)?;
                out.extend(ms.iter().map(|&m| (n, (m * base).clamp(0.0, 1.0))));
            }
        }
    }
    Ok(out)
}

struct Trial {
    decision: Decision,
    witness: bool,
    nodes: u64,
}

/// Trial `t` of cell `c` draws from stream `(c << 32) | t` of the seed.
pub fn trial_stream(seed: u64, cell: usize, trial: usize) -> RngStream {
    RngStream::new(seed, ((cell as u64) << 32) | trial as u64)
}

pub fn scan_threshold(cfg: &ExperimentConfig, h: &Graph, opts: &SolverOptions) -> Result<ScanTable, AppError> {
    cfg.validate()?;
    if let Some(&n) = cfg.n_grid.iter().find(|&&n| n > MAX_SCAN_N) {
        return Err(AppError::Guard(format!("n = {n} exceeds the scan limit {MAX_SCAN_N}")));
    }
    let profile = PatternProfile::analyze(h)?;
    let grid = cells(cfg, &profile)?;
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let results: Vec<Trial> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (n, p) = grid[c];
            let g = sample_gnp(n, p, &trial_stream(cfg.seed, c, t))?;
            let v = is_simonovits_with(&g, h, &profile, opts)?;
            Ok(Trial {
                decision: v.decision,
                witness: matches!(v.certificate, Certificate::FreeEdges { .. }),
                nodes: v.nodes,
            })
        })
        .collect::<Result<_, AppError>>()?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut flagged = Vec::new();
    for (c, chunk) in results.chunks(cfg.trials).enumerate() {
        let (n, p) = grid[c];
        let count = |d: Decision| chunk.iter().filter(|t| t.decision == d).count();
        let trials = chunk.len() as f64;
        let row = ScanRow {
            n,
            p,
            p_over_ph: p / p_h(&profile, n)?,
            yes: count(Decision::Yes),
            no: count(Decision::No),
            indeterminate: count(Decision::Indeterminate),
            witness_rate: chunk.iter().filter(|t| t.witness).count() as f64 / trials,
            mean_runtime: chunk.iter().map(|t| t.nodes as f64).sum::<f64>() / trials,
        };
        if row.indeterminate == chunk.len() {
            flagged.push((n, p));
        }
        rows.push(row);
    }
    Ok(ScanTable { rows, flagged })
}

pub fn to_csv(table: &ScanTable) -> Result<Vec<u8>, AppError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &table.rows {
        w.serialize(row).map_err(|e| AppError::Output(e.to_string()))?;
    }
    w.into_inner().map_err(|e| AppError::Output(e.to_string()))
}
