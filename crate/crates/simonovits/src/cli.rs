use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use simonovits_core::extremal::{is_simonovits_with, Decision, SolverOptions};
use simonovits_core::PatternProfile;

use crate::config::{ExperimentConfig, Format, PAxis, Task};
use crate::error::{exit, AppError};
use crate::io::{load_graph, to_json_pretty, write_atomic};
use crate::lemmas::{verify_lemma, Lemma, LemmaOptions};
use crate::scan::{scan_threshold, to_csv, ScanTable};
use crate::switching::{simulate, QShape, SwitchSetup};

#[derive(Debug, Parser)]
#[command(name = "simonovits", version, about = "Largest H-free subgraphs of small random graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Disable closed-form answers such as Turán graphs for clique patterns.
    #[arg(long)]
    pub no_shortcuts: bool,
    #[arg(long, default_value_t = SolverOptions::default().node_budget)]
    pub node_budget: u64,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            shortcuts: !self.no_shortcuts,
            node_budget: self.node_budget,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the profile of a pattern graph as JSON.
    AnalyzePattern {
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Decide whether every largest H-free subgraph of a host is r-partite.
    /// Exits 0 for yes, 3 for no and 4 when undecided.
    CheckSimonovits {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        json_out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Monte Carlo scan over an (n, p) grid, written as CSV.
    ScanThreshold {
        #[arg(long, default_value = "triangle")]
        pattern: String,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Absolute probabilities; overrides --multipliers.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        multipliers: Option<Vec<f64>>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run the switching process on a random instance and print the trace.
    SimulateSwitching {
        #[arg(long, default_value = "triangle")]
        pattern: String,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, value_enum, default_value_t = QShape::Low)]
        shape: QShape,
        /// Threshold for removal steps on residual copies; 0 disables them.
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 200)]
        max_steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Check one lemma numerically and print a JSON report.
    VerifyLemma {
        #[arg(long, value_enum)]
        lemma: Lemma,
        #[arg(long, default_value = "triangle")]
        pattern: String,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 0.6)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Execute an experiment described by a TOML file.
    RunConfig { path: PathBuf },
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), AppError> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn warn_flagged(table: &ScanTable) {
    for (n, p) in &table.flagged {
        eprintln!("warning: every trial at n = {n}, p = {p} was indeterminate");
    }
}

/// Runs a command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, AppError> {
    match cli.command {
        Command::AnalyzePattern { pattern, json_out } => {
            let profile = PatternProfile::analyze(&load_graph(&pattern)?)?;
            emit(&to_json_pretty(&profile), json_out.as_deref())?;
            Ok(exit::OK)
        }
        Command::CheckSimonovits {
            graph,
            pattern,
            json_out,
            solver,
        } => {
            let g = load_graph(&graph)?;
            let h = load_graph(&pattern)?;
            let profile = PatternProfile::analyze(&h)?;
            let verdict = is_simonovits_with(&g, &h, &profile, &solver.options())?;
            emit(&to_json_pretty(&verdict), json_out.as_deref())?;
            Ok(match verdict.decision {
                Decision::Yes => exit::OK,
                Decision::No => exit::NO,
                Decision::Indeterminate => exit::INDETERMINATE,
            })
        }
        Command::ScanThreshold {
            pattern,
            n,
            p,
            multipliers,
            trials,
            seed,
            out,
            solver,
        } => {
            let cfg = ExperimentConfig {
                task: Task::ScanThreshold,
                pattern,
                n_grid: n,
                p_grid: p,
                p_multipliers: multipliers,
                trials,
                seed,
                constants: Default::default(),
                lemma: None,
                output: crate::config::Output {
                    path: out.clone().unwrap_or_default(),
                    format: Format::Csv,
                },
            };
            cfg.validate()?;
            let table = scan_threshold(&cfg, &load_graph(&cfg.pattern)?, &solver.options())?;
            warn_flagged(&table);
            let csv = to_csv(&table)?;
            emit(&String::from_utf8_lossy(&csv), out.as_deref())?;
            Ok(exit::OK)
        }
        Command::SimulateSwitching {
            pattern,
            n,
            p,
            shape,
            m,
            max_steps,
            seed,
            stream,
            json_out,
        } => {
            let mut setup = SwitchSetup::new(load_graph(&pattern)?);
            setup.n = n;
            setup.p = p;
            setup.shape = shape;
            setup.m = (m > 0).then_some(m);
            setup.max_steps = max_steps;
            setup.seed = seed;
            setup.stream = stream;
            let (_, outcome) = simulate(&setup)?;
            emit(&to_json_pretty(&outcome), json_out.as_deref())?;
            Ok(exit::OK)
        }
        Command::VerifyLemma {
            lemma,
            pattern,
            n,
            p,
            trials,
            seed,
            json_out,
        } => {
            let mut opts = LemmaOptions::new(load_graph(&pattern)?);
            opts.n = n;
            opts.p = p;
            opts.trials = trials;
            opts.seed = seed;
            let report = verify_lemma(lemma, &opts)?;
            emit(&to_json_pretty(&report), json_out.as_deref())?;
            Ok(exit::OK)
        }
        Command::RunConfig { path } => run_config(&path),
    }
}

/// Executes the experiment in `path`; outputs are written atomically.
pub fn run_config(path: &Path) -> Result<i32, AppError> {
    let cfg = ExperimentConfig::load(path)?;
    let constants = cfg.constants.resolve()?;
    let h = load_graph(&cfg.pattern).map_err(|e| AppError::Config(e.to_string()))?;
    let bytes = match cfg.task {
        Task::ScanThreshold => {
            let table = scan_threshold(&cfg, &h, &SolverOptions::default())?;
            warn_flagged(&table);
            match cfg.output.format {
                Format::Csv => to_csv(&table)?,
                Format::Json => to_json_pretty(&table).into_bytes(),
            }
        }
        Task::VerifyLemma => {
            let lemma = cfg.lemma.ok_or_else(|| AppError::Config("missing lemma".into()))?;
            let mut opts = LemmaOptions::new(h);
            opts.n = cfg.n_grid[0];
            if let PAxis::Absolute(ps) = cfg.p_axis() {
                opts.p = ps[0];
            }
            opts.trials = cfg.trials;
            opts.seed = cfg.seed;
            opts.delta = constants.delta;
            opts.constants = constants;
            to_json_pretty(&verify_lemma(lemma, &opts)?).into_bytes()
        }
    };
    write_atomic(&cfg.output.path, &bytes)?;
    Ok(exit::OK)
}
