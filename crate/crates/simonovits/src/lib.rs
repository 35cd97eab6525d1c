//! Command-line tools, file formats and Monte Carlo experiments built on
//! `simonovits-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod lemmas;
pub mod scan;
pub mod switching;

pub use error::AppError;

/// Environment variable holding the worker thread count.
pub const THREADS_VAR: &str = "SIMONOVITS_THREADS";

/// Sizes the global worker pool from [`THREADS_VAR`] when it holds a
/// positive integer. Results do not depend on the thread count.
pub fn init_threads() {
    let threads = std::env::var(THREADS_VAR).ok().and_then(|s| s.trim().parse::<usize>().ok());
    if let Some(t) = threads.filter(|&t| t > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}
