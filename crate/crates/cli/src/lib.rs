//! Command line driver: simulate datasets, identify and validate force
//! models, segment gait, and collect fit tables across runs.

pub mod args;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
pub mod svg;

use insole_grf::{Error, Result};

pub use args::{Cli, Command};
pub use config::RunConfig;

/// Run one parsed command line inside a worker pool capped at `--jobs`.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::load(cli.config.as_deref())?.with_seed(cli.seed);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    pool.install(|| commands::dispatch(cli, &cfg))
}
