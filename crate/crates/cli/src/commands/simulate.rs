use insole_grf::sim::{dataset_files, synth_dataset};
use insole_grf::Result;

use crate::config::RunConfig;
use crate::output::Outputs;

/// Synthetic dataset: recordings, metadata and truth sidecars for every
/// repetition × speed × foot, written flat into the output directory.
pub fn run(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let trials = synth_dataset(&cfg.simulate, cfg.seed)?;
    for (name, bytes) in dataset_files(&trials)? {
        out.add(&name, bytes)?;
    }
    eprintln!("simulated {} trials into {}", trials.len(), out.root().display());
    Ok(())
}
