//! Identification of linear and Hammerstein-Wiener force models.

mod config;
mod data;
mod grid;
mod hw;
mod linear;
mod lm;

pub use config::IdentConfig;
pub use data::{IdentData, Record};
pub use grid::{grid_search, identify_hw, identify_linear, CandidateFit, IdentResult, ModelKind};
pub use hw::{fit_hw, init_from_linear, input_breakpoints, HwFit, HwProblem, PERTURB_FRAC};
pub use linear::{equation_error_init, fit_linear, LinearProblem};
pub use lm::{levenberg_marquardt, stabilize, sum_sq, LmOutcome, LmSettings, LsqProblem, LAMBDA0, REFLECT_RADIUS};

use sha2::{Digest, Sha256};

use crate::dataio::Trial;

/// Hex SHA-256 over the samples of `trials`, in order.
pub fn dataset_hash(trials: &[&Trial<f64>]) -> String {
    let mut h = Sha256::new();
    for t in trials {
        for c in t.inputs() {
            for v in c {
                h.update(v.to_le_bytes());
            }
        }
        for c in [t.grf().vertical(), t.grf().mediolateral()] {
            for v in c.values() {
                h.update(v.to_le_bytes());
            }
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
