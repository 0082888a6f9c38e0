//! Run configuration read from `--config`.

use std::path::Path;

use insole_grf::gait::{DEFAULT_ACTIVATION_FRAC, DEFAULT_MIN_CYCLE_S, DEFAULT_THRESHOLD_FRAC};
use insole_grf::ident::IdentConfig;
use insole_grf::sim::DatasetConfig;
use insole_grf::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitConfig {
    pub threshold_frac: f64,
    pub min_cycle_s: f64,
    pub activation_frac: f64,
}

impl Default for GaitConfig {
    fn default() -> Self {
        GaitConfig {
            threshold_frac: DEFAULT_THRESHOLD_FRAC,
            min_cycle_s: DEFAULT_MIN_CYCLE_S,
            activation_frac: DEFAULT_ACTIVATION_FRAC,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Simulation seed.
    pub seed: u64,
    pub simulate: DatasetConfig,
    pub ident: IdentConfig,
    pub gait: GaitConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Schema(format!("config: {e}")))
    }

    /// Defaults when no file is given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                Self::from_toml(&text)
            }
        }
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
            self.ident.seed = s;
        }
        self
    }
}
