//! Synthetic gait, sensor and truth-model generators used as test oracles.

mod dataset;
mod profile;
mod sensor;
mod truth;

pub use dataset::{dataset_files, synth_dataset, trial_label, write_dataset, DatasetConfig, SimTrial, TrialTruth};
pub use profile::{
    channel_weights, mediolateral_shape, synth_grf, vertical_shape, BilateralGait, DoubleBounce, FootGait, GaitProfile,
    GrfOptions,
};
pub use sensor::{channel_resistance, play_operator, synth_sensor, to_adc_volts, ChannelLaw, SensorLaw, StaticLaw};
pub use truth::{make_truth_hw, truth_excitation, truth_pair, truth_trial, TRUTH_INPUT_RANGE};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Independent seed for a named sub-stream, stable across platforms and releases.
pub fn sub_seed(seed: u64, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(tag.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

pub(crate) fn sub_rng(seed: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(seed, tag))
}
