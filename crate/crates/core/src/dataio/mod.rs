//! Ingest and conditioning of insole and force-plate recordings.

mod convert;
mod csvio;
mod meta;
mod series;
mod sync;

pub use convert::{baseline_r0, resistance_to_delta, volts_to_resistance, AdcConfig, MAX_INVALID_FRACTION};
pub use csvio::{read_grf, read_grf_file, read_insole, read_insole_file, write_grf, write_insole, GRF_HEADER, INSOLE_HEADER};
pub use meta::{
    build_trial, condition_insole, load_trial, parse_trial_csv, resistance_to_volts, InsoleUnits, SyncConfig,
    TrialMeta,
};
pub use series::{Channel, ChannelSeries, Component, GrfRecording, InsoleRecording, Role, Side, Trial, Unit};
pub use sync::{refine_offset, resample_sync, DEFAULT_TARGET_HZ, MIN_OVERLAP_S};
