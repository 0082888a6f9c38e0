//! Piecewise-linear nonlinearities, MISO linear blocks and their compositions.

mod file;
mod hw;
mod lti;
mod pwl;

pub use file::{deserialize_model, serialize_model, IdentMeta, ModelFile, MODEL_SCHEMA, MODEL_SCHEMA_VERSION};
pub use hw::{hw_simulate, linear_simulate, lti_apply, ForceModel, HwModel, LinearModel, NormRecord};
pub use lti::{denominator_is_stable, LtiBlock, Orders};
pub use pwl::{quantile_breakpoints, PwlFunction};
