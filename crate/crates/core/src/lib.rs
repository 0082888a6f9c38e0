//! Ground reaction force estimation from a four-sensor piezoresistive insole.
//!
//! The pipeline converts divider voltages to relative resistance change,
//! identifies linear and Hammerstein-Wiener models from the four channels to
//! the vertical and mediolateral ground reaction force, segments gait cycles,
//! and scores estimates with the usual fit metrics. A synthetic gait and
//! sensor generator provides ground truth for testing.
//!
//! Signal and model types are generic over [`Scalar`] (`f32` or `f64`);
//! the aliases below fix the precision used by identification and the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dataio;
pub mod gait;
pub mod ident;
pub mod metrics;
pub mod error;
pub mod model;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Series = dataio::ChannelSeries<f64>;
pub type Series32 = dataio::ChannelSeries<f32>;
pub type Pwl = model::PwlFunction<f64>;
pub type Pwl32 = model::PwlFunction<f32>;
pub type Lti = model::LtiBlock<f64>;
pub type Lti32 = model::LtiBlock<f32>;
pub type Hw = model::HwModel<f64>;
pub type Hw32 = model::HwModel<f32>;
pub type Linear = model::LinearModel<f64>;
pub type Linear32 = model::LinearModel<f32>;
pub type TrialF64 = dataio::Trial<f64>;
