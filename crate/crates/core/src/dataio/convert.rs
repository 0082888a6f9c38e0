//! Voltage divider inversion and relative resistance change.

use serde::{Deserialize, Serialize};

use super::series::{ChannelSeries, Unit};
use crate::error::{Error, Result};
use crate::scalar::{median, Scalar};

/// Readout electronics of one insole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdcConfig {
    /// Divider supply voltage, volts.
    pub v_in: f64,
    /// Bias resistor, ohms.
    pub r_bias: f64,
    pub bits: u32,
}

impl Default for AdcConfig {
    fn default() -> Self {
        AdcConfig { v_in: 5.0, r_bias: 560.0, bits: 16 }
    }
}

impl AdcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_in > 0.0 && self.v_in.is_finite()) {
            return Err(Error::InvalidArgument(format!("adc.v_in must be positive, got {}", self.v_in)));
        }
        if !(self.r_bias > 0.0 && self.r_bias.is_finite()) {
            return Err(Error::InvalidArgument(format!("adc.r_bias must be positive, got {}", self.r_bias)));
        }
        if !(8..=32).contains(&self.bits) {
            return Err(Error::InvalidArgument(format!("adc.bits must be in [8, 32], got {}", self.bits)));
        }
        Ok(())
    }

    /// Resistance seen by the divider for one output voltage.
    pub fn resistance<T: Scalar>(&self, v_out: T) -> T {
        T::lit(self.r_bias) / (T::lit(self.v_in) / v_out - T::one())
    }

    /// Divider output for a sensor resistance (inverse of [`AdcConfig::resistance`]).
    pub fn divider_voltage<T: Scalar>(&self, r: T) -> T {
        T::lit(self.v_in) * r / (r + T::lit(self.r_bias))
    }

    /// Round a voltage to the nearest ADC code over `[0, v_in]`.
    pub fn quantize(&self, v: f64) -> f64 {
        let levels = (2f64.powi(self.bits as i32) - 1.0).max(1.0);
        let code = (v / self.v_in * levels).round().clamp(0.0, levels);
        code / levels * self.v_in
    }
}

/// Fraction of invalid samples above which a record is rejected.
pub const MAX_INVALID_FRACTION: f64 = 0.01;

/// Convert divider voltages to sensor resistance.
///
/// Samples at or below zero, at or above the supply, or non-finite are treated
/// as invalid. Up to 1% invalid samples are repaired by linear interpolation
/// between the nearest valid neighbours; more than that fails the record.
pub fn volts_to_resistance<T: Scalar>(v_out: &ChannelSeries<T>, cfg: &AdcConfig) -> Result<ChannelSeries<T>> {
    cfg.validate()?;
    if v_out.unit() != Unit::Volts {
        return Err(Error::Unit(format!("expected volts, got {:?}", v_out.unit())));
    }
    let v_in = T::lit(cfg.v_in);
    let raw = v_out.values();
    let mut r: Vec<Option<T>> = raw
        .iter()
        .map(|&v| {
            if v.is_finite() && v > T::zero() && v < v_in {
                Some(cfg.resistance(v))
            } else {
                None
            }
        })
        .collect();
    let invalid = r.iter().filter(|x| x.is_none()).count();
    let total = raw.len();
    if total == 0 {
        return Err(Error::EmptyFile("voltage series has no samples".into()));
    }
    if invalid as f64 > MAX_INVALID_FRACTION * total as f64 || invalid == total {
        return Err(Error::InvalidVoltage { count: invalid, total });
    }
    if invalid > 0 {
        fill_gaps(&mut r);
    }
    v_out.with_values(r.into_iter().map(|x| x.expect("gaps filled")).collect(), Unit::Ohms)
}

/// Linear interpolation across `None` runs; edge runs copy the nearest value.
fn fill_gaps<T: Scalar>(xs: &mut [Option<T>]) {
    let n = xs.len();
    let mut i = 0;
    while i < n {
        if xs[i].is_some() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && xs[i].is_none() {
            i += 1;
        }
        let left = start.checked_sub(1).and_then(|j| xs[j]);
        let right = if i < n { xs[i] } else { None };
        for (offset, slot) in xs[start..i].iter_mut().enumerate() {
            *slot = match (left, right) {
                (Some(a), Some(b)) => {
                    let frac = T::from_usize_lossy(offset + 1) / T::from_usize_lossy(i - start + 1);
                    Some(a + (b - a) * frac)
                }
                (Some(a), None) => Some(a),
                (None, Some(b)) => Some(b),
                (None, None) => None,
            };
        }
    }
}

/// Median resistance over the first `window_s` seconds (standing baseline).
pub fn baseline_r0<T: Scalar>(r: &ChannelSeries<T>, window_s: f64) -> Result<T> {
    if !(window_s > 0.0) {
        return Err(Error::InvalidArgument(format!("baseline window must be positive, got {window_s}")));
    }
    if r.is_empty() {
        return Err(Error::EmptyFile("resistance series has no samples".into()));
    }
    let duration = r.len() as f64 / r.rate_hz();
    if window_s > duration + 1e-9 {
        return Err(Error::WindowTooLong { window_s, duration_s: duration });
    }
    let n = ((window_s * r.rate_hz()).round() as usize).clamp(1, r.len());
    Ok(median(&r.values()[..n]))
}

/// Relative resistance change in percent against the baseline `r0`.
pub fn resistance_to_delta<T: Scalar>(r: &ChannelSeries<T>, r0: T) -> Result<ChannelSeries<T>> {
    if !(r0 > T::zero()) {
        return Err(Error::NonPositiveBaseline(r0.to_f64_lossy()));
    }
    if r.unit() != Unit::Ohms {
        return Err(Error::Unit(format!("expected ohms, got {:?}", r.unit())));
    }
    let hundred = T::lit(100.0);
    let delta = r.values().iter().map(|&x| (x - r0) / r0 * hundred).collect();
    r.with_values(delta, Unit::Percent)
}
