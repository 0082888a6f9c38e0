//! Piezoresistive sensor response: static force-resistance law, first-order
//! lag, backlash hysteresis and additive noise.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::sub_rng;
use crate::dataio::{AdcConfig, ChannelSeries, InsoleRecording, Side, Unit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StaticLaw {
    /// `R = r0 (1 - a F / (F + f_half))`.
    #[default]
    Saturating,
    /// Small-force limit of the saturating law, `R = r0 (1 - a F / f_half)`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelLaw {
    pub r0: f64,
    pub a: f64,
    pub f_half: f64,
    pub lag_tau_s: f64,
    /// Width of the play operator applied to force, in newtons.
    pub hysteresis_width: f64,
    pub noise_sigma: f64,
}

impl ChannelLaw {
    fn validate(&self, law: StaticLaw) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("sensor law: {m}")));
        if !(self.r0 > 0.0) || !(self.f_half > 0.0) {
            return bad(format!("r0 and f_half must be positive (r0 {}, f_half {})", self.r0, self.f_half));
        }
        let a_max = if law == StaticLaw::Saturating { 1.0 } else { f64::INFINITY };
        if !(self.a > 0.0 && self.a < a_max) {
            return bad(format!("sensitivity {} out of range", self.a));
        }
        if !(self.lag_tau_s >= 0.0) || !(self.hysteresis_width >= 0.0) || !(self.noise_sigma >= 0.0) {
            return bad("lag, hysteresis and noise must be non-negative".into());
        }
        Ok(())
    }

    /// Static resistance at force `f` (negative forces count as unloaded).
    pub fn static_resistance(&self, law: StaticLaw, f: f64) -> f64 {
        let f = f.max(0.0);
        match law {
            StaticLaw::Saturating => self.r0 * (1.0 - self.a * f / (f + self.f_half)),
            StaticLaw::Linear => self.r0 * (1.0 - self.a * f / self.f_half),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorLaw {
    pub kind: StaticLaw,
    pub channels: [ChannelLaw; 4],
}

impl SensorLaw {
    /// Default insole for one foot. The two feet differ slightly so that their
    /// models are not interchangeable.
    pub fn default_for(side: Side) -> Self {
        let (r0, a, f_half) = match side {
            Side::Left => ([820.0, 760.0, 900.0, 980.0], [0.72, 0.68, 0.75, 0.70], [120.0, 95.0, 140.0, 85.0]),
            Side::Right => ([850.0, 740.0, 880.0, 1010.0], [0.70, 0.71, 0.73, 0.68], [110.0, 105.0, 130.0, 90.0]),
        };
        let channels = std::array::from_fn(|c| ChannelLaw {
            r0: r0[c],
            a: a[c],
            f_half: f_half[c],
            lag_tau_s: 0.03,
            hysteresis_width: 0.0,
            noise_sigma: 0.5,
        });
        SensorLaw { kind: StaticLaw::Saturating, channels }
    }

    /// Linear law with the small-force slope of this one. Sensitivity is cut
    /// where needed so resistance stays above a fifth of `r0` up to `f_max`.
    pub fn linearized(&self, f_max: f64) -> Self {
        let mut out = self.clone();
        out.kind = StaticLaw::Linear;
        for c in &mut out.channels {
            let cap = 0.8 * c.f_half / f_max;
            c.a = c.a.min(cap);
        }
        out
    }

    pub fn noiseless(mut self) -> Self {
        for c in &mut self.channels {
            c.noise_sigma = 0.0;
        }
        self
    }

    pub fn with_lag(mut self, tau_s: f64) -> Self {
        for c in &mut self.channels {
            c.lag_tau_s = tau_s;
        }
        self
    }

    pub fn with_hysteresis(mut self, width: f64) -> Self {
        for c in &mut self.channels {
            c.hysteresis_width = width;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.channels.iter().try_for_each(|c| c.validate(self.kind))
    }
}

/// Backlash (play) operator: the output follows the input only once it has
/// moved more than half the width away.
pub fn play_operator(x: &[f64], width: f64) -> Vec<f64> {
    if width == 0.0 || x.is_empty() {
        return x.to_vec();
    }
    let h = 0.5 * width;
    let mut y = Vec::with_capacity(x.len());
    let mut prev = x[0];
    for &v in x {
        prev = prev.clamp(v - h, v + h);
        y.push(prev);
    }
    y
}

/// Resistance trace of one channel for the given force trace.
pub fn channel_resistance(
    force: &[f64],
    law: &ChannelLaw,
    kind: StaticLaw,
    rate_hz: f64,
    noise: &mut impl FnMut() -> f64,
) -> Result<Vec<f64>> {
    law.validate(kind)?;
    let played = play_operator(force, law.hysteresis_width);
    let alpha = if law.lag_tau_s == 0.0 { 1.0 } else { 1.0 - (-1.0 / (rate_hz * law.lag_tau_s)).exp() };
    let mut out = Vec::with_capacity(force.len());
    let mut state = f64::NAN;
    for &f in &played {
        let target = law.static_resistance(kind, f);
        state = if state.is_nan() { target } else { state + alpha * (target - state) };
        let r = state + noise();
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("sensor resistance {r} not positive; load exceeds the law's range")));
        }
        out.push(r);
    }
    Ok(out)
}

/// Resistance recording of the four channels. Noise is drawn from a stream
/// seeded by `seed` and the channel.
pub fn synth_sensor(
    forces: &[Vec<f64>; 4],
    law: &SensorLaw,
    rate_hz: f64,
    side: Side,
    seed: u64,
) -> Result<InsoleRecording<f64>> {
    law.validate()?;
    let mut chans = Vec::with_capacity(4);
    for c in 0..4 {
        let cl = &law.channels[c];
        let mut rng = sub_rng(seed, &format!("sensor-{c}"));
        let normal = Normal::new(0.0, cl.noise_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
        let sigma = cl.noise_sigma;
        let mut noise = || if sigma == 0.0 { 0.0 } else { normal.sample(&mut rng) };
        let r = channel_resistance(&forces[c], cl, law.kind, rate_hz, &mut noise)?;
        chans.push(ChannelSeries::new(r, rate_hz, Unit::Ohms, 0.0)?);
    }
    let chans: [ChannelSeries<f64>; 4] = chans.try_into().expect("four channels");
    InsoleRecording::new(chans, side)
}

/// Divider voltages as the acquisition board would report them, quantized to
/// the converter resolution.
pub fn to_adc_volts(ohms: &InsoleRecording<f64>, adc: &AdcConfig) -> Result<InsoleRecording<f64>> {
    adc.validate()?;
    ohms.try_map(|_, s| {
        let v = s.values().iter().map(|&r| adc.quantize(adc.divider_voltage(r))).collect();
        s.with_values(v, Unit::Volts)
    })
}
