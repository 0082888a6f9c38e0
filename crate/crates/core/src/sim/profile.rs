//! Parametric stance templates and stride timelines for both feet.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sub_rng;
use crate::dataio::{ChannelSeries, GrfRecording, Side, Unit};
use crate::error::{Error, Result};

/// Fraction of stance covered by the mid-stance valley on either side of its centre.
const VALLEY_HALF_WIDTH: f64 = 0.3;
/// Ramp width of the channel load windows, in percent of the cycle.
const WINDOW_RAMP_PCT: f64 = 6.0;
const ML_RAMP: f64 = 0.1;
const ML_VALLEY_DEPTH: f64 = 0.75;
const ML_VALLEY_HALF_WIDTH: f64 = 0.32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitProfile {
    pub speed_mps: f64,
    /// Stride period.
    pub cycle_s: f64,
    /// Stance fraction of the cycle.
    pub duty: f64,
    pub fv_peak_n: f64,
    /// Depth of the mid-stance valley relative to the peak.
    pub fv_trough_frac: f64,
    pub ml_peak_n: f64,
    /// Per-channel full-load window `[onset, offset]` in percent of the cycle.
    pub phase_onsets: [[f64; 2]; 4],
    pub body_weight_n: f64,
    /// Uniform stride period jitter, as a fraction.
    pub period_jitter: f64,
    pub amplitude_jitter: f64,
    /// Quiet standing before walking; used as the resistance baseline.
    pub stand_s: f64,
}

impl GaitProfile {
    /// Default profile at the given treadmill speed. The stride shortens from
    /// 1.1 s at 1 m/s to 0.9 s at 2 m/s and the peak grows slightly with speed.
    pub fn for_speed(speed_mps: f64) -> Self {
        let bw = 700.0;
        GaitProfile {
            speed_mps,
            cycle_s: 1.1 - 0.2 * (speed_mps - 1.0),
            duty: 0.62,
            fv_peak_n: 1.1 * bw * (1.0 + 0.08 * (speed_mps - 1.0)),
            fv_trough_frac: 0.75,
            ml_peak_n: 40.0 * (1.0 + 0.2 * (speed_mps - 1.0)),
            phase_onsets: [[0.0, 36.0], [6.0, 46.0], [12.0, 56.0], [20.0, 64.0]],
            body_weight_n: bw,
            period_jitter: 0.02,
            amplitude_jitter: 0.03,
            stand_s: 2.0,
        }
    }

    pub fn without_jitter(mut self) -> Self {
        self.period_jitter = 0.0;
        self.amplitude_jitter = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("gait profile: {m}")));
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return bad("duty must be in (0, 1)");
        }
        if !(self.fv_peak_n > 0.0) || !(self.body_weight_n > 0.0) {
            return bad("peak force and body weight must be positive");
        }
        if !(self.cycle_s > 0.0) {
            return bad("cycle period must be positive");
        }
        if !(0.0..1.0).contains(&self.fv_trough_frac) {
            return bad("trough fraction must be in [0, 1)");
        }
        if !(0.0..0.5).contains(&self.period_jitter) || !(0.0..0.5).contains(&self.amplitude_jitter) {
            return bad("jitter must be in [0, 0.5)");
        }
        if !(self.stand_s >= 0.0) {
            return bad("standing time must be non-negative");
        }
        let on = &self.phase_onsets;
        if on.iter().any(|w| !(w[0] < w[1])) {
            return bad("each load window needs onset < offset");
        }
        if !on.windows(2).all(|p| p[0][0] <= p[1][0]) {
            return bad("onsets must be ordered heel, midfoot, metatarsal, toe");
        }
        let stance_pct = 100.0 * self.duty;
        for i in 0..200 {
            let p = stance_pct * i as f64 / 199.0;
            if channel_weights(on, p).iter().sum::<f64>() <= 0.0 {
                return bad("load windows leave part of stance uncovered");
            }
        }
        Ok(())
    }

    /// Ramp width of the vertical template that makes the two feet together
    /// carry body weight on average over a stride.
    pub fn ramp_frac(&self) -> f64 {
        let target = self.body_weight_n / (2.0 * self.fv_peak_n * self.duty);
        let d = 1.0 - self.fv_trough_frac;
        let mean = |e: f64| stance_mean(|s| vertical_shape(s, e, d), 2000);
        // mean decreases with the ramp width
        let (mut lo, mut hi) = (1e-3, 0.5);
        if target >= mean(lo) {
            return lo;
        }
        if target <= mean(hi) {
            return hi;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mean(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn stance_mean(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    // midpoint rule on [0, 1]
    (0..n).map(|i| f((i as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64
}

fn rise(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        (0.5 * PI * x).sin().powi(2)
    }
}

fn valley(s: f64, half_width: f64) -> f64 {
    let u = (s - 0.5) / half_width;
    if u.abs() >= 1.0 { 0.0 } else { (0.5 * PI * u).cos().powi(2) }
}

/// Vertical stance shape on `s ∈ [0, 1]` with unit peak: raised-cosine loading
/// and unloading ramps of width `ramp` and a raised-cosine valley of depth
/// `depth` at mid-stance, giving the usual two-peak profile.
pub fn vertical_shape(s: f64, ramp: f64, depth: f64) -> f64 {
    if !(0.0..=1.0).contains(&s) {
        return 0.0;
    }
    rise(s / ramp) * rise((1.0 - s) / ramp) * (1.0 - depth * valley(s, VALLEY_HALF_WIDTH))
}

/// Mediolateral stance shape with unit peak: a sharp early peak, a deep valley
/// and a slightly weaker late peak.
pub fn mediolateral_shape(s: f64) -> f64 {
    if !(0.0..=1.0).contains(&s) {
        return 0.0;
    }
    let tilt = 1.0 - 0.25 * s;
    rise(s / ML_RAMP) * rise((1.0 - s) / ML_RAMP) * (1.0 - ML_VALLEY_DEPTH * valley(s, ML_VALLEY_HALF_WIDTH)) * tilt
}

/// Smooth trapezoid load weights of the four channels at cycle position `p` (percent).
pub fn channel_weights(windows: &[[f64; 2]; 4], p: f64) -> [f64; 4] {
    let mut w = [0.0; 4];
    for (c, win) in windows.iter().enumerate() {
        w[c] = rise((p - win[0] + WINDOW_RAMP_PCT) / WINDOW_RAMP_PCT) * rise((win[1] + WINDOW_RAMP_PCT - p) / WINDOW_RAMP_PCT);
    }
    w
}

/// Injected contact artifact: the foot touches, lifts off briefly and lands
/// again within `duration_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleBounce {
    pub duration_s: f64,
}

impl DoubleBounce {
    fn gate(&self, tau: f64) -> f64 {
        let (a, b) = (0.3 * self.duration_s, 0.7 * self.duration_s);
        if tau >= a && tau < b { 0.0 } else { 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GrfOptions {
    pub double_bounce: Option<DoubleBounce>,
}

/// One foot's synthetic loading: plate forces, per-channel forces and true contacts.
#[derive(Debug, Clone, PartialEq)]
pub struct FootGait {
    pub grf: GrfRecording<f64>,
    pub channel_forces: [Vec<f64>; 4],
    pub contact_times_s: Vec<f64>,
    /// First sample at or after each contact.
    pub contact_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilateralGait {
    pub left: FootGait,
    pub right: FootGait,
}

impl BilateralGait {
    pub fn foot(&self, side: Side) -> &FootGait {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

struct Stride {
    start: f64,
    period: f64,
    amp: f64,
}

fn jitter(rng: &mut ChaCha8Rng, frac: f64) -> f64 {
    if frac == 0.0 { 1.0 } else { 1.0 + rng.random_range(-frac..=frac) }
}

fn stride_timeline(profile: &GaitProfile, duration_s: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut starts = vec![profile.stand_s];
    let mut periods = Vec::new();
    while *starts.last().unwrap() < duration_s + profile.cycle_s {
        let p = profile.cycle_s * jitter(rng, profile.period_jitter);
        periods.push(p);
        // without jitter, multiply rather than accumulate so strides stay exact copies
        let next = if profile.period_jitter == 0.0 {
            profile.stand_s + periods.len() as f64 * profile.cycle_s
        } else {
            starts.last().unwrap() + p
        };
        starts.push(next);
    }
    starts.pop();
    (starts, periods)
}

fn foot_strides(starts: &[f64], periods: &[f64], shift: f64, profile: &GaitProfile, rng: &mut ChaCha8Rng) -> Vec<Stride> {
    starts
        .iter()
        .zip(periods)
        .map(|(&s, &p)| Stride { start: s + shift * p, period: p, amp: jitter(rng, profile.amplitude_jitter) })
        .collect()
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 { r } else { x }
}

fn stand_level(t: f64, stand_s: f64) -> f64 {
    // full weight until 0.4 s before walking, released over 0.3 s
    let (a, b) = (stand_s - 0.4, stand_s - 0.1);
    if t <= a {
        1.0
    } else if t >= b {
        0.0
    } else {
        1.0 - rise((t - a) / (b - a))
    }
}

fn synth_foot(
    profile: &GaitProfile,
    opts: &GrfOptions,
    strides: &[Stride],
    n: usize,
    rate_hz: f64,
    side: Side,
) -> Result<FootGait> {
    let ramp = profile.ramp_frac();
    let depth = 1.0 - profile.fv_trough_frac;
    let mut fv = vec![0.0; n];
    let mut fml = vec![0.0; n];
    let mut chans: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
    let mut k = 0usize;
    for i in 0..n {
        let t = i as f64 / rate_hz;
        while k + 1 < strides.len() && i as f64 >= snap(strides[k + 1].start * rate_hz) {
            k += 1;
        }
        if profile.stand_s > 0.0 && t < profile.stand_s && (strides.is_empty() || (i as f64) < snap(strides[0].start * rate_hz)) {
            let f = 0.5 * profile.body_weight_n * stand_level(t, profile.stand_s);
            fv[i] = f;
            for c in &mut chans {
                c[i] = 0.25 * f;
            }
            continue;
        }
        let Some(st) = strides.get(k).filter(|st| i as f64 >= snap(st.start * rate_hz)) else { continue };
        let tau = (i as f64 - snap(st.start * rate_hz)) / rate_hz;
        let stance = profile.duty * st.period;
        if tau >= stance {
            continue;
        }
        let s = tau / stance;
        let gate = opts.double_bounce.map_or(1.0, |b| b.gate(tau));
        let f = st.amp * gate * profile.fv_peak_n * vertical_shape(s, ramp, depth);
        fv[i] = f;
        fml[i] = st.amp * gate * profile.ml_peak_n * mediolateral_shape(s);
        let w = channel_weights(&profile.phase_onsets, 100.0 * tau / st.period);
        let total: f64 = w.iter().sum();
        for c in 0..4 {
            chans[c][i] = f * w[c] / total;
        }
    }
    let t_end = (n.saturating_sub(1)) as f64 / rate_hz;
    let contact_times_s: Vec<f64> = strides.iter().map(|s| s.start).filter(|&t| t <= t_end).collect();
    let contact_indices = contact_times_s.iter().map(|t| (t * rate_hz - 1e-9).ceil() as usize).collect();
    let grf = GrfRecording::new(
        ChannelSeries::new(fv, rate_hz, Unit::Newtons, 0.0)?,
        ChannelSeries::new(fml, rate_hz, Unit::Newtons, 0.0)?,
        side,
    )?;
    Ok(FootGait { grf, channel_forces: chans, contact_times_s, contact_indices })
}

/// Synthesize both feet walking for `duration_s` after the standing period.
/// The right foot lands half a stride after the left.
pub fn synth_grf(profile: &GaitProfile, opts: &GrfOptions, duration_s: f64, rate_hz: f64, seed: u64) -> Result<BilateralGait> {
    profile.validate()?;
    if !(rate_hz > 0.0) || !(duration_s > 0.0) {
        return Err(Error::InvalidArgument("duration and rate must be positive".into()));
    }
    let total = profile.stand_s + duration_s;
    let n = (total * rate_hz).round() as usize + 1;
    let mut rng = sub_rng(seed, "strides");
    let (starts, periods) = stride_timeline(profile, total, &mut rng);
    let mut amp_rng = sub_rng(seed, "amplitude");
    let left = foot_strides(&starts, &periods, 0.0, profile, &mut amp_rng);
    let right = foot_strides(&starts, &periods, 0.5, profile, &mut amp_rng);
    Ok(BilateralGait {
        left: synth_foot(profile, opts, &left, n, rate_hz, Side::Left)?,
        right: synth_foot(profile, opts, &right, n, rate_hz, Side::Right)?,
    })
}
