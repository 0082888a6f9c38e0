//! Bring insole and force-plate streams onto one uniform time grid.

use super::series::{Channel, ChannelSeries, GrfRecording, InsoleRecording};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Minimum common span after applying the offset.
pub const MIN_OVERLAP_S: f64 = 5.0;

/// Default shared grid rate.
pub const DEFAULT_TARGET_HZ: f64 = 100.0;

fn grid_len(start: f64, end: f64, rate: f64) -> usize {
    ((end - start) * rate + 1e-9).floor() as usize + 1
}

fn resample_onto<T: Scalar>(s: &ChannelSeries<T>, start: f64, n: usize, rate: f64) -> Result<ChannelSeries<T>> {
    let values = (0..n).map(|k| s.sample_at(start + k as f64 / rate)).collect();
    ChannelSeries::new(values, rate, s.unit(), start)
}

/// Shift insole timestamps by `offset_s` and interpolate both recordings onto a
/// shared `target_hz` grid over their overlap.
pub fn resample_sync<T: Scalar>(
    insole: &InsoleRecording<T>,
    grf: &GrfRecording<T>,
    target_hz: f64,
    offset_s: f64,
) -> Result<(InsoleRecording<T>, GrfRecording<T>)> {
    if !(target_hz > 0.0 && target_hz.is_finite()) {
        return Err(Error::InvalidArgument(format!("target rate must be positive, got {target_hz}")));
    }
    if insole.side() != grf.side() {
        return Err(Error::Schema("insole and grf sides differ".into()));
    }
    let ins = insole.channel(Channel::Heel);
    let ins_start = ins.t0() + offset_s;
    let ins_end = ins.t_end() + offset_s;
    let start = ins_start.max(grf.vertical().t0());
    let end = ins_end.min(grf.vertical().t_end());
    let overlap = end - start;
    if !(overlap >= MIN_OVERLAP_S) {
        return Err(Error::InsufficientOverlap { overlap_s: overlap.max(0.0), required_s: MIN_OVERLAP_S });
    }
    let n = grid_len(start, end, target_hz);
    let synced_insole = insole.try_map(|_, s| {
        let shifted = s.clone().with_t0(s.t0() + offset_s);
        resample_onto(&shifted, start, n, target_hz)
    })?;
    let synced_grf = GrfRecording::new(
        resample_onto(grf.vertical(), start, n, target_hz)?,
        resample_onto(grf.mediolateral(), start, n, target_hz)?,
        grf.side(),
    )?;
    Ok((synced_insole, synced_grf))
}

/// Refine a coarse insole-to-plate offset by maximizing the correlation between
/// vertical force and the negated heel resistance change.
///
/// Lags are searched on the `target_hz` grid within `±max_lag_s` of `offset_s`.
pub fn refine_offset<T: Scalar>(
    heel_delta: &ChannelSeries<T>,
    fv: &ChannelSeries<T>,
    target_hz: f64,
    offset_s: f64,
    max_lag_s: f64,
) -> Result<f64> {
    let max_lag = (max_lag_s * target_hz).round() as i64;
    let mut best = (f64::NEG_INFINITY, 0i64);
    for lag in -max_lag..=max_lag {
        let off = offset_s + lag as f64 / target_hz;
        let start = (heel_delta.t0() + off).max(fv.t0());
        let end = (heel_delta.t_end() + off).min(fv.t_end());
        if end - start < MIN_OVERLAP_S {
            continue;
        }
        let n = grid_len(start, end, target_hz);
        let xs: Vec<f64> = (0..n)
            .map(|k| -heel_delta.sample_at(start + k as f64 / target_hz - off).to_f64_lossy())
            .collect();
        let ys: Vec<f64> = (0..n).map(|k| fv.sample_at(start + k as f64 / target_hz).to_f64_lossy()).collect();
        let c = pearson(&xs, &ys);
        if c > best.0 {
            best = (c, lag);
        }
    }
    if best.0 == f64::NEG_INFINITY {
        return Err(Error::InsufficientOverlap { overlap_s: 0.0, required_s: MIN_OVERLAP_S });
    }
    Ok(offset_s + best.1 as f64 / target_hz)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}
