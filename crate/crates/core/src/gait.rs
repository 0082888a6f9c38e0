//! Heel-strike detection, gait-cycle normalization and stance phase labels.

use serde::{Deserialize, Serialize};

use crate::dataio::{Channel, ChannelSeries};
use crate::error::{Error, Result};
use crate::scalar::{sample_std, sorted_copy, sorted_quantile, Scalar};

/// Samples per normalized cycle: 0%, 1%, ..., 100%.
pub const CYCLE_POINTS: usize = 101;

pub const DEFAULT_THRESHOLD_FRAC: f64 = 0.05;
pub const DEFAULT_MIN_CYCLE_S: f64 = 0.4;
pub const DEFAULT_ACTIVATION_FRAC: f64 = 0.2;

/// Percentile used as the robust signal maximum.
const ROBUST_MAX_QUANTILE: f64 = 0.95;

/// Heel strikes as rising crossings of `threshold_frac` times the 95th
/// percentile of `fv`.
///
/// Each crossing is traced back to the first sample above a fifth of the
/// threshold, which places the event at contact onset rather than partway up
/// the loading ramp. Crossings within `min_cycle_s` of the previous event are
/// ignored.
pub fn detect_heel_strikes<T: Scalar>(fv: &ChannelSeries<T>, threshold_frac: f64, min_cycle_s: f64) -> Result<Vec<usize>> {
    if !(threshold_frac > 0.0 && threshold_frac < 0.5) {
        return Err(Error::InvalidArgument(format!("threshold fraction must be in (0, 0.5), got {threshold_frac}")));
    }
    if !(min_cycle_s > 0.0) {
        return Err(Error::InvalidArgument(format!("minimum cycle must be positive, got {min_cycle_s}")));
    }
    let x = fv.values();
    if x.len() < 2 {
        return Err(Error::NoCyclesFound);
    }
    let robust_max = sorted_quantile(&sorted_copy(x), ROBUST_MAX_QUANTILE);
    if !(robust_max > T::zero()) {
        return Err(Error::NoCyclesFound);
    }
    let thr = robust_max * T::lit(threshold_frac);
    let floor = thr / T::lit(5.0);
    let debounce = (min_cycle_s * fv.rate_hz()).round() as usize;
    let max_backtrack = (debounce / 2).max(1);
    let mut events: Vec<usize> = Vec::new();
    let mut last_crossing: Option<usize> = None;
    for i in 1..x.len() {
        if !(x[i - 1] < thr && x[i] >= thr) {
            continue;
        }
        if let Some(prev) = last_crossing {
            if i - prev < debounce {
                continue;
            }
        }
        last_crossing = Some(i);
        let mut j = i;
        let stop = i.saturating_sub(max_backtrack);
        while j > stop && x[j - 1] > floor {
            j -= 1;
        }
        if let Some(&prev) = events.last() {
            if j <= prev {
                continue;
            }
        }
        events.push(j);
    }
    if events.is_empty() {
        return Err(Error::NoCyclesFound);
    }
    Ok(events)
}

/// Fallback detector on the heel channel: loading lowers resistance, so the
/// negated resistance change rises at contact. The signal is shifted so its
/// unloaded level sits at zero before thresholding.
pub fn detect_heel_strikes_from_heel<T: Scalar>(heel_delta: &ChannelSeries<T>, threshold_frac: f64, min_cycle_s: f64) -> Result<Vec<usize>> {
    let v = heel_delta.values();
    if v.is_empty() {
        return Err(Error::NoCyclesFound);
    }
    let sorted = sorted_copy(v);
    // unloaded level: high resistance end of the distribution
    let top = sorted_quantile(&sorted, 0.95);
    let loaded: Vec<T> = v.iter().map(|&d| (top - d).max(T::zero())).collect();
    let s = heel_delta.with_values(loaded, heel_delta.unit())?;
    detect_heel_strikes(&s, threshold_frac, min_cycle_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    TooShort,
    TooLong,
}

/// One signal cut into normalized cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitSegmentation<T = f64> {
    pub heel_strike_indices: Vec<usize>,
    /// `(cycle id, 101 points)` for every included cycle; cycle `i` spans
    /// events `i` to `i + 1`.
    pub cycles: Vec<(usize, Vec<T>)>,
    pub excluded_cycles: Vec<(usize, ExclusionReason)>,
}

impl<T: Scalar> GaitSegmentation<T> {
    pub fn included_ids(&self) -> Vec<usize> {
        self.cycles.iter().map(|(i, _)| *i).collect()
    }
}

/// Resample each inter-event span onto 101 points. Spans shorter than half or
/// longer than twice the median span are excluded.
pub fn segment_cycles<T: Scalar>(x: &ChannelSeries<T>, events: &[usize]) -> Result<GaitSegmentation<T>> {
    if events.len() < 2 {
        return Err(Error::FewerThanTwoEvents(events.len()));
    }
    if events.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("heel-strike indices must be strictly increasing".into()));
    }
    let v = x.values();
    if *events.last().expect("non-empty") >= v.len() {
        return Err(Error::InvalidArgument("heel-strike index beyond signal end".into()));
    }
    let spans: Vec<usize> = events.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sorted = spans.clone();
    sorted.sort_unstable();
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2] as f64
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) as f64 / 2.0
    };
    let mut cycles = Vec::new();
    let mut excluded = Vec::new();
    for (id, (&start, &len)) in events.iter().zip(&spans).enumerate() {
        let lf = len as f64;
        if lf < 0.5 * median {
            excluded.push((id, ExclusionReason::TooShort));
            continue;
        }
        if lf > 2.0 * median {
            excluded.push((id, ExclusionReason::TooLong));
            continue;
        }
        let row = (0..CYCLE_POINTS)
            .map(|p| {
                let pos = p as f64 * lf / (CYCLE_POINTS - 1) as f64;
                let lo = (pos.floor() as usize).min(len);
                let frac = pos - lo as f64;
                if frac == 0.0 {
                    v[start + lo]
                } else {
                    v[start + lo] + (v[start + lo + 1] - v[start + lo]) * T::lit(frac)
                }
            })
            .collect();
        cycles.push((id, row));
    }
    Ok(GaitSegmentation { heel_strike_indices: events.to_vec(), cycles, excluded_cycles: excluded })
}

/// Pointwise mean and sample standard deviation over included cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleStats<T = f64> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
    pub n: usize,
}

pub fn cycle_stats<T: Scalar>(seg: &GaitSegmentation<T>) -> Result<CycleStats<T>> {
    let n = seg.cycles.len();
    if n == 0 {
        return Err(Error::NoCyclesFound);
    }
    let mut mean = Vec::with_capacity(CYCLE_POINTS);
    let mut std = Vec::with_capacity(CYCLE_POINTS);
    let mut col = Vec::with_capacity(n);
    for p in 0..CYCLE_POINTS {
        col.clear();
        col.extend(seg.cycles.iter().map(|(_, row)| row[p]));
        mean.push(col.iter().copied().sum::<T>() / T::from_usize_lossy(n));
        std.push(sample_std(&col));
    }
    Ok(CycleStats { mean, std, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    HeelStrike,
    Loading,
    MidStance,
    TerminalStance,
    Swing,
}

impl Phase {
    pub fn is_stance(self) -> bool {
        self != Phase::Swing
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::HeelStrike => "heel_strike",
            Phase::Loading => "loading",
            Phase::MidStance => "mid_stance",
            Phase::TerminalStance => "terminal_stance",
            Phase::Swing => "swing",
        }
    }
}

/// Phase label for every percent of the gait cycle plus per-sensor activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimeline {
    pub labels: Vec<Phase>,
    /// First active percent per channel, heel to toe.
    pub onsets: [Option<usize>; 4],
    /// Last active percent per channel.
    pub releases: [Option<usize>; 4],
    /// Set when onsets or releases do not follow heel, midfoot, metatarsal, toe.
    pub inconsistent_ordering: bool,
}

impl PhaseTimeline {
    /// Stance block followed by one swing block covering 0-100%.
    pub fn is_well_formed(&self) -> bool {
        if self.labels.len() != CYCLE_POINTS {
            return false;
        }
        let first_swing = self.labels.iter().position(|p| !p.is_stance()).unwrap_or(CYCLE_POINTS);
        self.labels[first_swing..].iter().all(|p| !p.is_stance())
    }

    /// Percent range `[start, end]` occupied by a label, if present.
    pub fn span(&self, phase: Phase) -> Option<(usize, usize)> {
        let start = self.labels.iter().position(|&p| p == phase)?;
        let end = self.labels.iter().rposition(|&p| p == phase)?;
        Some((start, end))
    }
}

/// Activation mask per channel: load-induced drop from the channel's unloaded
/// (highest) level exceeding `activation_frac` of the cycle range.
pub fn activation<T: Scalar>(stats: &CycleStats<T>, activation_frac: f64) -> Vec<bool> {
    let hi = stats.mean.iter().copied().fold(T::neg_infinity(), T::max);
    let lo = stats.mean.iter().copied().fold(T::infinity(), T::min);
    let range = hi - lo;
    if !(range > T::zero()) {
        return vec![false; stats.mean.len()];
    }
    let thr = range * T::lit(activation_frac);
    stats.mean.iter().map(|&v| hi - v > thr).collect()
}

fn ordered(xs: &[Option<usize>; 4]) -> bool {
    let present: Vec<usize> = xs.iter().flatten().copied().collect();
    present.windows(2).all(|w| w[0] <= w[1])
}

/// Label stance phases from the sensor activation pattern.
///
/// Heel only is heel strike, heel with midfoot is loading, all four is mid
/// stance, and any partial pattern after mid stance is terminal stance. No
/// active sensor is swing. Inactive percentages before the first stance label
/// belong to the heel strike, and stance-like blips after swing begins stay
/// swing. When the force cycle is supplied, percentages where it is below
/// `activation_frac` of its peak are swing regardless of the sensors.
pub fn classify_phases<T: Scalar>(
    sensor_cycles: &[CycleStats<T>; 4],
    grf_cycle: Option<&CycleStats<T>>,
    activation_frac: f64,
) -> Result<PhaseTimeline> {
    for s in sensor_cycles.iter().chain(grf_cycle) {
        if s.mean.len() != CYCLE_POINTS {
            return Err(Error::LengthMismatch(format!("cycle stats must have {CYCLE_POINTS} points")));
        }
    }
    let active: Vec<Vec<bool>> = sensor_cycles.iter().map(|s| activation(s, activation_frac)).collect();
    let unloaded: Option<Vec<bool>> = grf_cycle.map(|g| {
        let peak = g.mean.iter().copied().fold(T::neg_infinity(), T::max);
        g.mean.iter().map(|&v| !(peak > T::zero()) || v < peak * T::lit(activation_frac)).collect()
    });
    let hl = Channel::Heel.index();
    let mf = Channel::Midfoot.index();
    let mt = Channel::Metatarsal.index();
    let to = Channel::Toe.index();

    let mut labels = Vec::with_capacity(CYCLE_POINTS);
    let mut seen_mid = false;
    for p in 0..CYCLE_POINTS {
        let a = [active[0][p], active[1][p], active[2][p], active[3][p]];
        let any = a.iter().any(|&x| x);
        let label = if !any {
            Phase::Swing
        } else if a.iter().all(|&x| x) {
            seen_mid = true;
            Phase::MidStance
        } else if seen_mid || (!a[hl] && (a[mt] || a[to])) {
            Phase::TerminalStance
        } else if a[hl] && !a[mf] && !a[mt] && !a[to] {
            Phase::HeelStrike
        } else {
            Phase::Loading
        };
        labels.push(label);
    }
    if let Some(unloaded) = &unloaded {
        for (l, &u) in labels.iter_mut().zip(unloaded) {
            if u && *l != Phase::Swing {
                *l = Phase::Swing;
            }
        }
    }
    // leading inactivity is the contact itself
    if let Some(first_stance) = labels.iter().position(|p| p.is_stance()) {
        for l in &mut labels[..first_stance] {
            *l = Phase::HeelStrike;
        }
        if let Some(off) = labels[first_stance..].iter().position(|p| !p.is_stance()) {
            for l in &mut labels[first_stance + off..] {
                *l = Phase::Swing;
            }
        }
    }
    let onsets: [Option<usize>; 4] = std::array::from_fn(|c| active[c].iter().position(|&x| x));
    let releases: [Option<usize>; 4] = std::array::from_fn(|c| active[c].iter().rposition(|&x| x));
    let inconsistent_ordering = !(ordered(&onsets) && ordered(&releases));
    Ok(PhaseTimeline { labels, onsets, releases, inconsistent_ordering })
}
