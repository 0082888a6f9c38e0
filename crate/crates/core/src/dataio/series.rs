use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Physical unit of a [`ChannelSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Volts,
    Ohms,
    Percent,
    Newtons,
}

/// Uniformly sampled scalar signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSeries<T = f64> {
    values: Vec<T>,
    rate_hz: f64,
    unit: Unit,
    t0: f64,
}

impl<T: Scalar> ChannelSeries<T> {
    pub fn new(values: Vec<T>, rate_hz: f64, unit: Unit, t0: f64) -> Result<Self> {
        if !(rate_hz > 0.0 && rate_hz.is_finite()) {
            return Err(Error::InvalidArgument(format!("sampling rate must be positive, got {rate_hz}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidArgument("start time must be finite".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at sample {i}")));
        }
        Ok(ChannelSeries { values, rate_hz, unit, t0 })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.rate_hz
    }

    /// Time of the last sample.
    pub fn t_end(&self) -> f64 {
        self.time_at(self.values.len().saturating_sub(1))
    }

    /// Span covered by the samples, `(n - 1) / rate`.
    pub fn duration_s(&self) -> f64 {
        self.values.len().saturating_sub(1) as f64 / self.rate_hz
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.rate_hz
    }

    /// Same timing and unit, new values.
    pub fn with_values(&self, values: Vec<T>, unit: Unit) -> Result<Self> {
        ChannelSeries::new(values, self.rate_hz, unit, self.t0)
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    /// Linear interpolation at absolute time `t`. Times outside the record clamp
    /// to the end samples.
    pub fn sample_at(&self, t: f64) -> T {
        let n = self.values.len();
        if n == 0 {
            return T::zero();
        }
        let mut pos = (t - self.t0) * self.rate_hz;
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-9 {
            pos = nearest;
        }
        if pos <= 0.0 {
            return self.values[0];
        }
        if pos >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let lo = pos.floor() as usize;
        let frac = pos - lo as f64;
        if frac == 0.0 {
            return self.values[lo];
        }
        let a = self.values[lo];
        let b = self.values[lo + 1];
        a + (b - a) * T::lit(frac)
    }

    pub fn convert<U: Scalar>(&self) -> ChannelSeries<U> {
        ChannelSeries {
            values: self
                .values
                .iter()
                .map(|v| U::from_f64(v.to_f64_lossy()).unwrap_or_else(U::nan))
                .collect(),
            rate_hz: self.rate_hz,
            unit: self.unit,
            t0: self.t0,
        }
    }
}

/// Insole sensor location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "HL")]
    Heel,
    #[serde(rename = "MF")]
    Midfoot,
    #[serde(rename = "MT")]
    Metatarsal,
    #[serde(rename = "TO")]
    Toe,
}

impl Channel {
    /// Heel to toe.
    pub const ALL: [Channel; 4] = [Channel::Heel, Channel::Midfoot, Channel::Metatarsal, Channel::Toe];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn code(self) -> &'static str {
        match self {
            Channel::Heel => "hl",
            Channel::Midfoot => "mf",
            Channel::Metatarsal => "mt",
            Channel::Toe => "to",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Side::Left),
            "right" | "r" => Ok(Side::Right),
            other => Err(Error::Schema(format!("unknown side '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Identification,
    Validation,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Identification => "identification",
            Role::Validation => "validation",
        }
    }
}

/// GRF component estimated by one model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "V")]
    Vertical,
    #[serde(rename = "ML")]
    Mediolateral,
}

impl Component {
    pub const BOTH: [Component; 2] = [Component::Vertical, Component::Mediolateral];

    pub fn code(self) -> &'static str {
        match self {
            Component::Vertical => "V",
            Component::Mediolateral => "ML",
        }
    }
}

impl std::str::FromStr for Component {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "V" | "VERTICAL" => Ok(Component::Vertical),
            "ML" | "MEDIOLATERAL" => Ok(Component::Mediolateral),
            other => Err(Error::Schema(format!("unknown component '{other}'"))),
        }
    }
}

/// Four synchronized insole channels, indexed heel to toe.
#[derive(Debug, Clone, PartialEq)]
pub struct InsoleRecording<T = f64> {
    channels: [ChannelSeries<T>; 4],
    side: Side,
}

impl<T: Scalar> InsoleRecording<T> {
    pub fn new(channels: [ChannelSeries<T>; 4], side: Side) -> Result<Self> {
        let (len, rate, unit, t0) = {
            let c = &channels[0];
            (c.len(), c.rate_hz(), c.unit(), c.t0())
        };
        for (ch, s) in Channel::ALL.iter().zip(&channels) {
            if s.len() != len || s.rate_hz() != rate || s.t0() != t0 {
                return Err(Error::LengthMismatch(format!(
                    "insole channel {} does not match heel channel timing",
                    ch.code()
                )));
            }
            if s.unit() != unit {
                return Err(Error::Unit(format!("insole channel {} has unit {:?}, expected {unit:?}", ch.code(), s.unit())));
            }
        }
        Ok(InsoleRecording { channels, side })
    }

    pub fn channel(&self, ch: Channel) -> &ChannelSeries<T> {
        &self.channels[ch.index()]
    }

    pub fn channels(&self) -> &[ChannelSeries<T>; 4] {
        &self.channels
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rate_hz(&self) -> f64 {
        self.channels[0].rate_hz()
    }

    pub fn unit(&self) -> Unit {
        self.channels[0].unit()
    }

    /// Apply a per-channel transform producing new series.
    pub fn try_map<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(Channel, &ChannelSeries<T>) -> Result<ChannelSeries<T>>,
    {
        let [a, b, c, d] = &self.channels;
        let mapped = [
            f(Channel::Heel, a)?,
            f(Channel::Midfoot, b)?,
            f(Channel::Metatarsal, c)?,
            f(Channel::Toe, d)?,
        ];
        InsoleRecording::new(mapped, self.side)
    }
}

/// Vertical and mediolateral ground reaction force, newtons.
#[derive(Debug, Clone, PartialEq)]
pub struct GrfRecording<T = f64> {
    vertical: ChannelSeries<T>,
    mediolateral: ChannelSeries<T>,
    side: Side,
}

impl<T: Scalar> GrfRecording<T> {
    pub fn new(vertical: ChannelSeries<T>, mediolateral: ChannelSeries<T>, side: Side) -> Result<Self> {
        if vertical.len() != mediolateral.len()
            || vertical.rate_hz() != mediolateral.rate_hz()
            || vertical.t0() != mediolateral.t0()
        {
            return Err(Error::LengthMismatch("grf components differ in timing".into()));
        }
        if vertical.unit() != Unit::Newtons || mediolateral.unit() != Unit::Newtons {
            return Err(Error::Unit("grf components must be in newtons".into()));
        }
        Ok(GrfRecording { vertical, mediolateral, side })
    }

    pub fn vertical(&self) -> &ChannelSeries<T> {
        &self.vertical
    }

    pub fn mediolateral(&self) -> &ChannelSeries<T> {
        &self.mediolateral
    }

    pub fn component(&self, c: Component) -> &ChannelSeries<T> {
        match c {
            Component::Vertical => &self.vertical,
            Component::Mediolateral => &self.mediolateral,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.vertical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertical.is_empty()
    }

    pub fn rate_hz(&self) -> f64 {
        self.vertical.rate_hz()
    }
}

/// Conditioned recording: resistance change per channel plus measured GRF on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial<T = f64> {
    insole: InsoleRecording<T>,
    grf: GrfRecording<T>,
    speed_mps: f64,
    role: Role,
    r0: [f64; 4],
    label: String,
}

impl<T: Scalar> Trial<T> {
    pub fn new(
        insole: InsoleRecording<T>,
        grf: GrfRecording<T>,
        speed_mps: f64,
        role: Role,
        r0: [f64; 4],
    ) -> Result<Self> {
        if insole.len() != grf.len() || insole.rate_hz() != grf.rate_hz() {
            return Err(Error::LengthMismatch(format!(
                "insole has {} samples at {} Hz, grf has {} samples at {} Hz",
                insole.len(),
                insole.rate_hz(),
                grf.len(),
                grf.rate_hz()
            )));
        }
        if insole.side() != grf.side() {
            return Err(Error::Schema("insole and grf sides differ".into()));
        }
        if insole.unit() != Unit::Percent {
            return Err(Error::Unit("trial insole channels must be resistance change in percent".into()));
        }
        if let Some(r) = r0.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::NonPositiveBaseline(*r));
        }
        Ok(Trial { insole, grf, speed_mps, role, r0, label: String::new() })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn insole(&self) -> &InsoleRecording<T> {
        &self.insole
    }

    pub fn grf(&self) -> &GrfRecording<T> {
        &self.grf
    }

    pub fn speed_mps(&self) -> f64 {
        self.speed_mps
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn r0(&self) -> [f64; 4] {
        self.r0
    }

    pub fn side(&self) -> Side {
        self.insole.side()
    }

    pub fn len(&self) -> usize {
        self.insole.len()
    }

    pub fn is_empty(&self) -> bool {
        self.insole.is_empty()
    }

    pub fn rate_hz(&self) -> f64 {
        self.insole.rate_hz()
    }

    pub fn duration_s(&self) -> f64 {
        self.insole.channels()[0].duration_s()
    }

    /// The four resistance-change inputs as plain slices.
    pub fn inputs(&self) -> [&[T]; 4] {
        let c = self.insole.channels();
        [c[0].values(), c[1].values(), c[2].values(), c[3].values()]
    }

    pub fn output(&self, c: Component) -> &[T] {
        self.grf.component(c).values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rate_and_nan() {
        assert!(ChannelSeries::new(vec![1.0_f64], 0.0, Unit::Volts, 0.0).is_err());
        assert!(ChannelSeries::new(vec![f64::NAN], 100.0, Unit::Volts, 0.0).is_err());
    }

    #[test]
    fn sample_at_interpolates_and_clamps() {
        let s = ChannelSeries::new(vec![0.0_f64, 10.0, 20.0], 10.0, Unit::Ohms, 1.0).unwrap();
        assert!((s.sample_at(1.05) - 5.0).abs() < 1e-12);
        assert_eq!(s.sample_at(0.0), 0.0);
        assert_eq!(s.sample_at(9.0), 20.0);
        assert_eq!(s.sample_at(1.1), 10.0);
    }

    #[test]
    fn insole_requires_matching_channels() {
        let a = ChannelSeries::new(vec![0.0_f64; 4], 100.0, Unit::Percent, 0.0).unwrap();
        let b = ChannelSeries::new(vec![0.0_f64; 5], 100.0, Unit::Percent, 0.0).unwrap();
        let r = InsoleRecording::new([a.clone(), a.clone(), a.clone(), b], Side::Left);
        assert!(matches!(r, Err(Error::LengthMismatch(_))));
        assert!(InsoleRecording::new([a.clone(), a.clone(), a.clone(), a], Side::Left).is_ok());
    }
}
