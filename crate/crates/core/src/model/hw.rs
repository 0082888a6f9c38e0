use serde::{Deserialize, Serialize};

use super::lti::LtiBlock;
use super::pwl::PwlFunction;
use crate::dataio::{ChannelSeries, Unit};
use crate::error::{Error, Result};
use crate::scalar::{mean, sample_std, Scalar};

/// Normalization applied to the input nonlinearities at identification time.
///
/// `f1_std` is the standard deviation of each input nonlinearity's output on
/// the identification data before rescaling to unit variance; `f1_mean` is the
/// mean of the rescaled output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct NormRecord<T = f64> {
    pub f1_std: [T; 4],
    pub f1_mean: [T; 4],
}

impl<T: Scalar> Default for NormRecord<T> {
    fn default() -> Self {
        NormRecord { f1_std: [T::one(); 4], f1_mean: [T::zero(); 4] }
    }
}

/// Hammerstein-Wiener model: four input nonlinearities, one MISO linear block,
/// one output nonlinearity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct HwModel<T = f64> {
    pub f1: [PwlFunction<T>; 4],
    pub g: LtiBlock<T>,
    pub f2: PwlFunction<T>,
    #[serde(default)]
    pub norm: NormRecord<T>,
}

/// Linear block plus constant output offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct LinearModel<T = f64> {
    pub g: LtiBlock<T>,
    pub offset: T,
}

fn check_inputs<T: Scalar>(u: &[&[T]]) -> Result<usize> {
    if u.len() != 4 {
        return Err(Error::LengthMismatch(format!("expected 4 input channels, got {}", u.len())));
    }
    let n = u[0].len();
    if u.iter().any(|c| c.len() != n) {
        return Err(Error::LengthMismatch("input channels differ in length".into()));
    }
    Ok(n)
}

impl<T: Scalar> HwModel<T> {
    pub fn new(f1: [PwlFunction<T>; 4], g: LtiBlock<T>, f2: PwlFunction<T>) -> Result<Self> {
        let m = HwModel { f1, g, f2, norm: NormRecord::default() };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for f in &self.f1 {
            f.validate()?;
        }
        self.f2.validate()?;
        if self.g.n_inputs() != 4 {
            return Err(Error::InvalidArgument(format!("hw block must have 4 inputs, has {}", self.g.n_inputs())));
        }
        self.g.validate()
    }

    /// Outputs of the four input nonlinearities.
    pub fn input_stage(&self, u: &[&[T]]) -> [Vec<T>; 4] {
        [
            self.f1[0].eval_slice(u[0]),
            self.f1[1].eval_slice(u[1]),
            self.f1[2].eval_slice(u[2]),
            self.f1[3].eval_slice(u[3]),
        ]
    }

    /// Output of the linear block (before the output nonlinearity).
    pub fn linear_stage(&self, u: &[&[T]]) -> Result<Vec<T>> {
        check_inputs(u)?;
        let w = self.input_stage(u);
        let refs: Vec<&[T]> = w.iter().map(Vec::as_slice).collect();
        self.g.apply(&refs)
    }

    pub fn simulate(&self, u: &[&[T]]) -> Result<Vec<T>> {
        let x = self.linear_stage(u)?;
        Ok(self.f2.eval_slice(&x))
    }

    /// Free parameters: every breakpoint value plus linear coefficients.
    pub fn n_params(&self) -> usize {
        self.f1.iter().map(PwlFunction::len).sum::<usize>() + self.f2.len() + self.g.n_params()
    }

    pub fn warmup(&self) -> usize {
        self.g.warmup()
    }

    /// Rescale each input nonlinearity to unit output standard deviation on
    /// `u`, moving the scale into the linear block numerators. The simulated
    /// output is unchanged up to rounding.
    pub fn normalize(&mut self, u: &[&[T]]) -> Result<()> {
        check_inputs(u)?;
        let w = self.input_stage(u);
        let mut rec = NormRecord::default();
        for c in 0..4 {
            let sd = sample_std(&w[c]);
            if !(sd > T::zero()) || !sd.is_finite() {
                return Err(Error::DegenerateChannel(format!("input nonlinearity {c} has zero output variance")));
            }
            self.f1[c] = self.f1[c].affine_output(T::one() / sd, T::zero());
            for b in self.g.b_mut(c) {
                *b = *b * sd;
            }
            rec.f1_std[c] = sd;
            let scaled: Vec<T> = w[c].iter().map(|&v| v / sd).collect();
            rec.f1_mean[c] = mean(&scaled);
        }
        self.norm = rec;
        Ok(())
    }

    pub fn convert<U: Scalar>(&self) -> HwModel<U> {
        let c = |v: &T| U::lit(v.to_f64_lossy());
        HwModel {
            f1: [self.f1[0].convert(), self.f1[1].convert(), self.f1[2].convert(), self.f1[3].convert()],
            g: self.g.convert(),
            f2: self.f2.convert(),
            norm: NormRecord { f1_std: self.norm.f1_std.each_ref().map(c), f1_mean: self.norm.f1_mean.each_ref().map(c) },
        }
    }
}

impl<T: Scalar> LinearModel<T> {
    pub fn new(g: LtiBlock<T>, offset: T) -> Result<Self> {
        let m = LinearModel { g, offset };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.offset.is_finite() {
            return Err(Error::InvalidArgument("offset must be finite".into()));
        }
        self.g.validate()
    }

    pub fn simulate(&self, u: &[&[T]]) -> Result<Vec<T>> {
        let mut y = self.g.apply(u)?;
        for v in &mut y {
            *v = *v + self.offset;
        }
        Ok(y)
    }

    pub fn n_params(&self) -> usize {
        self.g.n_params() + 1
    }

    pub fn warmup(&self) -> usize {
        self.g.warmup()
    }

    pub fn convert<U: Scalar>(&self) -> LinearModel<U> {
        LinearModel { g: self.g.convert(), offset: U::lit(self.offset.to_f64_lossy()) }
    }
}

/// Either model family.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub enum ForceModel<T = f64> {
    Hw(HwModel<T>),
    Linear(LinearModel<T>),
}

impl<T: Scalar> ForceModel<T> {
    pub fn simulate(&self, u: &[&[T]]) -> Result<Vec<T>> {
        match self {
            ForceModel::Hw(m) => m.simulate(u),
            ForceModel::Linear(m) => m.simulate(u),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ForceModel::Hw(m) => m.validate(),
            ForceModel::Linear(m) => m.validate(),
        }
    }

    pub fn warmup(&self) -> usize {
        match self {
            ForceModel::Hw(m) => m.warmup(),
            ForceModel::Linear(m) => m.warmup(),
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            ForceModel::Hw(m) => m.n_params(),
            ForceModel::Linear(m) => m.n_params(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ForceModel::Hw(_) => "hw",
            ForceModel::Linear(_) => "linear",
        }
    }
}

fn series_inputs<T: Scalar>(dr: &[ChannelSeries<T>; 4]) -> Result<[&[T]; 4]> {
    let first = &dr[0];
    if dr.iter().any(|s| s.len() != first.len() || s.rate_hz() != first.rate_hz()) {
        return Err(Error::LengthMismatch("input channels differ in length or rate".into()));
    }
    Ok([dr[0].values(), dr[1].values(), dr[2].values(), dr[3].values()])
}

/// Force estimate from four resistance-change channels through an HW model.
pub fn hw_simulate<T: Scalar>(m: &HwModel<T>, dr: &[ChannelSeries<T>; 4]) -> Result<ChannelSeries<T>> {
    let u = series_inputs(dr)?;
    dr[0].with_values(m.simulate(&u)?, Unit::Newtons)
}

pub fn linear_simulate<T: Scalar>(m: &LinearModel<T>, dr: &[ChannelSeries<T>; 4]) -> Result<ChannelSeries<T>> {
    let u = series_inputs(dr)?;
    dr[0].with_values(m.simulate(&u)?, Unit::Newtons)
}

/// Filter four channels through a bare LTI block.
pub fn lti_apply<T: Scalar>(g: &LtiBlock<T>, u: &[ChannelSeries<T>; 4]) -> Result<ChannelSeries<T>> {
    let refs = series_inputs(u)?;
    u[0].with_values(g.apply(&refs)?, u[0].unit())
}
