use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Continuous piecewise-linear map through `K >= 2` breakpoints.
///
/// Outside `[x_1, x_K]` the first and last segments extend linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PwlFunction<T = f64> {
    xs: Vec<T>,
    ys: Vec<T>,
}

impl<T: Scalar> PwlFunction<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        let f = PwlFunction { xs, ys };
        f.validate()?;
        Ok(f)
    }

    /// `y = x` through the given breakpoints.
    pub fn identity(xs: Vec<T>) -> Result<Self> {
        let ys = xs.clone();
        Self::new(xs, ys)
    }

    pub fn validate(&self) -> Result<()> {
        if self.xs.len() < 2 {
            return Err(Error::InvalidArgument(format!("pwl needs at least 2 breakpoints, got {}", self.xs.len())));
        }
        if self.xs.len() != self.ys.len() {
            return Err(Error::InvalidArgument("pwl breakpoint arrays differ in length".into()));
        }
        if self.xs.iter().chain(&self.ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("pwl breakpoints must be finite".into()));
        }
        if self.xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("pwl x breakpoints must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn ys(&self) -> &[T] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn set_ys(&mut self, ys: &[T]) {
        assert_eq!(ys.len(), self.ys.len());
        self.ys.copy_from_slice(ys);
    }

    pub fn ys_mut(&mut self) -> &mut [T] {
        &mut self.ys
    }

    /// Segment index `i` and local coordinate `t = (x - x_i) / (x_{i+1} - x_i)`.
    ///
    /// Segment `i` is the first with `x <= x_{i+1}`; `t` leaves `[0, 1]` only on
    /// the two end segments.
    pub fn locate(&self, x: T) -> (usize, T) {
        let k = self.xs.len();
        let i = self.xs.partition_point(|&b| b < x).clamp(1, k - 1) - 1;
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        (i, t)
    }

    pub fn eval(&self, x: T) -> T {
        let (i, t) = self.locate(x);
        self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
    }

    /// Slope of the segment containing `x`.
    pub fn slope(&self, x: T) -> T {
        self.segment_slope(self.locate(x).0)
    }

    pub fn segment_slope(&self, i: usize) -> T {
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }

    pub fn eval_slice(&self, xs: &[T]) -> Vec<T> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// Compose with an affine map on the output: `y -> scale * y + shift`.
    pub fn affine_output(&self, scale: T, shift: T) -> Self {
        PwlFunction { xs: self.xs.clone(), ys: self.ys.iter().map(|&y| y * scale + shift).collect() }
    }

    /// Compose with an affine map on the input: evaluates `f((x - shift) / scale)`.
    pub fn affine_input(&self, scale: T, shift: T) -> Self {
        PwlFunction { xs: self.xs.iter().map(|&x| x * scale + shift).collect(), ys: self.ys.clone() }
    }

    pub fn is_monotone(&self) -> bool {
        self.ys.windows(2).all(|w| w[0] <= w[1]) || self.ys.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn convert<U: Scalar>(&self) -> PwlFunction<U> {
        let c = |v: &T| U::lit(v.to_f64_lossy());
        PwlFunction { xs: self.xs.iter().map(c).collect(), ys: self.ys.iter().map(c).collect() }
    }
}

/// `k` strictly increasing breakpoints at evenly spaced empirical quantiles of
/// `data`. Falls back to quantiles of the distinct values, then to an even grid
/// over the data range, when ties collapse neighbouring quantiles.
pub fn quantile_breakpoints<T: Scalar>(data: &[T], k: usize) -> Result<Vec<T>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 breakpoints, got {k}")));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("breakpoint data must be finite".into()));
    }
    let sorted = crate::scalar::sorted_copy(data);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::DegenerateChannel("input has fewer than two distinct values".into()));
    }
    let probs = |n: usize| (0..n).map(move |j| j as f64 / (n - 1) as f64);
    let strictly = |v: &[T]| v.windows(2).all(|w| w[0] < w[1]);
    let from_all: Vec<T> = probs(k).map(|p| crate::scalar::sorted_quantile(&sorted, p)).collect();
    if strictly(&from_all) {
        return Ok(from_all);
    }
    let from_distinct: Vec<T> = probs(k).map(|p| crate::scalar::sorted_quantile(&distinct, p)).collect();
    if strictly(&from_distinct) {
        return Ok(from_distinct);
    }
    let (lo, hi) = (distinct[0], distinct[distinct.len() - 1]);
    Ok(probs(k).map(|p| lo + (hi - lo) * T::lit(p)).collect())
}
