use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Discrete multi-input single-output rational filter with a shared monic
/// denominator:
///
/// `y[n] = sum_c sum_j b_c[j] u_c[n - nk_c - j] - sum_i a[i] y[n - 1 - i]`
///
/// `a` holds the denominator coefficients after the leading 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct LtiBlock<T = f64> {
    a: Vec<T>,
    b: Vec<Vec<T>>,
    nk: Vec<usize>,
}

/// Model orders shared by every input channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Orders {
    pub nb: usize,
    pub na: usize,
    pub nk: usize,
}

impl Default for Orders {
    fn default() -> Self {
        Orders { nb: 3, na: 2, nk: 0 }
    }
}

impl Orders {
    pub fn validate(&self) -> Result<()> {
        if self.nb == 0 {
            return Err(Error::InvalidArgument("numerator order nb must be at least 1".into()));
        }
        Ok(())
    }

    /// Leading samples affected by zero initial conditions.
    pub fn warmup(&self) -> usize {
        self.na.max(self.nb + self.nk)
    }
}

impl<T: Scalar> LtiBlock<T> {
    pub fn new(a: Vec<T>, b: Vec<Vec<T>>, nk: Vec<usize>) -> Result<Self> {
        let g = LtiBlock { a, b, nk };
        g.validate_shape()?;
        Ok(g)
    }

    /// Stable block with zero coefficients.
    pub fn zeros(n_inputs: usize, orders: Orders) -> Result<Self> {
        orders.validate()?;
        Self::new(vec![T::zero(); orders.na], vec![vec![T::zero(); orders.nb]; n_inputs], vec![orders.nk; n_inputs])
    }

    /// Pass-through of one input channel.
    pub fn unit_gain(n_inputs: usize, channel: usize) -> Result<Self> {
        let mut b = vec![vec![T::zero()]; n_inputs];
        b[channel][0] = T::one();
        Self::new(Vec::new(), b, vec![0; n_inputs])
    }

    fn validate_shape(&self) -> Result<()> {
        if self.b.is_empty() {
            return Err(Error::InvalidArgument("lti block needs at least one input".into()));
        }
        if self.b.len() != self.nk.len() {
            return Err(Error::InvalidArgument("one delay per input channel required".into()));
        }
        if self.b.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidArgument("numerator order nb must be at least 1".into()));
        }
        if self.a.iter().chain(self.b.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("lti coefficients must be finite".into()));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if !self.is_stable() {
            return Err(Error::UnstableBlock);
        }
        Ok(())
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn b(&self) -> &[Vec<T>] {
        &self.b
    }

    pub fn nk(&self) -> &[usize] {
        &self.nk
    }

    pub fn a_mut(&mut self) -> &mut [T] {
        &mut self.a
    }

    pub fn b_mut(&mut self, c: usize) -> &mut [T] {
        &mut self.b[c]
    }

    pub fn n_inputs(&self) -> usize {
        self.b.len()
    }

    pub fn na(&self) -> usize {
        self.a.len()
    }

    pub fn nb(&self) -> usize {
        self.b.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn orders(&self) -> Orders {
        Orders { nb: self.nb(), na: self.na(), nk: self.nk.iter().copied().max().unwrap_or(0) }
    }

    /// Leading output samples influenced by the zero initial state.
    pub fn warmup(&self) -> usize {
        let num = self.b.iter().zip(&self.nk).map(|(b, k)| b.len() + k).max().unwrap_or(0);
        self.na().max(num)
    }

    /// Number of free coefficients.
    pub fn n_params(&self) -> usize {
        self.a.len() + self.b.iter().map(Vec::len).sum::<usize>()
    }

    /// Schur-Cohn test: all denominator roots strictly inside the unit circle.
    pub fn is_stable(&self) -> bool {
        denominator_is_stable(&self.a)
    }

    /// Steady-state gain from input `c`.
    pub fn dc_gain(&self, c: usize) -> T {
        let den = T::one() + self.a.iter().copied().sum::<T>();
        self.b[c].iter().copied().sum::<T>() / den
    }

    /// Filter the inputs from zero initial conditions.
    pub fn apply(&self, u: &[&[T]]) -> Result<Vec<T>> {
        if u.len() != self.n_inputs() {
            return Err(Error::LengthMismatch(format!("block has {} inputs, got {}", self.n_inputs(), u.len())));
        }
        let n = u[0].len();
        if u.iter().any(|c| c.len() != n) {
            return Err(Error::LengthMismatch("lti input channels differ in length".into()));
        }
        if !self.is_stable() {
            return Err(Error::UnstableBlock);
        }
        Ok(self.apply_unchecked(u))
    }

    /// [`LtiBlock::apply`] without the stability and shape checks.
    pub fn apply_unchecked(&self, u: &[&[T]]) -> Vec<T> {
        let n = u[0].len();
        let mut y = vec![T::zero(); n];
        for t in 0..n {
            let mut acc = T::zero();
            for (c, bc) in self.b.iter().enumerate() {
                let nk = self.nk[c];
                for (j, &bj) in bc.iter().enumerate() {
                    let lag = nk + j;
                    if t >= lag {
                        acc = acc + bj * u[c][t - lag];
                    }
                }
            }
            for (i, &ai) in self.a.iter().enumerate() {
                if t > i {
                    acc = acc - ai * y[t - 1 - i];
                }
            }
            y[t] = acc;
        }
        y
    }

    /// All-pole part only: `A(q)^{-1} x` from zero state.
    pub fn filter_denominator(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); x.len()];
        for t in 0..x.len() {
            let mut acc = x[t];
            for (i, &ai) in self.a.iter().enumerate() {
                if t > i {
                    acc = acc - ai * y[t - 1 - i];
                }
            }
            y[t] = acc;
        }
        y
    }

    pub fn convert<U: Scalar>(&self) -> LtiBlock<U> {
        let c = |v: &T| U::lit(v.to_f64_lossy());
        LtiBlock {
            a: self.a.iter().map(c).collect(),
            b: self.b.iter().map(|b| b.iter().map(c).collect()).collect(),
            nk: self.nk.clone(),
        }
    }
}

/// Schur-Cohn step-down recursion on `1 + a_1 z^-1 + ... + a_n z^-n`.
pub fn denominator_is_stable<T: Scalar>(a: &[T]) -> bool {
    if a.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let mut p: Vec<T> = a.to_vec();
    while let Some(&k) = p.last() {
        if k.abs() >= T::one() {
            return false;
        }
        let m = p.len();
        let denom = T::one() - k * k;
        let next: Vec<T> = (0..m - 1).map(|i| (p[i] - k * p[m - 2 - i]) / denom).collect();
        p = next;
    }
    true
}
