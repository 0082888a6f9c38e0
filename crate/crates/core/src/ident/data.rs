//! Identification records and the filtering primitives the Jacobians need.

use crate::dataio::{Component, Trial};
use crate::error::{Error, Result};

/// One record of an identification set: four inputs, the target, and the
/// first sample that counts toward the cost.
#[derive(Debug, Clone)]
pub struct Record {
    pub u: [Vec<f64>; 4],
    pub y: Vec<f64>,
    pub start: usize,
}

impl Record {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn scored(&self) -> usize {
        self.y.len() - self.start
    }
}

/// All records for one (foot, component) identification.
#[derive(Debug, Clone)]
pub struct IdentData {
    pub records: Vec<Record>,
}

impl IdentData {
    pub fn from_trials(trials: &[&Trial<f64>], component: Component, warmup: usize) -> Result<Self> {
        if trials.is_empty() {
            return Err(Error::InvalidArgument("no identification trials".into()));
        }
        let mut records = Vec::with_capacity(trials.len());
        for t in trials {
            if t.len() <= warmup + 1 {
                return Err(Error::InvalidArgument(format!("trial '{}' is shorter than the warm-up", t.label())));
            }
            let u = t.inputs().map(|c| c.to_vec());
            records.push(Record { u, y: t.output(component).to_vec(), start: warmup });
        }
        Ok(IdentData { records })
    }

    pub fn n_residuals(&self) -> usize {
        self.records.iter().map(Record::scored).sum()
    }

    /// Every record's inputs joined end to end, per channel.
    pub fn joined_inputs(&self) -> [Vec<f64>; 4] {
        std::array::from_fn(|c| self.records.iter().flat_map(|r| r.u[c].iter().copied()).collect())
    }

    /// Scored targets joined end to end.
    pub fn joined_targets(&self) -> Vec<f64> {
        self.records.iter().flat_map(|r| r.y[r.start..].iter().copied()).collect()
    }
}

/// `Σ_j b_j x[t - nk - j]` from zero state.
pub fn fir(b: &[f64], nk: usize, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for (t, yt) in y.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, &bj) in b.iter().enumerate() {
            let lag = nk + j;
            if t >= lag {
                acc += bj * x[t - lag];
            }
        }
        *yt = acc;
    }
    y
}

/// `x / A(q)` from zero state, with `A = 1 + a_1 q^-1 + ...`.
pub fn all_pole(a: &[f64], x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for t in 0..x.len() {
        let mut acc = x[t];
        for (i, &ai) in a.iter().enumerate() {
            if t > i {
                acc -= ai * y[t - 1 - i];
            }
        }
        y[t] = acc;
    }
    y
}

/// `x[t - d]`, zero before the start.
#[inline]
pub fn lagged(x: &[f64], t: usize, d: usize) -> f64 {
    if t >= d { x[t - d] } else { 0.0 }
}
