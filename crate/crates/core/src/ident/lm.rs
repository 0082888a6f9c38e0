//! Levenberg-Marquardt for nonlinear least squares with a projection step.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::denominator_is_stable;

pub const LAMBDA0: f64 = 1e-3;
const LAMBDA_UP: f64 = 3.0;
const LAMBDA_DOWN: f64 = 3.0;
const LAMBDA_MAX: f64 = 1e16;
const LAMBDA_MIN: f64 = 1e-14;
/// Roots on or outside the unit circle are reflected to this radius times `1/|z|`.
pub const REFLECT_RADIUS: f64 = 0.99;

/// A least-squares problem `min Σ r(θ)²`.
pub trait LsqProblem: Sync {
    fn n_params(&self) -> usize;
    /// Residuals, or `None` when `theta` gives an unusable model.
    fn residuals(&self, theta: &[f64]) -> Option<Vec<f64>>;
    /// Residuals and their Jacobian `∂r/∂θ` (rows = residuals).
    fn jacobian(&self, theta: &[f64]) -> Option<(Vec<f64>, DMatrix<f64>)>;
    /// Map `theta` back onto the feasible set.
    fn project(&self, _theta: &mut [f64]) {}
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmSettings {
    pub max_iters: usize,
    pub tol_rel_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub theta: Vec<f64>,
    pub cost: f64,
    /// Cost at the start and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn finite_cost(r: &[f64]) -> Option<f64> {
    let c = sum_sq(r);
    c.is_finite().then_some(c)
}

/// Multiplicative-damping LM with Marquardt diagonal scaling. A step is kept
/// only if the projected parameters lower the cost, so the trace never rises.
pub fn levenberg_marquardt(p: &impl LsqProblem, theta0: Vec<f64>, s: &LmSettings) -> Result<LmOutcome> {
    let mut theta = theta0;
    p.project(&mut theta);
    let (mut r, mut jac) = p
        .jacobian(&theta)
        .ok_or_else(|| Error::DivergedOptimization("initial parameters give an unusable model".into()))?;
    let mut cost = finite_cost(&r).ok_or_else(|| Error::DivergedOptimization("initial cost is not finite".into()))?;
    let mut trace = vec![cost];
    let mut lambda = LAMBDA0;
    let mut iterations = 0;
    let mut converged = false;
    let mut normal = Normal::build(&r, &jac);
    while iterations < s.max_iters && cost > 0.0 {
        iterations += 1;
        let Some(step) = normal.solve(lambda) else {
            lambda *= LAMBDA_UP;
            if lambda > LAMBDA_MAX {
                converged = true;
                break;
            }
            continue;
        };
        let mut cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, d)| t + d).collect();
        p.project(&mut cand);
        let new_cost = p.residuals(&cand).as_deref().and_then(finite_cost);
        match new_cost {
            Some(c) if c < cost => {
                let rel = (cost - c) / cost;
                theta = cand;
                cost = c;
                trace.push(c);
                lambda = (lambda / LAMBDA_DOWN).max(LAMBDA_MIN);
                if rel < s.tol_rel_cost {
                    converged = true;
                    break;
                }
                match p.jacobian(&theta) {
                    Some((r2, j2)) => {
                        r = r2;
                        jac = j2;
                        normal = Normal::build(&r, &jac);
                    }
                    None => return Err(Error::DivergedOptimization("jacobian failed at an accepted point".into())),
                }
            }
            _ => {
                lambda *= LAMBDA_UP;
                if lambda > LAMBDA_MAX {
                    converged = true;
                    break;
                }
            }
        }
    }
    Ok(LmOutcome { theta, cost, trace, iterations, converged })
}

struct Normal {
    h: DMatrix<f64>,
    g: DVector<f64>,
    diag: DVector<f64>,
}

impl Normal {
    fn build(r: &[f64], jac: &DMatrix<f64>) -> Normal {
        let rv = DVector::from_column_slice(r);
        // explicit transpose lets the product go through the blocked gemm kernel
        let jt = jac.transpose();
        let h = &jt * jac;
        let g = &jt * rv;
        let dmax = h.diagonal().iter().cloned().fold(0.0, f64::max);
        let floor = if dmax > 0.0 { dmax * 1e-12 } else { 1.0 };
        let diag = h.diagonal().map(|d| d.max(floor));
        Normal { h, g, diag }
    }

    /// Step solving `(H + λ diag(H)) δ = -g`.
    fn solve(&self, lambda: f64) -> Option<DVector<f64>> {
        let mut m = self.h.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += lambda * self.diag[i];
        }
        let chol = m.cholesky()?;
        let d = chol.solve(&(-&self.g));
        d.iter().all(|v| v.is_finite()).then_some(d)
    }
}

/// Reflect denominator roots with `|z| >= 1` to radius `0.99/|z|`, keeping
/// their angle. Returns whether anything changed.
pub fn stabilize(a: &mut [f64]) -> bool {
    if a.is_empty() || denominator_is_stable(a) {
        return false;
    }
    let n = a.len();
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for (j, &aj) in a.iter().enumerate() {
        comp[(0, j)] = -aj;
    }
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    let roots = comp.complex_eigenvalues();
    let mut poly = vec![Complex::new(1.0, 0.0)];
    for &z in roots.iter() {
        let m = z.norm();
        let z = if m >= 1.0 { z * (REFLECT_RADIUS / (m * m)) } else { z };
        let mut next = vec![Complex::new(0.0, 0.0); poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * z;
        }
        poly = next;
    }
    for (ai, c) in a.iter_mut().zip(&poly[1..]) {
        *ai = c.re;
    }
    true
}
