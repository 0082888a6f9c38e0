//! Output-error identification of the linear model.

use nalgebra::{DMatrix, DVector};

use super::data::{all_pole, fir, lagged, IdentData};
use super::lm::{levenberg_marquardt, stabilize, LmOutcome, LmSettings, LsqProblem};
use crate::error::{Error, Result};
use crate::model::{LinearModel, LtiBlock, Orders};

/// Singular value ratio below which the scaled regressor counts as rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Parameter layout: `[a_1..a_na, b_0 (nb per channel) .. b_3, offset]`.
pub struct LinearProblem<'a> {
    pub data: &'a IdentData,
    pub orders: Orders,
}

impl<'a> LinearProblem<'a> {
    pub fn new(data: &'a IdentData, orders: Orders) -> Self {
        LinearProblem { data, orders }
    }

    fn split<'t>(&self, theta: &'t [f64]) -> (&'t [f64], Vec<&'t [f64]>, f64) {
        let (na, nb) = (self.orders.na, self.orders.nb);
        let a = &theta[..na];
        let b = (0..4).map(|c| &theta[na + c * nb..na + (c + 1) * nb]).collect();
        (a, b, theta[na + 4 * nb])
    }

    pub fn model(&self, theta: &[f64]) -> Result<LinearModel<f64>> {
        let (a, b, offset) = self.split(theta);
        let g = LtiBlock::new(a.to_vec(), b.iter().map(|v| v.to_vec()).collect(), vec![self.orders.nk; 4])?;
        LinearModel::new(g, offset)
    }

    pub fn theta(&self, m: &LinearModel<f64>) -> Vec<f64> {
        let mut t = m.g.a().to_vec();
        for b in m.g.b() {
            t.extend_from_slice(b);
        }
        t.push(m.offset);
        t
    }

    fn block_output(&self, a: &[f64], b: &[&[f64]], u: &[Vec<f64>; 4]) -> Vec<f64> {
        let n = u[0].len();
        let mut s = vec![0.0; n];
        for c in 0..4 {
            for (acc, v) in s.iter_mut().zip(fir(b[c], self.orders.nk, &u[c])) {
                *acc += v;
            }
        }
        all_pole(a, &s)
    }
}

impl LsqProblem for LinearProblem<'_> {
    fn n_params(&self) -> usize {
        self.orders.na + 4 * self.orders.nb + 1
    }

    fn residuals(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let (a, b, offset) = self.split(theta);
        if !crate::model::denominator_is_stable(a) {
            return None;
        }
        let mut r = Vec::with_capacity(self.data.n_residuals());
        for rec in &self.data.records {
            let x = self.block_output(a, &b, &rec.u);
            r.extend((rec.start..rec.len()).map(|t| rec.y[t] - x[t] - offset));
        }
        Some(r)
    }

    fn jacobian(&self, theta: &[f64]) -> Option<(Vec<f64>, DMatrix<f64>)> {
        let (a, b, offset) = self.split(theta);
        if !crate::model::denominator_is_stable(a) {
            return None;
        }
        let (na, nb, nk) = (self.orders.na, self.orders.nb, self.orders.nk);
        let mut jac = DMatrix::zeros(self.data.n_residuals(), self.n_params());
        let mut r = Vec::with_capacity(self.data.n_residuals());
        let mut row0 = 0;
        for rec in &self.data.records {
            let x = self.block_output(a, &b, &rec.u);
            let z = all_pole(a, &x);
            let v: Vec<Vec<f64>> = rec.u.iter().map(|u| all_pole(a, u)).collect();
            for (row, t) in (rec.start..rec.len()).enumerate() {
                let i = row0 + row;
                r.push(rec.y[t] - x[t] - offset);
                // r = y - yhat, so every column is the negated output sensitivity
                for k in 0..na {
                    jac[(i, k)] = lagged(&z, t, k + 1);
                }
                for c in 0..4 {
                    for j in 0..nb {
                        jac[(i, na + c * nb + j)] = -lagged(&v[c], t, nk + j);
                    }
                }
                jac[(i, na + 4 * nb)] = -1.0;
            }
            row0 += rec.scored();
        }
        Some((r, jac))
    }

    fn project(&self, theta: &mut [f64]) {
        stabilize(&mut theta[..self.orders.na]);
    }
}

/// Equation-error least squares: regress `y[t]` on past outputs, delayed
/// inputs and a constant, then convert the constant to an output offset.
pub fn equation_error_init(data: &IdentData, orders: Orders) -> Result<LinearModel<f64>> {
    let (na, nb, nk) = (orders.na, orders.nb, orders.nk);
    let p = na + 4 * nb + 1;
    let rows: usize = data.records.iter().map(|r| r.len().saturating_sub(orders.warmup())).sum();
    if rows < p {
        return Err(Error::RankDeficientRegressor);
    }
    let mut phi = DMatrix::<f64>::zeros(rows, p);
    let mut rhs = DVector::<f64>::zeros(rows);
    let mut i = 0;
    for rec in &data.records {
        for t in orders.warmup()..rec.len() {
            for k in 0..na {
                phi[(i, k)] = -rec.y[t - 1 - k];
            }
            for c in 0..4 {
                for j in 0..nb {
                    phi[(i, na + c * nb + j)] = rec.u[c][t - nk - j];
                }
            }
            phi[(i, p - 1)] = 1.0;
            rhs[i] = rec.y[t];
            i += 1;
        }
    }
    let scale: Vec<f64> = (0..p).map(|j| phi.column(j).norm()).collect();
    if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::RankDeficientRegressor);
    }
    for (j, s) in scale.iter().enumerate() {
        phi.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = phi.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > RANK_TOL * smax) {
        return Err(Error::RankDeficientRegressor);
    }
    let sol = svd.solve(&rhs, 0.0).map_err(|e| Error::DivergedOptimization(e.to_string()))?;
    let theta: Vec<f64> = sol.iter().zip(&scale).map(|(v, s)| v / s).collect();
    let mut a = theta[..na].to_vec();
    stabilize(&mut a);
    let b = (0..4).map(|c| theta[na + c * nb..na + (c + 1) * nb].to_vec()).collect();
    let a_sum = 1.0 + a.iter().sum::<f64>();
    let offset = theta[p - 1] / a_sum;
    LinearModel::new(LtiBlock::new(a, b, vec![nk; 4])?, offset)
}

/// Equation-error start refined by LM on the simulation error.
pub fn fit_linear(data: &IdentData, orders: Orders, settings: &LmSettings) -> Result<(LinearModel<f64>, LmOutcome)> {
    let init = equation_error_init(data, orders)?;
    let problem = LinearProblem::new(data, orders);
    let out = levenberg_marquardt(&problem, problem.theta(&init), settings)?;
    Ok((problem.model(&out.theta)?, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ident::data::Record;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn truth() -> LinearModel<f64> {
        let g = LtiBlock::new(
            vec![-1.3, 0.45],
            vec![vec![2.0, -0.5, 0.3], vec![1.0, 0.4, 0.0], vec![-0.8, 0.2, 0.1], vec![0.5, 0.5, 0.5]],
            vec![0; 4],
        )
        .unwrap();
        LinearModel::new(g, 120.0).unwrap()
    }

    fn data(m: &LinearModel<f64>, n: usize, seed: u64) -> IdentData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: [Vec<f64>; 4] = std::array::from_fn(|_| (0..n).map(|_| rng.random_range(-40.0..10.0)).collect());
        let refs: Vec<&[f64]> = u.iter().map(|v| v.as_slice()).collect();
        let y = m.simulate(&refs).unwrap();
        IdentData { records: vec![Record { u, y, start: 3 }] }
    }

    #[test]
    fn equation_error_exact_on_noiseless_arx() {
        let m = truth();
        let d = data(&m, 800, 1);
        let fit = equation_error_init(&d, Orders::default()).unwrap();
        for (p, q) in fit.g.a().iter().zip(m.g.a()) {
            assert!((p - q).abs() < 1e-8);
        }
        assert!((fit.offset - 120.0).abs() < 1e-6);
    }

    #[test]
    fn rank_deficient_on_constant_data() {
        let d = IdentData { records: vec![Record { u: std::array::from_fn(|_| vec![3.0; 300]), y: vec![500.0; 300], start: 3 }] };
        assert_eq!(equation_error_init(&d, Orders::default()).unwrap_err(), Error::RankDeficientRegressor);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = truth();
        let d = data(&m, 300, 2);
        let p = LinearProblem::new(&d, Orders::default());
        let theta: Vec<f64> = p.theta(&m).iter().map(|v| v * 0.9 + 0.01).collect();
        let (_, j) = p.jacobian(&theta).unwrap();
        for k in 0..p.n_params() {
            let h = 1e-6 * theta[k].abs().max(1.0);
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[k] += h;
            tm[k] -= h;
            let (rp, rm) = (p.residuals(&tp).unwrap(), p.residuals(&tm).unwrap());
            let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let num: f64 = fd.iter().enumerate().map(|(i, v)| (v - j[(i, k)]).powi(2)).sum::<f64>().sqrt();
            let den: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(num / den < 1e-6, "param {k}: {}", num / den);
        }
    }
}
