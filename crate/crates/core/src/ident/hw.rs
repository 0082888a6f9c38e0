//! Output-error identification of the Hammerstein-Wiener model.

use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::data::{all_pole, fir, lagged, IdentData};
use super::lm::{levenberg_marquardt, stabilize, sum_sq, LmOutcome, LmSettings, LsqProblem};
use crate::error::{Error, Result};
use crate::model::{denominator_is_stable, quantile_breakpoints, HwModel, LinearModel, LtiBlock, Orders, PwlFunction};
use crate::sim::sub_rng;

/// Multistart perturbation: Gaussian with this fraction of each function's y-range as σ.
pub const PERTURB_FRAC: f64 = 0.1;

/// Parameter layout: `[f1_0 ys .. f1_3 ys, a, b_0 .. b_3, f2 ys]`.
/// Breakpoint locations are fixed.
pub struct HwProblem<'a> {
    pub data: &'a IdentData,
    pub orders: Orders,
    pub xs1: [Vec<f64>; 4],
    pub xs2: Vec<f64>,
    /// Per record and channel: segment index and position of every input sample.
    seg1: Vec<[Vec<(usize, f64)>; 4]>,
}

fn segments(xs: &[f64], u: &[f64]) -> Result<Vec<(usize, f64)>> {
    let f = PwlFunction::identity(xs.to_vec())?;
    Ok(u.iter().map(|&v| f.locate(v)).collect())
}

impl<'a> HwProblem<'a> {
    pub fn new(data: &'a IdentData, orders: Orders, xs1: [Vec<f64>; 4], xs2: Vec<f64>) -> Result<Self> {
        let mut seg1 = Vec::with_capacity(data.records.len());
        for rec in &data.records {
            let s: Vec<Vec<(usize, f64)>> = (0..4).map(|c| segments(&xs1[c], &rec.u[c])).collect::<Result<_>>()?;
            seg1.push(s.try_into().expect("four channels"));
        }
        PwlFunction::identity(xs2.clone())?;
        Ok(HwProblem { data, orders, xs1, xs2, seg1 })
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let n1: usize = self.xs1.iter().map(Vec::len).sum();
        let oa = n1;
        let ob = oa + self.orders.na;
        let o2 = ob + 4 * self.orders.nb;
        (oa, ob, o2)
    }

    fn f1_offset(&self, c: usize) -> usize {
        self.xs1[..c].iter().map(Vec::len).sum()
    }

    pub fn theta(&self, m: &HwModel<f64>) -> Vec<f64> {
        let mut t = Vec::with_capacity(self.n_params());
        for f in &m.f1 {
            t.extend_from_slice(f.ys());
        }
        t.extend_from_slice(m.g.a());
        for b in m.g.b() {
            t.extend_from_slice(b);
        }
        t.extend_from_slice(m.f2.ys());
        t
    }

    pub fn model(&self, theta: &[f64]) -> Result<HwModel<f64>> {
        let (oa, ob, o2) = self.offsets();
        let f1: Vec<PwlFunction<f64>> = (0..4)
            .map(|c| {
                let o = self.f1_offset(c);
                PwlFunction::new(self.xs1[c].clone(), theta[o..o + self.xs1[c].len()].to_vec())
            })
            .collect::<Result<_>>()?;
        let nb = self.orders.nb;
        let b = (0..4).map(|c| theta[ob + c * nb..ob + (c + 1) * nb].to_vec()).collect();
        let g = LtiBlock::new(theta[oa..ob].to_vec(), b, vec![self.orders.nk; 4])?;
        let f2 = PwlFunction::new(self.xs2.clone(), theta[o2..].to_vec())?;
        HwModel::new(f1.try_into().expect("four channels"), g, f2)
    }

    fn input_stage(&self, theta: &[f64], r: usize) -> [Vec<f64>; 4] {
        std::array::from_fn(|c| {
            let o = self.f1_offset(c);
            self.seg1[r][c].iter().map(|&(i, t)| theta[o + i] + t * (theta[o + i + 1] - theta[o + i])).collect()
        })
    }

    fn block(&self, theta: &[f64], w: &[Vec<f64>; 4]) -> Vec<f64> {
        let (oa, ob, _) = self.offsets();
        let nb = self.orders.nb;
        let n = w[0].len();
        let mut s = vec![0.0; n];
        for c in 0..4 {
            for (acc, v) in s.iter_mut().zip(fir(&theta[ob + c * nb..ob + (c + 1) * nb], self.orders.nk, &w[c])) {
                *acc += v;
            }
        }
        all_pole(&theta[oa..ob], &s)
    }

    fn output_fn(&self, theta: &[f64]) -> Option<PwlFunction<f64>> {
        let (_, _, o2) = self.offsets();
        PwlFunction::new(self.xs2.clone(), theta[o2..].to_vec()).ok()
    }
}

impl LsqProblem for HwProblem<'_> {
    fn n_params(&self) -> usize {
        self.offsets().2 + self.xs2.len()
    }

    fn residuals(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let (oa, ob, _) = self.offsets();
        if !denominator_is_stable(&theta[oa..ob]) {
            return None;
        }
        let f2 = self.output_fn(theta)?;
        let mut r = Vec::with_capacity(self.data.n_residuals());
        for (ri, rec) in self.data.records.iter().enumerate() {
            let x = self.block(theta, &self.input_stage(theta, ri));
            r.extend((rec.start..rec.len()).map(|t| rec.y[t] - f2.eval(x[t])));
        }
        Some(r)
    }

    fn jacobian(&self, theta: &[f64]) -> Option<(Vec<f64>, DMatrix<f64>)> {
        let (oa, ob, o2) = self.offsets();
        let a = &theta[oa..ob];
        if !denominator_is_stable(a) {
            return None;
        }
        let (na, nb, nk) = (self.orders.na, self.orders.nb, self.orders.nk);
        let f2 = self.output_fn(theta)?;
        let mut jac = DMatrix::zeros(self.data.n_residuals(), self.n_params());
        let mut r = Vec::with_capacity(self.data.n_residuals());
        let mut row0 = 0;
        for (ri, rec) in self.data.records.iter().enumerate() {
            let w = self.input_stage(theta, ri);
            let x = self.block(theta, &w);
            let loc: Vec<(usize, f64)> = x.iter().map(|&v| f2.locate(v)).collect();
            let slope: Vec<f64> = loc.iter().map(|&(i, _)| f2.segment_slope(i)).collect();
            let span = rec.start..rec.len();
            for t in span.clone() {
                r.push(rec.y[t] - f2.eval(x[t]));
            }
            // r = y - f2(x): every column is minus the output sensitivity
            let nrows = jac.nrows();
            let mut put = |col: usize, sens: &dyn Fn(usize) -> f64| {
                // column-major storage: each column is one contiguous run
                let out = &mut jac.as_mut_slice()[col * nrows + row0..col * nrows + row0 + span.len()];
                for (o, t) in out.iter_mut().zip(span.clone()) {
                    *o = -slope[t] * sens(t);
                }
            };
            for c in 0..4 {
                let b = &theta[ob + c * nb..ob + (c + 1) * nb];
                let o = self.f1_offset(c);
                for j in 0..self.xs1[c].len() {
                    let phi: Vec<f64> = self.seg1[ri][c]
                        .iter()
                        .map(|&(i, t)| if i == j { 1.0 - t } else if i + 1 == j { t } else { 0.0 })
                        .collect();
                    let dx = all_pole(a, &fir(b, nk, &phi));
                    put(o + j, &|t| dx[t]);
                }
            }
            let z = all_pole(a, &x);
            for i in 0..na {
                put(oa + i, &|t| -lagged(&z, t, i + 1));
            }
            for c in 0..4 {
                let v = all_pole(a, &w[c]);
                for j in 0..nb {
                    put(ob + c * nb + j, &|t| lagged(&v, t, nk + j));
                }
            }
            for (row, t) in span.clone().enumerate() {
                let (i, tau) = loc[t];
                jac[(row0 + row, o2 + i)] = -(1.0 - tau);
                jac[(row0 + row, o2 + i + 1)] = -tau;
            }
            row0 += rec.scored();
        }
        Some((r, jac))
    }

    fn project(&self, theta: &mut [f64]) {
        let (oa, ob, _) = self.offsets();
        stabilize(&mut theta[oa..ob]);
    }
}

/// Best start of an HW fit.
#[derive(Debug, Clone)]
pub struct HwFit {
    pub model: HwModel<f64>,
    pub cost: f64,
    pub trace: Vec<f64>,
    pub start: usize,
}

/// Input breakpoints at quantiles of each channel over all identification samples.
pub fn input_breakpoints(data: &IdentData, k: usize) -> Result<[Vec<f64>; 4]> {
    let u = data.joined_inputs();
    let xs: Vec<Vec<f64>> = u
        .iter()
        .enumerate()
        .map(|(c, v)| {
            quantile_breakpoints(v, k).map_err(|e| match e {
                Error::DegenerateChannel(_) => Error::DegenerateChannel(format!("input channel {c} has zero variance")),
                e => e,
            })
        })
        .collect::<Result<_>>()?;
    Ok(xs.try_into().expect("four channels"))
}

/// Identity input nonlinearities on `xs1`, the linear block, and an output
/// nonlinearity that adds the linear offset. Reproduces the linear model.
pub fn init_from_linear(data: &IdentData, k: usize, xs1: &[Vec<f64>; 4], lin: &LinearModel<f64>) -> Result<HwModel<f64>> {
    let f1: Vec<PwlFunction<f64>> = xs1.iter().map(|xs| PwlFunction::identity(xs.clone())).collect::<Result<_>>()?;
    let mut x_all = Vec::with_capacity(data.n_residuals());
    for rec in &data.records {
        let refs: Vec<&[f64]> = rec.u.iter().map(Vec::as_slice).collect();
        let x = lin.g.apply(&refs)?;
        x_all.extend_from_slice(&x[rec.start..]);
    }
    let xs2 = quantile_breakpoints(&x_all, k)?;
    let f2 = PwlFunction::identity(xs2)?.affine_output(1.0, lin.offset);
    HwModel::new(f1.try_into().expect("four channels"), lin.g.clone(), f2)
}

fn perturb(theta: &mut [f64], ranges: &[(usize, usize)], rng: &mut impl rand::Rng) {
    for &(o, n) in ranges {
        let ys = &theta[o..o + n];
        let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sigma = PERTURB_FRAC * (hi - lo);
        if !(sigma > 0.0) {
            continue;
        }
        let normal = Normal::new(0.0, sigma).expect("positive sigma");
        for v in &mut theta[o..o + n] {
            *v += normal.sample(rng);
        }
    }
}

/// Fit with `starts` multistarts. Start 0 is the linear-model initialization
/// itself; the others perturb every breakpoint value. The lowest final cost
/// wins, earlier starts winning ties. The result is normalized.
pub fn fit_hw(
    data: &IdentData,
    k: usize,
    orders: Orders,
    lin: &LinearModel<f64>,
    settings: &LmSettings,
    starts: usize,
    seed: u64,
) -> Result<HwFit> {
    let xs1 = input_breakpoints(data, k)?;
    let init = init_from_linear(data, k, &xs1, lin)?;
    let problem = HwProblem::new(data, orders, xs1, init.f2.xs().to_vec())?;
    let theta0 = problem.theta(&init);
    let (_, _, o2) = problem.offsets();
    let mut ranges: Vec<(usize, usize)> = (0..4).map(|c| (problem.f1_offset(c), problem.xs1[c].len())).collect();
    ranges.push((o2, problem.xs2.len()));
    let outcomes: Vec<Result<LmOutcome>> = (0..starts.max(1))
        .into_par_iter()
        .map(|s| {
            let mut theta = theta0.clone();
            if s > 0 {
                let mut rng = sub_rng(seed, &format!("hw-start-k{k}-{}-{}-{}-{s}", orders.nb, orders.na, orders.nk));
                perturb(&mut theta, &ranges, &mut rng);
            }
            levenberg_marquardt(&problem, theta, settings)
        })
        .collect();
    let mut best: Option<(usize, LmOutcome)> = None;
    let mut last_err = None;
    for (s, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(o) if o.cost.is_finite() => {
                if best.as_ref().is_none_or(|(_, b)| o.cost < b.cost) {
                    best = Some((s, o));
                }
            }
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    let Some((start, out)) = best else {
        return Err(Error::DivergedOptimization(format!(
            "all {starts} starts failed{}",
            last_err.map(|e| format!(": {e}")).unwrap_or_default()
        )));
    };
    let mut model = problem.model(&out.theta)?;
    let joined = data.joined_inputs();
    let refs: Vec<&[f64]> = joined.iter().map(Vec::as_slice).collect();
    model.normalize(&refs)?;
    let cost = problem
        .residuals(&problem.theta(&model))
        .map(|r| sum_sq(&r))
        .ok_or_else(|| Error::DivergedOptimization("normalized model is unusable".into()))?;
    Ok(HwFit { model, cost, trace: out.trace, start })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ident::data::Record;
    use crate::ident::linear::{fit_linear, LinearProblem};
    use crate::sim::{make_truth_hw, truth_excitation};

    fn truth_data(k: usize, n: usize, seed: u64) -> (HwModel<f64>, IdentData) {
        let m = make_truth_hw(k, Orders::default(), seed).unwrap();
        let u = truth_excitation(n, 100.0, seed + 100);
        let refs: Vec<&[f64]> = u.iter().map(Vec::as_slice).collect();
        let y = m.simulate(&refs).unwrap();
        (m, IdentData { records: vec![Record { u, y, start: 3 }] })
    }

    #[test]
    fn identity_init_reproduces_linear() {
        let (_, d) = truth_data(5, 1500, 1);
        let settings = LmSettings { max_iters: 20, tol_rel_cost: 1e-8 };
        let (lin, lin_out) = fit_linear(&d, Orders::default(), &settings).unwrap();
        let xs1 = input_breakpoints(&d, 6).unwrap();
        let init = init_from_linear(&d, 6, &xs1, &lin).unwrap();
        let p = HwProblem::new(&d, Orders::default(), xs1, init.f2.xs().to_vec()).unwrap();
        let c_hw = sum_sq(&p.residuals(&p.theta(&init)).unwrap());
        let lp = LinearProblem::new(&d, Orders::default());
        let c_lin = sum_sq(&lp.residuals(&lp.theta(&lin)).unwrap());
        assert!((c_hw - c_lin).abs() <= 1e-9 * c_lin, "{c_hw} vs {c_lin}");
        assert!((c_lin - lin_out.cost).abs() <= 1e-12 * c_lin);
    }

    #[test]
    fn zero_iterations_returns_initialization() {
        let (_, d) = truth_data(5, 1200, 2);
        let lin_settings = LmSettings { max_iters: 30, tol_rel_cost: 1e-8 };
        let (lin, _) = fit_linear(&d, Orders::default(), &lin_settings).unwrap();
        let fit = fit_hw(&d, 6, Orders::default(), &lin, &LmSettings { max_iters: 0, tol_rel_cost: 1e-6 }, 1, 0).unwrap();
        let refs: Vec<&[f64]> = d.records[0].u.iter().map(Vec::as_slice).collect();
        let yh = fit.model.simulate(&refs).unwrap();
        let yl = lin.simulate(&refs).unwrap();
        for (p, q) in yh.iter().zip(&yl) {
            assert!((p - q).abs() < 1e-8 * q.abs().max(1.0));
        }
        assert_eq!(fit.trace.len(), 1);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let (m, d) = truth_data(4, 400, 3);
        let orders = Orders { nb: 2, na: 2, nk: 1 };
        let xs1 = input_breakpoints(&d, 4).unwrap();
        let p = HwProblem::new(&d, orders, xs1.clone(), m.f2.xs().to_vec()).unwrap();
        let mut theta: Vec<f64> = (0..p.n_params()).map(|i| ((i * 7919) % 97) as f64 / 97.0 - 0.3).collect();
        let (oa, ob, _) = p.offsets();
        theta[oa..ob].copy_from_slice(&[-0.9, 0.3]);
        let (_, j) = p.jacobian(&theta).unwrap();
        // FD round-off is uniform across columns, so tiny columns are judged against the largest one
        let jmax = (0..p.n_params()).map(|k| j.column(k).norm()).fold(0.0, f64::max);
        for k in 0..p.n_params() {
            let h = 1e-6 * theta[k].abs().max(1.0);
            let (mut tp, mut tm) = (theta.clone(), theta.clone());
            tp[k] += h;
            tm[k] -= h;
            let (rp, rm) = (p.residuals(&tp).unwrap(), p.residuals(&tm).unwrap());
            let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let num = fd.iter().enumerate().map(|(i, v)| (v - j[(i, k)]).powi(2)).sum::<f64>().sqrt();
            let den = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(num <= 1e-5 * den.max(1e-2 * jmax), "param {k}: {num} / {den}");
        }
    }

    #[test]
    fn degenerate_input_channel() {
        let (_, mut d) = truth_data(4, 500, 4);
        d.records[0].u[2] = vec![1.5; 500];
        assert!(matches!(input_breakpoints(&d, 5), Err(Error::DegenerateChannel(_))));
    }
}
