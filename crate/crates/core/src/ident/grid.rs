//! Public identification entry points and the breakpoint/order grid search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::IdentConfig;
use super::data::IdentData;
use super::hw::fit_hw;
use super::linear::fit_linear;
use super::lm::LmSettings;
use crate::dataio::{Component, Trial};
use crate::error::{Error, Result};
use crate::metrics::FitReport;
use crate::model::{ForceModel, LinearModel, Orders};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Linear,
    Hw,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Hw => "hw",
        }
    }
}

/// Summary of one grid candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFit {
    pub kind: ModelKind,
    pub k: Option<usize>,
    pub orders: Orders,
    pub n_params: usize,
    pub cost: f64,
    pub fit_ident_pct: f64,
    pub fit_valid_mean_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentResult {
    pub model: ForceModel<f64>,
    pub orders: Orders,
    pub chosen_k: Option<usize>,
    /// Sum of squared simulation errors on the identification records.
    pub cost: f64,
    /// Cost at the start and after each accepted step of the winning start.
    pub trace: Vec<f64>,
    /// Winning multistart (0 for the unperturbed start).
    pub start: usize,
    pub fit_ident: FitReport,
    pub fit_valid: Vec<FitReport>,
    /// Every candidate the grid search scored, in evaluation order.
    pub candidates: Vec<CandidateFit>,
}

impl IdentResult {
    pub fn fit_valid_mean(&self) -> f64 {
        mean_fit(&self.fit_valid)
    }

    pub fn kind(&self) -> ModelKind {
        match self.model {
            ForceModel::Hw(_) => ModelKind::Hw,
            ForceModel::Linear(_) => ModelKind::Linear,
        }
    }

    fn summary(&self) -> CandidateFit {
        CandidateFit {
            kind: self.kind(),
            k: self.chosen_k,
            orders: self.orders,
            n_params: self.model.n_params(),
            cost: self.cost,
            fit_ident_pct: self.fit_ident.nrmse_fit_pct,
            fit_valid_mean_pct: self.fit_valid_mean(),
        }
    }
}

fn mean_fit(r: &[FitReport]) -> f64 {
    if r.is_empty() {
        return f64::NAN;
    }
    r.iter().map(|f| f.nrmse_fit_pct).sum::<f64>() / r.len() as f64
}

fn settings(cfg: &IdentConfig) -> LmSettings {
    LmSettings { max_iters: cfg.max_iters, tol_rel_cost: cfg.tol_rel_cost }
}

fn warmup(cfg: &IdentConfig, orders: Orders) -> usize {
    if cfg.warmup_excluded { orders.warmup() } else { 0 }
}

/// Fit over the scored samples of every identification record, joined.
fn ident_report(data: &IdentData, model: &ForceModel<f64>) -> Result<FitReport> {
    let mut fhat = Vec::with_capacity(data.n_residuals());
    for rec in &data.records {
        let refs: Vec<&[f64]> = rec.u.iter().map(Vec::as_slice).collect();
        fhat.extend_from_slice(&model.simulate(&refs)?[rec.start..]);
    }
    let mut r = FitReport::from_series(&data.joined_targets(), &fhat, 0)?;
    r.warmup_excluded = data.records.iter().map(|r| r.start).sum();
    Ok(r)
}

fn valid_reports(valid: &[&Trial<f64>], model: &ForceModel<f64>, component: Component, warm: usize) -> Result<Vec<FitReport>> {
    valid
        .iter()
        .map(|t| {
            let fhat = model.simulate(&t.inputs())?;
            FitReport::from_series(t.output(component), &fhat, warm)
        })
        .collect()
}

fn finish(
    data: &IdentData,
    model: ForceModel<f64>,
    orders: Orders,
    chosen_k: Option<usize>,
    cost: f64,
    trace: Vec<f64>,
    start: usize,
) -> Result<IdentResult> {
    let fit_ident = ident_report(data, &model)?;
    Ok(IdentResult { model, orders, chosen_k, cost, trace, start, fit_ident, fit_valid: Vec::new(), candidates: Vec::new() })
}

fn linear_on(data: &IdentData, orders: Orders, cfg: &IdentConfig) -> Result<(LinearModel<f64>, IdentResult)> {
    let (m, out) = fit_linear(data, orders, &settings(cfg))?;
    let r = finish(data, ForceModel::Linear(m.clone()), orders, None, out.cost, out.trace, 0)?;
    Ok((m, r))
}

fn hw_on(data: &IdentData, k: usize, orders: Orders, lin: &LinearModel<f64>, cfg: &IdentConfig) -> Result<IdentResult> {
    let fit = fit_hw(data, k, orders, lin, &settings(cfg), cfg.multistarts, cfg.seed)?;
    finish(data, ForceModel::Hw(fit.model), orders, Some(k), fit.cost, fit.trace, fit.start)
}

fn check_duration(trials: &[&Trial<f64>]) -> Result<()> {
    let total: f64 = trials.iter().map(|t| t.duration_s()).sum();
    if total < 10.0 {
        return Err(Error::InvalidArgument(format!("identification needs at least 10 s of data, got {total:.2} s")));
    }
    Ok(())
}

/// Linear model for `component` from one or more identification trials,
/// each simulated from zero state.
pub fn identify_linear(ident: &[&Trial<f64>], component: Component, orders: Orders, cfg: &IdentConfig) -> Result<IdentResult> {
    cfg.validate()?;
    check_duration(ident)?;
    let data = IdentData::from_trials(ident, component, warmup(cfg, orders))?;
    Ok(linear_on(&data, orders, cfg)?.1)
}

/// HW model with `k` breakpoints per nonlinearity. The linear model is
/// identified first and used as the unperturbed start.
pub fn identify_hw(ident: &[&Trial<f64>], component: Component, k: usize, orders: Orders, cfg: &IdentConfig) -> Result<IdentResult> {
    cfg.validate()?;
    if !(2..=50).contains(&k) {
        return Err(Error::InvalidArgument(format!("breakpoint count {k} outside [2, 50]")));
    }
    check_duration(ident)?;
    let data = IdentData::from_trials(ident, component, warmup(cfg, orders))?;
    let (lin, _) = linear_on(&data, orders, cfg)?;
    hw_on(&data, k, orders, &lin, cfg)
}

/// Identify the linear model and an HW model for every breakpoint count and
/// order set, score each on the validation trials, and keep the best mean
/// validation fit. Candidates within `tie_tol_pct` of the best count as tied
/// and the one with fewest parameters wins; remaining ties go to the earlier
/// candidate (linear first, then increasing orders and breakpoints).
pub fn grid_search(ident: &[&Trial<f64>], valid: &[&Trial<f64>], component: Component, cfg: &IdentConfig) -> Result<IdentResult> {
    cfg.validate()?;
    if valid.is_empty() {
        return Err(Error::InvalidArgument("grid search needs at least one validation trial".into()));
    }
    check_duration(ident)?;
    let mut orders = cfg.orders.clone();
    orders.sort();
    orders.dedup();
    let mut grid = cfg.breakpoint_grid.clone();
    grid.sort();
    grid.dedup();

    let data: Vec<IdentData> =
        orders.iter().map(|&o| IdentData::from_trials(ident, component, warmup(cfg, o))).collect::<Result<_>>()?;
    let linear: Vec<(LinearModel<f64>, IdentResult)> =
        orders.par_iter().zip(&data).map(|(&o, d)| linear_on(d, o, cfg)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..orders.len()).flat_map(|oi| grid.iter().map(move |&k| (oi, k))).collect();
    let hw: Vec<IdentResult> = jobs
        .par_iter()
        .map(|&(oi, k)| hw_on(&data[oi], k, orders[oi], &linear[oi].0, cfg))
        .collect::<Result<_>>()?;

    let mut all: Vec<IdentResult> = linear.into_iter().map(|(_, r)| r).chain(hw).collect();
    all.par_iter_mut().try_for_each(|r| -> Result<()> {
        r.fit_valid = valid_reports(valid, &r.model, component, warmup(cfg, r.orders))?;
        Ok(())
    })?;
    let summaries: Vec<CandidateFit> = all.iter().map(IdentResult::summary).collect();
    let score = |c: &CandidateFit| if c.fit_valid_mean_pct.is_finite() { c.fit_valid_mean_pct } else { f64::NEG_INFINITY };
    let best = summaries.iter().map(score).fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return Err(Error::DivergedOptimization("no candidate produced a finite validation fit".into()));
    }
    let chosen = (0..summaries.len())
        .filter(|&i| score(&summaries[i]) >= best - cfg.tie_tol_pct)
        .min_by(|&i, &j| {
            let (a, b) = (&summaries[i], &summaries[j]);
            a.n_params.cmp(&b.n_params).then(score(b).total_cmp(&score(a))).then(i.cmp(&j))
        })
        .expect("best candidate is in the tied set");
    let mut result = all.swap_remove(chosen);
    result.candidates = summaries;
    Ok(result)
}
