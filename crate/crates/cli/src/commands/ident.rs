use std::path::{Path, PathBuf};

use insole_grf::dataio::{Component, Role, Side, Trial};
use insole_grf::ident::{dataset_hash, grid_search, identify_linear, IdentResult, ModelKind};
use insole_grf::model::{serialize_model, IdentMeta, ModelFile};
use insole_grf::{Error, Result};

use super::{average_reports, component_tag, events, fit_rows_csv, load_trials, meta_files, trial_report, trial_rows_csv, FitRow, TrialRow};
use crate::config::RunConfig;
use crate::manifest::Inputs;
use crate::output::{csv_bytes, num, Outputs};

struct Fitted {
    side: Side,
    component: Component,
    result: IdentResult,
    /// Linear model with the winner's orders when an HW model won.
    baseline: Option<IdentResult>,
}

/// Identify every foot × component present in the inputs.
pub fn run(cfg: &RunConfig, data: Option<&Path>, ident: &[PathBuf], valid: &[PathBuf], inputs: &mut Inputs, out: &mut Outputs) -> Result<()> {
    let trials = match data {
        Some(dir) => load_trials(&meta_files(dir)?, None, inputs)?,
        None => {
            if ident.is_empty() {
                return Err(Error::InvalidArgument("give --data DIR or at least one --ident trial".into()));
            }
            let mut t = load_trials(ident, Some(Role::Identification), inputs)?;
            t.extend(load_trials(valid, Some(Role::Validation), inputs)?);
            t
        }
    };

    let mut fitted = Vec::new();
    for side in Side::BOTH {
        let of_side: Vec<&Trial<f64>> = trials.iter().filter(|t| t.side() == side).collect();
        if of_side.is_empty() {
            continue;
        }
        let id: Vec<&Trial<f64>> = of_side.iter().copied().filter(|t| t.role() == Role::Identification).collect();
        let va: Vec<&Trial<f64>> = of_side.iter().copied().filter(|t| t.role() == Role::Validation).collect();
        if id.is_empty() || va.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} foot needs identification and validation trials, got {} and {}",
                side.name(),
                id.len(),
                va.len()
            )));
        }
        for component in Component::BOTH {
            let result = grid_search(&id, &va, component, &cfg.ident)?;
            let baseline = match result.kind() {
                ModelKind::Hw => Some(identify_linear(&id, component, result.orders, &cfg.ident)?),
                ModelKind::Linear => None,
            };
            eprintln!(
                "{} {}: {} k={} validation fit {:.2}%",
                side.name(),
                component.code(),
                result.kind().name(),
                result.chosen_k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
                result.fit_valid_mean()
            );
            fitted.push(Fitted { side, component, result, baseline });
        }
    }
    if fitted.is_empty() {
        return Err(Error::InvalidArgument("no trials to identify".into()));
    }

    let trial_events: Vec<Option<Vec<usize>>> = trials.iter().map(|t| events(t, &cfg.gait)).collect();
    let mut rows = Vec::new();
    let mut trial_rows = Vec::new();
    let mut cand_rows = Vec::new();
    let mut trace_rows = Vec::new();
    for f in &fitted {
        let id: Vec<&Trial<f64>> = trials.iter().filter(|t| t.side() == f.side && t.role() == Role::Identification).collect();
        let tag = format!("{}_{}", f.side.name(), component_tag(f.component));
        let meta = |r: &IdentResult| IdentMeta {
            dataset_hash: dataset_hash(&id),
            breakpoints: r.chosen_k,
            seed: cfg.ident.seed,
            fit_ident_pct: Some(r.fit_ident.nrmse_fit_pct),
            fit_valid_mean_pct: Some(r.fit_valid_mean()),
        };
        out.add(&format!("models/{tag}.model"), serialize_model(&ModelFile::new(f.side, f.component, f.result.model.clone(), meta(&f.result))))?;
        if let Some(b) = &f.baseline {
            out.add(&format!("models/{tag}_linear.model"), serialize_model(&ModelFile::new(f.side, f.component, b.model.clone(), meta(b))))?;
        }

        for (r, selected) in std::iter::once((&f.result, true)).chain(f.baseline.as_ref().map(|b| (b, false))) {
            let warm = if cfg.ident.warmup_excluded { r.model.warmup() } else { 0 };
            for role in [Role::Identification, Role::Validation] {
                let mut reports = Vec::new();
                for (t, ev) in trials.iter().zip(&trial_events) {
                    if t.side() != f.side || t.role() != role {
                        continue;
                    }
                    let (rep, _) = trial_report(t, &r.model, f.component, warm, ev.as_deref())?;
                    trial_rows.push(TrialRow {
                        foot: f.side,
                        component: f.component,
                        model: r.kind().name().to_string(),
                        trial: t.label().to_string(),
                        role,
                        report: rep.clone(),
                    });
                    reports.push(rep);
                }
                rows.push(FitRow {
                    foot: f.side,
                    component: f.component,
                    model: r.kind().name().to_string(),
                    k: r.chosen_k,
                    selected,
                    role,
                    n_trials: reports.len(),
                    report: average_reports(&reports),
                });
            }
        }

        for c in &f.result.candidates {
            let chosen = c.kind == f.result.kind() && c.k == f.result.chosen_k && c.orders == f.result.orders;
            cand_rows.push(vec![
                f.side.name().to_string(),
                f.component.code().to_string(),
                c.kind.name().to_string(),
                c.k.map(|k| k.to_string()).unwrap_or_default(),
                c.orders.nb.to_string(),
                c.orders.na.to_string(),
                c.orders.nk.to_string(),
                c.n_params.to_string(),
                num(c.cost),
                num(c.fit_ident_pct),
                num(c.fit_valid_mean_pct),
                chosen.to_string(),
            ]);
        }
        for (i, c) in f.result.trace.iter().enumerate() {
            trace_rows.push(vec![f.side.name().to_string(), f.component.code().to_string(), i.to_string(), num(*c)]);
        }
    }

    out.add("fit_report.csv", fit_rows_csv(&rows)?)?;
    out.add("fit_report_trials.csv", trial_rows_csv(&trial_rows)?)?;
    out.add(
        "candidates.csv",
        csv_bytes(
            &["foot", "component", "model", "k", "nb", "na", "nk", "n_params", "cost", "fit_ident_pct", "fit_valid_mean_pct", "selected"],
            cand_rows,
        )?,
    )?;
    out.add("trace.csv", csv_bytes(&["foot", "component", "iteration", "cost"], trace_rows)?)?;
    Ok(())
}
