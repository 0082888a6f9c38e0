use std::path::PathBuf;

use insole_grf::dataio::{ChannelSeries, Role, Trial, Unit};
use insole_grf::gait::{cycle_stats, segment_cycles, CycleStats, CYCLE_POINTS};
use insole_grf::model::{deserialize_model, ModelFile};
use insole_grf::{Error, Result};

use super::{average_reports, events, fit_rows_csv, load_trials, timestamp, trial_report, trial_rows_csv, FitRow, TrialRow};
use crate::config::RunConfig;
use crate::manifest::Inputs;
use crate::output::Outputs;
use crate::svg::{render, Line, Panel, PALETTE};

/// Seconds of the time-series overlay.
const OVERLAY_S: f64 = 10.0;

fn model_name(m: &ModelFile) -> String {
    m.model.kind().to_string()
}

fn mean_cycle(x: &[f64], rate_hz: f64, ev: &[usize]) -> Option<CycleStats<f64>> {
    let s = ChannelSeries::new(x.to_vec(), rate_hz, Unit::Newtons, 0.0).ok()?;
    cycle_stats(&segment_cycles(&s, ev).ok()?).ok()
}

fn overlay(trial: &Trial<f64>, mf: &ModelFile, fhat: &[f64], ev: Option<&[usize]>, ts: Option<u64>) -> String {
    let f = trial.output(mf.component);
    let rate = trial.rate_hz();
    let start = mf.model.warmup().min(f.len());
    let end = (start + (OVERLAY_S * rate) as usize).min(f.len());
    let t: Vec<f64> = (start..end).map(|i| i as f64 / rate).collect();
    let comp = mf.component.code();
    let mut series = Panel::new(format!("{} {} {}: measured vs estimated", trial.label(), mf.side.name(), comp), "time (s)", format!("F{comp} (N)"));
    series.lines.push(Line::new("measured", PALETTE[0], t.clone(), f[start..end].to_vec()));
    series.lines.push(Line::new(format!("{} estimate", model_name(mf)), PALETTE[1], t, fhat[start..end].to_vec()).dashed());
    let mut panels = vec![series];
    if let Some(ev) = ev {
        if let (Some(m), Some(h)) = (mean_cycle(f, rate, ev), mean_cycle(fhat, rate, ev)) {
            let pct: Vec<f64> = (0..CYCLE_POINTS).map(|p| p as f64).collect();
            let mut cyc = Panel::new(format!("averaged gait cycle ({} cycles, ±1 std)", m.n), "gait cycle (%)", format!("F{comp} (N)"));
            cyc.lines.push(Line::new("measured", PALETTE[0], pct.clone(), m.mean).with_band(m.std));
            cyc.lines.push(Line::new(format!("{} estimate", model_name(mf)), PALETTE[1], pct, h.mean).with_band(h.std).dashed());
            panels.push(cyc);
        }
    }
    render(&panels, ts)
}

/// Score each model on every trial of its foot and plot the overlays.
pub fn run(cfg: &RunConfig, models: &[PathBuf], trials: &[PathBuf], deterministic: bool, inputs: &mut Inputs, out: &mut Outputs) -> Result<()> {
    let mut files = Vec::with_capacity(models.len());
    for p in models {
        let bytes = std::fs::read(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        inputs.add_bytes(p, &bytes);
        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into());
        files.push((stem, deserialize_model(&bytes)?));
    }
    let trials = load_trials(trials, None, inputs)?;
    let trial_events: Vec<Option<Vec<usize>>> = trials.iter().map(|t| events(t, &cfg.gait)).collect();
    let ts = timestamp(deterministic);

    let mut rows = Vec::new();
    let mut trial_rows = Vec::new();
    let mut seen = Vec::new();
    for (stem, mf) in &files {
        // the first model given for a foot × component is the one reported as selected
        let selected = !seen.contains(&(mf.side, mf.component));
        seen.push((mf.side, mf.component));
        let warm = mf.model.warmup();
        let mut by_role: Vec<(Role, Vec<_>)> = Vec::new();
        for (t, ev) in trials.iter().zip(&trial_events) {
            if t.side() != mf.side {
                continue;
            }
            let (rep, fhat) = trial_report(t, &mf.model, mf.component, warm, ev.as_deref())?;
            trial_rows.push(TrialRow {
                foot: mf.side,
                component: mf.component,
                model: model_name(mf),
                trial: t.label().to_string(),
                role: t.role(),
                report: rep.clone(),
            });
            match by_role.iter_mut().find(|(r, _)| *r == t.role()) {
                Some((_, v)) => v.push(rep),
                None => by_role.push((t.role(), vec![rep])),
            }
            let name = format!("plots/{}_{}.svg", t.label(), stem);
            out.add_str(&name, overlay(t, mf, &fhat, ev.as_deref(), ts))?;
        }
        if by_role.is_empty() {
            return Err(Error::InvalidArgument(format!("no {} foot trial for model '{stem}'", mf.side.name())));
        }
        by_role.sort_by_key(|(r, _)| r.name());
        for (role, reps) in by_role {
            rows.push(FitRow {
                foot: mf.side,
                component: mf.component,
                model: model_name(mf),
                k: mf.meta.breakpoints,
                selected,
                role,
                n_trials: reps.len(),
                report: average_reports(&reps),
            });
        }
    }
    out.add("fit_report.csv", fit_rows_csv(&rows)?)?;
    out.add("fit_report_trials.csv", trial_rows_csv(&trial_rows)?)?;
    Ok(())
}
