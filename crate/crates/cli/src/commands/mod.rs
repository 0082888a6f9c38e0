//! One module per subcommand plus the fit-report rows they share.

pub mod gait;
pub mod ident;
pub mod report;
pub mod simulate;
pub mod validate;

use std::path::{Path, PathBuf};

use insole_grf::dataio::{load_trial, Component, Role, Side, Trial};
use insole_grf::gait::detect_heel_strikes;
use insole_grf::metrics::FitReport;
use insole_grf::model::ForceModel;
use insole_grf::{Error, Result};

use crate::args::{Cli, Command};
use crate::config::{GaitConfig, RunConfig};
use crate::manifest::{now_unix_s, stage_manifest, Inputs};
use crate::output::{csv_bytes, num, Outputs};

pub fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let mut out = Outputs::new(&cli.out);
    let mut inputs = Inputs::default();
    if let Some(p) = &cli.config {
        inputs.add(p)?;
    }
    let args: Vec<String> = match &cli.command {
        Command::Simulate => {
            simulate::run(cfg, &mut out)?;
            Vec::new()
        }
        Command::Ident { data, ident, valid } => {
            ident::run(cfg, data.as_deref(), ident, valid, &mut inputs, &mut out)?;
            data.iter().chain(ident).chain(valid).map(|p| p.display().to_string()).collect()
        }
        Command::Validate { models, trials } => {
            validate::run(cfg, models, trials, cli.deterministic, &mut inputs, &mut out)?;
            models.iter().chain(trials).map(|p| p.display().to_string()).collect()
        }
        Command::Gait { trial } => {
            gait::run(cfg, trial, cli.deterministic, &mut inputs, &mut out)?;
            vec![trial.display().to_string()]
        }
        Command::Report { runs } => {
            report::run(runs, &mut inputs, &mut out)?;
            runs.iter().map(|p| p.display().to_string()).collect()
        }
    };
    stage_manifest(&mut out, cli.command.name(), args, cfg, inputs, cli.deterministic)?;
    out.commit()?;
    Ok(())
}

pub(crate) fn timestamp(deterministic: bool) -> Option<u64> {
    if deterministic { None } else { Some(now_unix_s()) }
}

/// Trial metadata files in `dir`, sorted by name.
pub(crate) fn meta_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut v: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    if v.is_empty() {
        return Err(Error::InvalidArgument(format!("no trial metadata (*.toml) in {}", dir.display())));
    }
    Ok(v)
}

/// Load trials, overriding the role when one is given.
pub(crate) fn load_trials(paths: &[PathBuf], role: Option<Role>, inputs: &mut Inputs) -> Result<Vec<Trial<f64>>> {
    paths
        .iter()
        .map(|p| {
            inputs.add_trial(p)?;
            let t = load_trial(p)?;
            Ok(match role {
                Some(r) => t.with_role(r),
                None => t,
            })
        })
        .collect()
}

/// Heel strikes from the measured vertical force, if any are found.
pub(crate) fn events(trial: &Trial<f64>, g: &GaitConfig) -> Option<Vec<usize>> {
    detect_heel_strikes(trial.grf().vertical(), g.threshold_frac, g.min_cycle_s).ok().filter(|e| e.len() >= 2)
}

/// Series metrics, plus cycle metrics when events are available.
pub(crate) fn trial_report(
    trial: &Trial<f64>,
    model: &ForceModel<f64>,
    component: Component,
    warmup: usize,
    events: Option<&[usize]>,
) -> Result<(FitReport, Vec<f64>)> {
    let fhat = model.simulate(&trial.inputs())?;
    let f = trial.output(component);
    let series = FitReport::from_series(f, &fhat, warmup)?;
    let report = match events {
        Some(ev) => series.clone().with_cycles(f, &fhat, trial.rate_hz(), ev).unwrap_or(series),
        None => series,
    };
    Ok((report, fhat))
}

pub(crate) fn component_tag(c: Component) -> String {
    c.code().to_lowercase()
}

/// One row of `fit_report.csv`: metrics of one model on all trials of one
/// role, averaged over trials (counts are summed).
#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub foot: Side,
    pub component: Component,
    pub model: String,
    pub k: Option<usize>,
    pub selected: bool,
    pub role: Role,
    pub n_trials: usize,
    pub report: FitReport,
}

pub const FIT_HEADER: [&str; 17] = [
    "foot",
    "component",
    "model",
    "k",
    "selected",
    "role",
    "n_trials",
    "nrmse_fit_pct",
    "r2_cycles",
    "r2_series",
    "rmse_abs_n",
    "rmse_cycle_abs_n",
    "rmse_norm_max_pct",
    "rmse_norm_range_pct",
    "n_samples",
    "warmup_excluded",
    "n_cycles",
];

fn nan_mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.filter(|x| !x.is_nan()).fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 { f64::NAN } else { s / n as f64 }
}

pub(crate) fn average_reports(r: &[FitReport]) -> FitReport {
    FitReport {
        nrmse_fit_pct: nan_mean(r.iter().map(|x| x.nrmse_fit_pct)),
        r_squared: nan_mean(r.iter().map(|x| x.r_squared)),
        r_squared_series: nan_mean(r.iter().map(|x| x.r_squared_series)),
        rmse_abs: nan_mean(r.iter().map(|x| x.rmse_abs)),
        rmse_cycle_abs: nan_mean(r.iter().map(|x| x.rmse_cycle_abs)),
        rmse_norm_max_pct: nan_mean(r.iter().map(|x| x.rmse_norm_max_pct)),
        rmse_norm_range_pct: nan_mean(r.iter().map(|x| x.rmse_norm_range_pct)),
        n_samples: r.iter().map(|x| x.n_samples).sum(),
        warmup_excluded: r.iter().map(|x| x.warmup_excluded).sum(),
        n_cycles: r.iter().map(|x| x.n_cycles).sum(),
    }
}

fn report_fields(r: &FitReport) -> Vec<String> {
    vec![
        num(r.nrmse_fit_pct),
        num(r.r_squared),
        num(r.r_squared_series),
        num(r.rmse_abs),
        num(r.rmse_cycle_abs),
        num(r.rmse_norm_max_pct),
        num(r.rmse_norm_range_pct),
        r.n_samples.to_string(),
        r.warmup_excluded.to_string(),
        r.n_cycles.to_string(),
    ]
}

pub(crate) fn fit_rows_csv(rows: &[FitRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &FIT_HEADER,
        rows.iter().map(|r| {
            let mut v = vec![
                r.foot.name().to_string(),
                r.component.code().to_string(),
                r.model.clone(),
                r.k.map(|k| k.to_string()).unwrap_or_default(),
                r.selected.to_string(),
                r.role.name().to_string(),
                r.n_trials.to_string(),
            ];
            v.extend(report_fields(&r.report));
            v
        }),
    )
}

/// Per-trial detail behind the averaged rows.
pub struct TrialRow {
    pub foot: Side,
    pub component: Component,
    pub model: String,
    pub trial: String,
    pub role: Role,
    pub report: FitReport,
}

pub(crate) fn trial_rows_csv(rows: &[TrialRow]) -> Result<Vec<u8>> {
    let mut header = vec!["foot", "component", "model", "trial", "role"];
    header.extend_from_slice(&FIT_HEADER[7..]);
    csv_bytes(
        &header,
        rows.iter().map(|r| {
            let mut v = vec![
                r.foot.name().to_string(),
                r.component.code().to_string(),
                r.model.clone(),
                r.trial.clone(),
                r.role.name().to_string(),
            ];
            v.extend(report_fields(&r.report));
            v
        }),
    )
}
