use std::path::Path;

use insole_grf::dataio::{load_trial, Channel, ChannelSeries};
use insole_grf::gait::{classify_phases, cycle_stats, detect_heel_strikes, segment_cycles, CycleStats, GaitSegmentation, Phase, CYCLE_POINTS};
use insole_grf::Result;

use super::timestamp;
use crate::config::RunConfig;
use crate::manifest::Inputs;
use crate::output::{csv_bytes, num, Outputs};
use crate::svg::{render, Line, Panel, Span, PALETTE};

const PHASES: [Phase; 5] = [Phase::HeelStrike, Phase::Loading, Phase::MidStance, Phase::TerminalStance, Phase::Swing];

fn phase_color(p: Phase) -> &'static str {
    match p {
        Phase::HeelStrike => "#d62728",
        Phase::Loading => "#ff7f0e",
        Phase::MidStance => "#2ca02c",
        Phase::TerminalStance => "#1f77b4",
        Phase::Swing => "#bbbbbb",
    }
}

/// Segment one trial: forces and sensor channels cut at heel strikes of the
/// measured vertical force, averaged, and labelled with stance phases.
pub fn run(cfg: &RunConfig, meta: &Path, deterministic: bool, inputs: &mut Inputs, out: &mut Outputs) -> Result<()> {
    inputs.add_trial(meta)?;
    let trial = load_trial(meta)?;
    let g = &cfg.gait;
    let fv = trial.grf().vertical();
    let events = detect_heel_strikes(fv, g.threshold_frac, g.min_cycle_s)?;

    let mut signals: Vec<(&str, &ChannelSeries<f64>)> = vec![("fv", fv), ("fml", trial.grf().mediolateral())];
    for ch in Channel::ALL {
        signals.push((ch.code(), trial.insole().channel(ch)));
    }
    let segs: Vec<GaitSegmentation<f64>> = signals.iter().map(|(_, s)| segment_cycles(s, &events)).collect::<Result<_>>()?;
    let stats: Vec<CycleStats<f64>> = segs.iter().map(cycle_stats).collect::<Result<_>>()?;
    let sensor_stats: [CycleStats<f64>; 4] = std::array::from_fn(|c| stats[2 + c].clone());
    let phases = classify_phases(&sensor_stats, Some(&stats[0]), g.activation_frac)?;
    if phases.inconsistent_ordering {
        eprintln!("warning: sensor onsets or releases are not in heel to toe order");
    }

    let rate = trial.rate_hz();
    out.add("events.csv", csv_bytes(&["index", "t_s"], events.iter().map(|&i| [i.to_string(), num(i as f64 / rate)]))?)?;
    out.add(
        "excluded_cycles.csv",
        csv_bytes(
            &["cycle_id", "reason"],
            segs[0].excluded_cycles.iter().map(|(id, why)| [id.to_string(), format!("{why:?}").to_lowercase()]),
        )?,
    )?;
    let mut cycle_rows = Vec::new();
    let mut stat_rows = Vec::new();
    for (((name, _), seg), st) in signals.iter().zip(&segs).zip(&stats) {
        for (id, row) in &seg.cycles {
            for (p, v) in row.iter().enumerate() {
                cycle_rows.push([name.to_string(), id.to_string(), p.to_string(), num(*v)]);
            }
        }
        for p in 0..CYCLE_POINTS {
            stat_rows.push([name.to_string(), p.to_string(), num(st.mean[p]), num(st.std[p]), st.n.to_string()]);
        }
    }
    out.add("cycles.csv", csv_bytes(&["signal", "cycle_id", "pct", "value"], cycle_rows)?)?;
    out.add("stats.csv", csv_bytes(&["signal", "pct", "mean", "std", "n"], stat_rows)?)?;
    out.add("phases.csv", csv_bytes(&["pct", "phase"], phases.labels.iter().enumerate().map(|(p, l)| [p.to_string(), l.name().to_string()]))?)?;
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    out.add(
        "activation.csv",
        csv_bytes(
            &["channel", "onset_pct", "release_pct"],
            Channel::ALL.iter().map(|ch| [ch.code().to_string(), opt(phases.onsets[ch.index()]), opt(phases.releases[ch.index()])]),
        )?,
    )?;

    let pct: Vec<f64> = (0..CYCLE_POINTS).map(|p| p as f64).collect();
    let n = stats[0].n;
    let mut forces = Panel::new(format!("{} ({} foot): ground reaction force, {n} cycles ±1 std", trial.label(), trial.side().name()), "gait cycle (%)", "force (N)");
    for (i, name) in ["Fv", "Fml"].iter().enumerate() {
        forces.lines.push(Line::new(*name, PALETTE[i], pct.clone(), stats[i].mean.clone()).with_band(stats[i].std.clone()));
    }
    let mut dr = Panel::new("sensor resistance change ±1 std", "gait cycle (%)", "ΔR (%)");
    for ch in Channel::ALL {
        let s = &stats[2 + ch.index()];
        dr.lines.push(Line::new(ch.code(), PALETTE[ch.index() + 2], pct.clone(), s.mean.clone()).with_band(s.std.clone()));
    }
    let mut ph = Panel::new("stance phases", "gait cycle (%)", "Fv / peak");
    for p in PHASES {
        if let Some((a, b)) = phases.span(p) {
            ph.spans.push(Span { label: p.name().replace('_', " "), x0: a as f64, x1: (b + 1).min(CYCLE_POINTS - 1) as f64, color: phase_color(p).into() });
        }
    }
    let peak = stats[0].mean.iter().copied().fold(f64::MIN, f64::max);
    let norm: Vec<f64> = stats[0].mean.iter().map(|v| if peak > 0.0 { v / peak } else { 0.0 }).collect();
    ph.lines.push(Line::new("Fv", PALETTE[0], pct, norm));
    out.add_str("gait.svg", render(&[forces, dr, ph], timestamp(deterministic)))?;
    eprintln!("{} heel strikes, {} cycles averaged", events.len(), n);
    Ok(())
}
