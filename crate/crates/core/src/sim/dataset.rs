//! Treadmill-protocol datasets: repeated walking trials at several speeds for
//! both feet, with the files and truth sidecars the CLI reads back.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::profile::{synth_grf, DoubleBounce, GaitProfile, GrfOptions};
use super::sensor::{synth_sensor, to_adc_volts, SensorLaw, StaticLaw};
use super::sub_seed;
use crate::dataio::{build_trial, write_grf, write_insole, AdcConfig, GrfRecording, InsoleRecording, Role, Side, Trial, TrialMeta};
use crate::error::{Error, Result};

/// Largest per-channel load the linearized law must handle, in newtons.
const LINEAR_LAW_FMAX: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub speeds: Vec<f64>,
    /// Walking repetitions; the first is used for identification.
    pub trials: usize,
    pub walk_s: f64,
    pub rate_hz: f64,
    pub law: StaticLaw,
    pub noise: bool,
    pub jitter: bool,
    pub lag_tau_s: f64,
    pub hysteresis_n: f64,
    /// Inject contact double bounces of this duration.
    pub double_bounce_s: Option<f64>,
    pub adc: AdcConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            speeds: vec![1.0, 1.5, 2.0],
            trials: 3,
            walk_s: 40.0,
            rate_hz: 100.0,
            law: StaticLaw::Saturating,
            noise: true,
            jitter: true,
            lag_tau_s: 0.03,
            hysteresis_n: 0.0,
            double_bounce_s: None,
            adc: AdcConfig::default(),
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.speeds.is_empty() || self.speeds.iter().any(|v| !(*v > 0.0 && *v <= 2.5)) {
            return Err(Error::InvalidArgument("speeds must be in (0, 2.5] m/s".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("need at least one trial".into()));
        }
        if !(self.walk_s >= 5.0) || !(self.rate_hz > 0.0) {
            return Err(Error::InvalidArgument("walking time must be at least 5 s and rate positive".into()));
        }
        self.adc.validate()
    }

    pub fn profile(&self, speed: f64) -> GaitProfile {
        let p = GaitProfile::for_speed(speed);
        if self.jitter { p } else { p.without_jitter() }
    }

    pub fn sensor_law(&self, side: Side) -> SensorLaw {
        let mut law = SensorLaw::default_for(side).with_lag(self.lag_tau_s).with_hysteresis(self.hysteresis_n);
        if !self.noise {
            law = law.noiseless();
        }
        match self.law {
            StaticLaw::Saturating => law,
            StaticLaw::Linear => law.linearized(LINEAR_LAW_FMAX),
        }
    }
}

/// Ground truth kept alongside each synthetic trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTruth {
    pub seed: u64,
    pub profile: GaitProfile,
    pub law: SensorLaw,
    pub contact_times_s: Vec<f64>,
    pub contact_indices: Vec<usize>,
    #[serde(skip)]
    pub channel_forces: [Vec<f64>; 4],
}

/// One foot of one walking bout, as raw recordings plus truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrial {
    pub meta: TrialMeta,
    pub insole_volts: InsoleRecording<f64>,
    pub grf: GrfRecording<f64>,
    pub truth: TrialTruth,
}

impl SimTrial {
    pub fn label(&self) -> &str {
        self.meta.label.as_deref().unwrap_or("")
    }

    /// Conditioned trial, as the pipeline would build it from the files.
    pub fn trial(&self) -> Result<Trial<f64>> {
        build_trial(&self.insole_volts, &self.grf, &self.meta)
    }
}

pub fn trial_label(repetition: usize, speed: f64, side: Side) -> String {
    format!("t{}_v{:02}_{}", repetition + 1, (speed * 10.0).round() as i64, side.name())
}

/// Every repetition × speed × foot. Repetition 1 is marked for identification
/// and the rest for validation.
pub fn synth_dataset(cfg: &DatasetConfig, seed: u64) -> Result<Vec<SimTrial>> {
    cfg.validate()?;
    let opts = GrfOptions { double_bounce: cfg.double_bounce_s.map(|d| DoubleBounce { duration_s: d }) };
    let mut out = Vec::new();
    for rep in 0..cfg.trials {
        let role = if rep == 0 { Role::Identification } else { Role::Validation };
        for (si, &speed) in cfg.speeds.iter().enumerate() {
            let bout_seed = sub_seed(seed, &format!("bout-{rep}-{si}"));
            let profile = cfg.profile(speed);
            let gait = synth_grf(&profile, &opts, cfg.walk_s, cfg.rate_hz, bout_seed)?;
            for side in Side::BOTH {
                let foot = gait.foot(side);
                let law = cfg.sensor_law(side);
                let sensor_seed = sub_seed(bout_seed, side.name());
                let ohms = synth_sensor(&foot.channel_forces, &law, cfg.rate_hz, side, sensor_seed)?;
                let volts = to_adc_volts(&ohms, &cfg.adc)?;
                let label = trial_label(rep, speed, side);
                let mut meta = TrialMeta::new(side, speed, role);
                meta.insole = Some(format!("{label}.insole.csv"));
                meta.grf = Some(format!("{label}.grf.csv"));
                meta.label = Some(label);
                meta.adc = cfg.adc;
                meta.r0_window_s = 1.0_f64.min(profile.stand_s.max(0.1));
                meta.sync.target_hz = cfg.rate_hz;
                out.push(SimTrial {
                    meta,
                    insole_volts: volts,
                    grf: foot.grf.clone(),
                    truth: TrialTruth {
                        seed: sensor_seed,
                        profile: profile.clone(),
                        law,
                        contact_times_s: foot.contact_times_s.clone(),
                        contact_indices: foot.contact_indices.clone(),
                        channel_forces: foot.channel_forces.clone(),
                    },
                });
            }
        }
    }
    Ok(out)
}

fn write_forces<W: std::io::Write>(w: W, rate_hz: f64, forces: &[Vec<f64>; 4]) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["t", "hl", "mf", "mt", "to"])?;
    for i in 0..forces[0].len() {
        let mut row = vec![format!("{}", i as f64 / rate_hz)];
        row.extend(forces.iter().map(|c| format!("{}", c[i])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Every file of the dataset as `(name, bytes)`: `<label>.insole.csv`,
/// `<label>.grf.csv`, `<label>.toml` (metadata), `<label>.truth.json` and
/// `<label>.forces.csv` per trial, in dataset order.
pub fn dataset_files(trials: &[SimTrial]) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::with_capacity(5 * trials.len());
    for t in trials {
        let label = t.label();
        let mut buf = Vec::new();
        write_insole(&mut buf, &t.insole_volts)?;
        files.push((format!("{label}.insole.csv"), buf));
        let mut buf = Vec::new();
        write_grf(&mut buf, &t.grf)?;
        files.push((format!("{label}.grf.csv"), buf));
        files.push((format!("{label}.toml"), t.meta.to_toml().into_bytes()));
        let truth = serde_json::to_string_pretty(&t.truth).map_err(|e| Error::Io(e.to_string()))?;
        files.push((format!("{label}.truth.json"), (truth + "\n").into_bytes()));
        let mut buf = Vec::new();
        write_forces(&mut buf, t.grf.rate_hz(), &t.truth.channel_forces)?;
        files.push((format!("{label}.forces.csv"), buf));
    }
    Ok(files)
}

/// Write [`dataset_files`] under `dir`. Returns the metadata paths in dataset order.
pub fn write_dataset(dir: &Path, trials: &[SimTrial]) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut metas = Vec::with_capacity(trials.len());
    for (name, bytes) in dataset_files(trials)? {
        let path = dir.join(&name);
        std::fs::write(&path, bytes)?;
        if name.ends_with(".toml") {
            metas.push(path);
        }
    }
    Ok(metas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{load_trial, Component};

    fn small() -> DatasetConfig {
        DatasetConfig { speeds: vec![1.0, 2.0], trials: 2, walk_s: 8.0, ..DatasetConfig::default() }
    }

    #[test]
    fn roles_follow_repetitions() {
        let d = synth_dataset(&small(), 1).unwrap();
        assert_eq!(d.len(), 8);
        for t in &d {
            let first = t.label().starts_with("t1_");
            assert_eq!(t.meta.role == Role::Identification, first, "{}", t.label());
        }
        assert_eq!(d[0].label(), "t1_v10_left");
        assert_eq!(d[7].label(), "t2_v20_right");
    }

    #[test]
    fn bit_exact_for_seed() {
        let a = synth_dataset(&small(), 9).unwrap();
        let b = synth_dataset(&small(), 9).unwrap();
        assert_eq!(a, b);
        let c = synth_dataset(&small(), 10).unwrap();
        assert_ne!(a[0].insole_volts, c[0].insole_volts);
    }

    #[test]
    fn conditioned_trial_unloads_in_swing() {
        let d = synth_dataset(&small(), 2).unwrap();
        let t = d[0].trial().unwrap();
        let fv = t.output(Component::Vertical);
        let hl = t.inputs()[0];
        // standing baseline is a partial load, so swing reads above it
        let swing: Vec<usize> = (300..fv.len()).filter(|&i| fv[i] == 0.0).collect();
        assert!(!swing.is_empty());
        assert!(swing.iter().all(|&i| hl[i] > 0.0));
        let loaded = (300..fv.len()).max_by(|&a, &b| fv[a].total_cmp(&fv[b])).unwrap();
        assert!(hl[loaded] < 0.0 || t.inputs()[3][loaded] < 0.0);
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = DatasetConfig { noise: false, ..small() };
        let d = synth_dataset(&cfg, 4).unwrap();
        let metas = write_dataset(dir.path(), &d[..2]).unwrap();
        let back = load_trial(&metas[0]).unwrap();
        let direct = d[0].trial().unwrap();
        assert_eq!(back.len(), direct.len());
        for c in 0..4 {
            let err = back.inputs()[c].iter().zip(direct.inputs()[c]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "channel {c}: {err}");
        }
        assert_eq!(back.output(Component::Vertical), direct.output(Component::Vertical));
        let truth: TrialTruth =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("t1_v10_left.truth.json")).unwrap()).unwrap();
        assert_eq!(truth.contact_indices, d[0].truth.contact_indices);
    }

    #[test]
    fn linear_law_dataset_is_valid() {
        let cfg = DatasetConfig { law: StaticLaw::Linear, ..small() };
        for t in synth_dataset(&cfg, 3).unwrap() {
            assert_eq!(t.truth.law.kind, StaticLaw::Linear);
            t.trial().unwrap();
        }
    }
}
