use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::convert::{baseline_r0, resistance_to_delta, volts_to_resistance, AdcConfig};
use super::csvio::{read_grf_file, read_insole_file};
use super::series::{Channel, ChannelSeries, GrfRecording, InsoleRecording, Role, Side, Trial, Unit};
use super::sync::{refine_offset, resample_sync, DEFAULT_TARGET_HZ};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyncConfig {
    pub target_hz: f64,
    /// Added to insole timestamps before alignment.
    pub offset_s: f64,
    pub auto_refine: bool,
    pub max_lag_s: f64,
}

impl Default for SyncConfig {
    fn default() -> Self {
        SyncConfig { target_hz: DEFAULT_TARGET_HZ, offset_s: 0.0, auto_refine: false, max_lag_s: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InsoleUnits {
    #[default]
    Volts,
    Ohms,
}

/// Per-trial metadata, stored as a small TOML file next to the CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMeta {
    pub side: Side,
    pub speed_mps: f64,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Insole CSV path, relative to the metadata file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub insole: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grf: Option<String>,
    #[serde(default)]
    pub units: InsoleUnits,
    #[serde(default = "default_r0_window")]
    pub r0_window_s: f64,
    #[serde(default)]
    pub adc: AdcConfig,
    #[serde(default)]
    pub sync: SyncConfig,
}

fn default_r0_window() -> f64 {
    1.0
}

impl TrialMeta {
    pub fn new(side: Side, speed_mps: f64, role: Role) -> Self {
        TrialMeta {
            side,
            speed_mps,
            role,
            label: None,
            insole: None,
            grf: None,
            units: InsoleUnits::Volts,
            r0_window_s: default_r0_window(),
            adc: AdcConfig::default(),
            sync: SyncConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Schema(format!("trial metadata: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("metadata serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

/// Convert a raw insole recording (volts or ohms) into resistance change,
/// returning the per-channel baselines alongside.
pub fn condition_insole(
    raw: &InsoleRecording<f64>,
    adc: &AdcConfig,
    r0_window_s: f64,
) -> Result<(InsoleRecording<f64>, [f64; 4])> {
    let ohms = match raw.unit() {
        Unit::Volts => raw.try_map(|_, s| volts_to_resistance(s, adc))?,
        Unit::Ohms => raw.clone(),
        u => return Err(Error::Unit(format!("raw insole data must be volts or ohms, not {u:?}"))),
    };
    let mut r0 = [0.0; 4];
    for ch in Channel::ALL {
        r0[ch.index()] = baseline_r0(ohms.channel(ch), r0_window_s)?;
    }
    let delta = ohms.try_map(|ch, s| resistance_to_delta(s, r0[ch.index()]))?;
    Ok((delta, r0))
}

/// Condition and align a raw recording pair into a [`Trial`].
pub fn build_trial(raw_insole: &InsoleRecording<f64>, grf: &GrfRecording<f64>, meta: &TrialMeta) -> Result<Trial<f64>> {
    let (delta, r0) = condition_insole(raw_insole, &meta.adc, meta.r0_window_s)?;
    let mut offset = meta.sync.offset_s;
    if meta.sync.auto_refine {
        offset = refine_offset(
            delta.channel(Channel::Heel),
            grf.vertical(),
            meta.sync.target_hz,
            offset,
            meta.sync.max_lag_s,
        )?;
    }
    let (ins, g) = resample_sync(&delta, grf, meta.sync.target_hz, offset)?;
    let label = meta.label.clone().unwrap_or_default();
    Ok(Trial::new(ins, g, meta.speed_mps, meta.role, r0)?.with_label(label))
}

/// Parse both CSVs and condition them per `meta`.
pub fn parse_trial_csv(insole_path: &Path, grf_path: &Path, meta: &TrialMeta) -> Result<Trial<f64>> {
    let unit = match meta.units {
        InsoleUnits::Volts => Unit::Volts,
        InsoleUnits::Ohms => Unit::Ohms,
    };
    let raw = read_insole_file::<f64>(insole_path, unit, meta.side)?;
    let grf = read_grf_file::<f64>(grf_path, meta.side)?;
    build_trial(&raw, &grf, meta)
}

/// Load a trial from its metadata file, resolving CSV paths next to it.
pub fn load_trial(meta_path: &Path) -> Result<Trial<f64>> {
    let meta = TrialMeta::load(meta_path)?;
    let dir = meta_path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let insole = meta
        .insole
        .as_ref()
        .ok_or_else(|| Error::Schema(format!("{}: missing 'insole' path", meta_path.display())))?;
    let grf = meta
        .grf
        .as_ref()
        .ok_or_else(|| Error::Schema(format!("{}: missing 'grf' path", meta_path.display())))?;
    let mut trial = parse_trial_csv(&dir.join(insole), &dir.join(grf), &meta)?;
    if meta.label.is_none() {
        let stem = meta_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        trial = trial.with_label(stem);
    }
    Ok(trial)
}

/// Convert a conditioned trial's resistance channels back to divider voltages.
pub fn resistance_to_volts(r: &ChannelSeries<f64>, adc: &AdcConfig) -> Result<ChannelSeries<f64>> {
    r.with_values(r.values().iter().map(|&x| adc.divider_voltage(x)).collect(), Unit::Volts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_toml_dotted_keys() {
        let text = r#"
side = "left"
speed_mps = 1.5
role = "validation"
adc.v_in = 3.3
adc.r_bias = 1000.0
sync.target_hz = 50.0
sync.offset_s = 0.25
"#;
        let m = TrialMeta::from_toml(text).unwrap();
        assert_eq!(m.side, Side::Left);
        assert_eq!(m.role, Role::Validation);
        assert_eq!(m.adc.v_in, 3.3);
        assert_eq!(m.adc.bits, 16);
        assert_eq!(m.sync.target_hz, 50.0);
        assert_eq!(m.r0_window_s, 1.0);
        assert_eq!(TrialMeta::from_toml(&m.to_toml()).unwrap(), m);
    }

    #[test]
    fn unknown_role_rejected() {
        let text = "side = \"left\"\nspeed_mps = 1.0\nrole = \"training\"\n";
        assert!(matches!(TrialMeta::from_toml(text), Err(Error::Schema(_))));
    }
}
