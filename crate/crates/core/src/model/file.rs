//! Self-describing JSON model file. Floats are written in shortest
//! round-trip form, so coefficients survive a save/load cycle exactly.

use serde::{Deserialize, Serialize};

use super::hw::ForceModel;
use super::lti::Orders;
use crate::dataio::{Component, Side};
use crate::error::{Error, Result};

pub const MODEL_SCHEMA: &str = "insole-grf/model";
pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Provenance of an identified model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IdentMeta {
    /// SHA-256 over the identification samples.
    pub dataset_hash: String,
    /// Breakpoints per nonlinearity; absent for linear models.
    pub breakpoints: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub fit_ident_pct: Option<f64>,
    #[serde(default)]
    pub fit_valid_mean_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: String,
    pub version: u32,
    pub side: Side,
    pub component: Component,
    pub orders: Orders,
    pub model: ForceModel<f64>,
    pub meta: IdentMeta,
}

impl ModelFile {
    pub fn new(side: Side, component: Component, model: ForceModel<f64>, meta: IdentMeta) -> Self {
        let orders = match &model {
            ForceModel::Hw(m) => m.g.orders(),
            ForceModel::Linear(m) => m.g.orders(),
        };
        ModelFile {
            schema: MODEL_SCHEMA.to_string(),
            version: MODEL_SCHEMA_VERSION,
            side,
            component,
            orders,
            model,
            meta,
        }
    }
}

pub fn serialize_model(m: &ModelFile) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(m).expect("model serializes");
    out.push(b'\n');
    out
}

pub fn deserialize_model(bytes: &[u8]) -> Result<ModelFile> {
    let m: ModelFile = serde_json::from_slice(bytes).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if m.schema != MODEL_SCHEMA {
        return Err(Error::ModelFormat(format!("unexpected schema '{}'", m.schema)));
    }
    if m.version != MODEL_SCHEMA_VERSION {
        return Err(Error::ModelFormat(format!("unsupported schema version {}", m.version)));
    }
    m.model.validate().map_err(|e| Error::ModelFormat(e.to_string()))?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HwModel, LinearModel, LtiBlock, PwlFunction};
    use proptest::prelude::*;

    fn hw(vals: &[f64]) -> HwModel<f64> {
        let pwl = |s: f64| PwlFunction::new(vec![-1.0, 0.5 + s * 1e-4, 3.0], vec![s, s * s, -s / 3.0]).unwrap();
        let f1 = [pwl(vals[0]), pwl(vals[1]), pwl(vals[2]), pwl(vals[3])];
        let b = (0..4).map(|c| vec![vals[c] / 7.0, 1.0 / 3.0, vals[4]]).collect();
        let g = LtiBlock::new(vec![-0.7 + vals[5] * 1e-4, 0.1], b, vec![0, 1, 0, 2]).unwrap();
        HwModel::new(f1, g, pwl(vals[6])).unwrap()
    }

    #[test]
    fn rejects_wrong_schema_and_unstable_model() {
        let lin = LinearModel::new(LtiBlock::unit_gain(4, 1).unwrap(), 1.0).unwrap();
        let mf = ModelFile::new(Side::Left, Component::Vertical, ForceModel::Linear(lin), IdentMeta::default());
        let text = String::from_utf8(serialize_model(&mf)).unwrap();
        let bad = text.replace(MODEL_SCHEMA, "other");
        assert!(matches!(deserialize_model(bad.as_bytes()), Err(Error::ModelFormat(_))));
        assert!(deserialize_model(b"{not json").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(vals in proptest::collection::vec(-1e3f64..1e3, 7), seed in any::<u64>()) {
            let mut m = hw(&vals);
            m.norm.f1_std = [vals[0].abs() + 1.0, 0.1, std::f64::consts::PI, 1e-7];
            let meta = IdentMeta { dataset_hash: "ab".into(), breakpoints: Some(3), seed, ..Default::default() };
            let mf = ModelFile::new(Side::Right, Component::Mediolateral, ForceModel::Hw(m), meta);
            let back = deserialize_model(&serialize_model(&mf)).unwrap();
            prop_assert_eq!(back, mf);
        }
    }
}
