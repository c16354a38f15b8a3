use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{ExpModeSet, Mode, RestModel, SurvivalCurve};
use crate::error::{DecayError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub w: f64,
    pub gamma: f64,
}

/// JSON form of a mode set, optionally carrying the resonance mass.
///
/// `{"M": 700.0, "modes": [{"w": 1.0, "gamma": 1.0}]}`; modes are written sorted by width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    #[serde(rename = "M")]
    pub mass: Option<f64>,
    pub modes: Vec<ModeRecord>,
}

impl ModelDocument {
    pub fn new(modes: &ExpModeSet<f64>, mass: Option<f64>) -> Self {
        ModelDocument {
            mass,
            modes: modes
                .modes()
                .iter()
                .map(|m| ModeRecord { w: m.w, gamma: m.gamma })
                .collect(),
        }
    }

    pub fn mode_set(&self) -> Result<ExpModeSet<f64>> {
        ExpModeSet::new(self.modes.iter().map(|m| Mode::new(m.w, m.gamma)).collect())
    }

    /// Requires `M` to be present.
    pub fn rest_model(&self, ratio_max: f64) -> Result<RestModel<f64>> {
        let mass = self
            .mass
            .ok_or_else(|| DecayError::Parse("model document has no mass \"M\"".into()))?;
        RestModel::with_ratio_max(self.mode_set()?, mass, ratio_max)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Serialize, Deserialize)]
struct CurveRow {
    t: f64,
    value: f64,
}

/// Reads a `t,value` CSV.
pub fn read_curve_csv<R: Read>(reader: R) -> Result<SurvivalCurve<f64>> {
    read_curve_csv_column(reader, "value")
}

/// Reads the `t` column and the named value column of a CSV with a header row.
pub fn read_curve_csv_column<R: Read>(reader: R, column: &str) -> Result<SurvivalCurve<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| DecayError::Parse(e.to_string()))?
        .clone();
    let t_idx = headers.iter().position(|h| h == "t");
    let v_idx = headers.iter().position(|h| h == column);
    let (t_idx, v_idx) = match (t_idx, v_idx) {
        (Some(t), Some(v)) => (t, v),
        _ => {
            return Err(DecayError::Parse(format!(
                "expected columns \"t\" and \"{column}\", found {:?}",
                headers.iter().collect::<Vec<_>>()
            )))
        }
    };
    let mut samples = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| DecayError::Parse(format!("row {}: {e}", i + 1)))?;
        let field = |idx: usize| -> Result<f64> {
            let raw = record
                .get(idx)
                .ok_or_else(|| DecayError::Parse(format!("row {}: missing field", i + 1)))?;
            raw.parse::<f64>()
                .map_err(|e| DecayError::Parse(format!("row {}: {raw:?}: {e}", i + 1)))
        };
        samples.push((field(t_idx)?, field(v_idx)?));
    }
    SurvivalCurve::new(samples).map_err(|e| DecayError::Parse(e.to_string()))
}

pub fn write_curve_csv<W: Write>(curve: &SurvivalCurve<f64>, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for &(t, value) in curve.samples() {
        wtr.serialize(CurveRow { t, value })
            .map_err(|e| DecayError::Io(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}
