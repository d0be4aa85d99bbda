//! Revised-rate table: earlier theoretical rates scaled by the index
//! correction factor and compared against expected values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::per_beam::PerBeam;
use crate::rates::{apply_table_correction, tutorial_correction_factor};

/// One crystal. Rates are in pairs/s/mW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub name: String,
    pub ng_pump: f64,
    /// Given directly, or computed from `n` and `ng_pump` when absent.
    #[serde(default)]
    pub correction_factor: Option<f64>,
    #[serde(default)]
    pub n: Option<PerBeam<f64>>,
    pub rate_previous: f64,
    pub rate_revised: f64,
    /// Measured rate. Carried for display only.
    #[serde(default)]
    pub rate_experimental: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSet {
    /// Relative tolerance on the revised rate.
    pub tolerance: f64,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableOutcome {
    pub name: String,
    pub factor: f64,
    pub rate_previous: f64,
    pub computed: f64,
    pub expected: f64,
    pub relative_deviation: f64,
    pub pass: bool,
    pub rate_experimental: Option<f64>,
}

impl TableRow {
    pub fn factor(&self) -> Result<f64> {
        match (self.correction_factor, self.n) {
            (Some(f), _) => Ok(f),
            (None, Some(n)) => Ok(tutorial_correction_factor(n, self.ng_pump)),
            (None, None) => Err(Error::InvalidModel(format!(
                "row '{}' needs either correction_factor or n",
                self.name
            ))),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!(
                    "row '{}': {what} must be positive, got {v}",
                    self.name
                )))
            }
        };
        positive(self.ng_pump, "ng_pump")?;
        positive(self.rate_previous, "rate_previous")?;
        positive(self.rate_revised, "rate_revised")?;
        if let Some(n) = self.n {
            if n.iter().any(|&v| !(v >= 1.0)) {
                return Err(Error::InvalidModel(format!(
                    "row '{}': indices must be at least 1",
                    self.name
                )));
            }
        }
        positive(self.factor()?, "correction factor")
    }
}

impl TableSet {
    pub fn from_json(text: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidModel(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if self.rows.is_empty() {
            return Err(Error::InvalidModel("table has no rows".into()));
        }
        self.rows.iter().try_for_each(TableRow::validate)
    }

    pub fn evaluate(&self) -> Result<Vec<TableOutcome>> {
        self.validate()?;
        self.rows
            .iter()
            .map(|row| {
                let factor = row.factor()?;
                let computed = apply_table_correction(row.rate_previous, factor)?;
                let dev = computed / row.rate_revised - 1.0;
                Ok(TableOutcome {
                    name: row.name.clone(),
                    factor,
                    rate_previous: row.rate_previous,
                    computed,
                    expected: row.rate_revised,
                    relative_deviation: dev,
                    pass: dev.abs() <= self.tolerance,
                    rate_experimental: row.rate_experimental,
                })
            })
            .collect()
    }
}
