use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config_id: String,
    pub metric: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub runtime_ms: f64,
}

/// One row per (config, metric).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn push(&mut self, config_id: &str, metric: impl Into<String>, value: f64, stderr: Option<f64>, runtime_ms: f64) -> Result<()> {
        let metric = metric.into();
        if !value.is_finite() || stderr.is_some_and(|s| !s.is_finite()) {
            return Err(Error::param(metric, "result is not finite"));
        }
        if self.rows.iter().any(|r| r.config_id == config_id && r.metric == metric) {
            return Err(Error::param(metric, "duplicate metric"));
        }
        self.rows.push(ResultRow {
            config_id: config_id.to_string(),
            metric,
            value,
            stderr,
            runtime_ms,
        });
        Ok(())
    }

    pub fn get(&self, metric: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn value(&self, metric: &str) -> Option<f64> {
        self.get(metric).map(|r| r.value)
    }

    /// Equality of everything except wall-clock time.
    pub fn same_results(&self, other: &ResultTable) -> bool {
        self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.config_id == b.config_id && a.metric == b.metric && a.value.to_bits() == b.value.to_bits() && a.stderr.map(f64::to_bits) == b.stderr.map(f64::to_bits)
            })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<ResultRow>, _>>()
            .map_err(|e| Error::Io(e.to_string()))?;
        Ok(ResultTable { rows })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}
