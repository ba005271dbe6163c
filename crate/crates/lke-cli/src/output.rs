//! CSV and metadata writers. Floats use a fixed 17-significant-digit format
//! so identical runs produce identical bytes.

use std::path::Path;

use crate::CliError;

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

/// Header plus rows of already formatted cells.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let err = |e: &dyn std::fmt::Display| CliError::Output { path: path.display().to_string(), msg: e.to_string() };
        let mut w = csv::Writer::from_path(path).map_err(|e| err(&e))?;
        w.write_record(&self.header).map_err(|e| err(&e))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| err(&e))?;
        }
        w.flush().map_err(|e| err(&e))
    }
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("metadata serializes");
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Output { path: path.display().to_string(), msg: e.to_string() })
}
