use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// Formats with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Collects the files written by one run.
#[derive(Debug, Default)]
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn subdir(&self, name: &str) -> Result<Artifacts> {
        Artifacts::new(&self.dir.join(name))
    }

    pub fn absorb(&mut self, other: Artifacts) {
        self.written.extend(other.written);
    }

    /// Numeric CSV with a header row; any non-finite value fails the write.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Io(e.to_string()))?;
        w.write_record(header)
            .map_err(|e| Error::Io(e.to_string()))?;
        for (i, row) in rows.iter().enumerate() {
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Io(format!(
                    "{name}: non-finite value {v} in row {i}"
                )));
            }
            w.write_record(row.iter().map(|v| fmt_num(*v)))
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// CSV whose first column is text.
    pub fn labelled_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[(String, Vec<f64>)],
    ) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Io(e.to_string()))?;
        w.write_record(header)
            .map_err(|e| Error::Io(e.to_string()))?;
        for (label, row) in rows {
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Io(format!(
                    "{name}: non-finite value {v} in row '{label}'"
                )));
            }
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| fmt_num(*v)));
            w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Pretty JSON. Non-finite floats serialise to `null`, which this
    /// format never uses otherwise, so any `null` fails the write.
    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
        if let Some(p) = find_null(&v, String::new()) {
            return Err(Error::Io(format!("{name}: non-finite value at {p}")));
        }
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text)?;
        self.written.push(path.clone());
        Ok(path)
    }
}

fn find_null(v: &Value, at: String) -> Option<String> {
    match v {
        Value::Null => Some(if at.is_empty() { "/".into() } else { at }),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, x)| find_null(x, format!("{at}/{i}"))),
        Value::Object(map) => map
            .iter()
            .find_map(|(k, x)| find_null(x, format!("{at}/{k}"))),
        _ => None,
    }
}
