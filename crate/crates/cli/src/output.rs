// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! CSV and JSON writers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Name fragment for a total time: `0.1` stays `0.1`, `10.0` becomes `10`.
pub fn time_tag(t: f64) -> String {
    format!("{t}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Extra `# key: value` lines after the config line.
    pub notes: Vec<(String, String)>,
}

impl CsvTable {
    pub fn new(header: Vec<String>) -> Self {
        CsvTable {
            header,
            rows: vec![],
            notes: vec![],
        }
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.notes.push((key.to_string(), value.into()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path, config: &RunConfig) -> Result<(), CliError> {
        let mut buf: Vec<u8> = Vec::new();
        writeln!(buf, "# config: {}", config.to_json_line()).expect("in memory");
        for (k, v) in &self.notes {
            writeln!(buf, "# {k}: {v}").expect("in memory");
        }
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header).map_err(|e| CliError::Csv(e.to_string()))?;
            for r in &self.rows {
                w.write_record(r).map_err(|e| CliError::Csv(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::io(path, e))?;
        }
        fs::write(path, buf).map_err(|e| CliError::io(path, e))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn out_path(config: &RunConfig, name: &str) -> PathBuf {
    config.output_dir.join(name)
}
