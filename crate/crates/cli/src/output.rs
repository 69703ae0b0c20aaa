//! CSV tables, JSON reports and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::CliError;

/// Full round-trip precision.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Csv {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "# {}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }
}

pub fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";")
}

/// Output directory plus the list of files written into it.
pub struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.into());
        Ok(())
    }

    pub fn csv(&mut self, name: &str, csv: &Csv) -> Result<(), CliError> {
        self.write(name, &csv.render())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Numerical(format!("cannot serialize {name}: {e}")))?;
        self.write(name, &(text + "\n"))
    }

    pub fn manifest(mut self, config: &RunConfig) -> Result<(), CliError> {
        let files = self.written.clone();
        self.json(
            "manifest.json",
            &json!({ "config": config, "outputs": files }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut csv = Csv::new(&["s", "f"]);
        csv.meta("seed", 3);
        csv.row(vec![num(0.1), num(2.0)]);
        let text = csv.render();
        assert_eq!(
            text,
            "# seed=3\n# s,f\n1.0000000000000001e-1,2.0000000000000000e0\n"
        );
        assert_eq!("1.0000000000000001e-1".parse::<f64>().unwrap(), 0.1);
    }
}
