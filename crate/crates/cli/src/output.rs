//! Artifacts of a job, failure classes and their exit codes.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::Value;

/// Why a run did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid configuration, unparsable expressions, inputs
    /// outside an operation's domain.
    Config(String),
    /// Overflow, ill-conditioning or a degenerate spectral parameter.
    Numeric(String),
    /// A check exceeded its tolerance, or the computation was inconclusive.
    Check(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Check(_) | Failure::Io(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numeric(m) | Failure::Check(m) | Failure::Io(m) => m,
        }
    }
}

impl From<qdisk::Error> for Failure {
    fn from(e: qdisk::Error) -> Self {
        use qdisk::Error as E;
        let msg = e.to_string();
        match e {
            E::Overflow(_) | E::IllConditioned { .. } | E::DegenerateLambda { .. } => Failure::Numeric(msg),
            E::Inconclusive(_) => Failure::Check(msg),
            _ => Failure::Config(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// A CSV table with a mandatory header row.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<(), Failure> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| Failure::Io(e.to_string()))?;
        writer.write_record(&self.header).map_err(|e| Failure::Io(e.to_string()))?;
        for row in &self.rows {
            writer.write_record(row).map_err(|e| Failure::Io(e.to_string()))?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Real and imaginary parts as two CSV columns.
pub fn complex_columns(z: Complex64) -> [String; 2] {
    [z.re.to_string(), z.im.to_string()]
}

/// Everything a job produces.
#[derive(Debug)]
pub struct Artifacts {
    pub summary: Value,
    pub tables: Vec<Table>,
    /// Checks that exceeded their tolerance.
    pub failed_checks: Vec<String>,
}

impl Artifacts {
    pub fn new(summary: Value) -> Self {
        Artifacts {
            summary,
            tables: Vec::new(),
            failed_checks: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        if let Value::Object(map) = &mut self.summary {
            map.insert(key.into(), value);
        }
    }

    pub fn fail(&mut self, message: String) {
        self.failed_checks.push(message);
    }

    /// Writes `<command>.json` and one `<command>_<table>.csv` per table into
    /// `dir`, returning the written paths.
    pub fn write(&self, dir: &Path, command: &str) -> Result<Vec<PathBuf>, Failure> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let json_path = dir.join(format!("{command}.json"));
        let text = serde_json::to_string_pretty(&self.summary).map_err(|e| Failure::Io(e.to_string()))?;
        fs::write(&json_path, text + "\n")?;
        written.push(json_path);
        for table in &self.tables {
            let path = dir.join(format!("{command}_{}.csv", table.name));
            table.write(&path)?;
            written.push(path);
        }
        Ok(written)
    }
}
