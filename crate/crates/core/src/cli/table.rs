use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One output cell; floats print in shortest round-trip form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Float(x.unwrap_or(f64::NAN))
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) => write!(f, "{x:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputTable {
    /// Schema name, also the file suffix for secondary tables.
    pub name: &'static str,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

pub const QUENCH_COLUMNS: &[&str] =
    &["N", "alpha", "v", "tau_q", "d", "kink_density", "d_closed", "d_kzm", "unitarity_defect"];
pub const SPECTRUM_COLUMNS: &[&str] = &["m", "omega"];
pub const PROFILE_COLUMNS: &[&str] = &["n", "g_n", "Z_n", "sigma_x", "C_ref"];
pub const PREDICT_COLUMNS: &[&str] = &["alpha", "v", "tau_q", "d_closed", "d_numeric", "d_kzm", "v_hat"];
pub const TRAJECTORY_COLUMNS: &[&str] = &["t", "n", "g_n", "sigma_x", "bond_kink"];

impl OutputTable {
    pub fn new(name: &'static str, columns: &'static [&'static str]) -> Self {
        Self { name, columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::LengthMismatch { expected: self.columns.len(), got: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# kzfront {} table, schema v{SCHEMA_VERSION}\n", self.name);
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{cell}").expect("writing to a String");
            }
            s.push('\n');
        }
        s
    }

    /// Column by name, for callers reading tables back.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|&c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[j] {
                    Cell::Int(i) => i as f64,
                    Cell::Float(x) => x,
                })
                .collect(),
        )
    }
}

/// Destination of each table: the first goes to `path`, the others to
/// `<stem>.<name>.<ext>` beside it.
pub fn output_paths(tables: &[OutputTable], path: &Path) -> Vec<PathBuf> {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    tables
        .iter()
        .enumerate()
        .map(|(i, t)| if i == 0 { path.to_path_buf() } else { path.with_file_name(format!("{stem}.{}.{ext}", t.name)) })
        .collect()
}

/// Write every table; nothing is created unless all tables are non-empty.
pub fn write_outputs(tables: &[OutputTable], path: &Path) -> Result<Vec<PathBuf>> {
    if tables.is_empty() {
        return Err(Error::Invalid("no tables to write".into()));
    }
    if let Some(t) = tables.iter().find(|t| t.rows.is_empty()) {
        return Err(Error::Invalid(format!("{} table is empty", t.name)));
    }
    let paths = output_paths(tables, path);
    for (t, p) in tables.iter().zip(&paths) {
        fs::write(p, t.to_csv()).map_err(|source| Error::Io { path: p.clone(), source })?;
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let mut t = OutputTable::new("spectrum", SPECTRUM_COLUMNS);
        let x = 0.1 + 0.2;
        t.push(vec![Cell::from(3usize), Cell::from(x)]).unwrap();
        t.push(vec![Cell::from(4usize), Cell::from(None)]).unwrap();
        assert!(t.push(vec![Cell::from(1.0)]).is_err());
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# kzfront spectrum table, schema v1"));
        assert_eq!(lines[1], "m,omega");
        let back: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, x);
        assert_eq!(lines[3], "4,NaN");
        assert_eq!(Cell::from(2.0).to_string(), "2.0");
    }

    #[test]
    fn secondary_paths() {
        let a = OutputTable::new("profile", PROFILE_COLUMNS);
        let b = OutputTable::new("spectrum", SPECTRUM_COLUMNS);
        let p = output_paths(&[a, b], Path::new("/x/run.csv"));
        assert_eq!(p, vec![PathBuf::from("/x/run.csv"), PathBuf::from("/x/run.spectrum.csv")]);
    }
}
