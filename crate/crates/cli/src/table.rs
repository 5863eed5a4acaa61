//! CSV tables with a `# key=value` provenance header.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    /// Deliberately blank, e.g. an order of convergence on the first level.
    Blank,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64.
            Self::Num(v) => format!("{:.16e}", v + 0.0),
            Self::Int(v) => v.to_string(),
            Self::Text(s) => s.clone(),
            Self::Blank => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().flatten().all(|c| !matches!(c, Cell::Num(v) if !v.is_finite()))
    }

    /// The CSV body: column header and data rows.
    pub fn body(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let to_io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
        w.write_record(&self.columns).map_err(to_io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(to_io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Writes every table to `dir/{prefix}{name}.csv` after checking all of them.
pub fn write_tables(dir: &Path, prefix: &str, header: &[(String, String)], tables: &[Table]) -> Result<Vec<PathBuf>, CliError> {
    for t in tables {
        if !t.is_finite() {
            return Err(CliError::NonFinite { file: t.name.clone() });
        }
    }
    let mut head = String::new();
    for (k, v) in header {
        head.push_str(&format!("# {k}={v}\n"));
    }
    let rendered: Vec<(PathBuf, String)> = tables
        .iter()
        .map(|t| Ok((dir.join(format!("{prefix}{}.csv", t.name)), format!("{head}{}", t.body()?))))
        .collect::<Result<_, CliError>>()?;
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (path, text) in rendered {
        fs::write(&path, text)?;
        paths.push(path);
    }
    Ok(paths)
}

/// The lines of a CSV file that are not `#` comments.
pub fn strip_header(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}
