//! Deterministic CSV and JSON output plus the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::params::{DerivedConstants, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// 17 significant digits, `.` decimal separator, lowercase `nan`/`inf`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn format_cell(c: &Cell) -> String {
    match *c {
        Cell::Int(i) => i.to_string(),
        Cell::Float(v) => format_float(v),
        Cell::Bool(b) => b.to_string(),
    }
}

/// Renders a CSV table with `\n` line endings.
pub fn render_csv<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<Cell>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(format_cell).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> std::io::Result<()>
where
    I: IntoIterator<Item = Vec<Cell>>,
{
    write_text(path, &render_csv(header, rows))
}

pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    write_text(path, &text)
}

/// Sidecar manifest path, `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub params: SystemParams,
    pub derived: DerivedConstants,
    pub tolerances: serde_json::Value,
    pub outputs: Vec<String>,
    pub version: String,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str, argv: Vec<String>, params: &SystemParams) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            argv,
            params: params.clone(),
            derived: params.derived(),
            tolerances: serde_json::Value::Null,
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed() {
        assert_eq!(format_float(0.125), "1.2500000000000000e-1");
        assert_eq!(format_float(-1.0 / 3.0), "-3.3333333333333331e-1");
        assert_eq!(format_float(f64::NAN), "nan");
        let back: f64 = format_float(0.1 + 0.2).parse().unwrap();
        assert_eq!(back, 0.1 + 0.2);
    }

    #[test]
    fn csv_layout() {
        let s = render_csv(&["a", "b", "c"], vec![vec![Cell::Int(3), 0.5.into(), true.into()]]);
        assert_eq!(s, "a,b,c\n3,5.0000000000000000e-1,true\n");
    }

    #[test]
    fn manifest_sidecar_name() {
        assert_eq!(
            manifest_path(Path::new("out/x.csv")),
            PathBuf::from("out/x.csv.manifest.json")
        );
    }
}
