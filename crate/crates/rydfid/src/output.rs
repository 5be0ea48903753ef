//! CSV tables, JSON reports and gnuplot scripts.
//!
//! Every file carries the code version and the config hash. Floats use a fixed
//! `{:.10e}` format and columns keep their declared order, so identical inputs
//! give byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
}

impl Meta {
    pub fn new(command: &str, config_sha256: &str) -> Self {
        Self { tool: "rydfid".into(), version: VERSION.into(), command: command.into(), config_sha256: config_sha256.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub doc: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<Column>,
    pub notes: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns.iter().map(|(n, d)| Column { name: (*n).into(), doc: (*d).into() }).collect(),
            ..Self::default()
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn render(&self, meta: &Meta) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {} {}", meta.tool, meta.version);
        let _ = writeln!(s, "# command: {}", meta.command);
        let _ = writeln!(s, "# config_sha256: {}", meta.config_sha256);
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        for (i, c) in self.columns.iter().enumerate() {
            let _ = writeln!(s, "# column {}: {} = {}", i + 1, c.name, c.doc);
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        let _ = writeln!(s, "{}", names.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format_float(*v)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.10e}")
    }
}

/// One curve: the y column plotted against the x column, optionally restricted to rows where
/// `filter` column equals a value.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub y: String,
    pub title: String,
    pub filter: Option<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x: String,
    pub xlabel: String,
    pub ylabel: String,
    pub logx: bool,
    pub logy: bool,
    pub curves: Vec<Curve>,
}

impl Plot {
    pub fn script(&self, table: &Table, csv_name: &str, meta: &Meta) -> String {
        let col = |n: &str| table.index(n).map(|i| i + 1).unwrap_or(0);
        let mut s = String::new();
        let _ = writeln!(s, "# {} {}, config_sha256 {}", meta.tool, meta.version, meta.config_sha256);
        let _ = writeln!(s, "set datafile separator ','");
        let _ = writeln!(s, "set datafile commentschars '#'");
        let _ = writeln!(s, "set key autotitle columnhead");
        let stem = csv_name.trim_end_matches(".csv");
        let _ = writeln!(s, "set terminal pngcairo size 900,650");
        let _ = writeln!(s, "set output '{stem}.png'");
        let _ = writeln!(s, "set title '{}'", self.title);
        let _ = writeln!(s, "set xlabel '{}'", self.xlabel);
        let _ = writeln!(s, "set ylabel '{}'", self.ylabel);
        if self.logx {
            let _ = writeln!(s, "set logscale x");
        }
        if self.logy {
            let _ = writeln!(s, "set logscale y");
        }
        let parts: Vec<String> = self
            .curves
            .iter()
            .map(|c| {
                let (x, y) = (col(&self.x), col(&c.y));
                let using = match &c.filter {
                    Some((f, v)) => format!("(${x}):((abs(${} - {}) < 1e-9*abs({})+1e-30) ? ${y} : 1/0)", col(f), format_float(*v), format_float(*v)),
                    None => format!("{x}:{y}"),
                };
                format!("'{csv_name}' using {using} with lines title '{}'", c.title)
            })
            .collect();
        let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        s
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source }
}

pub fn write_json<T: Serialize>(path: &Path, meta: &Meta, body: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Envelope<'a, T> {
        meta: &'a Meta,
        #[serde(flatten)]
        body: &'a T,
    }
    let text = serde_json::to_string_pretty(&Envelope { meta, body }).map_err(|e| CliError::Config(e.to_string()))?;
    write_file(path, &(text + "\n"))
}

/// Write `<stem>.csv` and, when given, `<stem>.gp`; returns the paths written.
pub fn write_table(dir: &Path, stem: &str, table: &Table, meta: &Meta, plot: Option<&Plot>) -> Result<Vec<PathBuf>> {
    let csv = dir.join(format!("{stem}.csv"));
    write_file(&csv, &table.render(meta))?;
    let mut out = vec![csv];
    if let Some(p) = plot {
        let gp = dir.join(format!("{stem}.gp"));
        write_file(&gp, &p.script(table, &format!("{stem}.csv"), meta))?;
        out.push(gp);
    }
    Ok(out)
}
