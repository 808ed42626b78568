//! Table and manifest output.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! finite `f64` exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Float(v.unwrap_or(f64::NAN))
    }
}

/// `v` with 17 significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn parse_float(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::input(format!("not a number: {s:?}")))
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

enum Sink {
    Csv(csv::Writer<BufWriter<File>>),
    Json { out: BufWriter<File>, first: bool },
}

/// Streams rows of a fixed-header table to `<dir>/<name>.<ext>`. JSON output
/// is an array of objects keyed by the header.
pub struct TableWriter {
    sink: Sink,
    header: Vec<String>,
    path: PathBuf,
    rows: usize,
}

impl TableWriter {
    pub fn create(dir: &Path, name: &str, header: &[String], format: Format) -> Result<Self> {
        let path = dir.join(format!("{name}.{}", format.extension()));
        let file = BufWriter::new(File::create(&path)?);
        let sink = match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
                w.write_record(header).map_err(csv_error)?;
                Sink::Csv(w)
            }
            Format::Json => {
                let mut out = file;
                out.write_all(b"[")?;
                Sink::Json { out, first: true }
            }
        };
        Ok(Self {
            sink,
            header: header.to_vec(),
            path,
            rows: 0,
        })
    }

    pub fn row(&mut self, cells: &[Cell]) -> Result<()> {
        if cells.len() != self.header.len() {
            return Err(Error::input(format!(
                "row of {} cells for {} columns",
                cells.len(),
                self.header.len()
            )));
        }
        match &mut self.sink {
            Sink::Csv(w) => w.write_record(cells.iter().map(Cell::text)).map_err(csv_error)?,
            Sink::Json { out, first } => {
                let obj: Map<String, Value> = self
                    .header
                    .iter()
                    .zip(cells)
                    .map(|(h, c)| (h.clone(), c.json()))
                    .collect();
                out.write_all(if *first { b"\n" } else { b",\n" })?;
                serde_json::to_writer(&mut *out, &obj)?;
                *first = false;
            }
        }
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Flushes the file and returns its path.
    pub fn finish(self) -> Result<PathBuf> {
        match self.sink {
            Sink::Csv(mut w) => w.flush()?,
            Sink::Json { mut out, .. } => {
                out.write_all(b"\n]\n")?;
                out.flush()?;
            }
        }
        Ok(self.path)
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::input(format!("csv: {other:?}")),
    }
}

/// Writes a whole table at once.
pub fn write_table(dir: &Path, name: &str, header: &[&str], rows: &[Vec<Cell>], format: Format) -> Result<PathBuf> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    let mut w = TableWriter::create(dir, name, &header, format)?;
    for r in rows {
        w.row(r)?;
    }
    w.finish()
}

/// Reads a CSV table written by [`TableWriter`] as header plus string rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let header = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()).map_err(csv_error))
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

/// Run metadata written next to every result set.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub argv: Vec<String>,
    pub config: Value,
    pub seed: u64,
    /// How RNG streams were assigned to replicas and sample chunks.
    pub streams: String,
    pub thresholds: BTreeMap<String, f64>,
    pub files: Vec<String>,
    pub started_unix: f64,
    pub wall_seconds: f64,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut out = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(path)
    }
}
