use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::Format;

#[derive(Debug)]
pub enum Failure {
    /// Exit code 2.
    Reject(String),
    /// Exit code 3.
    Runtime(String),
}

impl From<cantor_qc::Error> for Failure {
    fn from(e: cantor_qc::Error) -> Self {
        if e.is_rejection() {
            Failure::Reject(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

pub type Outcome<T> = Result<T, Failure>;

/// A flat table for plotting.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub fn sink(path: Option<&Path>) -> Outcome<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes the JSON document or the table, depending on `format`.
pub fn emit<T: Serialize>(path: Option<&Path>, format: Format, doc: &T, table: Option<Table>) -> Outcome<()> {
    let mut out = sink(path)?;
    match (format, table) {
        (Format::Csv, Some(table)) => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        _ => {
            serde_json::to_writer_pretty(&mut out, doc)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn num(x: f64) -> String {
    format!("{x}")
}
