//! Deterministic CSV emission: UTF-8, comma separators, Unix newlines, and
//! floats at 17 significant digits so parse(serialize(x)) round-trips
//! bitwise for finite doubles.

use crate::CliError;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// 17 significant digits: one leading digit plus 16 after the point.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvWriter {
    out: BufWriter<File>,
    columns: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, CliError> {
        let file = File::create(path)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
        let mut w = CsvWriter { out: BufWriter::new(file), columns: header.len() };
        w.raw_row(header.iter().map(|s| s.to_string()))?;
        Ok(w)
    }

    pub fn row(&mut self, fields: &[Field]) -> Result<(), CliError> {
        assert_eq!(fields.len(), self.columns, "row width mismatch");
        self.raw_row(fields.iter().map(Field::render))
    }

    fn raw_row(&mut self, fields: impl Iterator<Item = String>) -> Result<(), CliError> {
        let line = fields.collect::<Vec<_>>().join(",");
        self.out
            .write_all(line.as_bytes())
            .and_then(|_| self.out.write_all(b"\n"))
            .map_err(|e| CliError::Config(format!("write failed: {e}")))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(|e| CliError::Config(format!("flush failed: {e}")))
    }
}

pub enum Field {
    F(f64),
    U(u64),
    B(bool),
    S(String),
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::F(x) => fmt_f64(*x),
            Field::U(x) => x.to_string(),
            Field::B(b) => if *b { "1" } else { "0" }.to_string(),
            Field::S(s) => s.clone(),
        }
    }
}
