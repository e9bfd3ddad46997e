//! Sampled curve tables and their CSV form.
//!
//! CSV output is plain: a mandatory header row, `,` separators, LF line ends
//! and floats in Rust's shortest round-trip notation, so files are
//! byte-identical across runs and locales.

use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Rows of `(abscissa, values...)` under named columns; the first column is
/// the abscissa.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl CurveTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Dimension(format!("row has {} values for {} columns", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let columns: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
        if columns.is_empty() || columns.iter().all(String::is_empty) {
            return Err(Error::Schema("CSV has no header row".into()));
        }
        let mut table = Self::new(columns);
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let row = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Schema(format!("data row {}: {e}", line + 1)))?;
            table.push(row)?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Schema(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut t = CurveTable::new(["x", "y"]);
        t.push(vec![0.0, 0.1]).unwrap();
        t.push(vec![0.5, 1.0 / 3.0]).unwrap();
        let s = t.to_csv_string();
        assert_eq!(s, "x,y\n0,0.1\n0.5,0.3333333333333333\n");
        let back = CurveTable::read_csv(s.as_bytes()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("y").unwrap()[1], 1.0 / 3.0);
        assert!(t.push(vec![1.0]).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CurveTable::read_csv("".as_bytes()).is_err());
        assert!(CurveTable::read_csv("x,y\n1,abc\n".as_bytes()).is_err());
        assert!(CurveTable::read_csv("x,y\n1,2,3\n".as_bytes()).is_err());
    }
}
