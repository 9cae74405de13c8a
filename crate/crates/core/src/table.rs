//! CSV input and output.
//!
//! One column per variable, decimal scalars, optional header row. Parse
//! failures report 1-based file row and column.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// A parsed CSV file: the numeric body plus the header, when there was one.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Option<Vec<String>>,
    pub data: DenseMatrix,
}

impl Table {
    pub fn read_path(path: impl AsRef<Path>, has_header: bool) -> Result<Table> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read(file, has_header)
    }

    pub fn read<R: Read>(reader: R, has_header: bool) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);

        let mut headers = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut width: Option<usize> = None;
        for (k, rec) in rdr.records().enumerate() {
            let file_row = k + 1;
            let rec = rec.map_err(|e| Error::Parse {
                row: file_row,
                col: 0,
                message: e.to_string(),
            })?;
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            match width {
                Some(w) if w != rec.len() => {
                    return Err(Error::Parse {
                        row: file_row,
                        col: rec.len().min(w) + 1,
                        message: format!("expected {w} fields, found {}", rec.len()),
                    })
                }
                None => width = Some(rec.len()),
                _ => {}
            }
            if has_header && headers.is_none() {
                headers = Some(rec.iter().map(str::to_owned).collect());
                continue;
            }
            let mut row = Vec::with_capacity(rec.len());
            for (c, field) in rec.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    row: file_row,
                    col: c + 1,
                    message: format!("not a number: {field:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row: file_row,
                        col: c + 1,
                        message: format!("non-finite value {field:?}"),
                    });
                }
                row.push(v);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                row: 1,
                col: 1,
                message: "no data rows".into(),
            });
        }
        let data = DenseMatrix::from_rows(&rows)?;
        Ok(Table { headers, data })
    }

    /// Name for 0-based column `j`: the header if present, otherwise `x{j+1}`.
    pub fn column_name(&self, j: usize) -> String {
        match &self.headers {
            Some(h) => h[j].clone(),
            None => format!("x{}", j + 1),
        }
    }

    /// Resolves a column reference, either a header name or a 1-based index,
    /// to a 0-based column.
    pub fn resolve(&self, reference: &str) -> Result<usize> {
        let p = self.data.ncols();
        if let Some(h) = &self.headers {
            if let Some(j) = h.iter().position(|name| name == reference) {
                return Ok(j);
            }
        }
        match reference.parse::<usize>() {
            Ok(j) if (1..=p).contains(&j) => Ok(j - 1),
            Ok(j) => Err(Error::IndexOutOfRange { index: j, len: p }),
            Err(_) => Err(Error::InvalidArgument(format!(
                "no column named {reference:?}"
            ))),
        }
    }
}

/// Writes a matrix as headerless CSV using shortest round-trip formatting.
pub fn write_matrix<W: Write>(out: W, m: &DenseMatrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(out);
    for r in 0..m.nrows() {
        w.write_record((0..m.ncols()).map(|c| fmt_scalar(m.get(r, c))))
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest decimal string that parses back to the same `f64`; exponent
/// notation outside `[1e-5, 1e16)`.
pub fn fmt_scalar(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}
