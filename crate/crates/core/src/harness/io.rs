//! CSV ingestion: rows are observations, columns are coordinates.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;

/// Parse CSV text. With `header`, the first record is skipped.
pub fn parse_csv<R: Read>(reader: R, header: bool) -> Result<SampleMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(header).trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let mut data = Vec::new();
    let mut d = None;
    let mut n = 0;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data(format!("record {}: {e}", k + 1)))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        match d {
            None => d = Some(rec.len()),
            Some(d) if d != rec.len() => {
                return Err(Error::Data(format!("record {} has {} fields, expected {d}", k + 1, rec.len())));
            }
            _ => {}
        }
        for f in rec.iter() {
            let v: f64 = f.parse().map_err(|_| Error::Data(format!("record {}: cannot parse {f:?} as a number", k + 1)))?;
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            data.push(v);
        }
        n += 1;
    }
    let d = d.ok_or_else(|| Error::Data("no data rows".into()))?;
    SampleMatrix::new(data, n, d)
}

/// Read a CSV file.
pub fn read_csv(path: &Path, header: bool) -> Result<SampleMatrix<f64>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    parse_csv(f, header)
}
