//! Small helpers for the CSV tables emitted by the estimators.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::ext::ExtReal;

pub(crate) fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn read_rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let got: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if got != header {
        return Err(Error::Parse(format!("expected header {:?}, found {:?}", header.join(","), got.join(","))));
    }
    r.records().map(|rec| rec.map_err(Error::from)).collect()
}

pub(crate) fn ext(rec: &csv::StringRecord, col: usize) -> Result<ExtReal> {
    let field = rec.get(col).ok_or_else(|| Error::Parse(format!("missing column {col}")))?;
    field.parse().map_err(|e: crate::ext::ParseExtRealError| Error::Parse(e.to_string()))
}

pub(crate) fn real(rec: &csv::StringRecord, col: usize) -> Result<f64> {
    ext(rec, col)?.finite().ok_or_else(|| Error::Parse(format!("column {col} must be finite")))
}

pub(crate) fn int(rec: &csv::StringRecord, col: usize) -> Result<u64> {
    let field = rec.get(col).ok_or_else(|| Error::Parse(format!("missing column {col}")))?;
    field.trim().parse().map_err(|_| Error::Parse(format!("column {col}: {field:?} is not an integer")))
}
