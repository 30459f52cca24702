//! CSV and JSON-lines readers and writers.
//!
//! Floats are written in shortest round-trip form; missing values are
//! empty fields.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{RunRecord, StabilityRow, SummaryRow};
use crate::knn::Dataset;

/// Writes `x_1..x_dx, y_1..y_dy` and one sample per line.
pub fn write_dataset_csv<W: Write>(data: &Dataset, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let header: Vec<String> = (1..=data.d_x())
        .map(|j| format!("x_{j}"))
        .chain((1..=data.d_y()).map(|j| format!("y_{j}")))
        .collect();
    wtr.write_record(&header)?;
    let mut row = Vec::with_capacity(data.d_joint());
    for i in 0..data.n() {
        row.clear();
        row.extend_from_slice(data.x_row(i));
        row.extend_from_slice(data.y_row(i));
        wtr.serialize(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a dataset CSV with a header row. With `dims = None` the split is
/// taken from the `x_*` / `y_*` header names; otherwise the first `d_x`
/// columns are X and the next `d_y` are Y.
pub fn read_dataset_csv<R: Read>(input: R, dims: Option<(usize, usize)>) -> Result<Dataset> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let (d_x, d_y) = match dims {
        Some(d) => d,
        None => {
            let d_x = headers.iter().take_while(|h| h.starts_with("x_")).count();
            let d_y = headers
                .iter()
                .skip(d_x)
                .take_while(|h| h.starts_with("y_"))
                .count();
            if d_x + d_y != headers.len() {
                return Err(Error::config(
                    "cannot infer dimensions from header; expected x_1..x_dx, y_1..y_dy (or pass --dx/--dy)",
                ));
            }
            (d_x, d_y)
        }
    };
    if d_x + d_y != headers.len() {
        return Err(Error::config(format!(
            "d_x + d_y = {} but the file has {} columns",
            d_x + d_y,
            headers.len()
        )));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::config(format!(
                    "row {}: cannot parse '{field}' as a number",
                    line + 1
                ))
            })?;
            if j < d_x {
                x.push(v);
            } else {
                y.push(v);
            }
        }
    }
    Dataset::new(x, d_x, y, d_y)
}

fn write_rows<W: Write, T: Serialize>(rows: &[T], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes run records with the [`crate::harness::RUN_RECORD_COLUMNS`]
/// header.
pub fn write_records_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    if records.is_empty() {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(crate::harness::RUN_RECORD_COLUMNS)?;
        wtr.flush()?;
        return Ok(());
    }
    write_rows(records, out)
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let records = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<RunRecord>, _>>()?;
    Ok(records)
}

/// One JSON object per line, same field names as the CSV columns.
pub fn write_records_jsonl<W: Write>(records: &[RunRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::Io(e.into()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    write_rows(rows, out)
}

pub fn write_stability_csv<W: Write>(rows: &[StabilityRow], out: W) -> Result<()> {
    write_rows(rows, out)
}
