//! CSV and JSON sample export.
//!
//! CSV files carry a header `x0,...,x{D-1}` and one row per point. JSON files
//! hold `{"dims", "n", "frame", "samples"}` with `samples` as an array of rows.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, HdsError, Result};
use crate::matrix::{Frame, SampleMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Picks the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonSamples {
    dims: usize,
    n: usize,
    frame: Frame,
    samples: Vec<Vec<f64>>,
}

pub fn csv_header(dims: usize) -> Vec<String> {
    (0..dims).map(|j| format!("x{j}")).collect()
}

pub fn write_csv<W: Write>(samples: &SampleMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(csv_header(samples.ncols()))?;
    let mut buf = Vec::with_capacity(samples.ncols());
    for row in samples.rows() {
        buf.clear();
        buf.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R, frame: Frame) -> Result<SampleMatrix> {
    let mut r = csv::Reader::from_reader(reader);
    let dims = r.headers()?.len();
    if dims == 0 {
        return config_err("CSV file has no columns");
    }
    let mut out = SampleMatrix::with_capacity(dims, 0, frame);
    let mut row = Vec::with_capacity(dims);
    for (i, record) in r.records().enumerate() {
        let record = record?;
        row.clear();
        for field in record.iter() {
            let v: f64 = field.trim().parse().map_err(|_| {
                HdsError::Config(format!("row {}: cannot parse '{field}' as a number", i + 1))
            })?;
            row.push(v);
        }
        if row.len() != dims {
            return config_err(format!(
                "row {} has {} fields, expected {dims}",
                i + 1,
                row.len()
            ));
        }
        out.push_row(&row);
    }
    Ok(out)
}

pub fn write_json<W: Write>(samples: &SampleMatrix, writer: W) -> Result<()> {
    let doc = JsonSamples {
        dims: samples.ncols(),
        n: samples.nrows(),
        frame: samples.frame(),
        samples: samples.to_rows(),
    };
    serde_json::to_writer(writer, &doc)?;
    Ok(())
}

pub fn read_json<R: Read>(reader: R) -> Result<SampleMatrix> {
    let doc: JsonSamples = serde_json::from_reader(reader)?;
    if doc.samples.len() != doc.n {
        return config_err(format!(
            "JSON declares n = {} but holds {} rows",
            doc.n,
            doc.samples.len()
        ));
    }
    if doc.n == 0 {
        return Ok(SampleMatrix::zeros(0, doc.dims, doc.frame));
    }
    let m = SampleMatrix::from_rows(&doc.samples, doc.frame)?;
    if m.ncols() != doc.dims {
        return config_err(format!(
            "JSON declares dims = {} but rows have {}",
            doc.dims,
            m.ncols()
        ));
    }
    Ok(m)
}

pub fn write_samples(samples: &SampleMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match Format::from_path(path) {
        Format::Csv => write_csv(samples, &mut w)?,
        Format::Json => write_json(samples, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

/// Reads a sample file; CSV input is tagged with `csv_frame`.
pub fn read_samples(path: &Path, csv_frame: Frame) -> Result<SampleMatrix> {
    let r = BufReader::new(File::open(path)?);
    match Format::from_path(path) {
        Format::Csv => read_csv(r, csv_frame),
        Format::Json => read_json(r),
    }
}
