//! Flat-file formats.
//!
//! * points: one point per line, comma-separated decimal floats, no header;
//! * similarity: dense `n x n`, one row per line;
//! * labels: a single column of nonnegative integers.
//!
//! Floats are written with the shortest representation that parses back to
//! the same `f64`, so files round-trip exactly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use densap_core::{PointSet, SimilarityMatrix, SquareMatrix};

use crate::error::{Error, Result};

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
}

/// Reads rows of floats, rejecting ragged rows.
pub fn read_float_rows<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (line, record) in reader(input).records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Ragged {
                line: line + 1,
                expected: *expected_len as usize,
                found: *len as usize,
            },
            _ => Error::Csv(e),
        })?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| Error::Parse {
                    line: line + 1,
                    message: format!("not a number: {field:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_points<R: Read>(input: R) -> Result<PointSet> {
    Ok(PointSet::new(read_float_rows(input)?)?)
}

pub fn parse_matrix<R: Read>(input: R) -> Result<SimilarityMatrix> {
    Ok(SimilarityMatrix::from_rows(&read_float_rows(input)?)?)
}

pub fn parse_labels<R: Read>(input: R) -> Result<Vec<u64>> {
    let mut labels = Vec::new();
    for (line, record) in reader(input).records().enumerate() {
        let record = record?;
        if record.len() != 1 {
            return Err(Error::Ragged {
                line: line + 1,
                expected: 1,
                found: record.len(),
            });
        }
        labels.push(record[0].parse::<u64>().map_err(|_| Error::Parse {
            line: line + 1,
            message: format!("not a label: {:?}", &record[0]),
        })?);
    }
    Ok(labels)
}

fn write_rows<'a, W: Write>(mut out: W, rows: impl Iterator<Item = &'a [f64]>) -> Result<()> {
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_points<W: Write>(out: W, points: &PointSet) -> Result<()> {
    write_rows(out, points.iter())
}

pub fn write_matrix<W: Write>(out: W, matrix: &SquareMatrix) -> Result<()> {
    write_rows(out, (0..matrix.n()).map(|i| matrix.row(i)))
}

pub fn write_labels<W: Write>(mut out: W, labels: &[usize]) -> Result<()> {
    for l in labels {
        writeln!(out, "{l}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Open {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_points(path: &Path) -> Result<PointSet> {
    parse_points(open(path)?)
}

pub fn read_matrix(path: &Path) -> Result<SimilarityMatrix> {
    parse_matrix(open(path)?)
}

pub fn read_labels(path: &Path) -> Result<Vec<u64>> {
    parse_labels(open(path)?)
}

/// Creates `path` for writing, buffered.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Open {
        path: path.to_path_buf(),
        source,
    })
}
