//! Experiment plumbing: synthetic sweeps, weighted edge-list I/O, CSV output
//! and the command-line front end.

pub mod cli;
pub mod edgelist;
pub mod sweep;

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Full double precision: 17 significant digits in scientific notation.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `m` as comma-separated rows (no header, LF line endings).
pub fn write_matrix_csv<W: Write>(m: &DenseMatrix, mut out: W) -> Result<()> {
    let mut line = String::new();
    for i in 0..m.rows() {
        line.clear();
        for (j, &v) in m.row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_real(v));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Reads a headerless numeric CSV with a constant number of columns.
pub fn read_matrix_csv<R: BufRead>(input: R) -> Result<DenseMatrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::parse(idx + 1, format!("bad number: {e}")))?;
        match cols {
            None => cols = Some(values.len()),
            Some(c) if c != values.len() => {
                return Err(Error::parse(
                    idx + 1,
                    format!("expected {c} columns, found {}", values.len()),
                ))
            }
            _ => {}
        }
        data.extend(values);
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::parse(0, "empty matrix file"))?;
    DenseMatrix::from_vec(rows, cols, data)
}
