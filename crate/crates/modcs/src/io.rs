//! Matrix CSV format and atomic file writes.
//!
//! Matrices are stored as plain text: one row per line, comma-separated
//! floats printed with 17 significant digits so a write/read round trip
//! is bit-exact. No header.

use crate::numkit::{DenseMatrix, NumKitError};
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error(transparent)]
    NumKit(#[from] NumKitError),
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io { path: path.display().to_string(), source }
}

/// Write bytes via a temp file in the same directory plus rename, so
/// readers never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn matrix_to_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv(path: &Path, m: &DenseMatrix) -> Result<(), IoError> {
    atomic_write(path, matrix_to_csv(m).as_bytes())
}

pub fn read_matrix_csv(path: &Path) -> Result<DenseMatrix, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                return Err(IoError::Parse {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    if rows.is_empty() {
        return Err(IoError::Parse {
            path: path.display().to_string(),
            line: 0,
            message: "empty matrix file".into(),
        });
    }
    Ok(DenseMatrix::from_rows(&rows)?)
}
