//! Plain-text vector and matrix files.
//!
//! Vectors are stored one value per line under a single header line naming the
//! field; complex vectors use two columns `<field>_re,<field>_im`. Matrices are
//! stored row-major, one row per line, without a header. Values are written
//! with Rust's shortest round-trip formatting, so reading a file back yields
//! bit-identical numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_f64(path: &Path, line_no: usize, token: &str) -> Result<f64> {
    token.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line_no}: cannot parse `{}` as a number", token.trim()),
    })
}

pub fn write_real_vector(path: &Path, field: &str, values: &[f64]) -> Result<()> {
    let mut out = String::with_capacity(values.len() * 24 + field.len() + 1);
    out.push_str(field);
    out.push('\n');
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    write_text(path, &out)
}

/// Returns the header field name and the values.
pub fn read_real_vector(path: &Path) -> Result<(String, Vec<f64>)> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            message: "empty file, expected a header line".into(),
        })?
        .trim()
        .to_string();
    let values = lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_f64(path, i + 2, l))
        .collect::<Result<Vec<_>>>()?;
    Ok((header, values))
}

pub fn write_complex_vector(path: &Path, field: &str, values: &[Complex64]) -> Result<()> {
    let mut out = String::with_capacity(values.len() * 48);
    let _ = writeln!(out, "{field}_re,{field}_im");
    for v in values {
        let _ = writeln!(out, "{},{}", v.re, v.im);
    }
    write_text(path, &out)
}

pub fn read_complex_vector(path: &Path) -> Result<(String, Vec<Complex64>)> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let field = header
        .split(',')
        .next()
        .and_then(|h| h.trim().strip_suffix("_re"))
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            message: format!("expected header `<field>_re,<field>_im`, found `{header}`"),
        })?
        .to_string();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (re, im) = line.split_once(',').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: expected two columns", i + 2),
        })?;
        values.push(Complex64::new(
            parse_f64(path, i + 2, re)?,
            parse_f64(path, i + 2, im)?,
        ));
    }
    Ok((field, values))
}

pub fn write_matrix(path: &Path, matrix: &DMatrix<f64>) -> Result<()> {
    let mut out = String::with_capacity(matrix.len() * 24);
    for row in matrix.row_iter() {
        let mut first = true;
        for v in row.iter() {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = read_text(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| parse_f64(path, i + 1, t))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    message: format!(
                        "line {}: expected {} columns, found {}",
                        i + 1,
                        first.len(),
                        row.len()
                    ),
                });
            }
        }
        rows.push(row);
    }
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m == 0 || n == 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "matrix file is empty".into(),
        });
    }
    Ok(DMatrix::from_row_iterator(m, n, rows.into_iter().flatten()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
