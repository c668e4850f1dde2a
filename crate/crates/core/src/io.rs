//! CSV/number helpers shared by the artifact writers and readers.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses exactly `expected` comma-separated floats.
pub fn parse_csv_floats(line: &str, expected: usize) -> Result<Vec<f64>> {
    let fields: Vec<f64> = line
        .trim()
        .split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{f}` in `{line}`")))
        })
        .collect::<Result<_>>()?;
    if fields.len() != expected {
        return Err(Error::Parse(format!(
            "expected {expected} fields, found {} in `{line}`",
            fields.len()
        )));
    }
    Ok(fields)
}

/// Reads a CSV whose first line must equal `header`; returns the data rows.
pub fn read_csv_rows(path: &Path, header: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        other => {
            return Err(Error::Parse(format!(
                "{}: expected header `{header}`, found `{}`",
                path.display(),
                other.unwrap_or("")
            )))
        }
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_csv_floats(l, width))
        .collect()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// Fixed 6-decimal float, with non-finite values spelled `inf`, `-inf`, `nan`.
pub fn f6(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}
