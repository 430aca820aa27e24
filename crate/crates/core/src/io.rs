//! MatrixMarket dense `array real general` matrices and plain-text vectors.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::la::DenseMatrix;

const HEADER: &str = "%%MatrixMarket matrix array real general";

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Parses a dense MatrixMarket array (column-major value listing).
pub fn parse_matrix_market(text: &str, path: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (ln, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(path, ln, "missing %%MatrixMarket banner"));
    }
    let kind: Vec<&str> = tokens[1..].iter().map(String::as_str).collect();
    match kind.as_slice() {
        ["matrix", "array", "real" | "integer", "general"] => {}
        _ => {
            return Err(parse_err(
                path,
                ln,
                format!(
                    "unsupported banner `{}`; expected `{HEADER}`",
                    header.trim()
                ),
            ))
        }
    }

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (ln, size) = body
        .next()
        .ok_or_else(|| parse_err(path, ln, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let parse_dim = |s: &str, col: usize| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| parse_err(path, ln, format!("column {col}: bad dimension `{s}`")))
    };
    if dims.len() != 2 {
        return Err(parse_err(path, ln, "size line must hold `rows cols`"));
    }
    let (m, n) = (parse_dim(dims[0], 1)?, parse_dim(dims[1], 2)?);

    let mut data = Vec::with_capacity(m * n);
    let mut last_line = ln;
    for (ln, line) in body {
        last_line = ln;
        for (col, tok) in line.split_whitespace().enumerate() {
            let v: f64 = tok.parse().map_err(|_| {
                parse_err(path, ln, format!("column {}: bad number `{tok}`", col + 1))
            })?;
            if !v.is_finite() {
                return Err(parse_err(path, ln, format!("column {}: non-finite value", col + 1)));
            }
            if data.len() == m * n {
                return Err(parse_err(path, ln, format!("more than {} values", m * n)));
            }
            data.push(v);
        }
    }
    if data.len() != m * n {
        return Err(parse_err(
            path,
            last_line,
            format!("expected {} values, found {}", m * n, data.len()),
        ));
    }
    DenseMatrix::from_col_major(m, n, data)
}

pub fn read_matrix_market(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix_market(&text, &path.display().to_string())
}

pub fn format_matrix_market(a: &DenseMatrix) -> String {
    let mut s = String::with_capacity(24 * a.data().len() + 64);
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "{} {}", a.rows(), a.cols());
    for v in a.data() {
        let _ = writeln!(s, "{}", format_value(*v));
    }
    s
}

pub fn write_matrix_market(path: &Path, a: &DenseMatrix) -> Result<()> {
    fs::write(path, format_matrix_market(a)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Parses whitespace-separated decimals; `expected_len` is checked when given.
pub fn parse_vector(text: &str, path: &str, expected_len: Option<usize>) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut last_line = 1;
    for (i, line) in text.lines().enumerate() {
        last_line = i + 1;
        let t = line.trim();
        if t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        for (col, tok) in t.split_whitespace().enumerate() {
            let v: f64 = tok.parse().map_err(|_| {
                parse_err(path, i + 1, format!("column {}: bad number `{tok}`", col + 1))
            })?;
            if !v.is_finite() {
                return Err(parse_err(path, i + 1, format!("column {}: non-finite value", col + 1)));
            }
            out.push(v);
        }
    }
    if let Some(len) = expected_len {
        if out.len() != len {
            return Err(parse_err(
                path,
                last_line,
                format!("expected {len} values, found {}", out.len()),
            ));
        }
    }
    Ok(out)
}

pub fn read_vector(path: &Path, expected_len: Option<usize>) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_vector(&text, &path.display().to_string(), expected_len)
}

/// One value per line, 17 significant digits.
pub fn format_vector(v: &[f64]) -> String {
    let mut s = String::with_capacity(24 * v.len());
    for x in v {
        let _ = writeln!(s, "{}", format_value(*x));
    }
    s
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    fs::write(path, format_vector(v)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[inline]
fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}
