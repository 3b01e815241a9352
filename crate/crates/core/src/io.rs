//! File formats: matrix and coefficient JSON, trajectory tables (CSV and a
//! JSON mirror), and atomic file writes.
//!
//! Every float is written with 17 significant digits so a read-back
//! reproduces the exact double; identical inputs therefore serialize to
//! identical bytes.

use crate::cmv::VerblunskyCoefficients;
use crate::flows::Trajectory;
use crate::linalg::ComplexMatrix;
use crate::{Error, Result};
use num_complex::Complex64;
use serde_json::Value;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

fn fmt_f64(x: f64) -> String {
    // Fold -0.0 into 0.0 so numerically equal values serialize identically.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn fmt_complex(z: Complex64) -> String {
    format!("[{}, {}]", fmt_f64(z.re), fmt_f64(z.im))
}

/// Matrix as `{"n": …, "entries": [[[re, im], …], …]}`, one row per line.
pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    let n = m.dim();
    let mut out = String::new();
    let _ = write!(out, "{{\"n\": {n}, \"entries\": [");
    for i in 0..n {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        out.push_str("  [");
        for j in 0..n {
            if j > 0 {
                out.push_str(", ");
            }
            out.push_str(&fmt_complex(m[(i, j)]));
        }
        out.push(']');
    }
    out.push_str("\n]}\n");
    out
}

/// Coefficients as `{"n": …, "alphas": [[re, im], …]}` with `n` the matrix
/// dimension the list builds (one more than the list length).
pub fn coefficients_to_json(c: &VerblunskyCoefficients) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{\"n\": {}, \"alphas\": [", c.n());
    for (j, a) in c.alphas().iter().enumerate() {
        out.push_str(if j == 0 { "\n" } else { ",\n" });
        out.push_str("  ");
        out.push_str(&fmt_complex(*a));
    }
    out.push_str("\n]}\n");
    out
}

fn parse_root(s: &str) -> Result<Value> {
    serde_json::from_str(s).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))
}

fn parse_complex(v: &Value, what: &str) -> Result<Complex64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::Parse(format!("{what} must be a [re, im] pair")))?;
    let mut parts = [0.0f64; 2];
    for (slot, item) in parts.iter_mut().zip(pair) {
        *slot = item
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("{what} has a non-numeric component")))?;
    }
    Ok(Complex64::new(parts[0], parts[1]))
}

fn check_declared_n(root: &Value, actual: usize) -> Result<()> {
    if let Some(declared) = root.get("n") {
        let declared = declared
            .as_u64()
            .ok_or_else(|| Error::Parse("\"n\" must be a nonnegative integer".into()))?;
        if declared as usize != actual {
            return Err(Error::Parse(format!(
                "declared n = {declared} does not match the data (n = {actual})"
            )));
        }
    }
    Ok(())
}

pub fn matrix_from_json(s: &str) -> Result<ComplexMatrix> {
    let root = parse_root(s)?;
    let rows = root
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("matrix JSON needs an \"entries\" array".into()))?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("matrix must have at least one row".into()));
    }
    let mut m = ComplexMatrix::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        let cells = row
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(|| Error::Parse(format!("row {i} is not an array of {n} entries")))?;
        for (j, cell) in cells.iter().enumerate() {
            m[(i, j)] = parse_complex(cell, &format!("entry ({i}, {j})"))?;
        }
    }
    check_declared_n(&root, n)?;
    Ok(m)
}

pub fn coefficients_from_json(s: &str) -> Result<VerblunskyCoefficients> {
    let root = parse_root(s)?;
    let list = root
        .get("alphas")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("coefficient JSON needs an \"alphas\" array".into()))?;
    if list.is_empty() {
        return Err(Error::Parse(
            "coefficient list must be non-empty (dimension at least 2)".into(),
        ));
    }
    let mut alphas = Vec::with_capacity(list.len());
    for (j, item) in list.iter().enumerate() {
        alphas.push(parse_complex(item, &format!("alpha_{j}"))?);
    }
    check_declared_n(&root, alphas.len() + 1)?;
    VerblunskyCoefficients::new(alphas)
}

fn csv_cell(x: f64) -> String {
    fmt_f64(x)
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn column_names(t: &Trajectory) -> Vec<String> {
    let jmax = t.conserved.first().map_or(0, Vec::len);
    let mut cols = vec!["time".to_string()];
    for j in 1..=jmax {
        cols.push(format!("H_{j}"));
    }
    cols.push("unitarity_residual".into());
    cols.push("structure_residual".into());
    if let Some(alphas) = &t.alphas {
        let count = alphas.first().map_or(0, Vec::len);
        for a in 0..count {
            cols.push(format!("alpha_{a}_re"));
            cols.push(format!("alpha_{a}_im"));
        }
    } else {
        cols.push("state_ref".into());
    }
    cols
}

fn row_cells(t: &Trajectory, i: usize, state_refs: Option<&[String]>) -> Vec<String> {
    let mut cells = vec![csv_cell(t.times[i])];
    for v in &t.conserved[i] {
        cells.push(csv_cell(*v));
    }
    cells.push(csv_cell(t.unitarity[i]));
    cells.push(csv_cell(t.structure[i]));
    if let Some(alphas) = &t.alphas {
        for a in &alphas[i] {
            cells.push(csv_cell(a.re));
            cells.push(csv_cell(a.im));
        }
    } else {
        cells.push(
            state_refs
                .and_then(|r| r.get(i))
                .cloned()
                .unwrap_or_default(),
        );
    }
    cells
}

/// Sample table: time, H_1..H_jmax, residuals, then the flattened
/// coefficients (CMV runs) or a state file reference column (single/pair).
pub fn trajectory_to_csv(t: &Trajectory, state_refs: Option<&[String]>) -> String {
    let mut out = column_names(t).join(",");
    out.push('\n');
    for i in 0..t.times.len() {
        out.push_str(&row_cells(t, i, state_refs).join(","));
        out.push('\n');
    }
    out
}

/// JSON mirror of the CSV table: `{"columns": […], "rows": [[…], …]}`.
/// Numeric cells stay numbers; the state reference cell is a string.
pub fn trajectory_to_json(t: &Trajectory, state_refs: Option<&[String]>) -> String {
    let mut out = String::from("{\"columns\": [");
    for (i, c) in column_names(t).iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&json_string(c));
    }
    out.push_str("],\n\"rows\": [");
    let has_ref = t.alphas.is_none();
    for i in 0..t.times.len() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        out.push_str("  [");
        let cells = row_cells(t, i, state_refs);
        for (j, cell) in cells.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            if has_ref && j == cells.len() - 1 {
                out.push_str(&json_string(cell));
            } else {
                out.push_str(cell);
            }
        }
        out.push(']');
    }
    out.push_str("\n]}\n");
    out
}

/// Writes through a sibling temp file and renames it into place, so a
/// failing run never leaves a partial file at the destination.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParams(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = match dir {
        Some(d) => d.join(&tmp_name),
        None => tmp_name.clone().into(),
    };
    let mut f = std::fs::File::create(&tmp)?;
    f.write_all(contents.as_bytes())?;
    f.sync_all()?;
    drop(f);
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

pub fn write_matrix_file(path: &Path, m: &ComplexMatrix) -> Result<()> {
    write_atomic(path, &matrix_to_json(m))
}

pub fn read_matrix_file(path: &Path) -> Result<ComplexMatrix> {
    matrix_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_coefficients_file(path: &Path, c: &VerblunskyCoefficients) -> Result<()> {
    write_atomic(path, &coefficients_to_json(c))
}

pub fn read_coefficients_file(path: &Path) -> Result<VerblunskyCoefficients> {
    coefficients_from_json(&std::fs::read_to_string(path)?)
}
