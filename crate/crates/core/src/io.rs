//! Field CSV format.
//!
//! Header `index_axis0[,index_axis1[,index_axis2]],value_re[,value_im]`,
//! one row per cell in row-major order, LF line endings, values written
//! with 17 significant digits.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField};
use crate::grid::Grid;

pub(crate) fn index_header(dims: usize) -> String {
    (0..dims)
        .map(|a| format!("index_axis{a}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Formats a double with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn write_index(w: &mut impl Write, index: &[usize]) -> std::io::Result<()> {
    for (a, i) in index.iter().enumerate() {
        if a > 0 {
            w.write_all(b",")?;
        }
        write!(w, "{i}")?;
    }
    Ok(())
}

pub fn write_scalar_field(w: &mut impl Write, field: &ScalarField) -> std::io::Result<()> {
    let grid = field.grid();
    writeln!(w, "{},value_re", index_header(grid.dims()))?;
    for (flat, v) in field.values().iter().enumerate() {
        write_index(w, &grid.unflatten(flat))?;
        writeln!(w, ",{}", fmt_f64(*v))?;
    }
    Ok(())
}

pub fn write_complex_field(w: &mut impl Write, field: &ComplexField) -> std::io::Result<()> {
    let grid = field.grid();
    writeln!(w, "{},value_re,value_im", index_header(grid.dims()))?;
    for (flat, z) in field.values().iter().enumerate() {
        write_index(w, &grid.unflatten(flat))?;
        writeln!(w, ",{},{}", fmt_f64(z.re), fmt_f64(z.im))?;
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads `value_columns` values per cell. Every cell must appear exactly once.
fn read_rows(r: impl BufRead, grid: &Grid, value_columns: usize) -> Result<Vec<Vec<f64>>> {
    let dims = grid.dims();
    let expected_header = match value_columns {
        1 => format!("{},value_re", index_header(dims)),
        _ => format!("{},value_re,value_im", index_header(dims)),
    };
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| parse_err(1, e.to_string()))?,
        None => return Err(parse_err(1, "empty file")),
    };
    if header.trim_end() != expected_header {
        return Err(parse_err(
            1,
            format!("expected header `{expected_header}`, found `{header}`"),
        ));
    }
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; grid.len()];
    for (n, line) in lines {
        let lineno = n + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.trim_end().split(',').collect();
        if cols.len() != dims + value_columns {
            return Err(parse_err(
                lineno,
                format!(
                    "expected {} columns, found {}",
                    dims + value_columns,
                    cols.len()
                ),
            ));
        }
        let index = cols[..dims]
            .iter()
            .map(|c| c.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(lineno, format!("bad index: {e}")))?;
        let flat = grid
            .flat_index(&index)
            .ok_or_else(|| parse_err(lineno, format!("index {index:?} outside grid")))?;
        let values = cols[dims..]
            .iter()
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(lineno, format!("bad value: {e}")))?;
        if rows[flat].replace(values).is_some() {
            return Err(parse_err(lineno, format!("duplicate cell {index:?}")));
        }
    }
    rows.into_iter()
        .enumerate()
        .map(|(flat, row)| {
            row.ok_or_else(|| parse_err(0, format!("missing cell {:?}", grid.unflatten(flat))))
        })
        .collect()
}

pub fn read_scalar_field(r: impl BufRead, grid: Grid) -> Result<ScalarField> {
    let rows = read_rows(r, &grid, 1)?;
    ScalarField::new(grid, rows.into_iter().map(|v| v[0]).collect())
}

pub fn read_complex_field(r: impl BufRead, grid: Grid, time: f64) -> Result<ComplexField> {
    let rows = read_rows(r, &grid, 2)?;
    let values = rows
        .into_iter()
        .map(|v| Complex64::new(v[0], v[1]))
        .collect();
    ComplexField::new(grid, values, time)
}
