use std::path::Path;

use clap::Args;
use modschrod_core::io::read_scalar_field;
use modschrod_core::{Grid, ScalarField};

use crate::error::{input_error, usage, CliResult};
use crate::output::open_input;

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Cells per axis, comma separated, 1 to 3 axes (e.g. 201,201).
    #[arg(long, value_delimiter = ',', required = true)]
    pub shape: Vec<usize>,
    /// Cell spacing in meters: one value for every axis, or one per axis.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub spacing: Vec<f64>,
    /// Coordinates of cell 0 in meters, one per axis [default: all 0].
    #[arg(long, value_delimiter = ',')]
    pub origin: Option<Vec<f64>>,
}

impl GridArgs {
    pub fn build(&self) -> CliResult<Grid> {
        let dims = self.shape.len();
        let spacing = match self.spacing.len() {
            1 => vec![self.spacing[0]; dims],
            n if n == dims => self.spacing.clone(),
            n => {
                return Err(usage(
                    "--spacing",
                    format!("expected 1 or {dims} values, got {n}"),
                ))
            }
        };
        if let Some(h) = spacing.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(usage(
                "--spacing",
                format!("{h} must be positive and finite"),
            ));
        }
        let origin = self.origin.clone().unwrap_or_else(|| vec![0.0; dims]);
        if origin.len() != dims {
            return Err(usage(
                "--origin",
                format!("expected {dims} values, got {}", origin.len()),
            ));
        }
        Grid::new(self.shape.clone(), spacing, origin).map_err(|e| input_error("--shape", e))
    }
}

/// Comma-separated cell index, e.g. `100,100`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellIndex(pub Vec<usize>);

pub fn parse_cell(s: &str) -> Result<CellIndex, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(CellIndex)
}

pub fn read_scalar(flag: &str, path: &Path, grid: &Grid) -> CliResult<ScalarField> {
    let r = open_input(flag, path)?;
    read_scalar_field(r, grid.clone()).map_err(|e| input_error(flag, e))
}

pub fn require_positive(flag: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(flag, format!("{v} must be positive and finite")))
    }
}
