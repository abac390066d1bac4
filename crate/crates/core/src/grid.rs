//! Uniform Cartesian grids.
//!
//! Every field in the crate stores its cells in row-major order: the last
//! axis varies fastest. For a grid of shape `[n0, n1, n2]` the cell
//! `(i0, i1, i2)` lives at flat index `(i0 * n1 + i1) * n2 + i2`. All index
//! conversions go through [`Grid::flat_index`] and [`Grid::unflatten`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIMS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    shape: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        let dims = shape.len();
        if dims == 0 || dims > MAX_DIMS {
            return Err(Error::InvalidGrid(format!(
                "expected 1 to {MAX_DIMS} axes, got {dims}"
            )));
        }
        if spacing.len() != dims || origin.len() != dims {
            return Err(Error::InvalidGrid(format!(
                "shape has {dims} axes but spacing has {} and origin has {}",
                spacing.len(),
                origin.len()
            )));
        }
        if let Some(axis) = shape.iter().position(|&n| n < 2) {
            return Err(Error::InvalidGrid(format!(
                "axis {axis} has {} cells, need at least 2",
                shape[axis]
            )));
        }
        if let Some(axis) = spacing.iter().position(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidGrid(format!(
                "axis {axis} spacing {} must be positive and finite",
                spacing[axis]
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self {
            shape,
            spacing,
            origin,
        })
    }

    /// Grid with the same spacing on every axis and origin at zero.
    pub fn uniform(shape: &[usize], spacing: f64) -> Result<Self> {
        Self::new(
            shape.to_vec(),
            vec![spacing; shape.len()],
            vec![0.0; shape.len()],
        )
    }

    pub fn dims(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Flat-index stride of each axis.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims()];
        for axis in (0..self.dims().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * self.shape[axis + 1];
        }
        strides
    }

    pub fn contains(&self, index: &[usize]) -> bool {
        index.len() == self.dims() && index.iter().zip(&self.shape).all(|(&i, &n)| i < n)
    }

    pub fn flat_index(&self, index: &[usize]) -> Option<usize> {
        if !self.contains(index) {
            return None;
        }
        Some(
            index
                .iter()
                .zip(&self.shape)
                .fold(0, |acc, (&i, &n)| acc * n + i),
        )
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.dims()];
        for axis in (0..self.dims()).rev() {
            index[axis] = flat % self.shape[axis];
            flat /= self.shape[axis];
        }
        index
    }

    /// Coordinate of cell `i` along `axis`, meters.
    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing[axis]
    }

    /// Physical position of the cell at flat index `flat`.
    pub fn position(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat)
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.coordinate(axis, i))
            .collect()
    }

    /// True when the cell touches any face of the grid.
    pub fn is_boundary(&self, flat: usize) -> bool {
        self.unflatten(flat)
            .iter()
            .zip(&self.shape)
            .any(|(&i, &n)| i == 0 || i + 1 == n)
    }
}
