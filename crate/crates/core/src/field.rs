//! Real, complex and boolean fields on a [`Grid`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if grid.len() != len {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            actual: len,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(Self { grid, values })
    }

    pub fn filled(grid: Grid, value: f64) -> Self {
        let values = vec![value; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: &[usize]) -> Option<f64> {
        self.grid.flat_index(index).map(|i| self.values[i])
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
    /// Seconds.
    time: f64,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: Grid, time: f64) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, values, time }
    }

    pub fn from_fn(grid: Grid, time: f64, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        Self { grid, values, time }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn get(&self, index: &[usize]) -> Option<Complex64> {
        self.grid.flat_index(index).map(|i| self.values[i])
    }

    pub fn modulus(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&z| z * factor).collect(),
            time: self.time,
        }
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
}

/// Boolean cell selection, e.g. the perturbed subregion.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    grid: Grid,
    values: Vec<bool>,
}

impl Mask {
    pub fn new(grid: Grid, values: Vec<bool>) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|b| !b).collect(),
        }
    }

    /// True when every selected cell of `self` is also selected in `other`.
    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(&a, &b)| !a || b)
    }
}

/// `Σ |Ψ_i|² · cell volume` over the cells selected by `mask` (all cells if `None`).
pub fn l2_norm_squared(field: &ComplexField, mask: Option<&Mask>) -> Result<f64> {
    let volume = field.grid.cell_volume();
    let sum: f64 = match mask {
        None => field.values.iter().map(|z| z.norm_sqr()).sum(),
        Some(mask) => {
            if mask.grid != field.grid {
                return Err(Error::GridMismatch("field and mask"));
            }
            field
                .values
                .iter()
                .zip(&mask.values)
                .filter(|(_, &keep)| keep)
                .map(|(z, _)| z.norm_sqr())
                .sum()
        }
    };
    Ok(sum * volume)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn one(grid: &Grid) -> ComplexField {
        ComplexField::from_fn(grid.clone(), 0.0, |_| Complex64::new(1.0, 0.0))
    }

    #[test]
    fn uniform_and_zero_norms() {
        let g = Grid::uniform(&[10], 0.1).unwrap();
        assert!((l2_norm_squared(&one(&g), None).unwrap() - 1.0).abs() < 1e-15);
        let z = ComplexField::zeros(g, 0.0);
        assert_eq!(l2_norm_squared(&z, None).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_norm_matches_closed_form() {
        // |ψ|² = exp(-x²/(2σ²)) / (σ√(2π)) integrates to one over the real line.
        let sigma = 0.3;
        let n = 4001;
        let dx = 12.0 / (n - 1) as f64;
        let g = Grid::new(vec![n], vec![dx], vec![-6.0]).unwrap();
        let amp = (sigma * (2.0 * PI).sqrt()).powf(-0.5);
        let psi = ComplexField::from_fn(g, 0.0, |x| {
            Complex64::new(amp * (-x[0] * x[0] / (4.0 * sigma * sigma)).exp(), 0.0)
        });
        let norm = l2_norm_squared(&psi, None).unwrap();
        assert!((norm - 1.0).abs() < 1e-4, "{norm}");
    }

    #[test]
    fn mask_shape_mismatch() {
        let g = Grid::uniform(&[10], 0.1).unwrap();
        let other = Grid::uniform(&[11], 0.1).unwrap();
        let mask = Mask::new(other.clone(), vec![true; 11]).unwrap();
        assert!(l2_norm_squared(&one(&g), Some(&mask)).is_err());
        assert!(Mask::new(other, vec![true; 3]).is_err());
    }

    proptest! {
        #[test]
        fn norm_invariant_under_global_phase(
            values in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6),
            phase in 0.0f64..(2.0 * PI),
        ) {
            let g = Grid::uniform(&[2, 3], 0.5).unwrap();
            let f = ComplexField::new(
                g,
                values.iter().map(|&(a, b)| Complex64::new(a, b)).collect(),
                0.0,
            ).unwrap();
            let n0 = l2_norm_squared(&f, None).unwrap();
            let n1 = l2_norm_squared(&f.scale(Complex64::from_polar(1.0, phase)), None).unwrap();
            prop_assert!((n0 - n1).abs() <= 1e-14 * n0.max(1e-300));
        }

        #[test]
        fn mask_and_complement_partition_norm(
            values in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 12),
            keep in prop::collection::vec(any::<bool>(), 12),
        ) {
            let g = Grid::uniform(&[3, 4], 0.2).unwrap();
            let f = ComplexField::new(
                g.clone(),
                values.iter().map(|&(a, b)| Complex64::new(a, b)).collect(),
                0.0,
            ).unwrap();
            let mask = Mask::new(g, keep).unwrap();
            let total = l2_norm_squared(&f, None).unwrap();
            let split = l2_norm_squared(&f, Some(&mask)).unwrap()
                + l2_norm_squared(&f, Some(&mask.complement())).unwrap();
            prop_assert!((total - split).abs() <= 1e-12 * total.max(1e-300));
        }
    }
}
