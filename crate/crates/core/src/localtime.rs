//! Local time `θ = t − t_P` and the three-way region classification.

use std::io::Write;

use crate::eikonal::TraveltimeField;
use crate::error::{invalid, Result};
use crate::field::{Mask, ScalarField};
use crate::grid::Grid;
use crate::io::{fmt_f64, index_header, write_index};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionClass {
    /// `θ < 0`: the front has not arrived yet.
    NonPerturbed,
    /// `|θ|` within the front tolerance.
    Front,
    /// `θ > 0`: inside the perturbed subregion.
    Perturbed,
}

impl RegionClass {
    pub fn classify(theta: f64, front_tol: f64) -> Self {
        if theta.abs() <= front_tol {
            RegionClass::Front
        } else if theta < 0.0 {
            RegionClass::NonPerturbed
        } else {
            RegionClass::Perturbed
        }
    }

    pub fn code(self) -> char {
        match self {
            RegionClass::NonPerturbed => 'N',
            RegionClass::Front => 'F',
            RegionClass::Perturbed => 'P',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeField {
    theta: ScalarField,
    global_time: f64,
    front_tol: f64,
    classes: Vec<RegionClass>,
}

impl LocalTimeField {
    fn from_theta(theta: ScalarField, global_time: f64, front_tol: f64) -> Self {
        let classes = theta
            .values()
            .iter()
            .map(|&th| RegionClass::classify(th, front_tol))
            .collect();
        Self {
            theta,
            global_time,
            front_tol,
            classes,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.theta.grid()
    }

    pub fn theta(&self) -> &ScalarField {
        &self.theta
    }

    pub fn global_time(&self) -> f64 {
        self.global_time
    }

    pub fn front_tolerance(&self) -> f64 {
        self.front_tol
    }

    pub fn classes(&self) -> &[RegionClass] {
        &self.classes
    }

    pub fn mask_of(&self, class: RegionClass) -> Mask {
        let values = self.classes.iter().map(|&c| c == class).collect();
        Mask::new(self.grid().clone(), values).expect("same grid")
    }

    /// Cells with `θ > 0`, independent of the front tolerance.
    pub fn positive_theta_mask(&self) -> Mask {
        let values = self.theta.values().iter().map(|&th| th > 0.0).collect();
        Mask::new(self.grid().clone(), values).expect("same grid")
    }

    /// CSV with columns `index_axis.., theta, class`, class one of `N`, `F`, `P`.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        let grid = self.grid();
        writeln!(w, "{},theta,class", index_header(grid.dims()))?;
        for (flat, (th, class)) in self.theta.values().iter().zip(&self.classes).enumerate() {
            write_index(w, &grid.unflatten(flat))?;
            writeln!(w, ",{},{}", fmt_f64(*th), class.code())?;
        }
        Ok(())
    }
}

fn check_tol(front_tol: f64) -> Result<()> {
    if front_tol.is_nan() || front_tol < 0.0 {
        return Err(invalid("front_tol", format!("{front_tol} must be >= 0")));
    }
    Ok(())
}

pub fn local_time(tt: &TraveltimeField, t: f64, front_tol: f64) -> Result<LocalTimeField> {
    check_tol(front_tol)?;
    let theta = tt.field().map(|tp| t - tp);
    Ok(LocalTimeField::from_theta(theta, t, front_tol))
}

/// Local time when perturbations travel infinitely fast: `θ ≡ t`.
pub fn infinite_speed_limit(grid: &Grid, t: f64) -> Result<LocalTimeField> {
    if t.is_nan() || t < 0.0 {
        return Err(invalid("t", format!("{t} must be >= 0")));
    }
    let theta = ScalarField::filled(grid.clone(), t);
    Ok(LocalTimeField::from_theta(theta, t, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eikonal::Speed;
    use proptest::prelude::*;

    fn single(tp: f64) -> TraveltimeField {
        let g = Grid::uniform(&[2], 1.0).unwrap();
        TraveltimeField::from_field(ScalarField::filled(g, tp), Speed::Uniform(1.0)).unwrap()
    }

    #[test]
    fn three_cases() {
        let tt = single(3.0);
        let lt = local_time(&tt, 5.0, 0.0).unwrap();
        assert_eq!(lt.theta().values()[0], 2.0);
        assert_eq!(lt.classes()[0], RegionClass::Perturbed);
        let lt = local_time(&tt, 3.0, 0.0).unwrap();
        assert_eq!(lt.theta().values()[0], 0.0);
        assert_eq!(lt.classes()[0], RegionClass::Front);
        let lt = local_time(&tt, 1.0, 0.0).unwrap();
        assert_eq!(lt.theta().values()[0], -2.0);
        assert_eq!(lt.classes()[0], RegionClass::NonPerturbed);
        assert!(local_time(&tt, 1.0, -1.0).is_err());
    }

    #[test]
    fn infinite_speed() {
        let g = Grid::uniform(&[3, 3], 1.0).unwrap();
        let lt = infinite_speed_limit(&g, 0.0).unwrap();
        assert!(lt.classes().iter().all(|&c| c == RegionClass::Front));
        let lt = infinite_speed_limit(&g, 7.0).unwrap();
        assert!(lt.theta().values().iter().all(|&th| th == 7.0));
        assert!(lt.classes().iter().all(|&c| c == RegionClass::Perturbed));
        assert!(infinite_speed_limit(&g, -1.0).is_err());
    }

    #[test]
    fn infinite_speed_matches_zero_traveltime() {
        let g = Grid::uniform(&[4, 5], 0.3).unwrap();
        let zero = TraveltimeField::zero(g.clone());
        for t in [0.0, 0.5, 7.0] {
            let a = infinite_speed_limit(&g, t).unwrap();
            let b = local_time(&zero, t, 0.0).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn csv_codes() {
        let tt = single(3.0);
        let mut out = Vec::new();
        local_time(&tt, 5.0, 0.0)
            .unwrap()
            .write_csv(&mut out)
            .unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next(), Some("index_axis0,theta,class"));
        assert!(text.lines().nth(1).unwrap().ends_with(",P"));
    }

    proptest! {
        #[test]
        fn theta_shift_and_monotone_classes(
            tp in 0.0f64..10.0,
            t in -5.0f64..15.0,
            dt in 0.0f64..5.0,
            tol in 0.0f64..0.5,
        ) {
            let tt = single(tp);
            let a = local_time(&tt, t, tol).unwrap();
            let b = local_time(&tt, t + dt, tol).unwrap();
            let shift = b.theta().values()[0] - a.theta().values()[0];
            prop_assert!((shift - dt).abs() <= 1e-12 * (1.0 + t.abs() + dt));
            prop_assert!(a.classes()[0] <= b.classes()[0]);
        }
    }
}
