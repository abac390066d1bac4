//! CODATA 2018 values. The SI redefinition made `h`, `e` and `c` exact.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Planck constant, J·s.
    pub h: f64,
    /// Reduced Planck constant `h / 2π`, J·s.
    pub hbar: f64,
    /// Electron mass, kg.
    pub m_e: f64,
    /// Elementary charge, C.
    pub e_charge: f64,
    /// Speed of light in vacuum, m/s.
    pub c_light: f64,
}

impl PhysicalConstants {
    pub const fn codata2018() -> Self {
        Self {
            h: PLANCK,
            hbar: PLANCK / (2.0 * PI),
            m_e: ELECTRON_MASS,
            e_charge: ELEMENTARY_CHARGE,
            c_light: SPEED_OF_LIGHT,
        }
    }

    /// Electron speed after acceleration through `voltage` volts, `sqrt(2 e V / m)`.
    pub fn electron_speed(&self, voltage: f64) -> f64 {
        (2.0 * self.e_charge * voltage / self.m_e).sqrt()
    }

    /// Inverse of [`electron_speed`](Self::electron_speed).
    pub fn accelerating_voltage(&self, speed: f64) -> f64 {
        self.m_e * speed * speed / (2.0 * self.e_charge)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata2018()
    }
}
