//! Modified de Broglie relations.
//!
//! Wave numbers and frequencies are cycles-based: `k = 1/λ = p/h`, `ν = E/h`.
//! The perturbation speed enters only through its inverse `β = 1/v_P`, so the
//! classical theory is the same code path with `β = 0`.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{invalid, Result};

/// Tolerance on `cos α` when deciding that `k_l = k`.
pub const REGIME_COS_TOLERANCE: f64 = 1e-12;

/// Perturbation propagation speed `v_P`, stored as its inverse.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PerturbationSpeed {
    inverse: f64,
}

impl PerturbationSpeed {
    /// Finite speed in m/s.
    pub fn finite(v_p: f64) -> Result<Self> {
        if v_p.is_nan() || v_p <= 0.0 {
            return Err(invalid("v_P", format!("{v_p} must be positive")));
        }
        Ok(Self { inverse: 1.0 / v_p })
    }

    /// The classical limit `v_P → ∞`.
    pub const fn infinite() -> Self {
        Self { inverse: 0.0 }
    }

    /// From `β = 1/v_P` in s/m; `β = 0` is the classical limit.
    pub fn from_inverse(beta: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(invalid("1/v_P", format!("{beta} must be finite and >= 0")));
        }
        Ok(Self { inverse: beta })
    }

    pub fn inverse(self) -> f64 {
        self.inverse
    }

    /// m/s; infinite in the classical limit.
    pub fn speed(self) -> f64 {
        if self.inverse == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.inverse
        }
    }

    pub fn is_infinite(self) -> bool {
        self.inverse == 0.0
    }
}

/// Local decomposition of a stationary wave `ψ = |ψ| exp(2πiφ)` retarded by `t_P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePhaseDecomposition {
    /// Hz.
    pub nu: f64,
    /// `|∇φ|`, 1/m.
    pub k_classical: f64,
    /// Angle between `∇φ` and `∇t_P`, radians.
    pub alpha: f64,
    pub v_p: PerturbationSpeed,
}

impl WavePhaseDecomposition {
    pub fn new(nu: f64, k_classical: f64, alpha: f64, v_p: PerturbationSpeed) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(invalid("nu", format!("{nu} must be finite and >= 0")));
        }
        if !(k_classical >= 0.0 && k_classical.is_finite()) {
            return Err(invalid(
                "k",
                format!("{k_classical} must be finite and >= 0"),
            ));
        }
        if !(0.0..=std::f64::consts::PI).contains(&alpha) {
            return Err(invalid("alpha", format!("{alpha} must lie in [0, π]")));
        }
        Ok(Self {
            nu,
            k_classical,
            alpha,
            v_p,
        })
    }

    /// `|∇Φ|` with `Φ = ν t_P + φ`.
    pub fn k_modified(&self) -> f64 {
        modified_wavenumber_general(self)
    }

    /// `cos α` at which `k_l = k`: `−ν / (2 k v_P)`.
    pub fn equal_wavelength_cos(&self) -> f64 {
        -self.nu * self.v_p.inverse() / (2.0 * self.k_classical)
    }
}

/// `k_l² = k² + ν²/v_P² + (2νk/v_P) cos α`.
///
/// Evaluated as `(k + (ν/v_P) cos α)² + (ν/v_P)² sin² α`, which cannot go
/// negative under rounding and returns `k + ν/v_P` exactly at `α = 0`.
pub fn modified_wavenumber_general(d: &WavePhaseDecomposition) -> f64 {
    let shift = d.nu * d.v_p.inverse();
    let (sin, cos) = d.alpha.sin_cos();
    let along = d.k_classical + shift * cos;
    let across = shift * sin;
    (along * along + across * across).sqrt()
}

/// Free particle of mass `m` moving at `v`: `ν = m v²/(2h)`, `k = m v/h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParticle {
    mass: f64,
    speed: f64,
    nu: f64,
    k: f64,
}

impl FreeParticle {
    pub fn new(mass: f64, speed: f64, consts: &PhysicalConstants) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid("mass", format!("{mass} must be positive")));
        }
        if !(speed >= 0.0 && speed.is_finite()) {
            return Err(invalid("v", format!("{speed} must be finite and >= 0")));
        }
        let k = mass * speed / consts.h;
        Ok(Self {
            mass,
            speed,
            nu: k * speed / 2.0,
            k,
        })
    }

    /// An electron accelerated through `voltage` volts.
    pub fn electron_from_voltage(voltage: f64, consts: &PhysicalConstants) -> Result<Self> {
        if !(voltage >= 0.0 && voltage.is_finite()) {
            return Err(invalid("V", format!("{voltage} must be finite and >= 0")));
        }
        Self::new(consts.m_e, consts.electron_speed(voltage), consts)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Classical phase velocity `ν/k = v/2`.
    pub fn phase_velocity(&self) -> f64 {
        self.speed / 2.0
    }

    /// Classical group velocity `dν/dk = v`.
    pub fn group_velocity(&self) -> f64 {
        self.speed
    }

    /// The same particle as a phase decomposition travelling along `∇t_P`.
    pub fn aligned(&self, v_p: PerturbationSpeed) -> WavePhaseDecomposition {
        WavePhaseDecomposition {
            nu: self.nu,
            k_classical: self.k,
            alpha: 0.0,
            v_p,
        }
    }
}

/// `k_l = k + ν/v_P = (m v/h)(1 + v/(2 v_P))`.
pub fn modified_wavenumber_free(p: &FreeParticle, v_p: PerturbationSpeed) -> f64 {
    p.k + p.nu * v_p.inverse()
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_nan() || v <= 0.0 {
        return Err(invalid(name, format!("{v} must be positive")));
    }
    Ok(())
}

/// Harmonic sum `1/v_ph.l = 1/v_ph + 1/v_P`.
pub fn modified_phase_velocity(v_ph: f64, v_p: PerturbationSpeed) -> Result<f64> {
    positive("v_ph", v_ph)?;
    Ok(1.0 / (1.0 / v_ph + v_p.inverse()))
}

/// Harmonic sum `1/v_gr.l = 1/v_gr + 1/v_P`.
pub fn modified_group_velocity(v_gr: f64, v_p: PerturbationSpeed) -> Result<f64> {
    positive("v_gr", v_gr)?;
    Ok(1.0 / (1.0 / v_gr + v_p.inverse()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WavelengthRegime {
    /// `λ_l < λ`.
    Shorter,
    Equal,
    /// `λ_l > λ`.
    Longer,
}

/// Compares `cos α` with `−ν/(2 k v_P)`.
///
/// `k_l² − k² = (ν/v_P)(ν/v_P + 2k cos α)`, so when `ν/v_P = 0` the two
/// wavelengths coincide regardless of `α`.
pub fn wavelength_regime(d: &WavePhaseDecomposition) -> Result<WavelengthRegime> {
    if d.k_classical.is_nan() || d.k_classical <= 0.0 {
        return Err(invalid("k", "classical wave number must be positive"));
    }
    if d.nu * d.v_p.inverse() == 0.0 {
        return Ok(WavelengthRegime::Equal);
    }
    let gap = d.alpha.cos() - d.equal_wavelength_cos();
    Ok(if gap.abs() <= REGIME_COS_TOLERANCE {
        WavelengthRegime::Equal
    } else if gap > 0.0 {
        WavelengthRegime::Shorter
    } else {
        WavelengthRegime::Longer
    })
}

/// One row of the free-electron dispersion table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionRow {
    pub voltage: f64,
    pub speed: f64,
    pub nu: f64,
    pub k: f64,
    pub k_l: f64,
    pub lambda: f64,
    pub lambda_l: f64,
    pub v_ph: f64,
    pub v_ph_l: f64,
    pub v_gr: f64,
    pub v_gr_l: f64,
}

impl DispersionRow {
    pub fn for_electron(
        speed: f64,
        v_p: PerturbationSpeed,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        positive("v", speed)?;
        let p = FreeParticle::new(consts.m_e, speed, consts)?;
        let k_l = modified_wavenumber_free(&p, v_p);
        Ok(Self {
            voltage: consts.accelerating_voltage(speed),
            speed,
            nu: p.nu(),
            k: p.k(),
            k_l,
            lambda: 1.0 / p.k(),
            lambda_l: 1.0 / k_l,
            v_ph: p.phase_velocity(),
            v_ph_l: modified_phase_velocity(p.phase_velocity(), v_p)?,
            v_gr: p.group_velocity(),
            v_gr_l: modified_group_velocity(p.group_velocity(), v_p)?,
        })
    }
}
