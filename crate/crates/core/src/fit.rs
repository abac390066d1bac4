//! Least-squares estimate of the perturbation speed from electron-diffraction
//! wavelengths.
//!
//! The modified wave number `k_l = (m v/h)(1 + v/(2 v_P))` is linear in
//! `β = 1/v_P`: `k_l = k + a β` with `a = m v²/(2h)`. Minimizing
//! `Σ (k_exp − k − a β)²` over `β ≥ 0` therefore has the closed form
//! `β* = max(0, Σ a r / Σ a²)` with `r = k_exp − k`.

use std::io::BufRead;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Serialize, Serializer};

use crate::constants::PhysicalConstants;
use crate::dispersion::PerturbationSpeed;
use crate::error::{invalid, Error, Result};

/// Header line of the diffraction-record CSV.
pub const RECORDS_HEADER: &str = "voltage_volts,wavelength_meters";

/// A correction `a β` smaller than this fraction of the largest `k` is
/// indistinguishable from rounding and is reported as the classical limit.
const CLASSICAL_RESOLUTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionRecord {
    /// Accelerating voltage, V.
    pub voltage: f64,
    /// Measured wavelength, m.
    pub wavelength: f64,
}

impl DiffractionRecord {
    pub fn new(voltage: f64, wavelength: f64) -> Result<Self> {
        if !(voltage > 0.0 && voltage.is_finite()) {
            return Err(invalid(
                "voltage",
                format!("{voltage} must be positive and finite"),
            ));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(invalid(
                "wavelength",
                format!("{wavelength} must be positive and finite"),
            ));
        }
        Ok(Self {
            voltage,
            wavelength,
        })
    }
}

/// Electron speed `sqrt(2eV/m)` and measured wave number `1/λ_exp`.
pub fn derive_kinematics(r: &DiffractionRecord, consts: &PhysicalConstants) -> (f64, f64) {
    (consts.electron_speed(r.voltage), 1.0 / r.wavelength)
}

fn serialize_speed<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// m/s; infinite (serialized as `null`) when the fit lands on the classical limit.
    #[serde(rename = "v_p_fitted_m_per_s", serialize_with = "serialize_speed")]
    pub v_p_fitted: f64,
    /// Mean squared residual of the modified model, 1/m².
    #[serde(rename = "variance_modified_inv_m2")]
    pub variance_modified: f64,
    /// Mean squared residual of `k = m v/h`, 1/m².
    #[serde(rename = "variance_classical_inv_m2")]
    pub variance_classical: f64,
    pub n_records: usize,
    pub clamped_to_classical: bool,
    /// `k_exp − k_l` per record, 1/m.
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub inverse_speed: f64,
}

impl FitResult {
    pub fn speed(&self) -> PerturbationSpeed {
        PerturbationSpeed::from_inverse(self.inverse_speed).expect("fit keeps beta >= 0")
    }

    pub fn variance_ratio(&self) -> f64 {
        self.variance_classical / self.variance_modified
    }
}

struct Design {
    /// `m v/h`.
    k: Vec<f64>,
    /// `m v²/(2h)`.
    a: Vec<f64>,
    k_exp: Vec<f64>,
}

impl Design {
    fn new(records: &[DiffractionRecord], consts: &PhysicalConstants) -> Self {
        let mut design = Design {
            k: Vec::with_capacity(records.len()),
            a: Vec::with_capacity(records.len()),
            k_exp: Vec::with_capacity(records.len()),
        };
        for r in records {
            let (v, k_exp) = derive_kinematics(r, consts);
            let k = consts.m_e * v / consts.h;
            design.k.push(k);
            design.a.push(k * v / 2.0);
            design.k_exp.push(k_exp);
        }
        design
    }

    fn residuals(&self, beta: f64) -> Vec<f64> {
        self.k_exp
            .iter()
            .zip(&self.k)
            .zip(&self.a)
            .map(|((ke, k), a)| ke - (k + a * beta))
            .collect()
    }
}

fn mean_square(values: &[f64]) -> f64 {
    values.iter().map(|r| r * r).sum::<f64>() / values.len() as f64
}

/// Sum of squared residuals of the modified model at `β = 1/v_P`.
pub fn sum_squared_residuals(
    records: &[DiffractionRecord],
    beta: f64,
    consts: &PhysicalConstants,
) -> f64 {
    Design::new(records, consts)
        .residuals(beta)
        .iter()
        .map(|r| r * r)
        .sum()
}

/// Residual statistics of the modified model at a given speed.
pub fn evaluate_fit(
    records: &[DiffractionRecord],
    v_p: PerturbationSpeed,
    consts: &PhysicalConstants,
) -> FitResult {
    let design = Design::new(records, consts);
    let residuals = design.residuals(v_p.inverse());
    FitResult {
        v_p_fitted: v_p.speed(),
        variance_modified: mean_square(&residuals),
        variance_classical: mean_square(&design.residuals(0.0)),
        n_records: records.len(),
        clamped_to_classical: v_p.is_infinite(),
        residuals,
        inverse_speed: v_p.inverse(),
    }
}

pub fn fit_vp(records: &[DiffractionRecord], consts: &PhysicalConstants) -> Result<FitResult> {
    if records.len() < 2 {
        return Err(Error::TooFewRecords {
            needed: 2,
            got: records.len(),
        });
    }
    let design = Design::new(records, consts);
    let saa: f64 = design.a.iter().map(|a| a * a).sum();
    let sar: f64 = design
        .a
        .iter()
        .zip(design.residuals(0.0))
        .map(|(a, r)| a * r)
        .sum();
    let raw = sar / saa;
    let a_max = design.a.iter().copied().fold(0.0, f64::max);
    let k_max = design.k_exp.iter().copied().fold(0.0, f64::max);
    let beta = if raw * a_max <= CLASSICAL_RESOLUTION * k_max {
        0.0
    } else {
        raw
    };
    Ok(evaluate_fit(
        records,
        PerturbationSpeed::from_inverse(beta)?,
        consts,
    ))
}

/// One row of the figure-style comparison table, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub speed: f64,
    pub k_classical: f64,
    pub k_modified: f64,
}

/// Classical line `k = m v/h` and the modified curve at `v_P` over `speeds`.
pub fn model_curves(
    speeds: &[f64],
    v_p: PerturbationSpeed,
    consts: &PhysicalConstants,
) -> Result<Vec<CurvePoint>> {
    if speeds.is_empty() {
        return Err(invalid("v_range", "must not be empty"));
    }
    speeds
        .iter()
        .map(|&v| {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(
                    "v_range",
                    format!("speed {v} must be finite and >= 0"),
                ));
            }
            let k = consts.m_e * v / consts.h;
            Ok(CurvePoint {
                speed: v,
                k_classical: k,
                k_modified: k + k * v / 2.0 * v_p.inverse(),
            })
        })
        .collect()
}

/// Parses `voltage_volts,wavelength_meters` CSV. Blank lines and lines
/// starting with `#` are skipped; errors carry 1-based line numbers.
pub fn read_records(r: impl BufRead) -> Result<Vec<DiffractionRecord>> {
    let mut records = Vec::new();
    let mut header_seen = false;
    for (n, line) in r.lines().enumerate() {
        let lineno = n + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        if !header_seen {
            if text != RECORDS_HEADER {
                return Err(parse_err(format!(
                    "expected header `{RECORDS_HEADER}`, found `{text}`"
                )));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = text.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(parse_err(format!(
                "expected 2 columns, found {}",
                cols.len()
            )));
        }
        let voltage: f64 = cols[0]
            .parse()
            .map_err(|e| parse_err(format!("bad voltage `{}`: {e}", cols[0])))?;
        let wavelength: f64 = cols[1]
            .parse()
            .map_err(|e| parse_err(format!("bad wavelength `{}`: {e}", cols[1])))?;
        let record =
            DiffractionRecord::new(voltage, wavelength).map_err(|e| parse_err(e.to_string()))?;
        records.push(record);
    }
    if !header_seen {
        return Err(Error::Parse {
            line: 1,
            message: format!("missing header `{RECORDS_HEADER}`"),
        });
    }
    Ok(records)
}

pub fn write_records(
    w: &mut impl std::io::Write,
    records: &[DiffractionRecord],
) -> std::io::Result<()> {
    writeln!(w, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{}",
            crate::io::fmt_f64(r.voltage),
            crate::io::fmt_f64(r.wavelength)
        )?;
    }
    Ok(())
}

/// Recipe for a synthetic dataset drawn from the modified model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub v_p: PerturbationSpeed,
    pub n: usize,
    pub seed: u64,
    /// Standard deviation of the Gaussian noise added to each model wave
    /// number, as a fraction of that wave number.
    pub relative_noise: f64,
    pub min_voltage: f64,
    pub max_voltage: f64,
}

impl SyntheticSpec {
    pub const DEFAULT_MIN_VOLTAGE: f64 = 30.0;
    pub const DEFAULT_MAX_VOLTAGE: f64 = 600.0;

    pub fn new(v_p: PerturbationSpeed, n: usize, seed: u64, relative_noise: f64) -> Self {
        Self {
            v_p,
            n,
            seed,
            relative_noise,
            min_voltage: Self::DEFAULT_MIN_VOLTAGE,
            max_voltage: Self::DEFAULT_MAX_VOLTAGE,
        }
    }

    /// Parses `vP=1.3e8 n=20 seed=7 noise=0.01` (whitespace or comma
    /// separated; `vP=inf` gives classical data; optional `vmin=`/`vmax=` in volts).
    pub fn parse(text: &str) -> Result<Self> {
        let (mut v_p, mut n, mut seed, mut noise) = (None, None, 0u64, 0.0);
        let (mut vmin, mut vmax) = (Self::DEFAULT_MIN_VOLTAGE, Self::DEFAULT_MAX_VOLTAGE);
        let bad = |key: &str, value: &str| {
            invalid("generate", format!("bad value `{value}` for `{key}`"))
        };
        for item in text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
        {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                invalid("generate", format!("expected key=value, found `{item}`"))
            })?;
            match key {
                "vP" | "vp" | "v_p" => {
                    let v: f64 = value.parse().map_err(|_| bad(key, value))?;
                    v_p = Some(if v.is_infinite() && v > 0.0 {
                        PerturbationSpeed::infinite()
                    } else {
                        PerturbationSpeed::finite(v)?
                    });
                }
                "n" => n = Some(value.parse().map_err(|_| bad(key, value))?),
                "seed" => seed = value.parse().map_err(|_| bad(key, value))?,
                "noise" => noise = value.parse().map_err(|_| bad(key, value))?,
                "vmin" => vmin = value.parse().map_err(|_| bad(key, value))?,
                "vmax" => vmax = value.parse().map_err(|_| bad(key, value))?,
                _ => return Err(invalid("generate", format!("unknown key `{key}`"))),
            }
        }
        let spec = Self {
            v_p: v_p.ok_or_else(|| invalid("generate", "missing `vP=`"))?,
            n: n.ok_or_else(|| invalid("generate", "missing `n=`"))?,
            seed,
            relative_noise: noise,
            min_voltage: vmin,
            max_voltage: vmax,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("generate", "n must be at least 2"));
        }
        if !(self.relative_noise >= 0.0 && self.relative_noise < 1.0) {
            return Err(invalid("generate", "noise must lie in [0, 1)"));
        }
        if !(self.min_voltage > 0.0
            && self.max_voltage > self.min_voltage
            && self.max_voltage.is_finite())
        {
            return Err(invalid("generate", "need 0 < vmin < vmax"));
        }
        Ok(())
    }
}

/// Voltages evenly spaced over `[min_voltage, max_voltage]`, wavelengths from
/// the modified model with seeded Gaussian noise in k.
pub fn synthesize_records(
    spec: &SyntheticSpec,
    consts: &PhysicalConstants,
) -> Result<Vec<DiffractionRecord>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let step = (spec.max_voltage - spec.min_voltage) / (spec.n - 1) as f64;
    (0..spec.n)
        .map(|i| {
            let voltage = spec.min_voltage + i as f64 * step;
            let v = consts.electron_speed(voltage);
            let k = consts.m_e * v / consts.h;
            let k_model = k + k * v / 2.0 * spec.v_p.inverse();
            let k_noisy = k_model * (1.0 + spec.relative_noise * normal.sample(&mut rng));
            DiffractionRecord::new(voltage, 1.0 / k_noisy)
        })
        .collect()
}
