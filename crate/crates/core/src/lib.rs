//! Finite-speed perturbation toolkit for the Schrödinger equation.
//!
//! * [`eikonal`]: first-arrival traveltime `t_P` of the perturbation front.
//! * [`localtime`]: local time `θ = t − t_P` and region classification.
//! * [`schrodinger`]: Crank–Nicolson propagation and its retarded evaluation.
//! * [`dispersion`]: modified de Broglie wave numbers and velocities.
//! * [`fit`]: least-squares estimate of `v_P` from diffraction data.

pub mod constants;
pub mod dispersion;
pub mod eikonal;
pub mod error;
pub mod field;
pub mod fit;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod localtime;
pub mod schrodinger;

pub use constants::PhysicalConstants;
pub use dispersion::{FreeParticle, PerturbationSpeed, WavePhaseDecomposition, WavelengthRegime};
pub use eikonal::{front_mask, solve_traveltime, SourceSpec, Speed, TraveltimeField};
pub use error::{Error, Result};
pub use field::{l2_norm_squared, ComplexField, Mask, ScalarField};
pub use fit::{fit_vp, DiffractionRecord, FitResult};
pub use grid::Grid;
pub use localtime::{infinite_speed_limit, local_time, LocalTimeField, RegionClass};
pub use num_complex::Complex64;
pub use schrodinger::{
    evaluate_modified, propagate_classical, step_classical, ClassicalSolution, QuantumProblem,
    StationaryState,
};
