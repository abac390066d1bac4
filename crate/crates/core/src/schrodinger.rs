//! Classical and retarded (local-time) Schrödinger propagation.
//!
//! The classical equation `iħ ∂Ψ/∂t = −ħ²/(2m) ∇²Ψ + UΨ` is integrated with
//! Crank–Nicolson on a second-order central Laplacian with zero Dirichlet
//! boundaries: the outermost layer of cells is held at zero. One-dimensional
//! problems use a direct tridiagonal solve, higher dimensions use COCG.
//!
//! The modified solution is not integrated separately. It is the classical
//! solution read at the local time, `Ψ_mod(x, t) = Ψ(x, t − t_P(x))`, and zero
//! where the front has not arrived. [`ClassicalSolution`] keeps the snapshot
//! history that this retarded evaluation needs.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::PhysicalConstants;
use crate::eikonal::TraveltimeField;
use crate::error::{invalid, Error, Result};
use crate::field::{l2_norm_squared, ComplexField, ScalarField};
use crate::grid::Grid;
use crate::linalg::{cocg, IterativeSettings, Tridiagonal};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fraction of a step within which a requested time is treated as landing
/// on a snapshot.
const SNAP_FRACTION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumProblem {
    grid: Grid,
    potential: ScalarField,
    mass: f64,
    dt: f64,
    hbar: f64,
    solver: IterativeSettings,
}

impl QuantumProblem {
    /// `potential` in joules, `mass` in kg, `dt` in seconds.
    pub fn new(
        potential: ScalarField,
        mass: f64,
        dt: f64,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("{dt} must be positive and finite")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid(
                "mass",
                format!("{mass} must be positive and finite"),
            ));
        }
        if potential.values().iter().any(|u| !u.is_finite()) {
            return Err(invalid("potential", "must be finite everywhere"));
        }
        Ok(Self {
            grid: potential.grid().clone(),
            potential,
            mass,
            dt,
            hbar: consts.hbar,
            solver: IterativeSettings::default(),
        })
    }

    /// Free particle, `U ≡ 0`.
    pub fn free(grid: Grid, mass: f64, dt: f64, consts: &PhysicalConstants) -> Result<Self> {
        Self::new(ScalarField::filled(grid, 0.0), mass, dt, consts)
    }

    pub fn with_solver_settings(mut self, tolerance: f64, max_iterations: usize) -> Self {
        self.solver = IterativeSettings {
            tolerance,
            max_iterations,
        };
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    fn interior(&self) -> Vec<usize> {
        (0..self.grid.len())
            .filter(|&i| !self.grid.is_boundary(i))
            .collect()
    }
}

/// `HΨ` with the boundary layer treated as zero; boundary entries of `out`
/// are set to zero.
pub fn apply_hamiltonian(problem: &QuantumProblem, psi: &[Complex64], out: &mut [Complex64]) {
    let interior = problem.interior();
    hamiltonian_on(problem, &interior, &problem.grid.strides(), psi, out);
}

fn hamiltonian_on(
    problem: &QuantumProblem,
    interior: &[usize],
    strides: &[usize],
    psi: &[Complex64],
    out: &mut [Complex64],
) {
    let kinetic = -problem.hbar * problem.hbar / (2.0 * problem.mass);
    let inv_h2: Vec<f64> = problem
        .grid
        .spacing()
        .iter()
        .map(|h| 1.0 / (h * h))
        .collect();
    let u = problem.potential.values();
    out.iter_mut().for_each(|v| *v = ZERO);
    for &i in interior {
        let mut lap = ZERO;
        for (s, w) in strides.iter().zip(&inv_h2) {
            lap += (psi[i + s] - 2.0 * psi[i] + psi[i - s]) * *w;
        }
        out[i] = lap * kinetic + psi[i] * u[i];
    }
}

/// Crank–Nicolson stepper for one problem; holds the factorized 1-D operator.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    problem: QuantumProblem,
    interior: Vec<usize>,
    strides: Vec<usize>,
    /// `i dt / (2ħ)`.
    r: Complex64,
    direct: Option<Tridiagonal>,
}

impl CrankNicolson {
    pub fn new(problem: &QuantumProblem) -> Result<Self> {
        let interior = problem.interior();
        let r = Complex64::new(0.0, problem.dt / (2.0 * problem.hbar));
        let direct = if problem.grid.dims() == 1 && !interior.is_empty() {
            let kinetic = problem.hbar * problem.hbar / (2.0 * problem.mass);
            let h = problem.grid.spacing()[0];
            let off = -r * (kinetic / (h * h));
            let n = interior.len();
            let u = problem.potential.values();
            let diag: Vec<_> = interior
                .iter()
                .map(|&i| 1.0 + r * (2.0 * kinetic / (h * h) + u[i]))
                .collect();
            Some(Tridiagonal::factor(&vec![off; n], &diag, &vec![off; n])?)
        } else {
            None
        };
        Ok(Self {
            strides: problem.grid.strides(),
            problem: problem.clone(),
            interior,
            r,
            direct,
        })
    }

    pub fn problem(&self) -> &QuantumProblem {
        &self.problem
    }

    /// Advances `state` by one step of `dt`.
    pub fn step(&self, state: &ComplexField) -> Result<ComplexField> {
        if state.grid() != &self.problem.grid {
            return Err(Error::GridMismatch("state and problem"));
        }
        let psi = state.values();
        let n = psi.len();
        let mut h_psi = vec![ZERO; n];
        hamiltonian_on(
            &self.problem,
            &self.interior,
            &self.strides,
            psi,
            &mut h_psi,
        );
        // b = (1 − rH) ψ on the interior.
        let mut next = vec![ZERO; n];
        match &self.direct {
            Some(tri) => {
                let mut rhs: Vec<Complex64> = self
                    .interior
                    .iter()
                    .map(|&i| psi[i] - self.r * h_psi[i])
                    .collect();
                tri.solve(&mut rhs);
                for (&i, v) in self.interior.iter().zip(rhs) {
                    next[i] = v;
                }
            }
            None => {
                let mut b = vec![ZERO; n];
                for &i in &self.interior {
                    b[i] = psi[i] - self.r * h_psi[i];
                    next[i] = psi[i];
                }
                let r = self.r;
                let apply = |x: &[Complex64], out: &mut [Complex64]| {
                    hamiltonian_on(&self.problem, &self.interior, &self.strides, x, out);
                    for &i in &self.interior {
                        out[i] = x[i] + r * out[i];
                    }
                };
                cocg(apply, &b, &mut next, self.problem.solver)?;
            }
        }
        ComplexField::new(
            self.problem.grid.clone(),
            next,
            state.time() + self.problem.dt,
        )
    }
}

/// One Crank–Nicolson step of `problem.dt`.
pub fn step_classical(state: &ComplexField, problem: &QuantumProblem) -> Result<ComplexField> {
    CrankNicolson::new(problem)?.step(state)
}

/// Snapshot history of a classical run at `t₀ + n·dt`.
#[derive(Debug, Clone)]
pub struct ClassicalSolution {
    problem: QuantumProblem,
    start_time: f64,
    /// Step number of the oldest retained snapshot.
    first_step: usize,
    snapshots: VecDeque<ComplexField>,
    window: usize,
    initial_norm: f64,
    max_relative_drift: f64,
}

impl ClassicalSolution {
    /// Starts a history at `initial`, keeping at most `window` snapshots.
    pub fn new(initial: ComplexField, problem: QuantumProblem, window: usize) -> Result<Self> {
        if window == 0 {
            return Err(invalid("window", "must retain at least one snapshot"));
        }
        if initial.grid() != problem.grid() {
            return Err(Error::GridMismatch("initial state and problem"));
        }
        let initial_norm = l2_norm_squared(&initial, None)?;
        let start_time = initial.time();
        let mut snapshots = VecDeque::with_capacity(window.min(1 << 16));
        snapshots.push_back(initial);
        Ok(Self {
            problem,
            start_time,
            first_step: 0,
            snapshots,
            window,
            initial_norm,
            max_relative_drift: 0.0,
        })
    }

    /// History built from externally computed snapshots spaced by `problem.dt`,
    /// e.g. an analytic solution.
    pub fn from_snapshots(problem: QuantumProblem, snapshots: Vec<ComplexField>) -> Result<Self> {
        let mut iter = snapshots.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| invalid("snapshots", "need at least one snapshot"))?;
        let start = first.time();
        let dt = problem.dt();
        let mut solution = Self::new(first, problem, usize::MAX)?;
        for (k, snap) in iter.enumerate() {
            let expected = start + (k + 1) as f64 * dt;
            if (snap.time() - expected).abs() > SNAP_FRACTION * dt {
                return Err(invalid(
                    "snapshots",
                    format!(
                        "snapshot {} at {:e} s, expected {:e} s",
                        k + 1,
                        snap.time(),
                        expected
                    ),
                ));
            }
            solution.push(snap.with_time(expected))?;
        }
        Ok(solution)
    }

    fn push(&mut self, snapshot: ComplexField) -> Result<()> {
        if snapshot.grid() != self.problem.grid() {
            return Err(Error::GridMismatch("snapshot and problem"));
        }
        let norm = l2_norm_squared(&snapshot, None)?;
        if self.initial_norm > 0.0 {
            let drift = (norm - self.initial_norm).abs() / self.initial_norm;
            self.max_relative_drift = self.max_relative_drift.max(drift);
        }
        if self.snapshots.len() == self.window {
            self.snapshots.pop_front();
            self.first_step += 1;
        }
        self.snapshots.push_back(snapshot);
        Ok(())
    }

    pub fn problem(&self) -> &QuantumProblem {
        &self.problem
    }

    pub fn grid(&self) -> &Grid {
        self.problem.grid()
    }

    pub fn dt(&self) -> f64 {
        self.problem.dt()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> impl Iterator<Item = &ComplexField> {
        self.snapshots.iter()
    }

    /// Snapshot by global step number (0 is the initial state).
    pub fn snapshot_at_step(&self, step: usize) -> Option<&ComplexField> {
        step.checked_sub(self.first_step)
            .and_then(|k| self.snapshots.get(k))
    }

    pub fn latest(&self) -> &ComplexField {
        self.snapshots.back().expect("history is never empty")
    }

    pub fn last_step(&self) -> usize {
        self.first_step + self.snapshots.len() - 1
    }

    pub fn time_of_step(&self, step: usize) -> f64 {
        self.start_time + step as f64 * self.dt()
    }

    /// Retained time span `[oldest, newest]`, seconds.
    pub fn time_span(&self) -> (f64, f64) {
        (
            self.time_of_step(self.first_step),
            self.time_of_step(self.last_step()),
        )
    }

    pub fn initial_norm(&self) -> f64 {
        self.initial_norm
    }

    /// Largest `|‖Ψ_n‖² − ‖Ψ_0‖²| / ‖Ψ_0‖²` seen over every snapshot pushed.
    pub fn max_relative_norm_drift(&self) -> f64 {
        self.max_relative_drift
    }

    /// Locates time `t` in the history: the retained index of the snapshot at
    /// or below `t` and the fractional position towards the next one. Times
    /// within a tiny fraction of a step of a snapshot land on it exactly.
    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let (start, end) = self.time_span();
        let s = (t - start) / self.dt();
        let nearest = s.round();
        let last = (self.snapshots.len() - 1) as f64;
        let exhausted = || Error::HistoryExhausted {
            requested: t,
            start,
            end,
        };
        if (s - nearest).abs() <= SNAP_FRACTION {
            if nearest < 0.0 || nearest > last {
                return Err(exhausted());
            }
            return Ok((nearest as usize, 0.0));
        }
        if !(s > 0.0 && s < last) {
            return Err(exhausted());
        }
        let lower = s.floor();
        Ok((lower as usize, s - lower))
    }

    /// Classical `Ψ(x_cell, t)` by linear interpolation between snapshots.
    fn sample_cell(&self, cell: usize, t: f64) -> Result<Complex64> {
        let (k, frac) = self.locate(t)?;
        let a = self.snapshots[k].values()[cell];
        if frac == 0.0 {
            return Ok(a);
        }
        let b = self.snapshots[k + 1].values()[cell];
        Ok(a * (1.0 - frac) + b * frac)
    }

    /// Classical field at time `t`.
    pub fn sample(&self, t: f64) -> Result<ComplexField> {
        let (k, frac) = self.locate(t)?;
        if frac == 0.0 {
            return Ok(self.snapshots[k].clone().with_time(t));
        }
        let a = self.snapshots[k].values();
        let b = self.snapshots[k + 1].values();
        let values = a
            .iter()
            .zip(b)
            .map(|(x, y)| x * (1.0 - frac) + y * frac)
            .collect();
        ComplexField::new(self.grid().clone(), values, t)
    }
}

/// Number of snapshots a history must retain to evaluate the retarded field
/// for traveltimes up to `max_traveltime`.
pub fn required_window(max_traveltime: f64, dt: f64) -> usize {
    (max_traveltime / dt).ceil() as usize + 2
}

/// Runs `n_steps` Crank–Nicolson steps keeping every snapshot.
pub fn propagate_classical(
    initial: &ComplexField,
    problem: &QuantumProblem,
    n_steps: usize,
) -> Result<ClassicalSolution> {
    propagate_classical_windowed(initial, problem, n_steps, n_steps + 1)
}

/// Runs `n_steps` steps keeping only the most recent `window` snapshots.
pub fn propagate_classical_windowed(
    initial: &ComplexField,
    problem: &QuantumProblem,
    n_steps: usize,
    window: usize,
) -> Result<ClassicalSolution> {
    let stepper = CrankNicolson::new(problem)?;
    let mut solution = ClassicalSolution::new(initial.clone(), problem.clone(), window)?;
    for step in 1..=n_steps {
        let next = stepper.step(solution.latest())?;
        let time = solution.time_of_step(step);
        solution.push(next.with_time(time))?;
    }
    Ok(solution)
}

fn check_traveltime_grid(solution: &ClassicalSolution, tt: &TraveltimeField) -> Result<()> {
    if tt.grid() != solution.grid() {
        return Err(Error::GridMismatch("traveltime and classical solution"));
    }
    Ok(())
}

/// Modified wave function at global time `t`: `Ψ(x, t − t_P(x))` where the
/// front has arrived and exactly zero where `t − t_P < 0`.
pub fn evaluate_modified(
    classical: &ClassicalSolution,
    tt: &TraveltimeField,
    t: f64,
) -> Result<ComplexField> {
    check_traveltime_grid(classical, tt)?;
    let values = tt
        .values()
        .iter()
        .enumerate()
        .map(|(cell, &tp)| {
            let theta = t - tp;
            if theta < 0.0 {
                Ok(ZERO)
            } else {
                classical.sample_cell(cell, theta)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexField::new(classical.grid().clone(), values, t)
}

/// Classical-minus-modified difference next to its first-order estimate.
#[derive(Debug, Clone)]
pub struct DifferenceEstimate {
    /// `ΔΨ = Ψ(x, t) − Ψ(x, t − t_P)`.
    pub actual: ComplexField,
    /// `∂Ψ/∂t · t_P`, with the time derivative from a centered difference.
    pub predicted: ComplexField,
}

impl DifferenceEstimate {
    pub fn actual_modulus(&self) -> ScalarField {
        self.actual.modulus()
    }

    pub fn predicted_modulus(&self) -> ScalarField {
        self.predicted.modulus()
    }

    /// `|ΔΨ − ∂Ψ/∂t · t_P|` per cell: the remainder of the first-order estimate.
    pub fn residual(&self) -> ScalarField {
        let values = self
            .actual
            .values()
            .iter()
            .zip(self.predicted.values())
            .map(|(a, p)| (a - p).norm())
            .collect();
        ScalarField::new(self.actual.grid().clone(), values).expect("same grid")
    }
}

/// Needs history covering `[t − max t_P, t + dt]`; `t + dt` and `t − dt`
/// feed the centered derivative.
pub fn difference_estimate(
    classical: &ClassicalSolution,
    tt: &TraveltimeField,
    t: f64,
) -> Result<DifferenceEstimate> {
    check_traveltime_grid(classical, tt)?;
    let dt = classical.dt();
    let now = classical.sample(t)?;
    let ahead = classical.sample(t + dt)?;
    let behind = classical.sample(t - dt)?;
    let n = now.values().len();
    let mut actual = Vec::with_capacity(n);
    let mut predicted = Vec::with_capacity(n);
    for cell in 0..n {
        let tp = tt.values()[cell];
        let derivative = (ahead.values()[cell] - behind.values()[cell]) / (2.0 * dt);
        predicted.push(derivative * tp);
        if tp == 0.0 {
            actual.push(ZERO);
        } else {
            actual.push(now.values()[cell] - classical.sample_cell(cell, t - tp)?);
        }
    }
    Ok(DifferenceEstimate {
        actual: ComplexField::new(classical.grid().clone(), actual, t)?,
        predicted: ComplexField::new(classical.grid().clone(), predicted, t)?,
    })
}

/// Solution `ψ` of the time-independent equation with its energy.
#[derive(Debug, Clone)]
pub struct StationaryState {
    psi: ComplexField,
    energy: f64,
    frequency: f64,
}

impl StationaryState {
    /// `energy` in joules; the frequency is `E / h`.
    pub fn new(psi: ComplexField, energy: f64, consts: &PhysicalConstants) -> Self {
        Self {
            psi,
            energy,
            frequency: energy / consts.h,
        }
    }

    /// Normalized particle-in-a-box mode `Π sin(n_a π x_a / L_a)` on a grid
    /// whose first and last cells along each axis are the walls, with the
    /// continuum energy `ħ²π²/(2m) Σ (n_a / L_a)²`.
    pub fn box_mode(
        grid: &Grid,
        modes: &[usize],
        mass: f64,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        if modes.len() != grid.dims() || modes.contains(&0) {
            return Err(invalid("modes", "need one positive mode number per axis"));
        }
        let lengths: Vec<f64> = grid
            .shape()
            .iter()
            .zip(grid.spacing())
            .map(|(&n, h)| (n - 1) as f64 * h)
            .collect();
        let psi = ComplexField::from_fn(grid.clone(), 0.0, |_| ZERO);
        let mut values = psi.into_values();
        for (flat, v) in values.iter_mut().enumerate() {
            if grid.is_boundary(flat) {
                continue;
            }
            let index = grid.unflatten(flat);
            let amp: f64 = index
                .iter()
                .enumerate()
                .map(|(a, &i)| {
                    let x = i as f64 * grid.spacing()[a];
                    (modes[a] as f64 * PI * x / lengths[a]).sin()
                })
                .product();
            *v = Complex64::new(amp, 0.0);
        }
        let psi = ComplexField::new(grid.clone(), values, 0.0)?;
        let norm = l2_norm_squared(&psi, None)?.sqrt();
        let psi = psi.scale(Complex64::new(1.0 / norm, 0.0));
        let energy = consts.hbar * consts.hbar / (2.0 * mass)
            * modes
                .iter()
                .zip(&lengths)
                .map(|(&n, l)| (n as f64 * PI / l).powi(2))
                .sum::<f64>();
        Ok(Self::new(psi, energy, consts))
    }

    pub fn psi(&self) -> &ComplexField {
        &self.psi
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Hertz.
    pub fn frequency(&self) -> f64 {
        self.frequency
    }
}

/// `Ψ = ψ · exp(−2πiν(t − t_P))` where `t ≥ t_P`, zero elsewhere.
pub fn stationary_modified_wavefunction(
    state: &StationaryState,
    tt: &TraveltimeField,
    t: f64,
) -> Result<ComplexField> {
    if tt.grid() != state.psi.grid() {
        return Err(Error::GridMismatch("stationary state and traveltime"));
    }
    let nu = state.frequency;
    let values = state
        .psi
        .values()
        .iter()
        .zip(tt.values())
        .map(|(&psi, &tp)| {
            let theta = t - tp;
            if theta < 0.0 {
                ZERO
            } else {
                psi * Complex64::from_polar(1.0, -2.0 * PI * nu * theta)
            }
        })
        .collect();
    ComplexField::new(state.psi.grid().clone(), values, t)
}

/// Samples `exp[2πi(−ν t + k x_axis)]` with `ν` in hertz and `k` in cycles per meter.
pub fn make_plane_wave(grid: &Grid, nu: f64, k: f64, axis: usize, t: f64) -> Result<ComplexField> {
    if axis >= grid.dims() {
        return Err(invalid(
            "axis",
            format!("{axis} out of range for {}-D grid", grid.dims()),
        ));
    }
    Ok(ComplexField::from_fn(grid.clone(), t, |x| {
        Complex64::from_polar(1.0, 2.0 * PI * (-nu * t + k * x[axis]))
    }))
}

/// Norm telemetry written next to snapshot dumps.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub dt: f64,
    pub n_steps: usize,
    pub grid_shape: Vec<usize>,
    pub grid_spacing: Vec<f64>,
    pub grid_origin: Vec<f64>,
    pub mass: f64,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub max_relative_norm_drift: f64,
}

impl RunManifest {
    pub fn from_solution(solution: &ClassicalSolution) -> Result<Self> {
        let grid = solution.grid();
        Ok(Self {
            dt: solution.dt(),
            n_steps: solution.last_step(),
            grid_shape: grid.shape().to_vec(),
            grid_spacing: grid.spacing().to_vec(),
            grid_origin: grid.origin().to_vec(),
            mass: solution.problem().mass(),
            initial_norm: solution.initial_norm(),
            final_norm: l2_norm_squared(solution.latest(), None)?,
            max_relative_norm_drift: solution.max_relative_norm_drift(),
        })
    }
}
