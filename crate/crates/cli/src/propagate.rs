use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use modschrod_core::io::{read_complex_field, write_complex_field, write_scalar_field};
use modschrod_core::schrodinger::{
    difference_estimate, propagate_classical_windowed, required_window, RunManifest,
};
use modschrod_core::{
    evaluate_modified, l2_norm_squared, Complex64, ComplexField, Grid, PhysicalConstants,
    QuantumProblem, ScalarField, StationaryState, TraveltimeField,
};
use serde_json::json;

use crate::error::{input_error, usage, CliResult};
use crate::grid_args::{read_scalar, require_positive, GridArgs};
use crate::output::{open_input, Staged};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Plain Crank–Nicolson snapshots.
    Classical,
    /// Classical history read at local time θ = t − t_P, zero before the front.
    Modified,
    /// |ΔΨ| actual and first-order predicted fields.
    #[value(name = "compare-a8")]
    DifferenceEstimate,
}

#[derive(Args, Debug)]
pub struct PropagateArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Particle mass in kg [default: electron mass].
    #[arg(long)]
    pub mass: Option<f64>,
    /// Time step in seconds.
    #[arg(long)]
    pub dt: f64,
    /// Number of Crank–Nicolson steps.
    #[arg(long)]
    pub steps: usize,
    /// Potential energy field CSV in joules [default: zero].
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Initial wave function as a complex field CSV (1/m^(d/2)).
    #[arg(long, group = "init")]
    pub initial: Option<PathBuf>,
    /// Start from the box eigenmode with these quantum numbers, one per axis.
    #[arg(long, value_delimiter = ',', group = "init")]
    pub eigenmode: Option<Vec<usize>>,
    /// Start from a Gaussian packet with this position spread, meters.
    #[arg(long, group = "init", requires = "gaussian_center")]
    pub gaussian_sigma: Option<f64>,
    /// Packet center in meters, one value per axis.
    #[arg(long, value_delimiter = ',')]
    pub gaussian_center: Option<Vec<f64>>,
    /// Packet mean wave number in cycles/m, one value per axis [default: 0].
    #[arg(long, value_delimiter = ',')]
    pub gaussian_k: Option<Vec<f64>>,
    /// Traveltime field CSV in seconds (modified and compare-a8 modes).
    #[arg(long)]
    pub traveltime: Option<PathBuf>,
    /// Output times in seconds, comma separated [default: final time].
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Snapshots of history to keep [default: just enough for the requested times].
    #[arg(long)]
    pub window: Option<usize>,
    /// Directory receiving snapshot CSVs and manifest.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &PropagateArgs) -> CliResult {
    let consts = PhysicalConstants::codata2018();
    let grid = args.grid.build()?;
    let mass = require_positive("--mass", args.mass.unwrap_or(consts.m_e))?;
    let dt = require_positive("--dt", args.dt)?;
    let potential = match &args.potential {
        Some(p) => read_scalar("--potential", p, &grid)?,
        None => ScalarField::filled(grid.clone(), 0.0),
    };
    let problem = QuantumProblem::new(potential, mass, dt, &consts)
        .map_err(|e| input_error("--potential", e))?;
    let initial = initial_state(args, &grid, mass, &consts)?;

    let traveltime = match (&args.traveltime, args.mode) {
        (Some(p), _) => Some(
            TraveltimeField::from_times(read_scalar("--traveltime", p, &grid)?)
                .map_err(|e| input_error("--traveltime", e))?,
        ),
        (None, Mode::Classical) => None,
        (None, _) => {
            return Err(usage(
                "--traveltime",
                "required for the modified and compare-a8 modes",
            ))
        }
    };
    let max_tp = traveltime.as_ref().map_or(0.0, |t| t.max());

    let t_end = args.steps as f64 * dt;
    // the centered time derivative needs one step beyond t
    let default_time = if args.mode == Mode::DifferenceEstimate {
        t_end - dt
    } else {
        t_end
    };
    let times = args.times.clone().unwrap_or_else(|| vec![default_time]);
    if times.is_empty() {
        return Err(usage("--times", "needs at least one time"));
    }
    for &t in &times {
        if !(t.is_finite() && t >= 0.0) {
            return Err(usage("--times", format!("{t} must be finite and >= 0")));
        }
    }
    if args.window == Some(0) {
        return Err(usage("--window", "must be at least 1"));
    }
    let earliest = times.iter().copied().fold(f64::INFINITY, f64::min);
    let window = args.window.unwrap_or_else(|| {
        let lookback = (t_end - earliest).max(0.0) + max_tp;
        required_window(lookback, dt).min(args.steps + 1)
    });

    let solution = propagate_classical_windowed(&initial, &problem, args.steps, window)?;

    let mut staged = Staged::default();
    let mut entries = Vec::new();
    let mut residuals = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let mut files = Vec::new();
        match args.mode {
            Mode::Classical => {
                let psi = solution.sample(t)?;
                let name = format!("psi_classical_{i:04}.csv");
                staged.add(args.out_dir.join(&name), |w| write_complex_field(w, &psi))?;
                files.push(name);
            }
            Mode::Modified => {
                let tt = traveltime.as_ref().expect("checked above");
                let psi = evaluate_modified(&solution, tt, t)?;
                let name = format!("psi_modified_{i:04}.csv");
                staged.add(args.out_dir.join(&name), |w| write_complex_field(w, &psi))?;
                files.push(name);
            }
            Mode::DifferenceEstimate => {
                let tt = traveltime.as_ref().expect("checked above");
                let est = difference_estimate(&solution, tt, t)?;
                let residual = est.residual();
                for (stem, field) in [
                    ("delta_actual_abs", est.actual_modulus()),
                    ("delta_predicted_abs", est.predicted_modulus()),
                ] {
                    let name = format!("{stem}_{i:04}.csv");
                    staged.add(args.out_dir.join(&name), |w| write_scalar_field(w, &field))?;
                    files.push(name);
                }
                residuals.push(residual.max());
            }
        }
        entries.push(json!({ "time": t, "files": files }));
    }

    let mut manifest = serde_json::to_value(RunManifest::from_solution(&solution)?)
        .map_err(anyhow::Error::from)?;
    let extra = manifest.as_object_mut().expect("manifest is an object");
    extra.insert(
        "mode".into(),
        json!(args
            .mode
            .to_possible_value()
            .map(|v| v.get_name().to_string())),
    );
    extra.insert("window".into(), json!(window));
    extra.insert("snapshots".into(), json!(entries));
    if args.mode == Mode::DifferenceEstimate {
        extra.insert("max_abs_residual".into(), json!(residuals));
    }
    staged.add(args.out_dir.join("manifest.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        w.push(b'\n');
        Ok(())
    })?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| anyhow::anyhow!("cannot create {}: {e}", args.out_dir.display()))?;
    staged.commit()?;
    println!(
        "{} steps, relative norm drift {:.3e}, {} output time(s) in {}",
        args.steps,
        solution.max_relative_norm_drift(),
        times.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn initial_state(
    args: &PropagateArgs,
    grid: &Grid,
    mass: f64,
    consts: &PhysicalConstants,
) -> CliResult<ComplexField> {
    if let Some(path) = &args.initial {
        let r = open_input("--initial", path)?;
        return read_complex_field(r, grid.clone(), 0.0).map_err(|e| input_error("--initial", e));
    }
    if let Some(modes) = &args.eigenmode {
        return StationaryState::box_mode(grid, modes, mass, consts)
            .map(|s| s.psi().clone())
            .map_err(|e| input_error("--eigenmode", e));
    }
    if let Some(sigma) = args.gaussian_sigma {
        let sigma = require_positive("--gaussian-sigma", sigma)?;
        let dims = grid.dims();
        let center = args.gaussian_center.clone().unwrap_or_default();
        if center.len() != dims {
            return Err(usage(
                "--gaussian-center",
                format!("expected {dims} values"),
            ));
        }
        let k = args.gaussian_k.clone().unwrap_or_else(|| vec![0.0; dims]);
        if k.len() != dims {
            return Err(usage("--gaussian-k", format!("expected {dims} values")));
        }
        // boundary cells are held at zero by the propagator
        let values = (0..grid.len())
            .map(|flat| {
                if grid.is_boundary(flat) {
                    return Complex64::new(0.0, 0.0);
                }
                let x = grid.position(flat);
                let (mut r2, mut phase) = (0.0, 0.0);
                for a in 0..dims {
                    r2 += (x[a] - center[a]).powi(2);
                    phase += 2.0 * PI * k[a] * x[a];
                }
                Complex64::from_polar((-r2 / (4.0 * sigma * sigma)).exp(), phase)
            })
            .collect();
        let psi = ComplexField::new(grid.clone(), values, 0.0)?;
        let norm = l2_norm_squared(&psi, None)?.sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(usage(
                "--gaussian-center",
                "packet has no weight on the grid",
            ));
        }
        return Ok(psi.scale(Complex64::new(1.0 / norm, 0.0)));
    }
    Err(usage(
        "--initial",
        "give one of --initial, --eigenmode or --gaussian-sigma",
    ))
}
