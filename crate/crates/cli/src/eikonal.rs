use std::path::PathBuf;

use clap::Args;
use modschrod_core::eikonal::{solve_traveltime_with, SolverOptions, SourceRadius};
use modschrod_core::io::write_scalar_field;
use modschrod_core::{local_time, SourceSpec, Speed, TraveltimeField};

use crate::error::{input_error, usage, CliResult};
use crate::grid_args::{parse_cell, read_scalar, require_positive, CellIndex, GridArgs};
use crate::output::write_atomic;

/// Relative error bound checked by `--verify-analytic`.
const ANALYTIC_TOLERANCE: f64 = 0.02;
/// Cells around the source excluded from the analytic comparison.
const ANALYTIC_EXCLUSION_CELLS: f64 = 5.0;

#[derive(Args, Debug)]
pub struct EikonalArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Source cell as comma-separated indices; repeat for several sources.
    #[arg(long = "source", required = true, value_parser = parse_cell)]
    pub sources: Vec<CellIndex>,
    /// Uniform front speed v_P in m/s.
    #[arg(
        long,
        required_unless_present = "speed_map",
        conflicts_with = "speed_map"
    )]
    pub speed: Option<f64>,
    /// Field CSV of per-cell front speeds in m/s on the same grid.
    #[arg(long)]
    pub speed_map: Option<PathBuf>,
    /// Traveltime field CSV to write, values in seconds.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Radius, in cells of the smallest spacing, seeded with straight-ray times around each source.
    #[arg(long, default_value_t = SolverOptions::DEFAULT_SOURCE_RADIUS_CELLS)]
    pub source_radius: f64,
    /// Axis-aligned first-order updates only, no diagonal stencils or source seeding.
    #[arg(long, conflicts_with = "source_radius")]
    pub plain: bool,
    /// Compare with the straight-line time r/v_P (single source, uniform speed) and fail above 2 %.
    #[arg(long, requires = "speed")]
    pub verify_analytic: bool,
    /// Also write local time θ = t − t_P and region classes at this global time, seconds.
    #[arg(long, requires = "theta_output")]
    pub theta_time: Option<f64>,
    /// Local-time CSV written when --theta-time is given.
    #[arg(long, requires = "theta_time")]
    pub theta_output: Option<PathBuf>,
}

pub fn run(args: &EikonalArgs) -> CliResult {
    let grid = args.grid.build()?;
    let speed = match (&args.speed, &args.speed_map) {
        (Some(v), _) => Speed::Uniform(require_positive("--speed", *v)?),
        (None, Some(path)) => Speed::Map(read_scalar("--speed-map", path, &grid)?),
        (None, None) => return Err(usage("--speed", "give --speed or --speed-map")),
    };
    if let Speed::Map(f) = &speed {
        if let Some(v) = f.values().iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(usage(
                "--speed-map",
                format!("speed {v} must be positive and finite"),
            ));
        }
    }
    let cells: Vec<Vec<usize>> = args.sources.iter().map(|c| c.0.clone()).collect();
    for c in &cells {
        if !grid.contains(c) {
            return Err(usage(
                "--source",
                format!("cell {c:?} is outside shape {:?}", grid.shape()),
            ));
        }
    }
    let source = SourceSpec::new(cells).map_err(|e| input_error("--source", e))?;
    let options = if args.plain {
        SolverOptions::plain()
    } else {
        if !(args.source_radius >= 0.0 && args.source_radius.is_finite()) {
            return Err(usage("--source-radius", "must be finite and >= 0"));
        }
        SolverOptions {
            source_radius: SourceRadius::Cells(args.source_radius),
            ..SolverOptions::default()
        }
    };
    if args.verify_analytic && source.cells().len() != 1 {
        return Err(usage("--verify-analytic", "needs exactly one --source"));
    }
    if let Some(t) = args.theta_time {
        if !t.is_finite() {
            return Err(usage("--theta-time", "must be finite"));
        }
    }

    let (tt, _) = solve_traveltime_with(&grid, &source, speed, options)?;
    write_atomic(&args.output, |mut w| write_scalar_field(&mut w, tt.field()))?;
    println!("t_P min {:e} s, max {:e} s", tt.field().min(), tt.max());

    if let (Some(t), Some(path)) = (args.theta_time, &args.theta_output) {
        let lt = local_time(&tt, t, tt.default_front_tolerance())?;
        write_atomic(path, |mut w| lt.write_csv(&mut w))?;
    }

    if args.verify_analytic {
        let err = analytic_error(&tt, &source.cells()[0]);
        println!(
            "max relative error vs r/v_P beyond {ANALYTIC_EXCLUSION_CELLS} cells: {:.4}%",
            100.0 * err
        );
        if err.is_nan() || err >= ANALYTIC_TOLERANCE {
            return Err(anyhow::anyhow!(
                "analytic check failed: {:.4}% is not below {}%",
                100.0 * err,
                100.0 * ANALYTIC_TOLERANCE
            )
            .into());
        }
    }
    Ok(())
}

fn analytic_error(tt: &TraveltimeField, source: &[usize]) -> f64 {
    let grid = tt.grid();
    let v = tt.speed().max();
    let src = grid.position(grid.flat_index(source).expect("source checked"));
    let exclusion = ANALYTIC_EXCLUSION_CELLS * grid.min_spacing();
    let mut worst: f64 = 0.0;
    for (i, t) in tt.values().iter().enumerate() {
        let r = grid
            .position(i)
            .iter()
            .zip(&src)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if r > exclusion {
            worst = worst.max((t - r / v).abs() / (r / v));
        }
    }
    worst
}
