use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use modschrod_core::fit::{
    derive_kinematics, evaluate_fit, model_curves, read_records, synthesize_records, write_records,
    SyntheticSpec,
};
use modschrod_core::io::fmt_f64;
use modschrod_core::{fit_vp, DiffractionRecord, PerturbationSpeed, PhysicalConstants};

use crate::error::{input_error, usage, CliResult};
use crate::output::{open_input, write_atomic};

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("data").required(true).args(["input", "generate"])))]
pub struct DataArgs {
    /// Diffraction CSV with columns voltage_volts,wavelength_meters.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Synthetic data instead of --input, e.g. "vP=1.3e8 n=20 seed=7 noise=0.01".
    /// vP in m/s (inf for classical), noise = std of Gaussian k noise as a
    /// fraction of k, optional vmin/vmax in volts (default 30 and 600).
    #[arg(long)]
    pub generate: Option<String>,
    /// Also save the generated records to this CSV.
    #[arg(long, requires = "generate")]
    pub save_data: Option<PathBuf>,
}

impl DataArgs {
    fn load(&self, consts: &PhysicalConstants) -> CliResult<Vec<DiffractionRecord>> {
        if let Some(path) = &self.input {
            return read_records(open_input("--input", path)?)
                .map_err(|e| input_error("--input", e));
        }
        let text = self
            .generate
            .as_deref()
            .expect("clap enforces one data source");
        let spec = SyntheticSpec::parse(text).map_err(|e| input_error("--generate", e))?;
        let records =
            synthesize_records(&spec, consts).map_err(|e| input_error("--generate", e))?;
        if let Some(path) = &self.save_data {
            write_atomic(path, |mut w| write_records(&mut w, &records))?;
        }
        Ok(records)
    }
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Write the layered points / curveA / curveB table (v in m/s, k in 1/m) here.
    #[arg(long)]
    pub curves: Option<PathBuf>,
    /// Samples per model curve.
    #[arg(long, default_value_t = 200)]
    pub curve_points: usize,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Perturbation speed v_P in m/s for curve B [default: least-squares fit].
    #[arg(long)]
    pub vp: Option<f64>,
    /// Layered CSV to write, columns layer,v,k (m/s, 1/m).
    #[arg(long, short)]
    pub output: PathBuf,
    /// Samples per model curve.
    #[arg(long, default_value_t = 200)]
    pub curve_points: usize,
}

pub fn run_fit(args: &FitArgs) -> CliResult {
    let consts = PhysicalConstants::codata2018();
    let records = args.data.load(&consts)?;
    let fit = fit_vp(&records, &consts).map_err(|e| input_error("--input", e))?;
    if let Some(path) = &args.curves {
        write_layers(path, &records, fit.speed(), args.curve_points, &consts)?;
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&fit).map_err(anyhow::Error::from)?
    );
    Ok(())
}

pub fn run_compare(args: &CompareArgs) -> CliResult {
    let consts = PhysicalConstants::codata2018();
    let records = args.data.load(&consts)?;
    let v_p = match args.vp {
        Some(v) => PerturbationSpeed::finite(v).map_err(|e| usage("--vp", e))?,
        None => fit_vp(&records, &consts)
            .map_err(|e| input_error("--input", e))?
            .speed(),
    };
    write_layers(&args.output, &records, v_p, args.curve_points, &consts)?;
    let stats = evaluate_fit(&records, v_p, &consts);
    println!(
        "v_P {} m/s",
        if v_p.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:e}", v_p.speed())
        }
    );
    println!("variance modified  {:e} 1/m^2", stats.variance_modified);
    println!("variance classical {:e} 1/m^2", stats.variance_classical);
    Ok(())
}

fn write_layers(
    path: &Path,
    records: &[DiffractionRecord],
    v_p: PerturbationSpeed,
    samples: usize,
    consts: &PhysicalConstants,
) -> CliResult {
    if samples < 2 {
        return Err(usage("--curve-points", "must be at least 2"));
    }
    let points: Vec<(f64, f64)> = records
        .iter()
        .map(|r| derive_kinematics(r, consts))
        .collect();
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let (lo, hi) = (0.9 * lo, 1.1 * hi);
    let speeds: Vec<f64> = (0..samples)
        .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
        .collect();
    let curves = model_curves(&speeds, v_p, consts)?;
    write_atomic(path, |w: &mut dyn Write| {
        writeln!(w, "layer,v,k")?;
        for (v, k) in &points {
            writeln!(w, "points,{},{}", fmt_f64(*v), fmt_f64(*k))?;
        }
        for c in &curves {
            writeln!(w, "curveA,{},{}", fmt_f64(c.speed), fmt_f64(c.k_classical))?;
        }
        for c in &curves {
            writeln!(w, "curveB,{},{}", fmt_f64(c.speed), fmt_f64(c.k_modified))?;
        }
        Ok(())
    })
}
