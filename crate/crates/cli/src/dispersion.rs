use clap::Args;
use modschrod_core::dispersion::DispersionRow;
use modschrod_core::io::fmt_f64;
use modschrod_core::{PerturbationSpeed, PhysicalConstants};

use crate::error::{usage, CliResult};

const ANGSTROM: f64 = 1e-10;

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("particle").required(true).args(["voltages", "speeds"])))]
#[command(group(clap::ArgGroup::new("front").required(true).args(["vp", "classical"])))]
pub struct DispersionArgs {
    /// Accelerating voltages in volts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub voltages: Option<Vec<f64>>,
    /// Electron speeds in m/s, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub speeds: Option<Vec<f64>>,
    /// Perturbation speed v_P in m/s.
    #[arg(long)]
    pub vp: Option<f64>,
    /// Infinite v_P (1/v_P = 0): the classical relations.
    #[arg(long)]
    pub classical: bool,
    /// Print full-precision CSV instead of the aligned table.
    #[arg(long)]
    pub csv: bool,
}

const COLUMNS: [&str; 11] = [
    "V[V]",
    "v[m/s]",
    "nu[Hz]",
    "k[1/m]",
    "k_l[1/m]",
    "lambda[m]",
    "lambda_l[m]",
    "v_ph[m/s]",
    "v_ph.l[m/s]",
    "v_gr[m/s]",
    "v_gr.l[m/s]",
];

pub fn run(args: &DispersionArgs) -> CliResult {
    let consts = PhysicalConstants::codata2018();
    let v_p = match (args.vp, args.classical) {
        (_, true) => PerturbationSpeed::infinite(),
        (Some(v), false) => PerturbationSpeed::finite(v).map_err(|e| usage("--vp", e))?,
        (None, false) => return Err(usage("--vp", "give --vp or --classical")),
    };
    let speeds: Vec<f64> = match (&args.voltages, &args.speeds) {
        (Some(vs), _) => vs
            .iter()
            .map(|&u| {
                if u > 0.0 && u.is_finite() {
                    Ok(consts.electron_speed(u))
                } else {
                    Err(usage(
                        "--voltages",
                        format!("{u} must be positive and finite"),
                    ))
                }
            })
            .collect::<CliResult<_>>()?,
        (None, Some(vs)) => vs.clone(),
        (None, None) => return Err(usage("--voltages", "give --voltages or --speeds")),
    };
    let rows = speeds
        .iter()
        .map(|&v| DispersionRow::for_electron(v, v_p, &consts).map_err(|e| usage("--speeds", e)))
        .collect::<CliResult<Vec<_>>>()?;

    if args.csv {
        println!("{}", COLUMNS.join(","));
        for r in &rows {
            let cells: Vec<String> = values(r).iter().map(|v| fmt_f64(*v)).collect();
            println!("{}", cells.join(","));
        }
        return Ok(());
    }
    let mut header: Vec<&str> = COLUMNS.to_vec();
    header.extend(["lambda[A]*", "lambda_l[A]*"]);
    println!(
        "{}",
        header
            .iter()
            .map(|h| format!("{h:>13}"))
            .collect::<String>()
    );
    for r in &rows {
        let mut cells = values(r).to_vec();
        cells.extend([r.lambda / ANGSTROM, r.lambda_l / ANGSTROM]);
        println!(
            "{}",
            cells
                .iter()
                .map(|v| format!("{:>13}", format!("{v:.3e}")))
                .collect::<String>()
        );
    }
    println!("* display only, 1 A = 1e-10 m");
    Ok(())
}

fn values(r: &DispersionRow) -> [f64; 11] {
    [
        r.voltage, r.speed, r.nu, r.k, r.k_l, r.lambda, r.lambda_l, r.v_ph, r.v_ph_l, r.v_gr,
        r.v_gr_l,
    ]
}
