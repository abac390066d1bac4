//! `modschrod`: traveltimes, retarded propagation, dispersion tables and
//! v_P fits from the command line. All quantities are SI.

mod dispersion;
mod eikonal;
mod error;
mod fit;
mod grid_args;
mod output;
mod propagate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "modschrod", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve |∇t_P| = 1/v_P by fast marching and write the traveltime field.
    Eikonal(eikonal::EikonalArgs),
    /// Crank–Nicolson propagation with classical, retarded or difference-estimate output.
    Propagate(propagate::PropagateArgs),
    /// Tabulate classical and modified free-electron dispersion quantities.
    Dispersion(dispersion::DispersionArgs),
    /// Least-squares fit of v_P to diffraction wavelengths; prints JSON.
    Fit(fit::FitArgs),
    /// Write data points and both model curves as one layered CSV.
    Compare(fit::CompareArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eikonal(a) => eikonal::run(a),
        Command::Propagate(a) => propagate::run(a),
        Command::Dispersion(a) => dispersion::run(a),
        Command::Fit(a) => fit::run_fit(a),
        Command::Compare(a) => fit::run_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
