//! `premeasure`: run premeasurement scenarios and regenerate fixtures.

mod catalog;
mod run;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

const EXIT_CHECK_FAILURE: u8 = 1;
const EXIT_INPUT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "premeasure",
    version,
    about = "Analyse unitary premeasurement schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and print its report.
    Run {
        scenario: PathBuf,
        /// Treat indeterminate verdicts as failures.
        #[arg(long)]
        strict: bool,
        /// Seed for the random-sampling layer; overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the structured report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scale factor for the operator and vector tolerances.
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        /// Number of random initial states per sampled criterion.
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Write the fixture scenarios into a directory.
    Fixtures { out_dir: PathBuf },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            scenario,
            strict,
            seed,
            out,
            tol,
            trials,
        } => {
            if !(tol.is_finite() && tol > 0.0) {
                eprintln!("error: --tol must be a positive number");
                return ExitCode::from(EXIT_INPUT_ERROR);
            }
            let flags = run::Flags {
                strict,
                seed,
                tol_scale: tol,
                trials,
            };
            let started = Instant::now();
            let report = match scenario::load(&scenario).and_then(|doc| run::run(&doc, &flags)) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_INPUT_ERROR);
                }
            };
            print!("{}", run::render_text(&report));
            println!("wall time {:.3} s", started.elapsed().as_secs_f64());
            if let Some(path) = out {
                let written = serde_json::to_string_pretty(&report)
                    .map_err(std::io::Error::other)
                    .and_then(|mut text| {
                        text.push('\n');
                        std::fs::write(&path, text)
                    });
                if let Err(e) = written {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_INPUT_ERROR);
                }
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILURE)
            }
        }
        Command::Fixtures { out_dir } => match catalog::write_all(&out_dir) {
            Ok(names) => {
                for n in names {
                    println!("{}", out_dir.join(n).display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: cannot write fixtures to {}: {e}", out_dir.display());
                ExitCode::from(EXIT_INPUT_ERROR)
            }
        },
    }
}
