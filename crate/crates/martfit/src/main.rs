//! Command-line front end.
//!
//! Exit codes: 0 on success or all checks passing, 1 on validation or
//! diagnostic failure, 2 on usage or parse errors. `MARTFIT_THREADS`
//! caps worker parallelism without changing any output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use martfit::diagnostics::{crossing_test, fit_report, martingale_test, DiagnosticsReport};
use martfit::error::MartfitError;
use martfit::extremal::extremal_chain;
use martfit::io;
use martfit::local_vol::{dupire_sigma, euler_simulate};
use martfit::marginal::{CallSurface, MarginalDistribution};
use martfit::metric::metric_d;
use martfit::scenario::{quantized_normal_surface, scenario_gap, scenario_sticky};
use martfit::skorokhod::simulate_paths;

#[derive(Parser)]
#[command(name = "martfit", version, about = "Fit martingales to given marginals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a marginal file for convex-order surface membership.
    Validate { marginals: PathBuf },
    /// Evaluate the interpolated call surface at one time.
    Interpolate {
        marginals: PathBuf,
        /// Evaluation time.
        #[arg(long)]
        at: f64,
        /// Levels to evaluate at (defaults to the union of atom positions).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        x: Option<Vec<f64>>,
    },
    /// Sample martingale paths and emit the path matrix as CSV.
    Simulate {
        marginals: PathBuf,
        #[arg(long)]
        paths: usize,
        #[arg(long)]
        seed: u64,
        /// Query times, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        times: Vec<f64>,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the statistical and exact diagnostics suite.
    Diagnose {
        marginals: PathBuf,
        #[arg(long)]
        paths: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Distance between the interpolated surfaces of two marginal files.
    Metric {
        marginals_a: PathBuf,
        marginals_b: PathBuf,
    },
    /// Extract the local volatility from a gridded call surface CSV.
    Localvol {
        grid: PathBuf,
        /// Also time-step the extracted diffusion and emit a path matrix.
        #[arg(long)]
        simulate: bool,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        times: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Start level of every path.
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a built-in marginal file: pair-a, pair-b, gap or sticky.
    Scenario {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("MARTFIT_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("MARTFIT_THREADS must be a positive integer, got {threads:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{err}");
            match err {
                MartfitError::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn read_surface(path: &PathBuf) -> martfit::Result<CallSurface> {
    io::parse_marginals(&std::fs::read_to_string(path)?)
}

fn emit(out: Option<PathBuf>, text: &str) -> martfit::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(command: Command) -> martfit::Result<ExitCode> {
    match command {
        Command::Validate { marginals } => {
            let surface = read_surface(&marginals)?;
            let report = surface.validate_cp();
            print!("{report}");
            Ok(if report.is_valid() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Interpolate { marginals, at, x } => {
            let surface = read_surface(&marginals)?;
            let chain = extremal_chain(&surface)?;
            let levels = x.unwrap_or_else(|| {
                let mut v: Vec<f64> = surface
                    .marginals()
                    .iter()
                    .flat_map(|m| m.atoms().iter().map(|a| a.position))
                    .collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            });
            let mut out = String::new();
            for lv in levels {
                out.push_str(&format!("{lv:.16e} {:.16e}\n", chain.eval(at, lv)?));
            }
            print!("{out}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            marginals,
            paths,
            seed,
            times,
            out,
        } => {
            let surface = read_surface(&marginals)?;
            let matrix = simulate_paths(&surface, paths, seed, &times)?;
            emit(out, &io::path_matrix_csv(&matrix, &times))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Diagnose {
            marginals,
            paths,
            seed,
        } => {
            let surface = read_surface(&marginals)?;
            let times = surface.times();
            // query the grid times plus interval midpoints
            let mut query: Vec<f64> = times.to_vec();
            for w in times.windows(2) {
                query.push(0.5 * (w[0] + w[1]));
            }
            query.sort_by(f64::total_cmp);
            query.dedup();
            let matrix = simulate_paths(&surface, paths, seed, &query)?;

            let mut report = DiagnosticsReport::default();
            let probes: Vec<Vec<f64>> = query
                .iter()
                .map(|_| {
                    surface
                        .marginals()
                        .last()
                        .unwrap()
                        .atoms()
                        .iter()
                        .map(|a| a.position)
                        .collect()
                })
                .collect();
            report.merge(fit_report(&matrix, &query, &surface, &probes)?);
            if query.len() >= 2 {
                let cuts: Vec<f64> = surface
                    .marginals()
                    .last()
                    .unwrap()
                    .atoms()
                    .iter()
                    .map(|a| a.position)
                    .collect();
                report.merge(martingale_test(&matrix, 0, query.len() - 1, &cuts)?);
            }
            report.merge(crossing_test(&surface, paths / 2, seed.wrapping_add(1))?);
            print!("{}", report.to_lines());
            Ok(if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Metric {
            marginals_a,
            marginals_b,
        } => {
            let a = extremal_chain(&read_surface(&marginals_a)?)?;
            let b = extremal_chain(&read_surface(&marginals_b)?)?;
            println!("{:.16e}", metric_d(&a, &b, 1e-4));
            Ok(ExitCode::SUCCESS)
        }
        Command::Localvol {
            grid,
            simulate,
            paths,
            seed,
            times,
            dt,
            x0,
            out,
        } => {
            let surface = io::parse_gridded_surface(&std::fs::read_to_string(&grid)?)?;
            let vol = dupire_sigma(&surface)?;
            if simulate {
                let times = times
                    .unwrap_or_else(|| vec![*vol.times.last().unwrap()]);
                let initial = MarginalDistribution::dirac(x0);
                let matrix = euler_simulate(&vol, &initial, paths, seed, &times, dt)?;
                emit(out, &io::path_matrix_csv(&matrix, &times))?;
            } else {
                emit(out, &io::local_vol_csv(&vol))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Scenario { name, out } => {
            let surface = match name.as_str() {
                "pair-a" => CallSurface::new(
                    vec![0.0, 1.0],
                    vec![
                        MarginalDistribution::dirac(0.0),
                        MarginalDistribution::from_weighted(&[(-1.0, 0.5), (1.0, 0.5)])?,
                    ],
                )?,
                "pair-b" => CallSurface::new(
                    vec![0.0, 1.0],
                    vec![
                        MarginalDistribution::dirac(0.0),
                        MarginalDistribution::from_weighted(&[
                            (-1.0, 1.0 / 3.0),
                            (0.0, 1.0 / 3.0),
                            (1.0, 1.0 / 3.0),
                        ])?,
                    ],
                )?,
                "gap" => {
                    let base = CallSurface::new(
                        vec![0.0, 1.0],
                        vec![
                            MarginalDistribution::dirac(0.5),
                            MarginalDistribution::from_weighted(&[
                                (-1.0, 1.0 / 3.0),
                                (0.5, 1.0 / 3.0),
                                (2.0, 1.0 / 3.0),
                            ])?,
                        ],
                    )?;
                    scenario_gap(&base)?
                }
                "sticky" => {
                    let base = quantized_normal_surface(&[0.0, 0.5, 1.0], |t| 1.0 + t, 8)?;
                    scenario_sticky(&base)?
                }
                other => {
                    return Err(MartfitError::Parse {
                        line: 0,
                        msg: format!(
                            "unknown scenario {other:?}; expected pair-a, pair-b, gap or sticky"
                        ),
                    })
                }
            };
            emit(out, &io::serialize_marginals(&surface))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
