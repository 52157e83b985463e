//! Thin CLI over the library: simulate | paired | sweep | check-identity |
//! check-thermo. Exit codes: 0 success, 1 validation failure, 2 simulation
//! domain failure, 3 acceptance-threshold failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hifric::diagnostics;
use hifric::error::Error;
use hifric::grid::Grid1D;
use hifric::harness::{self, RunConfig};
use hifric::thermo::{ThermoModel, ValidityDomain};

#[derive(Parser)]
#[command(name = "hifric", about = "1D multicomponent mixture laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Class1,
    Class2,
}

#[derive(Subcommand)]
enum Command {
    /// Run one model to t_end, writing snapshot and entropy CSVs.
    Simulate {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        config: PathBuf,
    },
    /// Run Class-II and Class-I side by side and write the relative-entropy series.
    Paired {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the epsilon sweep and fit the convergence slope.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Audit the relative-entropy identity on manufactured pairs under refinement.
    CheckIdentity {
        #[arg(long)]
        config: PathBuf,
    },
    /// Audit the Gibbs stability conditions of the thermodynamic closure.
    CheckThermo {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional config supplying the model; a built-in two-species model
        /// is used otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> hifric::Result<()> {
    match cli.command {
        Command::Simulate { model, config } => {
            let config = RunConfig::from_file(&config)?;
            let model = match model {
                ModelArg::Class1 => harness::Model::Class1,
                ModelArg::Class2 => harness::Model::Class2,
            };
            let summary = harness::run_single(&config, model)?;
            println!(
                "{}: {} steps to t = {:.6}, entropy {:.6e} -> {:.6e}",
                summary.model,
                summary.steps,
                summary.final_time,
                summary.entropy_initial,
                summary.entropy_final
            );
            println!(
                "entropy audit: min increment {:.3e}, tolerance {:.3e}, monotone: {}",
                summary.entropy_audit.min_increment,
                summary.entropy_audit.tolerance,
                summary.entropy_audit.monotone_up_to_tolerance()
            );
            println!("outputs in {}", config.outputs.directory);
            Ok(())
        }
        Command::Paired { config } => {
            let config = RunConfig::from_file(&config)?;
            let outcome = harness::run_paired(&config)?;
            println!(
                "paired run: {} steps, dt = {:.3e}, H(0) = {:.6e}, H(t_end) = {:.6e}",
                outcome.steps, outcome.dt, outcome.h_initial, outcome.h_final
            );
            println!(
                "max |sum rho_i u_i| = {:.3e}; outputs in {}",
                outcome.max_constraint_defect, config.outputs.directory
            );
            Ok(())
        }
        Command::Sweep { config } => {
            let config = RunConfig::from_file(&config)?;
            let outcome = harness::run_sweep(&config)?;
            for e in &outcome.entries {
                println!(
                    "eps = {:9.3e}  H(t_end) = {:12.6e}  steps = {:6}  runtime = {:.2}s",
                    e.epsilon, e.h_final, e.steps, e.runtime_secs
                );
            }
            println!(
                "fit: slope = {:.4}, intercept = {:.4}, residual = {:.4}",
                outcome.fit.slope, outcome.fit.intercept, outcome.fit.residual
            );
            println!("gronwall growth rate (reported only): {:.4}", outcome.gronwall_rate);
            println!(
                "threshold = {:.2}: {}",
                outcome.threshold,
                if outcome.pass { "PASS" } else { "FAIL" }
            );
            if !outcome.pass {
                return Err(Error::Threshold(format!(
                    "sweep slope {:.4} below threshold {:.2}",
                    outcome.fit.slope, outcome.threshold
                )));
            }
            Ok(())
        }
        Command::CheckIdentity { config } => {
            let config = RunConfig::from_file(&config)?;
            let writer = harness::TableWriter::new(
                std::path::Path::new(&config.outputs.directory),
                &config.outputs.formats,
            )?;
            let pairs = diagnostics::standard_pairs(config.grid.length);
            let base_cells = config.grid.ncells.max(16);
            let mut all_pass = true;
            let mut rows: Vec<Vec<f64>> = Vec::new();
            for (pair_idx, pair) in pairs.iter().enumerate() {
                let mut defects = Vec::new();
                for level in 0..3u32 {
                    let ncells = base_cells << level;
                    let grid = Grid1D::new(ncells, config.grid.length)?;
                    let dt = grid.dx() / 4.0;
                    let rep = diagnostics::check_identity(pair, &grid, 0.25, dt)?;
                    defects.push((ncells, rep.pointwise_l1, rep.integrated));
                }
                println!("pair `{}`:", pair.label);
                for (k, (nc, pw, int)) in defects.iter().enumerate() {
                    let order = if k > 0 {
                        harness::observed_order(defects[k - 1].1, *pw)
                    } else {
                        f64::NAN
                    };
                    println!(
                        "  ncells = {nc:5}  pointwise L1 = {pw:.6e}  integrated = {int:.6e}  order = {order:.2}"
                    );
                    rows.push(vec![pair_idx as f64, *nc as f64, *pw, *int, order]);
                    if k > 0 && order < 0.9 {
                        all_pass = false;
                    }
                }
            }
            writer.write(
                "identity_defects",
                &[
                    "pair".to_string(),
                    "ncells".to_string(),
                    "pointwise_l1".to_string(),
                    "integrated".to_string(),
                    "order".to_string(),
                ],
                &rows,
            )?;
            if all_pass {
                println!("identity audit: PASS (observed order >= 0.9 on every pair)");
                Ok(())
            } else {
                Err(Error::Threshold(
                    "identity defect order below 0.9 on some pair".into(),
                ))
            }
        }
        Command::CheckThermo {
            samples,
            seed,
            config,
        } => {
            let thermo = match config {
                Some(path) => RunConfig::from_file(&path)?.thermo_model()?,
                None => ThermoModel::new(
                    vec![1.0, 1.5],
                    vec![2.0, 1.25],
                    ValidityDomain::new(0.1, 10.0)?,
                    1e-12,
                )?,
            };
            let report = thermo.check_stability(samples, seed)?;
            println!(
                "stability over {} samples: min (rho psi)_rr = {:.6e}, min -(rho psi)_tt = {:.6e}",
                report.samples, report.min_rho_convexity, report.min_theta_concavity
            );
            println!(
                "closed-form vs finite-difference mismatch: {:.3e}",
                report.max_fd_mismatch
            );
            let coercivity = diagnostics::measure_coercivity(&thermo, samples.max(1), seed)?;
            println!(
                "empirical coercivity infimum over {} state pairs: {:.6e}",
                coercivity.samples, coercivity.infimum
            );
            if report.pass && coercivity.infimum > 0.0 {
                println!("thermo audit: PASS");
                Ok(())
            } else {
                Err(Error::Threshold(
                    "Gibbs stability or coercivity audit failed".into(),
                ))
            }
        }
    }
}
