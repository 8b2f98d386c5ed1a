//! `qbmor`: build benchmarks, reduce, simulate and compare.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qbmor::bench::{BenchmarkName, BenchmarkSpec, DiodeLaw};
use qbmor::model::{assemble_driven_extended, DrivenSystem, QbSystem, SignalGenerator};

use commands::MomentKind;
use config::{IntegratorSection, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "qbmor", version, about = "Input-tailored reduction of quadratic-bilinear systems")]
struct Cli {
    /// Worker threads for parallel basis construction.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a benchmark plant and its input generator as bundles.
    Bench {
        #[arg(long)]
        name: BenchmarkName,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        case: u8,
        #[arg(long, default_value_t = 0.01)]
        nu: f64,
        #[arg(long, default_value = "shifted")]
        diode_law: DiodeLaw,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a reducer described by a TOML config.
    Reduce {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.dir from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a plant bundle driven by a generator bundle.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        generator: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        integrator: IntegratorArgs,
        /// Also write the state columns.
        #[arg(long)]
        states: bool,
    },
    /// Print moments of the driven system at one expansion point.
    Moments {
        #[arg(long, requires = "generator", conflicts_with = "driven")]
        system: Option<PathBuf>,
        #[arg(long)]
        generator: Option<PathBuf>,
        /// A driven-system bundle instead of plant and generator.
        #[arg(long)]
        driven: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        s0: f64,
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value_t = MomentKind::W2)]
        kind: MomentKind,
        #[arg(long, default_value_t = 1e-12)]
        lyap_tol: f64,
    },
    /// Output error between two trajectory CSV files.
    Compare {
        full: PathBuf,
        reduced: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct IntegratorArgs {
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-8)]
    abs_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    #[arg(long, default_value_t = 300)]
    output_grid: usize,
    #[arg(long)]
    max_step: Option<f64>,
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Bench {
            name,
            size,
            case,
            nu,
            diode_law,
            out,
        } => {
            let spec = BenchmarkSpec {
                name,
                size,
                nu,
                case,
                diode_law,
            };
            commands::cmd_bench(&spec, &out)
        }
        Command::Reduce { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let out = out.unwrap_or_else(|| cfg.output.dir.clone());
            commands::cmd_reduce(&cfg, &out)
        }
        Command::Simulate {
            system,
            generator,
            out,
            integrator,
            states,
        } => {
            let section = IntegratorSection {
                abs_tol: integrator.abs_tol,
                rel_tol: integrator.rel_tol,
                t_end: Some(integrator.t_end),
                max_step: integrator.max_step,
                output_grid: integrator.output_grid,
            };
            let cfg = section.build(integrator.t_end)?;
            commands::cmd_simulate(&system, &generator, &cfg, &out, states)
        }
        Command::Moments {
            system,
            generator,
            driven,
            s0,
            order,
            kind,
            lyap_tol,
        } => {
            let d = match (system, generator, driven) {
                (Some(s), Some(g), None) => assemble_driven_extended(&QbSystem::load(&s)?, &SignalGenerator::load(&g)?)?,
                (None, None, Some(dir)) => DrivenSystem::load(&dir)?,
                _ => return Err(CliError::Config("give --system and --generator, or --driven".into())),
            };
            commands::cmd_moments(&d, kind, s0, order, lyap_tol)
        }
        Command::Compare { full, reduced, out } => commands::cmd_compare(&full, &reduced, out.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        std::env::set_var("RAYON_NUM_THREADS", jobs.max(1).to_string());
    }
    match run(cli) {
        Ok(summary) => {
            println!("{}", summary.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
