//! Command-line surface for exact equivalence-coupling duality.
//!
//! Exit codes: 0 on success, 1 when any verification verdict fails, 2 on
//! invalid input (bad files, violated preconditions, bad flags).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use eqcoupling::solver::CouplingStrategy;
use eqcoupling_cli::records::OutputFormat;
use eqcoupling_cli::{commands, instance, CliError};

#[derive(Parser)]
#[command(
    name = "eqcoupling",
    version,
    about = "Exact optimal equivalence couplings and total-variation duals on finite spaces"
)]
struct Cli {
    /// Output format for emitted records
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for randomized batch verification
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Arithmetic backend; duality verdicts are always exact, so `float`
    /// is rejected for solve, check, and chain
    #[arg(long, global = true, value_enum, default_value_t = Arith::Rational)]
    arith: Arith,
    /// Write records to this path instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Arith {
    Rational,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Product,
    GreedyDiagonal,
}

impl From<Strategy> for CouplingStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Product => CouplingStrategy::Product,
            Strategy::GreedyDiagonal => CouplingStrategy::GreedyDiagonal,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the optimal coupling problem for the instance's relation
    Solve {
        /// Instance file (JSON)
        instance: PathBuf,
        /// Within-class mass layout
        #[arg(long, value_enum, default_value_t = Strategy::Product)]
        strategy: Strategy,
        /// Include the optimal coupling's nonzero entries in the record
        #[arg(long)]
        with_coupling: bool,
    },
    /// Total-variation side only: largest deviation over saturated sets
    Tv { instance: PathBuf },
    /// Dual sigma-algebra, double dual, and set-family duals
    Galois { instance: PathBuf },
    /// Verify that primal, dual, and flow-oracle values agree exactly
    Check {
        /// Instance file; omit when using --random
        instance: Option<PathBuf>,
        /// Verify this many seeded random instances instead of a file
        #[arg(long)]
        random: Option<u32>,
        /// Atom-count cap for random instances
        #[arg(long, default_value_t = 12)]
        max_atoms: usize,
    },
    /// Iterative solve along the instance's increasing chain of relations
    Chain {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Strategy::Product)]
        strategy: Strategy,
    },
    /// Built-in demonstration scenarios over parameter grids
    Demo {
        #[command(subcommand)]
        scenario: Demo,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// Two crossing densities on the unit interval: pointwise optimum 1/2,
    /// reversed dual 0
    Asymmetry {
        /// Even cell counts to discretize with
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 10, 100, 1000])]
        cells: Vec<usize>,
    },
    /// Half-identity, half-flip coupling of uniform binary sequences
    Bitflip {
        #[arg(long, default_value_t = 2)]
        min_horizon: usize,
        #[arg(long, default_value_t = 10)]
        max_horizon: usize,
    },
    /// Cyclic-shift orbits of binary sequences, uniform against a point mass
    Orbit {
        #[arg(long, default_value_t = 2)]
        min_length: usize,
        #[arg(long, default_value_t = 4)]
        max_length: usize,
    },
    /// Uniform binary sequences tilted by the first bit, against the
    /// multiset relation
    Reassort {
        #[arg(long, default_value_t = 2)]
        min_horizon: usize,
        #[arg(long, default_value_t = 11)]
        max_horizon: usize,
    },
    /// Truncated product-Poisson tails and Hellinger invariance
    Poisson {
        /// Truncation levels for the one-site scenario
        #[arg(long, value_delimiter = ',', default_values_t = [15usize, 20, 30])]
        truncations: Vec<usize>,
    },
}

fn read_instance(path: &Path) -> Result<instance::CompiledInstance, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let file = instance::parse_instance(&bytes)?;
    instance::compile_instance(&file)
}

fn run(cli: &Cli) -> Result<commands::CommandOutput, CliError> {
    let format = match cli.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    };
    if cli.arith == Arith::Float
        && matches!(
            cli.command,
            Command::Solve { .. } | Command::Check { .. } | Command::Chain { .. }
        )
    {
        return Err(CliError::invalid(
            "--arith float is rejected for solve/check/chain; \
                 duality verdicts require exact rational arithmetic",
        ));
    }
    match &cli.command {
        Command::Solve {
            instance,
            strategy,
            with_coupling,
        } => {
            let compiled = read_instance(instance)?;
            commands::solve(&compiled, (*strategy).into(), *with_coupling, format)
        }
        Command::Tv { instance } => {
            let compiled = read_instance(instance)?;
            commands::tv(&compiled, format)
        }
        Command::Galois { instance } => {
            let compiled = read_instance(instance)?;
            commands::galois(&compiled, format)
        }
        Command::Check {
            instance,
            random,
            max_atoms,
        } => match (instance, random) {
            (Some(path), None) => {
                let compiled = read_instance(path)?;
                commands::check(&compiled, format)
            }
            (None, Some(count)) => commands::check_random(*count, *max_atoms, cli.seed, format),
            (Some(_), Some(_)) => Err(CliError::invalid(
                "check takes either an instance file or --random, not both",
            )),
            (None, None) => Err(CliError::invalid(
                "check needs an instance file or --random <count>",
            )),
        },
        Command::Chain { instance, strategy } => {
            let compiled = read_instance(instance)?;
            commands::chain(&compiled, (*strategy).into(), format)
        }
        Command::Demo { scenario } => match scenario {
            Demo::Asymmetry { cells } => commands::demo_asymmetry(cells, format),
            Demo::Bitflip {
                min_horizon,
                max_horizon,
            } => commands::demo_bitflip(*min_horizon, *max_horizon, format),
            Demo::Orbit {
                min_length,
                max_length,
            } => commands::demo_orbit(*min_length, *max_length, format),
            Demo::Reassort {
                min_horizon,
                max_horizon,
            } => commands::demo_reassort(*min_horizon, *max_horizon, format),
            Demo::Poisson { truncations } => commands::demo_poisson(truncations, format),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            let write_result = match &cli.out {
                Some(path) => std::fs::write(path, &output.text)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
                None => {
                    print!("{}", output.text);
                    Ok(())
                }
            };
            if let Err(e) = write_result {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
            if output.verification_failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
