use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use grc::cli::{
    cmd_compare, cmd_cost, cmd_distribution, cmd_schedule, cmd_simulate, simulation_histogram_csv,
    to_csv, to_json, Method, OutputFormat, OutputRecord,
};

#[derive(Parser)]
#[command(
    name = "grc",
    version,
    about = "Optimized stage-size schedules for random-chemistry subset search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Ground set size
    #[arg(long)]
    n0: u64,
    /// Target subset size
    #[arg(long)]
    k: u64,
    /// Schedule construction method
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    method: Method,
    /// Stage count; defaults to the integer optimum for the instance
    #[arg(long)]
    stages: Option<usize>,
    /// Output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Write output to this path instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a schedule and report per-stage statistics
    Schedule {
        #[command(flatten)]
        common: Common,
        /// Round stage sizes to integers
        #[arg(long)]
        integerize: bool,
    },
    /// Expected cost and variance of a schedule
    Cost {
        #[command(flatten)]
        common: Common,
        /// Round stage sizes to integers
        #[arg(long)]
        integerize: bool,
    },
    /// Exact run-length distribution with its negative binomial overlay
    Distribution {
        #[command(flatten)]
        common: Common,
        /// Also report the tail probability P(X > L)
        #[arg(long, value_name = "L")]
        l: Option<u64>,
    },
    /// Monte Carlo simulation of the integerized schedule
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Number of independent runs
        #[arg(long)]
        runs: u64,
        /// Seed for the reproducible per-run generators
        #[arg(long)]
        seed: u64,
        /// Write the run-length histogram as CSV to this path
        #[arg(long, value_name = "PATH")]
        histogram_out: Option<PathBuf>,
    },
    /// Compare exact, approx and halving schedules on one instance
    Compare {
        /// Ground set size
        #[arg(long)]
        n0: u64,
        /// Target subset size
        #[arg(long)]
        k: u64,
        /// Output format
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Write output to this path instead of stdout
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Lib(grc::Error),
    Io(PathBuf, std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(err) => err.fmt(f),
            CliError::Io(path, err) => write!(f, "cannot write {}: {err}", path.display()),
        }
    }
}

impl From<grc::Error> for CliError {
    fn from(err: grc::Error) -> Self {
        CliError::Lib(err)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(err) => err.exit_code(),
            CliError::Io(..) => 4,
        }
    }
}

fn emit(
    record: &OutputRecord,
    format: OutputFormat,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let rendered = match format {
        OutputFormat::Json => {
            let mut json = to_json(record);
            json.push('\n');
            json
        }
        OutputFormat::Csv => to_csv(record),
    };
    match out {
        Some(path) => std::fs::write(path, rendered).map_err(|e| CliError::Io(path.clone(), e))?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Schedule { common, integerize } => {
            let record = cmd_schedule(
                common.n0,
                common.k,
                common.method,
                common.stages,
                integerize,
            )?;
            emit(&record, common.format, common.out.as_ref())
        }
        Command::Cost { common, integerize } => {
            let record = cmd_cost(
                common.n0,
                common.k,
                common.method,
                common.stages,
                integerize,
            )?;
            emit(&record, common.format, common.out.as_ref())
        }
        Command::Distribution { common, l } => {
            let record = cmd_distribution(common.n0, common.k, common.method, common.stages, l)?;
            emit(&record, common.format, common.out.as_ref())
        }
        Command::Simulate {
            common,
            runs,
            seed,
            histogram_out,
        } => {
            let record = cmd_simulate(
                common.n0,
                common.k,
                common.method,
                common.stages,
                runs,
                seed,
            )?;
            if let Some(path) = &histogram_out {
                let OutputRecord::Simulation(payload) = &record else {
                    unreachable!("simulate emits simulation records")
                };
                std::fs::write(path, simulation_histogram_csv(payload))
                    .map_err(|e| CliError::Io(path.clone(), e))?;
            }
            emit(&record, common.format, common.out.as_ref())
        }
        Command::Compare { n0, k, format, out } => {
            let record = cmd_compare(n0, k)?;
            emit(&record, format, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
