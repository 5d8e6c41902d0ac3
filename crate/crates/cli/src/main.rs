mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use optimal_fd::error::Error;
use optimal_fd::integrator::Startup;

/// Optimal explicit Adams-type finite-difference formulas in W2^(m,m-1).
#[derive(Debug, Parser)]
#[command(name = "optfd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the optimal coefficients.
    Coeffs {
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        io: Io,
    },
    /// Check exactness, norm, optimality margin and node residuals of a
    /// formula read from FILE (`-` for stdin) or solved from --m/--N/--k.
    Verify {
        file: Option<PathBuf>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        /// Relative tolerance for the exactness residuals.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[command(flatten)]
        io: Io,
    },
    /// Roots, amplitudes and boundary coefficients of the spectral form.
    Spectral {
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        io: Io,
    },
    /// Integrate a built-in problem with the optimal formula.
    Integrate {
        #[arg(long)]
        problem: String,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = Startup::Rk4)]
        startup: Startup,
        /// Carry the whole recursion at working precision (exact startup).
        #[arg(long)]
        multiprecision: bool,
        #[command(flatten)]
        io: Io,
    },
    /// Measured orders of the optimal formula and the Adams-Bashforth
    /// method with the same number of steps.
    Convergence {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        k: u32,
        #[arg(long = "N-list", visible_alias = "N", value_delimiter = ',', required = true)]
        n_list: Vec<u32>,
        #[arg(long, default_value_t = Startup::Rk4)]
        startup: Startup,
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Debug, Args)]
struct Grid {
    #[arg(long)]
    m: u32,
    #[arg(long = "N")]
    n: u32,
    #[arg(long)]
    k: u32,
}

#[derive(Debug, Args)]
struct Io {
    #[arg(long, default_value_t = 256)]
    precision_bits: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file, written atomically; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Failure of a subcommand together with its exit code.
#[derive(Debug)]
enum Failure {
    Config(String),
    Core(Error),
    Verify(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Verify(_) => 3,
            Failure::Core(e) => match e {
                Error::InvalidParams(_)
                | Error::Precondition(_)
                | Error::Parse(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::Io(_)
                | Error::StartupUnavailable
                | Error::Dimension(_) => 1,
                Error::FitFailure { .. } | Error::RootOnCircle { .. } => 4,
                _ => 2,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(s) => format!("configuration error: {s}"),
            Failure::Core(e) => e.to_string(),
            Failure::Verify(names) => format!("verification failed: {}", names.join(", ")),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Coeffs { grid, io } => commands::coeffs(&grid, &io),
        Command::Verify {
            file,
            m,
            n,
            k,
            tolerance,
            seed,
            samples,
            io,
        } => commands::verify(
            commands::FormulaSource::from_args(file, m, n, k)?,
            tolerance,
            seed,
            samples,
            &io,
        ),
        Command::Spectral { grid, io } => commands::spectral(&grid, &io),
        Command::Integrate {
            problem,
            grid,
            startup,
            multiprecision,
            io,
        } => commands::integrate(&problem, &grid, startup, multiprecision, &io),
        Command::Convergence {
            problem,
            m,
            k,
            n_list,
            startup,
            io,
        } => commands::convergence(&problem, m, k, &n_list, startup, &io),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("optfd: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
