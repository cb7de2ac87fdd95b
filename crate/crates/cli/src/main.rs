mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{Config, Failure};

#[derive(Parser, Debug)]
#[command(
    name = "jetsym",
    version,
    about = "Lie point symmetries of 2D second-order evolution equations"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for every sampled check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Residual tolerance; defaults to $JETSYM_TOL or 1e-9.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sample points for grid residuals.
    #[arg(long, global = true, default_value_t = 200)]
    grid: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Run every sampled check on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the determining system under a polynomial ansatz.
    Symmetries(commands::SymmetriesArgs),
    /// Structure table of the model's symmetry algebra.
    Commutators(commands::ModelArgs),
    /// Check an optimal system by reducing random elements to representatives.
    Optimal(commands::OptimalArgs),
    /// Invariants and reduced equation for a combination of basis generators.
    Reduce(commands::ReduceArgs),
    /// Check candidate solutions from a file.
    VerifySolution(commands::VerifySolutionArgs),
    /// Check a solution h(t, z) of a reduced equation.
    VerifyReduced(commands::VerifyReducedArgs),
    /// Check that a coefficient family admits an imposed symmetry.
    Inverse(commands::InverseArgs),
    /// Parse an expression and echo it.
    Parse(commands::ParseArgs),
}

fn tolerance(flag: Option<f64>) -> Result<f64, Failure> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var("JETSYM_TOL") {
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite() && *t > 0.0)
            .ok_or_else(|| Failure::usage(format!("JETSYM_TOL: `{s}` is not a positive number"))),
        Err(_) => Ok(1e-9),
    }
}

fn run(cli: Cli) -> Result<report::Outcome, Failure> {
    let g = cli.global;
    let tol = tolerance(g.tol)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Failure::usage("--tol must be a positive number"));
    }
    if g.grid == 0 {
        return Err(Failure::usage("--grid must be at least 1"));
    }
    let cfg = Config::new(g.seed, tol, g.grid, g.sequential);
    match cli.command {
        Command::Symmetries(a) => commands::symmetries(&cfg, a),
        Command::Commutators(a) => commands::commutators(&cfg, a),
        Command::Optimal(a) => commands::optimal(&cfg, a),
        Command::Reduce(a) => commands::reduce(&cfg, a),
        Command::VerifySolution(a) => commands::verify_solution(&cfg, a),
        Command::VerifyReduced(a) => commands::verify_reduced(&cfg, a),
        Command::Inverse(a) => commands::inverse(&cfg, a),
        Command::Parse(a) => commands::parse(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.global.format;
    std::panic::set_hook(Box::new(|info| {
        let msg = info
            .payload()
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| info.payload().downcast_ref::<String>().cloned())
            .unwrap_or_default();
        eprintln!("error: internal failure: {msg}");
    }));
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(outcome)) => outcome.emit(format),
        Ok(Err(f)) => f.emit(),
        Err(_) => ExitCode::from(2),
    }
}
