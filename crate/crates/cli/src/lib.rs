//! The `lvg` command line, callable in-process through [`run_cli`].

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;

/// Discrete Liouville equation on weighted graphs and Z^2 windows.
#[derive(Parser)]
#[command(name = "lvg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
pub(crate) enum Command {
    /// Write an N x N window of Z^2 (mu = 4, w = 1) as graph JSON.
    GenLattice {
        #[arg(long)]
        n: usize,
        /// Add the ring of boundary vertices around the window.
        #[arg(long)]
        ghost: bool,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve Lap u + F(u) = 0 on the interior with Dirichlet data.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        /// zero | bubble:LAMBDA[,CX,CY] | file:PATH
        #[arg(long)]
        boundary: String,
        /// exp | zero
        #[arg(long, default_value = "exp")]
        nonlinearity: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Directory for solution.csv and report.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Audit the energy inequality chain for a field on a graph.
    Audit {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Isoperimetric constant (4 for Z^2).
        #[arg(long)]
        cis: f64,
        /// auto (largest boundary value) | none | a number
        #[arg(long, default_value = "auto")]
        sigma_min: String,
        /// Directory for ledger.json and ledger.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Brute-force upper bound on the isoperimetric constant.
    Isoperimetry {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated vertex ids; defaults to the non-boundary vertices.
        #[arg(long, value_delimiter = ',')]
        admissible: Option<Vec<i64>>,
        #[arg(long, default_value_t = lvg_core::isoperimetry::DEFAULT_LIMIT)]
        limit: usize,
    },
    /// Solve and audit bubble problems over a grid of (N, lambda).
    EnergyScan {
        /// Odd window sizes >= 3, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        /// Bubble centre CX,CY; defaults to the window centre.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        center: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Directory for energy_scan.csv; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Command output goes to `out`, diagnostics to `err`.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return if e.use_stderr() {
                let _ = write!(err, "{e}");
                commands::EXIT_INPUT
            } else {
                let _ = write!(out, "{e}");
                0
            };
        }
    };
    match commands::run(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", commands::describe(&e));
            commands::exit_code(&e)
        }
    }
}
