//! `possqrt`: square roots of Hermitian positive definite matrices from the
//! command line, with machine-readable reports.

mod commands;
mod error;
mod matrix_file;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use possqrt_core::sqrt::SqrtMethod;

use crate::report::RunReport;

#[derive(Parser)]
#[command(name = "possqrt", version, about = "Square roots of positive definite matrices by contour quadrature")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Contour,
    Kreyszig,
    Oracle,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<SqrtMethod> {
        match self {
            MethodArg::Contour => vec![SqrtMethod::Contour],
            MethodArg::Kreyszig => vec![SqrtMethod::Kreyszig],
            MethodArg::Oracle => vec![SqrtMethod::Oracle],
            MethodArg::All => SqrtMethod::ALL.to_vec(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the principal square root.
    Sqrt {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "contour")]
        method: MethodArg,
        /// Stopping tolerance (default 1e-12 contour, 1e-10 kreyszig).
        #[arg(long)]
        tol: Option<f64>,
        /// Initial quadrature node count.
        #[arg(long, default_value_t = 16)]
        nodes: usize,
        /// Result file; with `--method all`, `<stem>.<method>.json` per method.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print norms, the positivity constant and the eigenvalues.
    Spectrum { input: PathBuf },
    /// Run the invariant suite on a positive definite matrix.
    Verify {
        input: PathBuf,
        #[arg(long, default_value_t = commands::DEFAULT_CONTOUR_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 16)]
        nodes: usize,
    },
    /// Probe continuity of the square root around a positive definite matrix.
    Probe {
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check positivity along the segment between two matrices.
    Convexity {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, outcome) = match &cli.command {
        Command::Sqrt { input, method, tol, nodes, out } => {
            let mut r = RunReport::new("sqrt");
            let o = commands::sqrt(&mut r, input, &method.methods(), *tol, *nodes, out.as_deref());
            (r, o)
        }
        Command::Spectrum { input } => {
            let mut r = RunReport::new("spectrum");
            let o = commands::spectrum(&mut r, input);
            (r, o)
        }
        Command::Verify { input, tol, nodes } => {
            let mut r = RunReport::new("verify");
            let o = commands::verify(&mut r, input, *tol, *nodes);
            (r, o)
        }
        Command::Probe { input, trials, seed } => {
            let mut r = RunReport::new("probe");
            let o = commands::probe(&mut r, input, *trials, *seed);
            (r, o)
        }
        Command::Convexity { a, b, steps } => {
            let mut r = RunReport::new("convexity");
            let o = commands::convexity(&mut r, a, b, *steps);
            (r, o)
        }
    };
    print!("{}", report.render(&outcome));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("possqrt: {e}");
            ExitCode::from(e.code)
        }
    }
}
