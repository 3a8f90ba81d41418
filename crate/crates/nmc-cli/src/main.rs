//! `nmc`: nonlocal mean curvature of planar sets and bands.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure (non-convergence, a violated result gate, failed checks).

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{CliError, Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "nmc",
    version,
    about = "Nonlocal mean curvature of planar sets and bands"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// Fractional order, in (0, 1)
    #[arg(long)]
    alpha: Option<f64>,

    /// Highest eigenvalue index in the spectrum table
    #[arg(long)]
    kmax: Option<u32>,

    /// Amplitude reach of the branch continuation, in (0, 0.1]
    #[arg(long = "a-max")]
    a_max: Option<f64>,

    /// Continuation steps per amplitude sign
    #[arg(long)]
    steps: Option<usize>,

    /// Highest cosine mode of the branch correction
    #[arg(long)]
    modes: Option<usize>,

    /// Absolute quadrature tolerance
    #[arg(long)]
    tol: Option<f64>,

    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format: csv or json
    #[arg(long)]
    format: Option<String>,

    /// Verification suite name, or "all"
    #[arg(long)]
    suite: Option<String>,

    /// Seed recorded in the run metadata
    #[arg(long)]
    seed: Option<u64>,

    /// Flat key=value configuration file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the critical-width equation lambda_1(R) = 0
    SolveR(CommonArgs),
    /// Tabulate the spectrum of the linearized operator at a straight band
    Spectrum(CommonArgs),
    /// Continue the bifurcating branch of periodic bands
    Branch(CommonArgs),
    /// Evaluate the curvature of a band bounded by a cosine profile
    NmcEval(CommonArgs),
    /// Evaluate the curvature of a planar shape along its boundary
    SetEval(CommonArgs),
    /// Run the library self-check suites
    Verify(CommonArgs),
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            alpha: self.alpha,
            kmax: self.kmax,
            a_max: self.a_max,
            steps: self.steps,
            modes: self.modes,
            tol: self.tol,
            out: self.out.clone(),
            format: self.format.clone(),
            suite: self.suite.clone(),
            seed: self.seed,
            config: self.config.clone(),
        }
    }
}

fn execute(name: &'static str, ov: &Overrides) -> Result<i32, CliError> {
    let rc = RunConfig::assemble(ov)?;
    let outcome = commands::dispatch(name, &rc)?;
    output::emit(&outcome.report, outcome.format, rc.out.as_deref())?;
    Ok(outcome.status)
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let status = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return status;
        }
    };
    let (name, args) = match &cli.command {
        Cmd::SolveR(a) => ("solve-r", a),
        Cmd::Spectrum(a) => ("spectrum", a),
        Cmd::Branch(a) => ("branch", a),
        Cmd::NmcEval(a) => ("nmc-eval", a),
        Cmd::SetEval(a) => ("set-eval", a),
        Cmd::Verify(a) => ("verify", a),
    };
    match execute(name, &args.overrides()) {
        Ok(status) => status,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            1
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("error: {m}");
            2
        }
    }
}

fn main() {
    std::process::exit(run());
}
