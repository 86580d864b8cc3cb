//! `indefgraph` command-line driver.

mod commands;
mod json;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use indefgraph::bracketing::NondSign;

#[derive(Parser, Debug)]
#[command(name = "indefgraph", version, about = "Indefinite Sturm-Liouville spectra on metric graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Graph specification (JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Override the mesh count of every edge.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(2..))]
    pub mesh: Option<u64>,

    /// Eigenvalue window `lo:hi`.
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<(f64, f64)>,

    /// Truncation / number of eigenvalues, per command.
    #[arg(long, global = true)]
    pub truncation: Option<usize>,

    /// Sign convention for the decoupled natural conditions.
    #[arg(long, global = true, value_enum, default_value_t = SignArg::Form)]
    pub nond_sign: SignArg,

    /// Relative tolerance on the bracketing bounds.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub tol_bracket: f64,

    /// Number of random probe vectors.
    #[arg(long, global = true, default_value_t = 100)]
    pub probes: usize,

    /// Probe RNG seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Eigenvalues and eigenfunction samples.
    Spectrum,
    /// Cone table, norm constants, completeness and max-min checks.
    Krein,
    /// Comparison with the decoupled Neumann and Dirichlet spectra.
    Bracket,
    /// Linear fit of the square roots of the positive eigenvalues.
    Asymptotics,
    /// Roots of the secular determinant.
    Oracle,
    /// Every suite with gates; nonzero exit if any gate fails.
    VerifyAll,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignArg {
    Form,
    Paper,
}

impl From<SignArg> for NondSign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Form => NondSign::Form,
            SignArg::Paper => NondSign::Paper,
        }
    }
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("lo: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("hi: {e}"))?;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err("window must be nonempty (lo < hi)".into());
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("{}", json::to_string(&e.to_json()));
            ExitCode::from(e.code())
        }
    }
}
