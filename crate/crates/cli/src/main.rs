mod app;
mod text;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Dirac,
    Bw,
    Mbw,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Text,
    Json,
    Both,
}

/// Constraint analysis of a first-order model: Dirac's algorithm and the
/// symplectic zero-mode iteration.
#[derive(Debug, Parser)]
#[command(name = "analyze", version)]
pub struct Cli {
    /// Model file.
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "mbw")]
    pub algo: Algo,
    /// Level or generation bound (defaults to the model's max_level).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_level: Option<u32>,
    /// Search conserved quantities and promote one to a constraint when the
    /// Dirac chain is longer.
    #[arg(long)]
    pub eom_constraints: bool,
    /// Degree of the conserved-quantity ansatz.
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    /// Quantity to promote: a Dirac constraint label or `#k`.
    #[arg(long)]
    pub promote: Option<String>,
    /// Write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Text, JSON, or text on stdout plus `<model>.report.json`.
    #[arg(long, value_enum, default_value = "text")]
    pub output: Output,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override an integer constant, e.g. `N=5`.
    #[arg(long = "set", value_name = "K=V")]
    pub overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match app::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
