mod commands;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Dimension-checked large-number coincidences and a stochastic-mechanics
/// laboratory.
///
/// Exit codes: 0 pass, 1 check or threshold failure, 2 usage or
/// configuration error, 3 evaluation error, 4 simulation runtime error.
#[derive(Debug, Parser)]
#[command(name = "scalebridge", version)]
pub struct Cli {
    /// Registry config file (`symbol = value unit` per line). Defaults to
    /// $SCALEBRIDGE_REGISTRY when set.
    #[arg(long, global = true, value_name = "FILE")]
    pub registry: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect or round-trip the relation catalog.
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Evaluate every catalog relation and report the verdicts.
    Check(CheckArgs),
    /// Evaluate an expression against the registry.
    Eval(EvalArgs),
    /// Solve a relation for one symbol, or run a derivation chain.
    Solve(SolveArgs),
    /// Run a Nelson-ensemble simulation against the reference evolution.
    Simulate(SimulateArgs),
}

#[derive(Debug, Subcommand)]
pub enum CatalogCommand {
    /// Name, tag, tolerance and relation of every built-in entry.
    List {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// The built-in catalog in catalog-file form.
    Export,
    /// Parse a catalog file (`-` for stdin) and print it back in canonical form.
    Parse {
        #[arg(default_value = "-")]
        file: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Registry override `SYM=VALUE [UNIT-EXPR]`; repeatable, last wins for a
    /// repeated symbol.
    #[arg(long = "set", value_name = "SYM=VAL [UNIT]", num_args = 1..=2, action = clap::ArgAction::Append)]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Tolerance in decades for every `~` relation, replacing per-row values.
    #[arg(long)]
    pub tol_decades: Option<f64>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Catalog file to check instead of the built-in catalog.
    #[arg(long, value_name = "FILE")]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub expr: String,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Relation such as `m = (hbar^2*H/(G*c))^(1/3)`.
    #[arg(required_unless_present = "chain", conflicts_with = "chain")]
    pub relation: Option<String>,
    /// Symbol to isolate.
    #[arg(long = "for", value_name = "SYM", required_unless_present = "chain")]
    pub unknown: Option<String>,
    #[arg(long, value_enum)]
    pub chain: Option<ChainName>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainName {
    Weinberg,
    #[value(name = "planck_constant")]
    PlanckConstant,
    #[value(name = "planck_particle")]
    PlanckParticle,
}

impl ChainName {
    pub fn as_str(self) -> &'static str {
        match self {
            ChainName::Weinberg => "weinberg",
            ChainName::PlanckConstant => "planck_constant",
            ChainName::PlanckParticle => "planck_particle",
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (TOML). Keys absent from the file take the fixture's
    /// defaults.
    pub scenario: Option<PathBuf>,
    /// Fixture to run when no scenario file names one.
    #[arg(long, value_enum)]
    pub fixture: Option<FixtureName>,
    /// Directory for CSV output.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write the final frame's `x,rho,S,Vq,b`.
    #[arg(long)]
    pub fields: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_paths: Option<usize>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureName {
    Harmonic,
    Free,
}

/// A failed invocation and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Checks ran and at least one failed; the report is already printed.
    Check,
    Usage(String),
    Eval(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check => 1,
            Failure::Usage(_) => 2,
            Failure::Eval(_) => 3,
            Failure::Runtime(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Check => {}
                Failure::Usage(m) | Failure::Eval(m) | Failure::Runtime(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
