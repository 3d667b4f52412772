//! Argument parsing.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use steerkit_core::Tolerances;

use crate::commands::{self, FixtureName, Kind, Settings};
use crate::{emit, CliError};

#[derive(Debug, Parser)]
#[command(name = "steerkit", version, about = "Steering classification, filter synthesis and robustness")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Write the result here instead of stdout; artifacts and the manifest
    /// go next to it. For `figure2` this is a directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Target accuracy for distillation, dilution and optimal states.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Relative duality-gap tolerance of the SDP solves.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Points per axis for `figure2`.
    #[arg(long, global = true, default_value_t = 11)]
    pub grid: usize,
    /// Clip and renormalize measurement inputs that fail validation.
    #[arg(long, global = true)]
    pub repair_povm: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Sr,
    Ir,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FixtureArg {
    QuquartPair,
    QuquartPairPrinted,
    QuquartAssemblage,
    QutritMub,
    QutritCanonical,
    QutritMember,
    QubitXz,
    QubitCanonical,
    QubitMember,
    Lhs,
    Signalling,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check positivity, no-signalling and normalization.
    Validate { path: PathBuf },
    /// Steering-equivalent observables of an assemblage.
    Seo { path: PathBuf },
    /// Decide whether two assemblages share their observables up to a unitary.
    Classify { first: PathBuf, second: PathBuf },
    /// Steering (sr) or incompatibility (ir) robustness with its witness.
    Robustness {
        path: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Also write the SDP in SDPA sparse format.
        #[arg(long)]
        export_sdpa: Option<PathBuf>,
    },
    /// Filter towards the most steerable member of the class.
    Distill { path: PathBuf },
    /// Filter towards a member with robustness at most --eps.
    Dilute { path: PathBuf },
    /// Bipartite state maximizing steering robustness for given measurements.
    OptimalState { path: PathBuf },
    /// Monte Carlo estimate of a filter's success rate.
    Rate {
        #[arg(long)]
        p: f64,
        #[arg(long = "n", default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        batches: u64,
    },
    /// Robustness and success-probability maps over the qutrit class.
    Figure2,
    /// Write a built-in input file.
    Fixture {
        #[arg(value_enum)]
        name: FixtureArg,
        /// Leading Schmidt coefficients for the `*-member` fixtures.
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
    },
}

impl GlobalArgs {
    pub fn settings(&self) -> Settings {
        let mut tol = Tolerances::default();
        if let Some(t) = self.tol {
            tol.solver = t;
        }
        Settings {
            out: self.out.clone(),
            eps: self.eps,
            seed: self.seed,
            tol,
            grid: self.grid,
            repair_povm: self.repair_povm,
        }
    }
}

fn fixture_name(f: FixtureArg) -> FixtureName {
    match f {
        FixtureArg::QuquartPair => FixtureName::QuquartPair,
        FixtureArg::QuquartPairPrinted => FixtureName::QuquartPairPrinted,
        FixtureArg::QuquartAssemblage => FixtureName::QuquartAssemblage,
        FixtureArg::QutritMub => FixtureName::QutritMub,
        FixtureArg::QutritCanonical => FixtureName::QutritCanonical,
        FixtureArg::QutritMember => FixtureName::QutritMember,
        FixtureArg::QubitXz => FixtureName::QubitXz,
        FixtureArg::QubitCanonical => FixtureName::QubitCanonical,
        FixtureArg::QubitMember => FixtureName::QubitMember,
        FixtureArg::Lhs => FixtureName::Lhs,
        FixtureArg::Signalling => FixtureName::Signalling,
    }
}

pub fn dispatch(cli: &Cli) -> Result<commands::Report, CliError> {
    let s = cli.global.settings();
    match &cli.command {
        Command::Validate { path } => commands::validate(path, &s),
        Command::Seo { path } => commands::seo(path, &s),
        Command::Classify { first, second } => commands::classify(first, second, &s),
        Command::Robustness { path, kind, export_sdpa } => {
            let kind = match kind {
                KindArg::Sr => Kind::Sr,
                KindArg::Ir => Kind::Ir,
            };
            commands::robustness(path, kind, export_sdpa.as_deref(), &s)
        }
        Command::Distill { path } => commands::distill(path, &s),
        Command::Dilute { path } => commands::dilute(path, &s),
        Command::OptimalState { path } => commands::optimal(path, &s),
        Command::Rate { p, n, batches } => commands::rate(*p, *n, *batches, &s),
        Command::Figure2 => commands::figure2(&s),
        Command::Fixture { name, mu } => commands::fixture(fixture_name(*name), mu, &s),
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("STEERKIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let arguments: Vec<String> = std::env::args().skip(1).collect();
    let settings = cli.global.settings();
    match dispatch(&cli).and_then(|report| emit(report, &settings, arguments)) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
