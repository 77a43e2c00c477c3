//! `cantor`: invariants and approximate-conjugacy deciders for Cantor
//! minimal systems given as obd-v1 files.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cantor", version, about = "Invariants and conjugacy deciders for Cantor minimal systems")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Levels explored by bounded searches.
    #[arg(long, global = true, default_value_t = 40, value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: u64,
    /// Refinement levels tried above the partition level by the conjugator.
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_level: u64,
    /// Largest prime examined in spectra.
    #[arg(long, global = true, default_value_t = 97, value_parser = clap::value_parser!(u64).range(2..))]
    pub primes: u64,
    /// Largest total level span of a ladder.
    #[arg(long, global = true, default_value_t = 12, value_parser = clap::value_parser!(u64).range(2..))]
    pub span: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the emitted certificate here.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check structure, primitivity and proper ordering.
    Validate { system: String },
    /// Tower heights at levels 0..=LEVEL.
    Heights {
        system: String,
        #[arg(long, default_value_t = 4)]
        level: usize,
    },
    /// Class of a set of floors of one tower.
    K0Class {
        system: String,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        tower: usize,
        /// Comma-separated 1-based floors.
        #[arg(long, value_delimiter = ',', required = true)]
        floors: Vec<u64>,
    },
    /// Exact positivity of an element given at a level.
    Positivity {
        system: String,
        #[arg(long)]
        level: usize,
        /// Comma-separated coordinates, e.g. 1,-1.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        vector: Vec<i64>,
    },
    /// Periodic spectrum (divisor set of the order unit) up to the prime cutoff.
    Spectrum { system: String },
    /// Weak approximate conjugacy.
    Weak { a: String, b: String },
    /// Approximate tau-conjugacy.
    Tau { a: String, b: String },
    /// Approximate K-conjugacy (strong orbit equivalence).
    Kconj { a: String, b: String },
    /// Full-group corrector at a partition level.
    Conjugator {
        a: String,
        b: String,
        #[arg(long, default_value_t = 2)]
        level: usize,
    },
    /// Re-check a certificate file.
    Verify { certificate: String },
    /// Orbit of a path under the Vershik map within its tower.
    Vershik {
        system: String,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = 0)]
        tower: usize,
        /// Comma-separated edge positions, root edge first; defaults to the minimal path.
        #[arg(long, value_delimiter = ',')]
        path: Option<Vec<usize>>,
        #[arg(long, default_value_t = 64)]
        steps: usize,
    },
    /// Least N such that every integer >= N is a nonnegative combination of K.
    Frobenius {
        #[arg(required = true, value_parser = clap::value_parser!(u64).range(1..))]
        k: Vec<u64>,
        /// Also write D as a combination of K.
        #[arg(long)]
        represent: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli.command, &cli.opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
