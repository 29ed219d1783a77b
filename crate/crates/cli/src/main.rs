//! `modeq`: automorphism groups, closures, imaginaries, interpretations,
//! sections and covers of finite structures from the command line.

mod commands;
mod mapfile;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use modeq_core::covers::Verdict;
use modeq_core::Limits;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "modeq",
    version,
    about = "Model-theoretic computations on finite structures"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Largest arity of imaginary sorts.
    #[arg(long, global = true, default_value_t = 3)]
    pub kmax: usize,
    /// Largest group order enumerated element by element.
    #[arg(long, global = true, env = "MODEQ_MAX_ORDER", default_value_t = 2000)]
    pub max_group_order: usize,
    /// Cross-check against exhaustive enumeration where one exists.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Recorded in reports; every algorithm is deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub json: bool,
}

impl Global {
    pub fn limits(&self) -> Limits {
        Limits {
            kmax: self.kmax,
            max_group_order: self.max_group_order,
            ..Limits::default()
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Automorphism group: generators, order, orbits.
    Aut { file: PathBuf },
    /// Definable closure of a set of elements.
    Dcl {
        file: PathBuf,
        /// Comma-separated element names.
        #[arg(long, value_delimiter = ',')]
        fix: Vec<String>,
    },
    /// Orbit of a tuple under the automorphism group.
    Orbit {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        tuple: Vec<String>,
    },
    /// Imaginary sorts.
    #[command(subcommand)]
    Imag(ImagCommand),
    /// Interpretations given by a map file.
    Morph {
        #[arg(value_enum)]
        mode: MorphMode,
        source: PathBuf,
        target: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    /// The sequence 1 -> Aut(M/N) -> Aut(M) -> Aut(N) -> 1.
    Exact {
        file: PathBuf,
        /// Comma-separated sorts spanning N.
        #[arg(long, value_delimiter = ',')]
        sub: Vec<String>,
    },
    /// Sections of the restriction map.
    #[command(subcommand)]
    Section(SectionCommand),
    /// Writes the cyclic torsor cover of Z/m over Z/(m/n).
    Torsor {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Name the base point n0 by a constant.
        #[arg(long)]
        named_point: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cover structures.
    #[command(subcommand)]
    Cover(CoverCommand),
    /// Sections against definable points over a family of covers or a single file.
    MainTheorem {
        #[arg(long, default_value = "cyclic")]
        family: String,
        #[arg(long, default_value_t = 24)]
        max_m: usize,
        /// Check one cover file instead of a family.
        #[arg(long, conflicts_with = "max_m")]
        file: Option<PathBuf>,
    },
    /// Towers of 0-definable substructures.
    #[command(subcommand)]
    Tower(TowerCommand),
}

#[derive(Subcommand, Debug)]
pub enum ImagCommand {
    /// The quotient D/E. Each of `--d` and `--e` is a formula (free variables
    /// in order of first occurrence) or a comprehension `{ x:S, ... | φ }`.
    Quotient {
        file: PathBuf,
        #[arg(long)]
        d: String,
        #[arg(long)]
        e: String,
    },
    /// A parameter whose fixing group is the subgroup in a group file.
    Stab {
        file: PathBuf,
        #[arg(long)]
        subgroup: PathBuf,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorphMode {
    Check,
    Embed,
    Surj,
    Iso,
}

#[derive(Subcommand, Debug)]
pub enum SectionCommand {
    Search {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        sub: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum CoverCommand {
    Check { file: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum TowerCommand {
    /// DIR holds `level0.st`, `level1.st`, ... and `inclusions.map`.
    Check { dir: PathBuf },
}

/// What a subcommand produced, before timing and flags are attached.
pub struct Outcome {
    pub instances: Vec<String>,
    pub results: serde_json::Value,
    pub verdict: Verdict,
    pub text: String,
}

#[derive(Serialize)]
struct Report<'a> {
    command: Vec<String>,
    seed: Option<u64>,
    kmax: usize,
    max_group_order: usize,
    oracle: bool,
    instances: &'a [String],
    results: &'a serde_json::Value,
    verdict: Verdict,
    elapsed_ms: u128,
}

fn exit_code(v: Verdict) -> ExitCode {
    match v {
        Verdict::Pass | Verdict::Vacuous => ExitCode::SUCCESS,
        Verdict::Fail | Verdict::Undecided => ExitCode::from(1),
    }
}

/// Writes to stdout, tolerating a closed pipe.
fn emit(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = match commands::run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if cli.global.json {
        // A family sweep prints the bare array of per-instance reports.
        let out = if matches!(cli.command, Command::MainTheorem { file: None, .. }) {
            serde_json::to_string_pretty(&outcome.results)
        } else {
            serde_json::to_string_pretty(&Report {
                command: std::env::args().collect(),
                seed: cli.global.seed,
                kmax: cli.global.kmax,
                max_group_order: cli.global.max_group_order,
                oracle: cli.global.oracle,
                instances: &outcome.instances,
                results: &outcome.results,
                verdict: outcome.verdict,
                elapsed_ms: start.elapsed().as_millis(),
            })
        };
        emit(&format!("{}\n", out.expect("reports serialize")));
    } else {
        let verdict = serde_json::to_value(outcome.verdict).unwrap();
        emit(&format!(
            "{}verdict: {}\n",
            outcome.text,
            verdict.as_str().unwrap()
        ));
    }
    exit_code(outcome.verdict)
}
