//! Command-line front end.
//!
//! Exit codes: 0 success (and "recoverable" for `check`), 1 usage error,
//! 2 numerical or i/o failure, 3 valid run but not recoverable, 4
//! experiment completed but a tolerance check failed.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use modcs::experiments::{self, ExperimentConfig, Scale};
use modcs::io;
use modcs::numkit::{DenseMatrix, IndexSet, SignPattern};
use modcs::probability::{self, CheckerKind, Scenario};
use modcs::recovery::DEFAULT_RECOVERY_TOL;
use modcs::snc::{self, SncReport, DEFAULT_MARGIN_TOL};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_FAILURE: u8 = 2;
const EXIT_NOT_RECOVERABLE: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "modcs",
    about = "Recoverability certification and recovery-probability estimation \
             for modified compressive sensing with partially known support"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded uniform random measurement matrix as CSV.
    GenMatrix(GenMatrixArgs),
    /// Certify recoverability of one support/sign configuration.
    Check(CheckArgs),
    /// Exact recovery probability by exhausting the quad space.
    ProbExact(ProbExactArgs),
    /// Monte Carlo recovery probability estimate.
    ProbMc(ProbMcArgs),
    /// Reproduce the fig1/fig2 curve studies.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenMatrixArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long, default_value_t = -0.5)]
    lo: f64,
    #[arg(long, default_value_t = 0.5)]
    hi: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// Matrix CSV file.
    #[arg(long)]
    matrix: PathBuf,
    /// True support N: comma-separated 0-based indices.
    #[arg(long)]
    support: String,
    /// Known support T: comma-separated 0-based indices (may be empty).
    #[arg(long, default_value = "")]
    known: String,
    /// Signs of the truth on Delta = support \ known, as a +/- string
    /// aligned with the sorted Delta indices.
    #[arg(long, default_value = "")]
    signs: String,
    /// snc: full certificate; solve: one direct solve.
    #[arg(long, value_enum, default_value_t = CheckMethod::Snc)]
    method: CheckMethod,
    #[arg(long, default_value_t = DEFAULT_RECOVERY_TOL)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckMethod {
    Snc,
    Solve,
}

#[derive(Args)]
struct ProbArgsCommon {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    ell: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    p1: usize,
    /// snc, solve or auto.
    #[arg(long, default_value = "auto")]
    checker: CheckerKind,
    /// Write the full JSON estimate here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProbExactArgs {
    #[command(flatten)]
    common: ProbArgsCommon,
}

#[derive(Args)]
struct ProbMcArgs {
    #[command(flatten)]
    common: ProbArgsCommon,
    #[arg(long)]
    samples: u64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig1,
    Fig2,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    figure: Figure,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "reduced")]
    scale: Scale,
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::GenMatrix(args) => cmd_gen_matrix(args),
        Command::Check(args) => cmd_check(args),
        Command::ProbExact(args) => cmd_prob_exact(args),
        Command::ProbMc(args) => cmd_prob_mc(args),
        Command::Experiment(args) => cmd_experiment(args),
    };
    ExitCode::from(code)
}

fn usage(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn failure(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_FAILURE
}

// --seed falls back to MODCS_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("MODCS_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|_| format!("MODCS_SEED is not a 64-bit unsigned integer: '{v}'")),
        Err(_) => Ok(0),
    }
}

fn parse_index_list(name: &str, text: &str, universe: usize) -> Result<IndexSet, String> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(IndexSet::empty(universe));
    }
    let members: Result<Vec<usize>, _> = trimmed
        .split(',')
        .map(|tok| tok.trim().parse::<usize>())
        .collect();
    let members = members.map_err(|e| format!("--{name}: {e}"))?;
    IndexSet::new(universe, members).map_err(|e| format!("--{name}: {e}"))
}

fn parse_signs(text: &str, delta: &IndexSet) -> Result<SignPattern, String> {
    let signs: Result<Vec<i8>, String> = text
        .trim()
        .chars()
        .map(|c| match c {
            '+' => Ok(1),
            '-' => Ok(-1),
            other => Err(format!("--signs: unexpected character '{other}'")),
        })
        .collect();
    let signs = signs?;
    if signs.len() != delta.len() {
        return Err(format!(
            "--signs: {} signs given for {} unknown-support indices",
            signs.len(),
            delta.len()
        ));
    }
    SignPattern::new(delta.clone(), signs).map_err(|e| format!("--signs: {e}"))
}

fn load_matrix(path: &Path) -> Result<DenseMatrix, u8> {
    io::read_matrix_csv(path).map_err(|e| failure(e))
}

fn cmd_gen_matrix(args: GenMatrixArgs) -> u8 {
    if args.rows == 0 || args.cols == 0 {
        return usage("--rows and --cols must be at least 1");
    }
    if args.lo >= args.hi {
        return usage("--lo must be strictly below --hi");
    }
    let seed = match resolve_seed(args.seed) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let a = experiments::gen_uniform_matrix(
        args.rows,
        args.cols,
        args.lo,
        args.hi,
        &mut probability::substream(seed, 0),
    );
    match io::write_matrix_csv(&args.out, &a) {
        Ok(()) => EXIT_OK,
        Err(e) => failure(e),
    }
}

fn cmd_check(args: CheckArgs) -> u8 {
    let a = match load_matrix(&args.matrix) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let n = a.cols();
    let support = match parse_index_list("support", &args.support, n) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let known = match parse_index_list("known", &args.known, n) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    if support.is_empty() {
        return usage("--support must not be empty");
    }
    let delta = support.difference(&known).expect("same universe");
    let known_true = support.intersection(&known).expect("same universe");
    let pattern = match parse_signs(&args.signs, &delta) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    if args.tol <= 0.0 {
        return usage("--tol must be positive");
    }

    let report = match args.method {
        CheckMethod::Snc => {
            let inst = match snc::SncInstance::new(a, known, delta, pattern) {
                Ok(i) => i,
                Err(e) => return usage(e),
            };
            match snc::check_snc(&inst, DEFAULT_MARGIN_TOL) {
                Ok(r) => r,
                Err(e) => return failure(e),
            }
        }
        CheckMethod::Solve => {
            let a_t = match a.columns(&known) {
                Ok(m) => m,
                Err(e) => return usage(e),
            };
            let rank_ok =
                a_t.rank(modcs::numkit::DEFAULT_PIVOT_TOL) == known.len();
            let ok = match snc::check_by_solving_unit(&a, &known, &known_true, &pattern, args.tol)
            {
                Ok(v) => v,
                Err(e) => return failure(e),
            };
            SncReport {
                recoverable: ok,
                rank_ok,
                worst_margin: 0.0,
                worst_subset: IndexSet::empty(n),
                subsets_checked: 0,
                marginal: false,
            }
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if report.recoverable {
        EXIT_OK
    } else {
        EXIT_NOT_RECOVERABLE
    }
}

fn build_scenario(a: &DenseMatrix, ell: usize, p: usize, p1: usize) -> Result<Scenario, String> {
    Scenario::new(a.cols(), ell, p, p1).map_err(|e| e.to_string())
}

fn emit_estimate(
    est: &probability::ProbabilityEstimate,
    out: Option<&Path>,
) -> u8 {
    let json = serde_json::to_string_pretty(est).unwrap();
    if let Some(path) = out {
        if let Err(e) = io::atomic_write(path, json.as_bytes()) {
            return failure(e);
        }
    }
    println!("{:.12}", est.value);
    EXIT_OK
}

fn cmd_prob_exact(args: ProbExactArgs) -> u8 {
    let c = args.common;
    let a = match load_matrix(&c.matrix) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let scenario = match build_scenario(&a, c.ell, c.p, c.p1) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    match probability::exact_probability(&a, &scenario, c.checker, DEFAULT_MARGIN_TOL) {
        Ok(est) => emit_estimate(&est, c.out.as_deref()),
        Err(e) => failure(e),
    }
}

fn cmd_prob_mc(args: ProbMcArgs) -> u8 {
    let c = args.common;
    if args.samples == 0 {
        return usage("--samples must be at least 1");
    }
    let seed = match resolve_seed(args.seed) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let a = match load_matrix(&c.matrix) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let scenario = match build_scenario(&a, c.ell, c.p, c.p1) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    match probability::mc_probability(
        &a,
        &scenario,
        args.samples,
        seed,
        c.checker,
        DEFAULT_MARGIN_TOL,
    ) {
        Ok(est) => emit_estimate(&est, c.out.as_deref()),
        Err(e) => failure(e),
    }
}

fn cmd_experiment(args: ExperimentArgs) -> u8 {
    let seed = match resolve_seed(args.seed) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let outcome = match args.figure {
        Figure::Fig1 => {
            let cfg = ExperimentConfig::example1(seed);
            experiments::run_example1(&cfg, &args.out_dir)
        }
        Figure::Fig2 => {
            let cfg = ExperimentConfig::example2(seed, args.scale);
            experiments::run_example2(&cfg, &args.out_dir)
        }
    };
    match outcome {
        Ok(o) if o.checks_passed => EXIT_OK,
        Ok(_) => {
            eprintln!("experiment completed but a tolerance check failed; see summary.json");
            EXIT_TOLERANCE
        }
        Err(e) => failure(e),
    }
}
