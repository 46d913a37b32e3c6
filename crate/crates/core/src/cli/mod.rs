//! Command-line front end. [`run`] parses arguments and returns the exit
//! code; the binary only forwards it.
//!
//! Exit codes: 0 success, 1 bad input or inconsistency, 2 infeasible,
//! 3 invalid schedule.

pub mod bench;
pub mod sweep;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::{
    generate_instance, tree_metrics, GenParams, Model, MulticastInstance, NormalForm, PoiseGuess, PoiseTree,
};
use crate::oracle::{exact_min_poise_ktree, exact_multicast_rounds, DEFAULT_LIMIT_N};
use crate::schedule::{round_lower_bounds, tree_broadcast_schedule, validate_schedule, Schedule};
pub use sweep::{solve_guess, sweep, Mode, SweepOptions, SweepReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INVALID_SCHEDULE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "poisekit", version, about = "Low-poise multicast trees and telephone schedules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a normalized instance.
    Generate(GenerateArgs),
    /// Build a low-poise k-tree for one guess or the whole guess grid.
    Solve(SolveArgs),
    /// Turn a tree into a round-by-round schedule.
    Schedule(ScheduleArgs),
    /// Check a schedule against an instance.
    Validate(ValidateArgs),
    /// Exhaustive optimum for tiny instances.
    Oracle(OracleArgs),
    /// Run a benchmark suite and print CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// e.g. `random-digraph:n=8,m=20`, `grid:w=3,h=3`.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub terminals: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the model's orientation.
    #[arg(long)]
    pub directed: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    pub mode: Mode,
    #[arg(long = "B", requires = "d")]
    pub b: Option<usize>,
    #[arg(long = "D", requires = "b")]
    pub d: Option<usize>,
    /// Try every guess on the grid; the default when no guess is given.
    #[arg(long, conflicts_with_all = ["b", "d"])]
    pub sweep: bool,
    /// Stop raising B for a fixed D once poise starts to grow.
    #[arg(long)]
    pub fast_sweep: bool,
    /// Override the instance's k.
    #[arg(long)]
    pub k: Option<usize>,
    /// Recorded in the output; the solvers themselves are deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the solver trace or sweep report.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Where to write the tree (original vertex ids).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
    /// Terminals that must be informed; defaults to the instance's k.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Poise,
    Rounds,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = OracleKind::Poise)]
    pub which: OracleKind,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_LIMIT_N)]
    pub limit_n: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "desk")]
    pub suite: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Append a wall-clock `time_us` column. Output is then not reproducible.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InfeasibleGuess(_) | Error::NoKTree | Error::UnreachableK { .. } | Error::CoverStalled { .. } => {
            EXIT_INFEASIBLE
        }
        _ => EXIT_INPUT,
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Schedule(a) => cmd_schedule(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn read_instance(path: &Path, k: Option<usize>) -> Result<MulticastInstance> {
    let inst: MulticastInstance = read_json(path)?;
    match k {
        Some(k) => inst.with_k(k),
        None => Ok(inst),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn cmd_generate(a: GenerateArgs) -> Result<i32> {
    let model: Model = a.model.parse()?;
    let params = GenParams {
        k: a.k,
        terminals: a.terminals,
        seed: a.seed,
        directed: a.directed,
    };
    let inst = generate_instance(&model, &params)?;
    emit(a.out.as_deref(), &serde_json::to_string(&inst)?)?;
    Ok(EXIT_OK)
}

pub fn cmd_solve(a: SolveArgs) -> Result<i32> {
    let inst = read_instance(&a.input, a.k)?;
    let form = NormalForm::of(&inst)?;
    let work = &form.normalized;
    let (tree, guess, trace) = match (a.b, a.d) {
        (Some(b), Some(d)) if !a.sweep => {
            let guess = PoiseGuess::new(b, d)?;
            let solved = solve_guess(work, a.mode, guess)?;
            (solved.tree, guess, solved.trace)
        }
        _ => {
            let report = sweep(work, a.mode, SweepOptions { fast: a.fast_sweep, threads: None })?;
            let trace = serde_json::to_value(&report)?;
            let Some(best) = report.best else {
                if let Some(p) = &a.trace {
                    fs::write(p, serde_json::to_string_pretty(&trace)?)?;
                }
                return Err(Error::InfeasibleGuess("every guess on the grid is infeasible".into()));
            };
            (best.tree, PoiseGuess { degree: best.b, height: best.d }, trace)
        }
    };
    let original_tree = form.to_original(&tree);
    let metrics = tree_metrics(&original_tree, &inst)?;
    let normalized_metrics = tree_metrics(&tree, work)?;
    if let Some(p) = &a.trace {
        fs::write(p, to_json(&trace)?)?;
    }
    if let Some(p) = &a.out {
        fs::write(p, serde_json::to_string(&original_tree)?)?;
    }
    let summary = json!({
        "guess": guess,
        "metrics": metrics,
        "normalized": form.transformed(),
        "normalized_metrics": normalized_metrics,
        "seed": a.seed,
        "tree": if a.out.is_none() { serde_json::to_value(&original_tree)? } else { serde_json::Value::Null },
    });
    emit(None, &serde_json::to_string(&summary)?)?;
    Ok(EXIT_OK)
}

fn cmd_schedule(a: ScheduleArgs) -> Result<i32> {
    let inst = read_instance(&a.input, None)?;
    let tree: PoiseTree = read_json(&a.tree)?;
    tree_metrics(&tree, &inst)?;
    let schedule = tree_broadcast_schedule(&tree);
    let bounds = round_lower_bounds(&inst, Some(&tree));
    let line = format!(
        "rounds={} doubling={} poise_half={}",
        schedule.len(),
        bounds.doubling,
        bounds.poise_half.unwrap_or(0)
    );
    match &a.out {
        Some(p) => {
            fs::write(p, serde_json::to_string(&schedule)?)?;
            println!("{line}");
        }
        None => {
            println!("{}", serde_json::to_string(&schedule)?);
            eprintln!("{line}");
        }
    }
    Ok(EXIT_OK)
}

fn cmd_validate(a: ValidateArgs) -> Result<i32> {
    let inst = read_instance(&a.input, None)?;
    let schedule: Schedule = read_json(&a.schedule)?;
    let report = validate_schedule(&inst, &schedule, a.k.unwrap_or(inst.k()));
    emit(a.out.as_deref(), &serde_json::to_string(&report)?)?;
    Ok(if report.valid { EXIT_OK } else { EXIT_INVALID_SCHEDULE })
}

fn cmd_oracle(a: OracleArgs) -> Result<i32> {
    let inst = read_instance(&a.input, a.k)?;
    let text = match a.which {
        OracleKind::Poise => serde_json::to_string(&exact_min_poise_ktree(&inst, a.limit_n)?)?,
        OracleKind::Rounds => serde_json::to_string(&json!({ "rounds": exact_multicast_rounds(&inst)? }))?,
    };
    emit(None, &text)?;
    Ok(EXIT_OK)
}

fn cmd_bench(a: BenchArgs) -> Result<i32> {
    let rows = bench::run_suite(&a.suite, a.seed, a.timing)?;
    let csv = bench::to_csv(&rows, a.timing)?;
    match &a.out {
        Some(p) => fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}
