//! Command-line front end.
//!
//! Exit codes: 0 success, 1 infeasible or failed regression, 2 usage or
//! input error, 3 resource limit.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::benchmark::{run_regression, FYFFE_VARIANTS};
use crate::enumeration::{forward_bat, upper_bound_bat, EnumerationError};
use crate::model::{feasibility_violations, parse_solution_string, RapInstance};
use crate::solver::{reconstruct, solve, Outcome, SolveError, SolveReport, SolverOptions, DEFAULT_MAX_SET_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitStatus(pub i32);

impl ExitStatus {
    pub const SUCCESS: ExitStatus = ExitStatus(0);
    pub const FAILURE: ExitStatus = ExitStatus(1);
    pub const USAGE: ExitStatus = ExitStatus(2);
    pub const RESOURCE: ExitStatus = ExitStatus(3);
}

#[derive(Debug, Parser)]
#[command(name = "rap", version, about = "Exact solver for series-parallel redundancy allocation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve an instance file.
    Solve(SolveArgs),
    /// Run the Fyffe regression.
    Bench(BenchArgs),
    /// Evaluate a solution string against an instance.
    Verify(VerifyArgs),
    /// Dump a binary-addition-tree enumeration as CSV.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Args)]
struct ReductionFlags {
    /// Ignore the instance's reliability lower bound.
    #[arg(long)]
    no_rlb: bool,
    /// Disable the dominance rule.
    #[arg(long)]
    no_dominance: bool,
    /// Disable the suffix weight/cost bounds (ceilings are still enforced).
    #[arg(long)]
    no_bounds: bool,
    /// Abort when a stage keeps more partial solutions than this.
    #[arg(long, default_value_t = DEFAULT_MAX_SET_SIZE)]
    max_set: usize,
}

impl ReductionFlags {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            use_rlb: !self.no_rlb,
            use_dominance: !self.no_dominance,
            use_dynamic_bounds: !self.no_bounds,
            collect_stats: true,
            max_set_size: self.max_set,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    flags: ReductionFlags,
    /// Write per-stage set sizes to this CSV file.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated ids or ranges, e.g. `1,5-7` (default: all 33).
    #[arg(long)]
    ids: Option<String>,
    #[command(flatten)]
    flags: ReductionFlags,
    /// Write the result table to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    instance: PathBuf,
    /// Digit groups, e.g. "0030 200 0002 ...".
    solution: String,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[arg(long, allow_negative_numbers = true)]
    mu: i64,
    /// 2 walks all binary vectors; larger values walk vectors with sum < cap.
    #[arg(long, allow_negative_numbers = true)]
    cap: i64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    #[serde(flatten)]
    report: &'a SolveReport,
    solution: Option<String>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::USAGE } else { ExitStatus::SUCCESS };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a, out, err),
        Command::Bench(a) => cmd_bench(a, out, err),
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::Enumerate(a) => cmd_enumerate(a, out, err),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        ExitStatus::USAGE
    })
}

type CmdResult = Result<ExitStatus, std::io::Error>;

fn load_instance(path: &PathBuf, err: &mut dyn Write) -> Result<Option<RapInstance>, std::io::Error> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            writeln!(err, "error: cannot read {}: {e}", path.display())?;
            return Ok(None);
        }
    };
    match RapInstance::from_json(&text) {
        Ok(inst) => Ok(Some(inst)),
        Err(e) => {
            writeln!(err, "error: {}: {e}", path.display())?;
            Ok(None)
        }
    }
}

fn cmd_solve(args: SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let Some(instance) = load_instance(&args.instance, err)? else {
        return Ok(ExitStatus::USAGE);
    };
    let report = match solve(&instance, &args.flags.options()) {
        Ok(r) => r,
        Err(e @ SolveError::SetTooLarge { .. }) => {
            writeln!(err, "error: {e}")?;
            return Ok(ExitStatus::RESOURCE);
        }
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(ExitStatus::USAGE);
        }
    };
    if let Some(path) = &args.stats {
        fs::write(path, report.stats_csv())?;
    }
    let solution = reconstruct(&report).ok();
    if args.json {
        let json = serde_json::to_string_pretty(&JsonReport { report: &report, solution: solution.clone() })
            .expect("report serializes");
        writeln!(out, "{json}")?;
    } else {
        match (&report.outcome, &report.optimum) {
            (Outcome::Optimal, Some(opt)) => {
                let a = opt.aggregates;
                writeln!(out, "R={:.11} W={} C={}", a.reliability, a.weight, a.cost)?;
                match &solution {
                    Some(s) => writeln!(out, "solution: {s}")?,
                    None => writeln!(out, "solution: {:?}", opt.configs.iter().map(|c| &c.0).collect::<Vec<_>>())?,
                }
            }
            (Outcome::BelowLowerBound, _) => {
                writeln!(out, "infeasible: no solution at or above the reliability lower bound")?;
            }
            _ => writeln!(out, "infeasible")?,
        }
        writeln!(out, "time: {:.3}s", report.wall_time)?;
    }
    Ok(if report.optimum.is_some() { ExitStatus::SUCCESS } else { ExitStatus::FAILURE })
}

fn parse_ids(spec: &str) -> Result<Vec<i64>, String> {
    let mut ids = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("invalid id list entry {part:?}");
        match part.split_once('-') {
            Some((a, b)) => {
                let a: i64 = a.trim().parse().map_err(|_| bad())?;
                let b: i64 = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                ids.extend(a..=b);
            }
            None => ids.push(part.parse().map_err(|_| bad())?),
        }
    }
    if ids.is_empty() {
        return Err("empty id list".into());
    }
    Ok(ids)
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let ids = match &args.ids {
        Some(s) => match parse_ids(s) {
            Ok(ids) => ids,
            Err(e) => {
                writeln!(err, "error: {e}")?;
                return Ok(ExitStatus::USAGE);
            }
        },
        None => (1..=i64::from(FYFFE_VARIANTS)).collect(),
    };
    let jobs = args.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = match run_regression(&ids, &args.flags.options(), jobs) {
        Ok(r) => r,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(ExitStatus::USAGE);
        }
    };
    writeln!(out, "{:>3} {:>5} {:>14} {:>4} {:>4} {:>9} {:>5}", "id", "W_UB", "R", "W", "C", "time(s)", "pass")?;
    for row in &report.rows {
        match &row.found {
            Ok(f) => writeln!(
                out,
                "{:>3} {:>5} {:>14.11} {:>4} {:>4} {:>9.3} {:>5}",
                row.id,
                row.weight_ceiling,
                f.reliability,
                f.weight,
                f.cost,
                row.wall_time,
                if row.pass() { "ok" } else { "FAIL" }
            )?,
            Err(e) => writeln!(out, "{:>3} {:>5} error: {e}", row.id, row.weight_ceiling)?,
        }
    }
    writeln!(out, "{}/{} pass", report.passed(), report.rows.len())?;
    if let Some(path) = &args.csv {
        fs::write(path, report.to_csv())?;
    }
    let resource = report.rows.iter().any(|r| matches!(&r.found, Err(e) if e.contains("partial solutions")));
    Ok(if report.all_pass() {
        ExitStatus::SUCCESS
    } else if resource {
        ExitStatus::RESOURCE
    } else {
        ExitStatus::FAILURE
    })
}

fn cmd_verify(args: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let Some(instance) = load_instance(&args.instance, err)? else {
        return Ok(ExitStatus::USAGE);
    };
    let solution = match parse_solution_string(&args.solution, &instance) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(ExitStatus::USAGE);
        }
    };
    let a = solution.aggregates;
    writeln!(out, "R={:.11} W={} C={}", a.reliability, a.weight, a.cost)?;
    let violations = feasibility_violations(&solution, &instance);
    let check = |name: &str| if violations.iter().any(|v| v.name() == name) { "violated" } else { "ok" };
    writeln!(out, "cost: {} (C={} <= {})", check("cost"), a.cost, instance.cost_ceiling)?;
    writeln!(out, "weight: {} (W={} <= {})", check("weight"), a.weight, instance.weight_ceiling)?;
    let counts_ok = check("min_total") == "ok" && check("max_total") == "ok";
    writeln!(out, "component counts: {}", if counts_ok { "ok" } else { "violated" })?;
    for v in &violations {
        writeln!(out, "  {v}")?;
    }
    if violations.is_empty() {
        writeln!(out, "feasible")?;
        Ok(ExitStatus::SUCCESS)
    } else {
        let names: Vec<&str> = violations.iter().map(|v| v.name()).collect();
        writeln!(out, "infeasible({})", names.join(","))?;
        Ok(ExitStatus::FAILURE)
    }
}

fn cmd_enumerate(args: EnumerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let order = if args.mu < 1 {
        Err(EnumerationError::BadWidth(args.mu))
    } else if args.cap < 2 || args.cap > i64::from(u32::MAX) {
        Err(EnumerationError::BadCap(args.cap))
    } else if args.cap == 2 {
        forward_bat(args.mu as usize)
    } else {
        upper_bound_bat(args.mu as usize, args.cap as u32)
    };
    let order = match order {
        Ok(o) => o,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(ExitStatus::USAGE);
        }
    };
    let csv = order.to_csv();
    match &args.csv {
        Some(path) => {
            fs::write(path, csv)?;
            writeln!(out, "{} vectors written to {}", order.len(), path.display())?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(ExitStatus::SUCCESS)
}
