//! `rkit`: assess, compile and synthesize plans for incomplete STRIPS
//! models. Every invocation prints exactly one JSON report on stdout.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num::BigRational;

use report::RunReport;

#[derive(Parser, Debug)]
#[command(name = "rkit", version, about = "Robust planning under incomplete STRIPS domain models")]
struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump the ground model (fluents, actions, realization variables).
    Ground(ModelArgs),
    /// Compute the robustness of a plan, exactly or by sampling.
    Assess(AssessArgs),
    /// Compile to a conformant probabilistic problem and write PPDDL.
    Compile(CompileArgs),
    /// Check that robustness equals the compiled plan's goal probability.
    Verify(VerifyArgs),
    /// Synthesize a plan meeting a robustness threshold.
    Plan(PlanArgs),
    /// Add random incompleteness to a domain.
    Inject(InjectArgs),
    /// Run the planner over a grid of thresholds and problems.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    domain: PathBuf,
    problem: PathBuf,
}

#[derive(Args, Debug)]
struct AssessArgs {
    #[command(flatten)]
    model: ModelArgs,
    plan: PathBuf,
    /// Largest number of variables enumerated exactly; beyond it, sample.
    #[arg(long, default_value_t = rkit_core::semantics::DEFAULT_ENUMERATION_CAP)]
    cap: usize,
    /// Sample even when exact enumeration is possible.
    #[arg(long)]
    sampled: bool,
    #[arg(long, default_value_t = 0.02)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include the per-completion ledger (exact mode only).
    #[arg(long)]
    ledger: bool,
    /// Threshold to compare against; overrides the problem's `:rho`.
    #[arg(long, value_parser = parse_rho)]
    rho: Option<BigRational>,
}

#[derive(Args, Debug)]
struct CompileArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Output file; defaults to `<problem name>.ppddl`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_rho)]
    rho: Option<BigRational>,
    #[arg(long, default_value_t = rkit_core::semantics::DEFAULT_ENUMERATION_CAP)]
    cap: usize,
    /// Most variables on one action; each action gets 2^n effects.
    #[arg(long, default_value_t = rkit_core::cpp::DEFAULT_ACTION_CAP)]
    action_cap: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    plan: PathBuf,
    #[arg(long, value_parser = parse_rho)]
    rho: Option<BigRational>,
    #[arg(long, default_value_t = rkit_core::semantics::DEFAULT_ENUMERATION_CAP)]
    cap: usize,
    #[arg(long, default_value_t = rkit_core::cpp::DEFAULT_ACTION_CAP)]
    action_cap: usize,
}

#[derive(Args, Debug, Clone, Copy)]
struct BudgetArgs {
    #[arg(long, default_value_t = 60.0)]
    budget_secs: f64,
    #[arg(long, default_value_t = 1_000_000)]
    node_cap: u64,
    #[arg(long, default_value_t = rkit_core::semantics::DEFAULT_ENUMERATION_CAP)]
    cap: usize,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Threshold; overrides the problem's `:rho`.
    #[arg(long, value_parser = parse_rho, conflicts_with = "max")]
    rho: Option<BigRational>,
    /// Search for a maximally robust plan by increasing thresholds.
    #[arg(long)]
    max: bool,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Recorded in the report; the search itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the plan here.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InjectArgs {
    domain: PathBuf,
    /// Problem whose initial state receives the fresh propositions.
    problem: PathBuf,
    #[arg(short = 'm', long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_domain: PathBuf,
    #[arg(long)]
    out_problem: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    domain: PathBuf,
    /// One table row per problem file.
    problems: Vec<PathBuf>,
    /// Generated mini-logistics rows, e.g. `1..3`.
    #[arg(long, value_parser = parse_range)]
    m_range: Option<(usize, usize)>,
    /// Comma-separated thresholds; defaults to 0.1 through 0.9.
    #[arg(long, value_delimiter = ',', value_parser = parse_rho)]
    rhos: Vec<BigRational>,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_rho(s: &str) -> Result<BigRational, String> {
    rkit_core::parser::parse_rational(s).ok_or_else(|| format!("not a number: {s}"))
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected `a..b` or a single count, got {s}");
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let lo: usize = lo.parse().map_err(|_| bad())?;
    let hi: usize = hi.parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("RKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| format!("RKIT_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("RKIT_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut report = RunReport::new(commands::name(&cli.command));
    let code = match configure_threads().map_err(commands::Failure::usage).and_then(|()| commands::run(&cli.command, &mut report)) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            report.verdict = "error".into();
            report.error = Some(f.message);
            f.code
        }
    };
    let json = report.to_json();
    println!("{json}");
    if let Some(path) = &cli.report {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..3"), Ok((1, 3)));
        assert_eq!(parse_range("1..=3"), Ok((1, 3)));
        assert_eq!(parse_range("2"), Ok((2, 2)));
        assert!(parse_range("0..2").is_err());
        assert!(parse_range("3..1").is_err());
    }
}
