//! `hpx`: compute, verify and scan the sharp coefficient constants `C(k, p)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hpx_core::bounds::{self, BoundReport};
use hpx_core::candidates::{candidates_k1, candidates_k2, candidates_k3_p23, CandidateTable};
use hpx_core::exponent::{parse_grid, Exponent};
use hpx_core::search::{polynomial_search, scan, structured_search, SearchResult, SearchSettings, DEFAULT_SEED};
use hpx_core::solver::{solve_multistart_with, FlipSystem, MultistartReport, SolveOptions};
use hpx_core::verify::{self, four_decimals, Budget, Suite};
use serde::Serialize;
use thiserror::Error;

use crate::output::{Format, Sink};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Verification(_) => 1,
            Self::Usage(_) => 2,
            Self::NoConvergence(_) => 3,
        }
    }
}

impl From<hpx_core::Error> for CliError {
    fn from(e: hpx_core::Error) -> Self {
        use hpx_core::Error as E;
        match e {
            E::NoConvergence { .. } => Self::NoConvergence(e.to_string()),
            E::InvariantViolation(_) | E::StaleCandidate { .. } | E::PairingFailure(_) | E::NotNonnegative { .. } => {
                Self::Verification(e.to_string())
            }
            _ => Self::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "hpx", version, about = "Sharp coefficient constants C(k,p) for H^p, 0 < p < 1")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Output format; scan and bounds default to csv, everything else to json.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file (atomically) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Structured,
    Polynomial,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form value, bounds and the structured candidate table.
    Constants {
        #[arg(long)]
        k: usize,
        /// Exponent, e.g. 2/3 or 0.5.
        #[arg(long)]
        p: Exponent,
        #[command(flatten)]
        common: Common,
    },
    /// Multistart Levenberg-Marquardt on the flip equations.
    Solve {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: Exponent,
        /// Number of Blaschke factors; all of 0..=k when omitted.
        #[arg(long)]
        l: Option<usize>,
        #[arg(long, default_value_t = 200)]
        starts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Residual tolerance for convergence.
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        /// Accept iterates that leave the parameter domain.
        #[arg(long)]
        allow_outside: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Brute-force maximization of Re a_k over the unit ball.
    Search {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: Exponent,
        #[arg(long, value_enum, default_value_t = Mode::Structured)]
        mode: Mode,
        /// Structured mode only; best over all l when omitted.
        #[arg(long)]
        l: Option<usize>,
        /// Polynomial mode only; defaults to 3k.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, default_value_t = 64)]
        starts: usize,
        /// Evaluations (structured) or iterations (polynomial) per start.
        #[arg(long)]
        max_evals: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Quadrature tolerance of the final norm evaluation.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Structured search over k = 1..=kmax and a grid of p.
    Scan {
        #[arg(long)]
        kmax: usize,
        /// A single exponent or an inclusive grid start:stop:step.
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(long, default_value_t = 8000)]
        max_evals: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite; exit status 1 when any check fails.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value = "small")]
        budget: String,
        #[command(flatten)]
        common: Common,
    },
    /// Lower and upper bounds for C(k,p), one row per (k, p).
    Bounds {
        /// A single k; use --kmax for 1..=kmax.
        #[arg(long, conflicts_with = "kmax", required_unless_present = "kmax")]
        k: Option<usize>,
        #[arg(long)]
        kmax: Option<usize>,
        /// A single exponent or an inclusive grid start:stop:step.
        #[arg(long)]
        p: String,
        #[command(flatten)]
        common: Common,
    },
}

fn p_values(spec: &str) -> CliResult<Vec<Exponent>> {
    if spec.contains(':') {
        Ok(parse_grid(spec)?)
    } else {
        Ok(vec![spec.parse::<Exponent>()?])
    }
}

fn candidate_table(k: usize, p: Exponent) -> CliResult<Option<CandidateTable>> {
    let v = p.value();
    if v >= 1.0 {
        return Ok(None);
    }
    Ok(match k {
        1 => Some(candidates_k1(v)?),
        2 => Some(candidates_k2(v)?),
        3 if p.is_exactly(2, 3) => Some(candidates_k3_p23()?),
        _ => None,
    })
}

#[derive(Serialize)]
struct ConstantsOut {
    command: &'static str,
    k: usize,
    p: f64,
    p_exact: Option<String>,
    best: Option<f64>,
    /// Truncated to four decimals.
    best_4dp: Option<String>,
    bounds: BoundReport,
    table: Option<CandidateTable>,
}

#[derive(Serialize)]
struct EntryRow {
    k: usize,
    p: f64,
    l: usize,
    branch: String,
    value: f64,
    admissible: bool,
    rejected: String,
}

fn cmd_constants(k: usize, p: Exponent, common: &Common) -> CliResult<()> {
    let report = bounds::report(k, p)?;
    let table = candidate_table(k, p)?;
    let best = report.closed_form;
    let out = ConstantsOut {
        command: "constants",
        k,
        p: p.value(),
        p_exact: p.exact().map(|_| p.to_string()),
        best,
        best_4dp: best.map(four_decimals),
        bounds: report,
        table,
    };
    let sink = Sink::new(common, Format::Json);
    match sink.format {
        Format::Json => sink.json(&out),
        Format::Csv => {
            let rows: Vec<EntryRow> = out
                .table
                .iter()
                .flat_map(|t| &t.entries)
                .map(|e| EntryRow {
                    k: e.k,
                    p: e.p,
                    l: e.l,
                    branch: e.branch_label.clone(),
                    value: e.value,
                    admissible: e.rejected.is_none(),
                    rejected: e.rejected.clone().unwrap_or_default(),
                })
                .collect();
            sink.csv(&rows)
        }
    }
}

#[derive(Serialize)]
struct SolveOut {
    command: &'static str,
    reports: Vec<MultistartReport>,
}

#[derive(Serialize)]
struct SolutionRow {
    l: usize,
    value: f64,
    lambda_re: f64,
    lambda_im: f64,
    final_residual: f64,
    iterations: usize,
    admissible: bool,
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    k: usize,
    p: Exponent,
    l: Option<usize>,
    starts: usize,
    seed: u64,
    tol: f64,
    allow_outside: bool,
    common: &Common,
) -> CliResult<()> {
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
    }
    let ls: Vec<usize> = match l {
        Some(l) => vec![l],
        None => (0..=k).collect(),
    };
    let opts = SolveOptions { tol, enforce_domain: !allow_outside, ..Default::default() };
    let mut reports = Vec::new();
    for l in ls {
        let sys = FlipSystem::new(k, p.value(), l)?;
        reports.push(solve_multistart_with(&sys, starts, seed, &opts));
    }
    let converged: usize = reports.iter().map(|r| r.converged_starts).sum();
    let sink = Sink::new(common, Format::Json);
    match sink.format {
        Format::Json => sink.json(&SolveOut { command: "solve", reports })?,
        Format::Csv => {
            let rows: Vec<SolutionRow> = reports
                .iter()
                .flat_map(|r| &r.solutions)
                .filter_map(|s| s.candidate.as_ref().map(|c| (s, c)))
                .map(|(s, c)| SolutionRow {
                    l: c.l,
                    value: c.value,
                    lambda_re: c.lambda.re,
                    lambda_im: c.lambda.im,
                    final_residual: s.final_residual,
                    iterations: s.iterations,
                    admissible: c.rejected.is_none(),
                })
                .collect();
            sink.csv(&rows)?
        }
    }
    if converged == 0 {
        return Err(CliError::NoConvergence(format!("none of the {starts} starts converged")));
    }
    Ok(())
}

#[derive(Serialize)]
struct SearchOut {
    command: &'static str,
    result: SearchResult,
}

#[derive(Serialize)]
struct SearchRow {
    k: usize,
    p: f64,
    mode: &'static str,
    l: Option<usize>,
    objective: f64,
    starts: usize,
    evals: usize,
    seed: u64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    k: usize,
    p: Exponent,
    mode: Mode,
    l: Option<usize>,
    degree: Option<usize>,
    settings: SearchSettings,
    common: &Common,
) -> CliResult<()> {
    let result = match mode {
        Mode::Structured => {
            if degree.is_some() {
                return Err(CliError::Usage("--degree applies to --mode polynomial".into()));
            }
            let ls: Vec<usize> = l.map_or_else(|| (0..=k).collect(), |l| vec![l]);
            let mut best: Option<SearchResult> = None;
            for l in ls {
                let r = structured_search(k, p.value(), l, &settings)?;
                if best.as_ref().is_none_or(|b| r.objective > b.objective) {
                    best = Some(r);
                }
            }
            best.ok_or_else(|| CliError::Usage("k must be at least 1".into()))?
        }
        Mode::Polynomial => {
            if l.is_some() {
                return Err(CliError::Usage("--l applies to --mode structured".into()));
            }
            polynomial_search(k, p.value(), degree.unwrap_or(3 * k), &settings)?
        }
    };
    let sink = Sink::new(common, Format::Json);
    match sink.format {
        Format::Json => sink.json(&SearchOut { command: "search", result }),
        Format::Csv => sink.csv(&[SearchRow {
            k: result.k,
            p: result.p,
            mode: match mode {
                Mode::Structured => "structured",
                Mode::Polynomial => "polynomial",
            },
            l: result.l,
            objective: result.objective,
            starts: result.starts,
            evals: result.evals,
            seed: result.seed,
        }]),
    }
}

#[derive(Serialize)]
struct ScanOut {
    command: &'static str,
    #[serde(flatten)]
    report: hpx_core::search::ScanReport,
}

fn cmd_scan(kmax: usize, p: &str, settings: SearchSettings, common: &Common) -> CliResult<()> {
    if kmax == 0 {
        return Err(CliError::Usage("--kmax must be at least 1".into()));
    }
    let grid = p_values(p)?;
    let report = scan(kmax, &grid, &settings)?;
    let sink = Sink::new(common, Format::Csv);
    match sink.format {
        Format::Json => sink.json(&ScanOut { command: "scan", report }),
        Format::Csv => {
            for a in &report.anomalies {
                eprintln!("anomaly: k={} p={} {}: {}", a.k, a.p, a.kind, a.detail);
            }
            sink.csv(&report.rows)
        }
    }
}

#[derive(Serialize)]
struct VerifyOut {
    command: &'static str,
    #[serde(flatten)]
    report: verify::SuiteReport,
}

fn cmd_verify(suite: &str, budget: &str, common: &Common) -> CliResult<()> {
    let suite: Suite = suite.parse()?;
    let budget: Budget = budget.parse()?;
    let report = verify::run(suite, budget);
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let passed = report.passed;
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    let sink = Sink::new(common, Format::Json);
    match sink.format {
        Format::Json => sink.json(&VerifyOut { command: "verify", report })?,
        Format::Csv => sink.csv(&report.checks)?,
    }
    if !passed {
        return Err(CliError::Verification(format!("{failed} check(s) failed")));
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsOut {
    command: &'static str,
    rows: Vec<BoundReport>,
}

#[derive(Serialize)]
struct BoundsRow {
    k: usize,
    p: f64,
    closed_form: Option<f64>,
    monomial_lower: f64,
    hl_bound: Option<f64>,
    dual_bound: Option<f64>,
    embedding_constant_known: bool,
}

fn cmd_bounds(k: Option<usize>, kmax: Option<usize>, p: &str, common: &Common) -> CliResult<()> {
    let ks: Vec<usize> = match (k, kmax) {
        (Some(k), _) => vec![k],
        (None, Some(m)) => (1..=m).collect(),
        (None, None) => return Err(CliError::Usage("one of --k or --kmax is required".into())),
    };
    let grid = p_values(p)?;
    let mut rows = Vec::new();
    for &k in &ks {
        for &p in &grid {
            rows.push(bounds::report(k, p)?);
        }
    }
    let sink = Sink::new(common, Format::Csv);
    match sink.format {
        Format::Json => sink.json(&BoundsOut { command: "bounds", rows }),
        Format::Csv => sink.csv(
            &rows
                .iter()
                .map(|r| BoundsRow {
                    k: r.k,
                    p: r.p,
                    closed_form: r.closed_form,
                    monomial_lower: r.monomial_lower,
                    hl_bound: r.hl_bound,
                    dual_bound: r.dual_bound,
                    embedding_constant_known: r.embedding_constant_known,
                })
                .collect::<Vec<_>>(),
        ),
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("HPX_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("HPX_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Constants { k, p, common } => cmd_constants(k, p, &common),
        Command::Solve { k, p, l, starts, seed, tol, allow_outside, common } => {
            cmd_solve(k, p, l, starts, seed, tol, allow_outside, &common)
        }
        Command::Search { k, p, mode, l, degree, starts, max_evals, seed, tol, common } => {
            let max_evals = max_evals.unwrap_or(match mode {
                Mode::Structured => 20_000,
                Mode::Polynomial => 2000,
            });
            let settings = SearchSettings { starts, max_evals, seed, quad_tol: tol };
            cmd_search(k, p, mode, l, degree, settings, &common)
        }
        Command::Scan { kmax, p, starts, max_evals, seed, common } => {
            let settings = SearchSettings { starts, max_evals, seed, ..Default::default() };
            cmd_scan(kmax, &p, settings, &common)
        }
        Command::Verify { suite, budget, common } => cmd_verify(&suite, &budget, &common),
        Command::Bounds { k, kmax, p, common } => cmd_bounds(k, kmax, &p, &common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hpx: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
