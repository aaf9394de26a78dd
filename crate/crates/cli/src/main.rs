//! `piag` command-line tool: generate problems, solve, verify traces and
//! report rates.
//!
//! Exit codes: 0 converged / checks passed, 1 input error, 2 iteration
//! budget exhausted, 3 diverged, 4 a theoretical inequality was violated.

mod artifacts;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use piag::diagnostics::{
    check_bounded_delay, check_sufficient_descent, check_summability, default_limit, default_transient_skip,
    fit_rlinear_rate, significant_prefix, InequalityReport, IterateLog,
};
use piag::io::{self, RunConfigFile};
use piag::problems::{self, ReferenceSolution};
use piag::solver::{self, SmoothnessBounds, SolverConfig, Termination, Trace};
use piag::{PiagError, Problem};

use artifacts::{GenerateMeta, RateReport, RunSummary, VerifyReport};

#[derive(Parser)]
#[command(name = "piag", version, about = "Proximal incremental aggregated gradient solver and diagnostics")]
struct Cli {
    /// Seed for generators and random schedules.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory (created if absent).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    /// Random quadratics plus a box indicator.
    Box,
    /// Random quadratics with a strongly convex sum plus an l1 penalty.
    L1,
    /// The one-dimensional instance `-x^2/2` on `[-1, 1]`.
    Box1d,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Method {
    Piag,
    Fbs,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated problem (`problem.json`) and its metadata (`problem.meta.json`).
    Generate {
        #[arg(long, value_enum)]
        family: Family,
        /// Number of components.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Dimension.
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Box family: spectra are drawn from `[-negative_curvature, 1]`.
        #[arg(long, default_value_t = 0.5)]
        negative_curvature: f64,
        /// L1 family: penalty weight.
        #[arg(long, default_value_t = 0.3)]
        lambda: f64,
    },
    /// Run the solver; writes `trace.csv`, `summary.json` and, with a full log, `iterates.csv`.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        /// Run-config file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the delay bound of the config.
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long, value_enum, default_value = "piag")]
        method: Method,
        /// Record every iterate (needed by `verify`).
        #[arg(long)]
        full_log: bool,
    },
    /// Check the descent, summability and delay inequalities on a solve output directory.
    Verify {
        /// Directory holding `trace.csv`, `iterates.csv` and `summary.json`.
        #[arg(long)]
        run: PathBuf,
    },
    /// Fit an R-linear rate to the objective values of a trace.
    Rate {
        #[arg(long)]
        run: PathBuf,
        /// Limit value; defaults to the reference optimum when `--problem`
        /// is given, otherwise to the final value minus a few ulps.
        #[arg(long)]
        limit: Option<f64>,
        #[arg(long)]
        problem: Option<PathBuf>,
        /// Leading iterations to skip; defaults to `5 (tau + 1)`.
        #[arg(long)]
        skip: Option<usize>,
    },
    /// Solve once per delay bound with `0.9 alpha_lemma2(tau)` and tabulate the results.
    CompareDelays {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated delay bounds.
        #[arg(long, value_delimiter = ',', default_value = "0,2,5,10")]
        taus: Vec<usize>,
    },
}

/// An error with its exit status and a stable machine-readable code.
struct Failure {
    code: &'static str,
    status: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: "input", status: 1, message: message.into() }
    }
}

impl From<PiagError> for Failure {
    fn from(e: PiagError) -> Self {
        let code = match &e {
            PiagError::Parse(_) => "parse",
            PiagError::InvalidArgument(_) => "invalid_argument",
            PiagError::InvalidConfiguration(_) => "invalid_configuration",
            PiagError::NotAvailable(_) => "not_available",
            PiagError::Generation(_) => "generation",
            PiagError::Divergence { .. } => "divergence",
        };
        let status = if matches!(e, PiagError::Divergence { .. }) { 3 } else { 1 };
        Self { code, status, message: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

struct Ctx {
    seed: u64,
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            emit(&format!("{}\n", msg.as_ref()));
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { seed: cli.seed, out: cli.out, quiet: cli.quiet };
    let result = fs::create_dir_all(&ctx.out)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", ctx.out.display())))
        .and_then(|_| run(&ctx, cli.command));
    match result {
        Ok(status) => ExitCode::from(status),
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message.replace('\n', " "));
            ExitCode::from(f.status)
        }
    }
}

fn run(ctx: &Ctx, command: Command) -> CmdResult {
    match command {
        Command::Generate { family, n, d, negative_curvature, lambda } => {
            cmd_generate(ctx, family, n, d, negative_curvature, lambda)
        }
        Command::Solve { problem, config, tau, method, full_log } => {
            cmd_solve(ctx, &problem, config.as_deref(), tau, method, full_log)
        }
        Command::Verify { run } => cmd_verify(ctx, &run),
        Command::Rate { run, limit, problem, skip } => cmd_rate(ctx, &run, limit, problem.as_deref(), skip),
        Command::CompareDelays { problem, config, taus } => cmd_compare_delays(ctx, &problem, config.as_deref(), &taus),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifacts serialize");
    s.push('\n');
    s
}

fn load_problem(path: &Path) -> Result<Problem, Failure> {
    io::parse_problem(&read(path)?).map_err(|e| Failure::from(e).with_context(path))
}

fn load_config(path: Option<&Path>, seed: u64) -> Result<RunConfigFile, Failure> {
    let mut cfg = match path {
        Some(p) => io::parse_run_config(&read(p)?).map_err(|e| Failure::from(e).with_context(p))?,
        None => RunConfigFile::default(),
    };
    cfg.seed.get_or_insert(seed);
    Ok(cfg)
}

impl Failure {
    fn with_context(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

fn cmd_generate(ctx: &Ctx, family: Family, n: usize, d: usize, nc: f64, lambda: f64) -> CmdResult {
    let (problem, name) = match family {
        Family::Box => (problems::make_quadratic_box(n, d, ctx.seed, nc)?, "quadratic_box"),
        Family::L1 => (problems::make_quadratic_l1(n, d, ctx.seed, lambda)?, "quadratic_l1"),
        Family::Box1d => (problems::scalar_box_example(), "box_1d"),
    };
    let reference = problems::reference_solution(&problem).ok();
    let c0 = reference
        .as_ref()
        .and_then(|r| problems::fit_error_bound_constant(&problem, r, 1.0, 2000, ctx.seed).ok())
        .map(|c| 2.0 * c);
    let meta = GenerateMeta::new(name, ctx.seed, &problem, nc, lambda, reference.as_ref(), c0);
    write(&ctx.out.join("problem.json"), &(io::problem_to_json(&problem)? + "\n"))?;
    write(&ctx.out.join("problem.meta.json"), &to_json(&meta))?;
    let (big, small) = problem.smoothness_totals();
    ctx.say(format!(
        "generated {name}: N = {}, d = {}, L = {big:.6}, l = {small:.6}, stationary points: {}",
        problem.num_components(),
        problem.dimension(),
        reference.map_or("not enumerated".to_string(), |r| r.stationary_points.len().to_string())
    ));
    Ok(0)
}

fn exit_status(t: Termination) -> u8 {
    match t {
        Termination::Converged => 0,
        Termination::MaxIters => 2,
        Termination::Diverged => 3,
    }
}

fn execute(problem: &Problem, config: &SolverConfig, method: Method) -> Result<Trace, Failure> {
    Ok(match method {
        Method::Piag => solver::solve(problem, config)?,
        Method::Fbs => solver::solve_fbs(problem, config)?,
    })
}

fn write_run(dir: &Path, problem: &Problem, config: &SolverConfig, trace: &Trace, method: Method) -> Result<RunSummary, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
    write(&dir.join("trace.csv"), &io::trace_to_csv(&trace.records))?;
    if let Some(xs) = &trace.iterates {
        write(&dir.join("iterates.csv"), &io::iterates_to_csv(xs))?;
    }
    let name = if method == Method::Fbs { "fbs" } else { "piag" };
    let summary = RunSummary::new(name, problem, config, trace)?;
    write(&dir.join("summary.json"), &to_json(&summary))?;
    Ok(summary)
}

fn cmd_solve(ctx: &Ctx, problem: &Path, config: Option<&Path>, tau: Option<usize>, method: Method, full_log: bool) -> CmdResult {
    let p = load_problem(problem)?;
    let file = load_config(config, ctx.seed)?;
    let mut cfg = file.resolve(&p, tau)?;
    if full_log {
        cfg.record_iterates = true;
    }
    let trace = execute(&p, &cfg, method)?;
    let summary = write_run(&ctx.out, &p, &cfg, &trace, method)?;
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
    ctx.say(format!(
        "{:?} after {} iterations: F = {:e}, residual = {:e}, alpha = {:e}, tau = {}",
        trace.termination,
        trace.iterations,
        trace.final_objective(),
        trace.final_residual(),
        trace.alpha,
        trace.tau
    ));
    if let Some(reason) = &summary.divergence {
        eprintln!("error[divergence]: {reason}");
    }
    Ok(exit_status(trace.termination))
}

fn load_summary(run: &Path) -> Result<RunSummary, Failure> {
    let path = run.join("summary.json");
    serde_json::from_str(&read(&path)?)
        .map_err(|e| Failure { code: "parse", status: 1, message: format!("{}: {e}", path.display()) })
}

fn load_trace(run: &Path) -> Result<Vec<piag::solver::TraceRecord>, Failure> {
    let path = run.join("trace.csv");
    let records = io::parse_trace_csv(&read(&path)?).map_err(|e| Failure::from(e).with_context(&path))?;
    if records.is_empty() {
        return Err(Failure::input(format!("{}: trace has no records", path.display())));
    }
    Ok(records)
}

fn cmd_verify(ctx: &Ctx, run: &Path) -> CmdResult {
    let summary = load_summary(run)?;
    let records = load_trace(run)?;
    let iter_path = run.join("iterates.csv");
    if !iter_path.exists() {
        return Err(Failure::input(format!(
            "{} missing; rerun solve with --full-log",
            iter_path.display()
        )));
    }
    let iterates = io::parse_iterates_csv(&read(&iter_path)?).map_err(|e| Failure::from(e).with_context(&iter_path))?;
    let log = IterateLog::from_records(&records, iterates)?;
    let bounds = SmoothnessBounds::new(summary.lipschitz_sum, summary.concave_sum, summary.tau)?;
    let checks: Vec<InequalityReport> = vec![
        check_sufficient_descent(&log, &bounds, summary.alpha)?,
        check_summability(&log, &bounds, summary.alpha, None)?,
        check_bounded_delay(&records, summary.tau),
    ];
    let report = VerifyReport::new(summary.alpha, summary.tau, bounds.alpha_lemma2(), checks);
    write(&ctx.out.join("verify.json"), &to_json(&report))?;
    for c in &report.checks {
        ctx.say(format!(
            "{:<20} checked {:>8}  violations {:>6}  worst_margin {:e}",
            c.name, c.checked, c.violations, c.worst_margin
        ));
    }
    if !ctx.quiet {
        emit(&format!("{}\n", serde_json::to_string(&report).expect("report serializes")));
    }
    if let Some(c) = report.checks.iter().find(|c| !c.passed()) {
        eprintln!(
            "error[violation]: {} violated at k = {}",
            c.name,
            c.first_violation.map_or("?".to_string(), |k| k.to_string())
        );
        return Ok(4);
    }
    Ok(0)
}

fn objective_rate(values: &[f64], limit: f64, skip: usize) -> Result<piag::diagnostics::RateFit, PiagError> {
    fit_rlinear_rate(significant_prefix(values, limit, 1e-13), limit, skip)
}

fn reference_optimum(problem: &Problem) -> Option<ReferenceSolution> {
    problems::reference_solution(problem).ok()
}

fn cmd_rate(ctx: &Ctx, run: &Path, limit: Option<f64>, problem: Option<&Path>, skip: Option<usize>) -> CmdResult {
    let summary = load_summary(run)?;
    let records = load_trace(run)?;
    let ks: Vec<usize> = records.iter().map(|r| r.k).collect();
    if ks.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Failure::input("rate fitting needs a trace recorded at every iteration (trace_every = 1)"));
    }
    let values: Vec<f64> = records.iter().map(|r| r.objective).collect();
    let (limit, source) = match (limit, problem) {
        (Some(v), _) => (v, "given"),
        (None, Some(path)) => {
            let p = load_problem(path)?;
            let r = reference_optimum(&p).ok_or_else(|| Failure::input("no reference solution for this problem"))?;
            (r.best_value(), "reference")
        }
        (None, None) => (default_limit(&values).ok_or_else(|| Failure::input("empty trace"))?, "final value"),
    };
    let skip = skip.unwrap_or_else(|| default_transient_skip(summary.tau));
    let fit = objective_rate(&values, limit, skip)?;
    let report = RateReport { limit, limit_source: source.to_string(), fit };
    write(&ctx.out.join("rate.json"), &to_json(&report))?;
    ctx.say(format!(
        "rate {:.6} (r2 {:.6}, {} points after skipping {}), limit {limit:e} from {source}",
        fit.rate, fit.log_linear_r2, fit.points, fit.transient_skip
    ));
    Ok(0)
}

struct DelayRow {
    tau: usize,
    alpha: f64,
    iters_to_tol: Option<usize>,
    fitted_rate: Option<f64>,
    termination: Termination,
}

fn cmd_compare_delays(ctx: &Ctx, problem: &Path, config: Option<&Path>, taus: &[usize]) -> CmdResult {
    let p = load_problem(problem)?;
    let mut file = load_config(config, ctx.seed)?;
    file.alpha = io::AlphaSpec::Rule(io::AlphaRule::AutoLemma2);
    file.full_log = Some(false);
    file.trace_every = Some(1);
    let limit = reference_optimum(&p).map(|r| r.best_value());
    let configs = taus
        .iter()
        .map(|&tau| {
            let mut f = file.clone();
            if f.schedule.is_none() && tau > 0 {
                f.schedule = Some(io::ScheduleFile::Cyclic { block: None });
            }
            f.resolve(&p, Some(tau)).map_err(Failure::from)
        })
        .collect::<Result<Vec<SolverConfig>, Failure>>()?;

    let traces: Vec<Result<Trace, PiagError>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|cfg| s.spawn(|| solver::solve(&p, cfg))).collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });

    let mut rows = Vec::new();
    for ((&tau, cfg), trace) in taus.iter().zip(&configs).zip(traces) {
        let trace = trace?;
        write_run(&ctx.out.join(format!("tau_{tau}")), &p, cfg, &trace, Method::Piag)?;
        let values: Vec<f64> = trace.records.iter().map(|r| r.objective).collect();
        let lim = limit.or_else(|| default_limit(&values));
        let fitted_rate = lim.and_then(|l| objective_rate(&values, l, default_transient_skip(tau)).ok()).map(|f| f.rate);
        rows.push(DelayRow {
            tau,
            alpha: cfg.alpha,
            iters_to_tol: (trace.termination == Termination::Converged).then_some(trace.iterations),
            fitted_rate,
            termination: trace.termination,
        });
    }
    let mut table = String::from("tau,alpha,iters_to_tol,fitted_rate,termination\n");
    for r in &rows {
        table.push_str(&format!(
            "{},{:.16e},{},{},{}\n",
            r.tau,
            r.alpha,
            r.iters_to_tol.map_or(String::new(), |k| k.to_string()),
            r.fitted_rate.map_or(String::new(), |v| format!("{v:.16e}")),
            artifacts::termination_name(r.termination)
        ));
    }
    write(&ctx.out.join("compare_delays.csv"), &table)?;
    if !ctx.quiet {
        emit(&table);
    }
    Ok(0)
}
