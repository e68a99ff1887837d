//! `mllp`: multilevel LP compromise solver.
//!
//! Exit codes: 0 success, 1 infeasible or unbounded, 2 input error,
//! 3 internal failure (numerical breakdown, iteration limit, failed
//! cross-check).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use multilevel_lp::adaptive::{self, SolveStatus};
use multilevel_lp::io::{emit_report, parse_problem, IoError, LoadedProblem, ReportFormat};
use multilevel_lp::lp_model::{to_standard_form, LevelIndex};
use multilevel_lp::multilevel::{self, CompromiseReport, FailureKind, FailureStage};
use multilevel_lp::oracle::{oracle_solve, OracleConfig, OracleStatus};
use multilevel_lp::random::{random_instances, RandomLpShape};
use multilevel_lp::scalar::{parse_scalar, to_f64_vec, Rational, Scalar};

#[derive(Parser)]
#[command(name = "mllp", version, about = "Satisfactory compromises for multilevel linear programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and print the report.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Solve a single level's LP.
    SolveLevel {
        file: PathBuf,
        /// Level to solve (1-based).
        #[arg(long = "p")]
        p: usize,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Enumerate basic solutions of every level LP (or one with --p).
    Oracle {
        file: PathBuf,
        #[arg(long = "p")]
        p: Option<usize>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run the pipeline and cross-check every solve against the oracle, or
    /// cross-check the solver on random instances.
    Verify {
        file: Option<PathBuf>,
        /// Number of random instances instead of a file.
        #[arg(long, conflicts_with = "file")]
        random: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args, Clone)]
struct RunOpts {
    /// Epsilon for every level, or a comma-separated list with one per level.
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    /// Alpha override `level,position,value`; repeatable.
    #[arg(long = "alpha", value_name = "L,J,VALUE")]
    alpha: Vec<String>,
    /// Report format; defaults to the document's setting.
    #[arg(long, value_enum)]
    format: Option<ReportFormat>,
    /// Use exact rational arithmetic.
    #[arg(long)]
    exact: bool,
    /// Decimals in table output.
    #[arg(long, default_value_t = 6)]
    decimals: usize,
    /// Start the reduction from the document's reference level optima.
    #[arg(long)]
    from_reference: bool,
}

enum Failure {
    Input(String),
    Infeasible(String),
    Internal(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Infeasible(m) => (1, m),
            Failure::Input(m) => (2, m),
            Failure::Internal(m) => (3, m),
        };
        eprintln!("error: {msg}");
        ExitCode::from(code)
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Input(format!("[{}] {e}", e.code()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exact = match &cli.command {
        Command::Solve { opts, .. }
        | Command::SolveLevel { opts, .. }
        | Command::Oracle { opts, .. }
        | Command::Verify { opts, .. } => opts.exact,
    };
    let outcome = if exact { dispatch::<Rational>(cli.command) } else { dispatch::<f64>(cli.command) };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}

fn dispatch<T: Scalar>(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve { file, opts } => solve::<T>(&file, &opts),
        Command::SolveLevel { file, p, opts } => solve_level::<T>(&file, p, &opts),
        Command::Oracle { file, p, opts } => oracle::<T>(&file, p, &opts),
        Command::Verify { file: Some(file), random: None, opts, .. } => verify_file::<T>(&file, &opts),
        Command::Verify { random: Some(count), seed, opts, .. } => verify_random::<T>(count, seed, &opts),
        Command::Verify { .. } => Err(Failure::Input("verify needs a problem file or --random N".into())),
    }
}

fn load<T: Scalar>(file: &PathBuf, opts: &RunOpts) -> Result<LoadedProblem<T>, Failure> {
    let mut loaded = parse_problem::<T>(file)?;
    let levels = loaded.problem.levels();
    if let Some(text) = &opts.epsilon {
        let values: Vec<T> = text
            .split(',')
            .map(|s| parse_scalar(s).ok_or_else(|| Failure::Input(format!("--epsilon: `{s}` is not a number"))))
            .collect::<Result<_, _>>()?;
        if values.iter().any(|v| v.lt_zero()) {
            return Err(Failure::Input("--epsilon must be nonnegative".into()));
        }
        loaded.config.epsilon = match values.len() {
            1 => vec![values[0].clone(); levels],
            k if k == levels => values,
            k => return Err(Failure::Input(format!("--epsilon has {k} entries for {levels} levels"))),
        };
    }
    for entry in &opts.alpha {
        let parts: Vec<&str> = entry.split(',').collect();
        let bad = || Failure::Input(format!("--alpha `{entry}`: expected level,position,value"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let level: usize = parts[0].trim().parse().map_err(|_| bad())?;
        let position: usize = parts[1].trim().parse().map_err(|_| bad())?;
        let value: T = parse_scalar(parts[2]).ok_or_else(bad)?;
        if loaded.problem.flat_index(level, position).is_err() {
            return Err(IoError::UnknownAlphaComponent { var: LevelIndex::new(level, position) }.into());
        }
        if value.lt_zero() {
            return Err(IoError::AlphaValue { what: LevelIndex::new(level, position).to_string() }.into());
        }
        loaded.config.alpha.overrides.insert(LevelIndex::new(level, position), value);
    }
    if let Some(format) = opts.format {
        loaded.format = format;
    }
    Ok(loaded)
}

fn solve<T: Scalar>(file: &PathBuf, opts: &RunOpts) -> Result<(), Failure> {
    let loaded = load::<T>(file, opts)?;
    let report = run_loaded(&loaded, opts)?;
    print!("{}", emit_report(&report.to_f64(), loaded.format, opts.decimals));
    match &report.failure {
        None => Ok(()),
        Some(f) => {
            let msg = f.to_string();
            Err(match f.kind {
                FailureKind::Infeasible | FailureKind::Unbounded => Failure::Infeasible(msg),
                FailureKind::InvalidInput if f.stage == FailureStage::Reduction => {
                    let e = IoError::AlphaRange(msg);
                    Failure::Input(format!("[{}] {e}", e.code()))
                }
                FailureKind::InvalidInput => Failure::Input(msg),
                FailureKind::IterationLimit | FailureKind::Numerical => Failure::Internal(msg),
            })
        }
    }
}

fn run_loaded<T: Scalar>(loaded: &LoadedProblem<T>, opts: &RunOpts) -> Result<CompromiseReport<T>, Failure> {
    match &loaded.reference {
        Some(reference) => {
            if opts.from_reference && reference.level_optima.is_none() {
                return Err(Failure::Input("--from-reference needs `reference.level_optima` in the document".into()));
            }
            Ok(multilevel::run_with_reference(&loaded.problem, &loaded.config, reference, opts.from_reference))
        }
        None if opts.from_reference => Err(Failure::Input("--from-reference needs a `reference` block".into())),
        None => Ok(multilevel::run(&loaded.problem, &loaded.config)),
    }
}

fn solve_level<T: Scalar>(file: &PathBuf, p: usize, opts: &RunOpts) -> Result<(), Failure> {
    let loaded = load::<T>(file, opts)?;
    let lp = loaded.problem.build_level_lp(p).map_err(|e| Failure::Input(e.to_string()))?;
    let lp = to_standard_form(&lp, &loaded.config.infinity_cap);
    let res = adaptive::solve(&lp, &loaded.config.epsilon_for(p), &loaded.config.solver)
        .map_err(|e| Failure::Internal(e.to_string()))?;
    let n = loaded.problem.n();
    let x = if res.x.is_empty() { Vec::new() } else { to_f64_vec(&res.x[..n]) };
    match loaded.format {
        ReportFormat::Json => {
            let value = serde_json::json!({
                "level": p,
                "status": res.status,
                "x": x,
                "objective": res.objective.to_f64_lossy(),
                "beta": res.beta.to_f64_lossy(),
                "iterations": res.iterations,
            });
            println!("{}", serde_json::to_string_pretty(&value).expect("json"));
        }
        ReportFormat::Table => {
            let d = opts.decimals;
            println!("level {p}: {}", res.status);
            if !x.is_empty() {
                let parts: Vec<String> = x.iter().map(|v| format!("{v:.d$}")).collect();
                println!("  x    = ({})", parts.join(", "));
                println!("  f_{p}  = {:.d$}", res.objective.to_f64_lossy());
                println!("  beta = {:.d$}", res.beta.to_f64_lossy());
            }
            println!("  iterations = {}", res.iterations);
        }
    }
    match res.status {
        SolveStatus::Infeasible | SolveStatus::Unbounded => Err(Failure::Infeasible(format!("level {p} is {}", res.status))),
        SolveStatus::IterationLimit => Err(Failure::Internal("iteration limit reached".into())),
        _ => Ok(()),
    }
}

fn oracle<T: Scalar>(file: &PathBuf, p: Option<usize>, opts: &RunOpts) -> Result<(), Failure> {
    let loaded = load::<T>(file, opts)?;
    let levels: Vec<usize> = match p {
        Some(p) if p == 0 || p > loaded.problem.levels() => {
            return Err(Failure::Input(format!("--p {p} is not a level")));
        }
        Some(p) => vec![p],
        None => (1..=loaded.problem.levels()).collect(),
    };
    let n = loaded.problem.n();
    let d = opts.decimals;
    let mut results = Vec::new();
    for p in levels {
        let lp = to_standard_form(&loaded.problem.build_level_lp(p).expect("level checked"), &loaded.config.infinity_cap);
        let res = oracle_solve(&lp, &OracleConfig::default()).map_err(|e| Failure::Input(e.to_string()))?;
        let vertices: Vec<Vec<f64>> = res.vertices.iter().map(|v| to_f64_vec(&v[..n])).collect();
        let value = res.value.as_ref().map(Scalar::to_f64_lossy);
        match loaded.format {
            ReportFormat::Table => {
                println!("level {p}: {:?}, value {}", res.status, value.map(|v| format!("{v:.d$}")).unwrap_or("-".into()));
                for v in &vertices {
                    let parts: Vec<String> = v.iter().map(|x| format!("{x:.d$}")).collect();
                    println!("  ({})", parts.join(", "));
                }
            }
            ReportFormat::Json => {
                results.push(serde_json::json!({"level": p, "status": res.status, "value": value, "vertices": vertices}));
            }
        }
    }
    if loaded.format == ReportFormat::Json {
        println!("{}", serde_json::to_string_pretty(&results).expect("json"));
    }
    Ok(())
}

fn verify_file<T: Scalar>(file: &PathBuf, opts: &RunOpts) -> Result<(), Failure> {
    let loaded = load::<T>(file, opts)?;
    let mlp = &loaded.problem;
    let cfg = &loaded.config;
    let tol = 1e-6;
    let mut mismatches = 0;
    let report = run_loaded(&loaded, opts)?;
    let mut check = |label: String, solver: Option<f64>, lp: &multilevel_lp::StandardLP<T>, eps: f64| -> Result<(), Failure> {
        let res = oracle_solve(lp, &OracleConfig::default()).map_err(|e| Failure::Input(e.to_string()))?;
        let oracle_value = match res.status {
            OracleStatus::Optimal => res.value.as_ref().map(Scalar::to_f64_lossy),
            _ => None,
        };
        let ok = match (solver, oracle_value) {
            (Some(s), Some(o)) => o - s <= eps + tol && s - o <= tol,
            (None, None) => true,
            _ => false,
        };
        if !ok {
            mismatches += 1;
        }
        let show = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or("-".into());
        println!("{} {label}: solver {} oracle {}", if ok { "PASS" } else { "FAIL" }, show(solver), show(oracle_value));
        Ok(())
    };
    for p in 1..=mlp.levels() {
        let lp = to_standard_form(&mlp.build_level_lp(p).expect("level"), &cfg.infinity_cap);
        let solver = report.level_optima.get(p - 1).map(|o| o.value.to_f64_lossy());
        check(format!("level {p}"), solver, &lp, cfg.epsilon_for(p).to_f64_lossy())?;
    }
    for it in &report.iterations {
        let lp = to_standard_form(&mlp.build_boxed_lp(it.level, &it.lower, &it.upper).expect("bounds"), &cfg.infinity_cap);
        let solver = it.status.is_solved().then(|| it.objectives[it.level - 1].to_f64_lossy());
        check(format!("iteration p = {}", it.level), solver, &lp, cfg.epsilon_for(it.level).to_f64_lossy())?;
    }
    if let Some(f) = &report.failure {
        println!("run stopped: {f}");
    }
    if mismatches > 0 {
        return Err(Failure::Internal(format!("{mismatches} solver/oracle mismatches")));
    }
    Ok(())
}

fn verify_random<T: Scalar>(count: usize, seed: u64, opts: &RunOpts) -> Result<(), Failure> {
    let eps: T = match &opts.epsilon {
        None => T::zero(),
        Some(s) => parse_scalar(s).filter(|v: &T| !v.lt_zero()).ok_or_else(|| Failure::Input(format!("--epsilon `{s}`")))?,
    };
    let solver_cfg = adaptive::SolverConfig::<T>::default();
    let cap = T::from_f64_lossy(multilevel_lp::lp_model::DEFAULT_INFINITY_CAP);
    let instances = random_instances::<T>(seed, count, &RandomLpShape::default());
    let mut failures = 0;
    let mut feasible = 0;
    for (k, lp) in instances.iter().enumerate() {
        let lp = to_standard_form(lp, &cap);
        let res = adaptive::solve(&lp, &eps, &solver_cfg).map_err(|e| Failure::Internal(format!("instance {k}: {e}")))?;
        let oracle = oracle_solve(&lp, &OracleConfig::default()).map_err(|e| Failure::Input(e.to_string()))?;
        let ok = match (res.status.is_solved(), &oracle.value) {
            (true, Some(best)) => {
                feasible += 1;
                let gap = (best.clone() - res.objective.clone()).to_f64_lossy();
                gap <= eps.to_f64_lossy() + 1e-6 && gap >= -1e-6
            }
            (false, None) => res.status == SolveStatus::Infeasible,
            _ => false,
        };
        if !ok {
            failures += 1;
            println!("FAIL instance {k}: solver {} {:.6}, oracle {:?}", res.status, res.objective.to_f64_lossy(), oracle.value.map(|v| v.to_f64_lossy()));
        }
    }
    println!("{count} instances ({feasible} feasible), {failures} mismatches, seed {seed}");
    if failures > 0 {
        return Err(Failure::Internal(format!("{failures} mismatches")));
    }
    Ok(())
}
