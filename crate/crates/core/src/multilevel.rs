//! The end-to-end compromise search.
//!
//! 1. Solve every level's LP on its own.
//! 2. Take the componentwise min/max of the level optima as the first box.
//! 3. For `p = 2..=P`: let level `p - 1` reduce the ranges of its own
//!    variables, then let level `p` maximize its objective over the reduced
//!    box.
//! 4. The last solution is the compromise.
//!
//! Failures do not panic or unwind: the returned report is partial and
//! carries a [`RunFailure`].

use serde::{Deserialize, Serialize};

use crate::adaptive::{self, reduced_estimates, SolveStatus, SolverConfig, SupportingFeasibleSolution};
use crate::lp_model::{to_standard_form, LevelIndex, MultilevelProblem, StandardLP, DEFAULT_INFINITY_CAP};
use crate::range_reduction::{AlphaPolicy, RangeReductionContext, ReductionCase, ReductionError};
use crate::scalar::{to_f64_vec, Scalar};

#[derive(Debug, Clone)]
pub struct MultilevelConfig<T> {
    /// Per-level `epsilon`; levels without an entry use zero.
    pub epsilon: Vec<T>,
    pub alpha: AlphaPolicy<T>,
    pub solver: SolverConfig<T>,
    /// Finite stand-in for the missing upper bounds of the level LPs.
    pub infinity_cap: T,
    /// Dead zone of the sign function used by the reduction.
    pub tol_sign: T,
}

impl<T: Scalar> Default for MultilevelConfig<T> {
    fn default() -> Self {
        MultilevelConfig {
            epsilon: Vec::new(),
            alpha: AlphaPolicy::default(),
            solver: SolverConfig::default(),
            infinity_cap: T::from_f64_lossy(DEFAULT_INFINITY_CAP),
            tol_sign: T::tolerance(1e-12),
        }
    }
}

impl<T: Scalar> MultilevelConfig<T> {
    /// `epsilon` of level `p` (1-based).
    pub fn epsilon_for(&self, p: usize) -> T {
        self.epsilon.get(p - 1).cloned().unwrap_or_else(T::zero)
    }
}

/// An optimum of one level's LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelOptimum<T> {
    pub level: usize,
    pub x: Vec<T>,
    pub value: T,
    pub status: SolveStatus,
    pub beta: T,
    pub iterations: usize,
    /// `true` when supplied by the caller instead of solved.
    #[serde(default)]
    pub provided: bool,
}

/// What happened to one variable of the reducing level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReduction<T> {
    pub variable: LevelIndex,
    pub case: ReductionCase,
    /// Present for boundary cases only.
    pub alpha: Option<T>,
}

/// One reduce-then-solve step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport<T> {
    /// Level that solved; level `level - 1` reduced.
    pub level: usize,
    pub reductions: Vec<ComponentReduction<T>>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub status: SolveStatus,
    /// Structural part of the solution; empty when none exists.
    pub x: Vec<T>,
    /// All objectives at `x`.
    pub objectives: Vec<T>,
    pub beta: T,
    /// Estimate with the reduction map applied; diagnostic only.
    pub beta_xi: Option<T>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureStage {
    LevelSolve,
    Reduction,
    Iteration,
    Verification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureKind {
    Infeasible,
    Unbounded,
    IterationLimit,
    InvalidInput,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunFailure {
    pub level: usize,
    pub stage: FailureStage,
    pub kind: FailureKind,
    pub message: String,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "level {} ({:?}): {}", self.level, self.stage, self.message)
    }
}

fn status_failure(level: usize, stage: FailureStage, status: SolveStatus) -> RunFailure {
    let kind = match status {
        SolveStatus::Infeasible => FailureKind::Infeasible,
        SolveStatus::Unbounded => FailureKind::Unbounded,
        _ => FailureKind::IterationLimit,
    };
    RunFailure { level, stage, kind, message: format!("level-{level} LP is {status}") }
}

fn error_failure(level: usize, stage: FailureStage, err: &adaptive::SolveError) -> RunFailure {
    let kind = match err {
        adaptive::SolveError::Model(_) | adaptive::SolveError::NegativeEpsilon => FailureKind::InvalidInput,
        adaptive::SolveError::Infeasible => FailureKind::Infeasible,
        adaptive::SolveError::Unbounded => FailureKind::Unbounded,
        adaptive::SolveError::IterationLimit(_) => FailureKind::IterationLimit,
        _ => FailureKind::Numerical,
    };
    RunFailure { level, stage, kind, message: err.to_string() }
}

/// The full record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompromiseReport<T> {
    pub levels: usize,
    pub level_optima: Vec<LevelOptimum<T>>,
    pub initial_lower: Vec<T>,
    pub initial_upper: Vec<T>,
    pub iterations: Vec<IterationReport<T>>,
    pub compromise: Option<Vec<T>>,
    pub compromise_objectives: Option<Vec<T>>,
    pub failure: Option<RunFailure>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl<T: Scalar> CompromiseReport<T> {
    fn empty(levels: usize) -> Self {
        CompromiseReport {
            levels,
            level_optima: Vec::new(),
            initial_lower: Vec::new(),
            initial_upper: Vec::new(),
            iterations: Vec::new(),
            compromise: None,
            compromise_objectives: None,
            failure: None,
            notes: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.failure.is_none() && self.compromise.is_some()
    }

    /// Lossy conversion for printing and JSON output.
    pub fn to_f64(&self) -> CompromiseReport<f64> {
        let v = |x: &Vec<T>| to_f64_vec(x);
        CompromiseReport {
            levels: self.levels,
            level_optima: self
                .level_optima
                .iter()
                .map(|o| LevelOptimum {
                    level: o.level,
                    x: v(&o.x),
                    value: o.value.to_f64_lossy(),
                    status: o.status,
                    beta: o.beta.to_f64_lossy(),
                    iterations: o.iterations,
                    provided: o.provided,
                })
                .collect(),
            initial_lower: v(&self.initial_lower),
            initial_upper: v(&self.initial_upper),
            iterations: self
                .iterations
                .iter()
                .map(|it| IterationReport {
                    level: it.level,
                    reductions: it
                        .reductions
                        .iter()
                        .map(|r| ComponentReduction {
                            variable: r.variable,
                            case: r.case,
                            alpha: r.alpha.as_ref().map(Scalar::to_f64_lossy),
                        })
                        .collect(),
                    lower: v(&it.lower),
                    upper: v(&it.upper),
                    status: it.status,
                    x: v(&it.x),
                    objectives: v(&it.objectives),
                    beta: it.beta.to_f64_lossy(),
                    beta_xi: it.beta_xi.as_ref().map(Scalar::to_f64_lossy),
                    iterations: it.iterations,
                })
                .collect(),
            compromise: self.compromise.as_ref().map(v),
            compromise_objectives: self.compromise_objectives.as_ref().map(v),
            failure: self.failure.clone(),
            notes: self.notes.clone(),
        }
    }
}

fn standard_lp<T: Scalar>(
    mlp: &MultilevelProblem<T>,
    p: usize,
    bounds: Option<(&[T], &[T])>,
    cfg: &MultilevelConfig<T>,
) -> Result<StandardLP<T>, adaptive::SolveError> {
    let lp = match bounds {
        None => mlp.build_level_lp(p)?,
        Some((l, u)) => mlp.build_boxed_lp(p, l, u)?,
    };
    Ok(to_standard_form(&lp, &cfg.infinity_cap))
}

/// Solves every level's LP independently.
pub fn solve_all_levels<T: Scalar>(
    mlp: &MultilevelProblem<T>,
    cfg: &MultilevelConfig<T>,
) -> Result<Vec<LevelOptimum<T>>, RunFailure> {
    let n = mlp.n();
    (1..=mlp.levels())
        .map(|p| {
            let fail = |e: adaptive::SolveError| error_failure(p, FailureStage::LevelSolve, &e);
            let lp = standard_lp(mlp, p, None, cfg).map_err(fail)?;
            let res = adaptive::solve(&lp, &cfg.epsilon_for(p), &cfg.solver).map_err(fail)?;
            if !res.status.is_solved() {
                return Err(status_failure(p, FailureStage::LevelSolve, res.status));
            }
            let x = res.x[..n].to_vec();
            Ok(LevelOptimum {
                level: p,
                value: crate::scalar::dot(mlp.objective(p).expect("level in range"), &x),
                x,
                status: res.status,
                beta: res.beta,
                iterations: res.iterations,
                provided: false,
            })
        })
        .collect()
}

/// Componentwise min and max over the level optima.
pub fn compute_initial_bounds<T: Scalar>(level_optima: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    let Some(first) = level_optima.first() else {
        return (Vec::new(), Vec::new());
    };
    let mut lower = first.clone();
    let mut upper = first.clone();
    for x in &level_optima[1..] {
        for (e, v) in x.iter().enumerate() {
            if v < &lower[e] {
                lower[e] = v.clone();
            }
            if v > &upper[e] {
                upper[e] = v.clone();
            }
        }
    }
    (lower, upper)
}

/// Runs the whole pipeline.
pub fn run<T: Scalar>(mlp: &MultilevelProblem<T>, cfg: &MultilevelConfig<T>) -> CompromiseReport<T> {
    let mut report = CompromiseReport::empty(mlp.levels());
    match solve_all_levels(mlp, cfg) {
        Ok(optima) => report.level_optima = optima,
        Err(failure) => {
            report.failure = Some(failure);
            return report;
        }
    }
    reduce_and_solve(mlp, cfg, report)
}

/// Runs the pipeline from caller-supplied level optima instead of solving
/// the level LPs. Useful when a level LP has several optimal vertices and a
/// particular choice is wanted.
pub fn run_from_level_optima<T: Scalar>(
    mlp: &MultilevelProblem<T>,
    level_optima: Vec<Vec<T>>,
    cfg: &MultilevelConfig<T>,
) -> CompromiseReport<T> {
    let mut report = CompromiseReport::empty(mlp.levels());
    if level_optima.len() != mlp.levels() || level_optima.iter().any(|x| x.len() != mlp.n()) {
        report.failure = Some(RunFailure {
            level: 0,
            stage: FailureStage::LevelSolve,
            kind: FailureKind::InvalidInput,
            message: format!("expected {} level optima of length {}", mlp.levels(), mlp.n()),
        });
        return report;
    }
    report.level_optima = level_optima
        .into_iter()
        .enumerate()
        .map(|(q, x)| LevelOptimum {
            level: q + 1,
            value: crate::scalar::dot(mlp.objective(q + 1).expect("level in range"), &x),
            x,
            status: SolveStatus::Optimal,
            beta: T::zero(),
            iterations: 0,
            provided: true,
        })
        .collect();
    reduce_and_solve(mlp, cfg, report)
}

fn reduce_and_solve<T: Scalar>(
    mlp: &MultilevelProblem<T>,
    cfg: &MultilevelConfig<T>,
    mut report: CompromiseReport<T>,
) -> CompromiseReport<T> {
    let optima: Vec<Vec<T>> = report.level_optima.iter().map(|o| o.x.clone()).collect();
    let (mut lower, mut upper) = compute_initial_bounds(&optima);
    report.initial_lower = lower.clone();
    report.initial_upper = upper.clone();
    let n = mlp.n();

    for p in 2..=mlp.levels() {
        let ctx = match RangeReductionContext::new(mlp, &optima, &lower, &upper, p, &cfg.alpha, cfg.tol_sign.clone()) {
            Ok(ctx) => ctx,
            Err(e) => {
                report.failure = Some(reduction_failure(p, &e));
                return report;
            }
        };
        let reductions = (1..=mlp.level_sizes()[p - 2])
            .map(|j| ComponentReduction {
                variable: LevelIndex::new(p - 1, j),
                case: ctx.case(j).expect("position in range"),
                alpha: ctx.alpha(j).expect("position in range").cloned(),
            })
            .collect();
        let (new_lower, new_upper) = match ctx.reduce_bounds() {
            Ok(b) => b,
            Err(e) => {
                report.failure = Some(reduction_failure(p, &e));
                return report;
            }
        };
        let solved = standard_lp(mlp, p, Some((&new_lower, &new_upper)), cfg)
            .and_then(|lp| adaptive::solve(&lp, &cfg.epsilon_for(p), &cfg.solver).map(|r| (lp, r)));
        let (lp, res) = match solved {
            Ok(v) => v,
            Err(e) => {
                report.failure = Some(error_failure(p, FailureStage::Iteration, &e));
                return report;
            }
        };
        let beta_xi = match res.sfs.as_ref().map(|sfs| multilevel_suboptimality(&lp, sfs, &ctx, &cfg.solver.pivot_tol)).transpose() {
            Ok(v) => v,
            Err(e) => {
                report.failure = Some(reduction_failure(p, &e));
                return report;
            }
        };
        let x: Vec<T> = if res.x.is_empty() { Vec::new() } else { res.x[..n].to_vec() };
        let objectives = if x.is_empty() { Vec::new() } else { mlp.evaluate_objectives(&x).expect("length n") };
        report.iterations.push(IterationReport {
            level: p,
            reductions,
            lower: new_lower.clone(),
            upper: new_upper.clone(),
            status: res.status,
            x,
            objectives,
            beta: res.beta,
            beta_xi,
            iterations: res.iterations,
        });
        if !res.status.is_solved() {
            report.failure = Some(status_failure(p, FailureStage::Iteration, res.status));
            return report;
        }
        lower = new_lower;
        upper = new_upper;
    }

    let last = report.iterations.last().expect("at least two levels");
    let x = last.x.clone();
    let tol = cfg.solver.tol_feas.clone();
    if !is_feasible_in_box(mlp, &x, &lower, &upper, &tol) {
        report.failure = Some(RunFailure {
            level: mlp.levels(),
            stage: FailureStage::Verification,
            kind: FailureKind::Numerical,
            message: "compromise violates the constraints or its box".into(),
        });
        return report;
    }
    report.compromise_objectives = Some(last.objectives.clone());
    report.compromise = Some(x);
    report
}

fn reduction_failure(level: usize, e: &ReductionError) -> RunFailure {
    let kind = match e {
        ReductionError::ComponentAlphaTooLarge { .. }
        | ReductionError::AlphaTooLarge { .. }
        | ReductionError::NegativeAlpha { .. }
        | ReductionError::Model(_) => FailureKind::InvalidInput,
        _ => FailureKind::Numerical,
    };
    RunFailure { level, stage: FailureStage::Reduction, kind, message: e.to_string() }
}

/// `A x <= b`, `x >= 0` and `lower <= x <= upper`, each within `tol`.
pub fn is_feasible_in_box<T: Scalar>(mlp: &MultilevelProblem<T>, x: &[T], lower: &[T], upper: &[T], tol: &T) -> bool {
    if x.len() != mlp.n() || lower.len() != x.len() || upper.len() != x.len() {
        return false;
    }
    let in_box = x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| {
        v.clone() >= l.clone() - tol.clone() && v.clone() <= u.clone() + tol.clone()
    });
    in_box && mlp.max_violation(x) <= *tol
}

/// Suboptimality estimate of an SFS of the iteration-`p` model with the
/// reduction map applied to the point and to the bounds of every
/// structural nonsupport column; slack columns use the identity. Estimates
/// within `zero_tol` of zero are treated as zero.
pub fn multilevel_suboptimality<T: Scalar>(
    lp: &StandardLP<T>,
    sfs: &SupportingFeasibleSolution<T>,
    ctx: &RangeReductionContext<'_, T>,
    zero_tol: &T,
) -> Result<T, ReductionError> {
    let estimates = reduced_estimates(lp, sfs);
    let x = sfs.x();
    let mut beta = T::zero();
    for j in sfs.nonsupport() {
        let e = &estimates[j];
        if e.abs() <= *zero_tol || e.is_zero() {
            continue;
        }
        let bound = if e.gt_zero() { &lp.lower[j] } else { &lp.upper[j] };
        let term = if j < lp.structural {
            ctx.xi_flat(j, &x[j])? - ctx.xi_flat(j, bound)?
        } else {
            x[j].clone() - bound.clone()
        };
        beta = beta + e.clone() * term;
    }
    Ok(beta)
}

/// Whether the report's final point is an `epsilon_p`-optimal compromise:
/// the run completed, the last estimate is below `epsilon_p` (or within
/// `tol_opt` of zero), and the point is feasible for its box.
pub fn check_compromise<T: Scalar>(
    mlp: &MultilevelProblem<T>,
    report: &CompromiseReport<T>,
    epsilon_p: &T,
    tol_feas: &T,
    tol_opt: &T,
) -> bool {
    let (Some(x), Some(last)) = (&report.compromise, report.iterations.last()) else {
        return false;
    };
    if report.failure.is_some() {
        return false;
    }
    let Some(beta_xi) = &last.beta_xi else {
        return false;
    };
    let small = beta_xi < epsilon_p || beta_xi <= tol_opt;
    small && is_feasible_in_box(mlp, x, &last.lower, &last.upper, tol_feas)
}

/// Known solution to compare a run against.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReferenceSolution<T> {
    #[serde(default)]
    pub level_optima: Option<Vec<Vec<T>>>,
    #[serde(default)]
    pub compromise: Option<Vec<T>>,
    /// `(f_1, ..., f_P)` at the reference compromise.
    #[serde(default)]
    pub objectives: Option<Vec<T>>,
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}

/// Runs the pipeline and annotates it against `reference`.
///
/// With `from_reference` set and reference level optima available, the
/// reduction starts from those optima; the independent level solves are
/// still performed so that alternate optima are noted.
pub fn run_with_reference<T: Scalar>(
    mlp: &MultilevelProblem<T>,
    cfg: &MultilevelConfig<T>,
    reference: &ReferenceSolution<T>,
    from_reference: bool,
) -> CompromiseReport<T> {
    let tol = T::max_of(cfg.solver.tol_feas.clone(), T::tolerance(1e-9));
    let ref_optima = reference.level_optima.as_ref().filter(|_| from_reference);
    let Some(ref_optima) = ref_optima else {
        let mut report = run(mlp, cfg);
        let notes = reference_notes(mlp, &report, reference, &tol);
        report.notes.extend(notes);
        return report;
    };
    let mut report = run_from_level_optima(mlp, ref_optima.clone(), cfg);
    match solve_all_levels(mlp, cfg) {
        Ok(solved) => report.notes.extend(level_optima_notes(mlp, &solved, ref_optima, &tol)),
        Err(f) => report.notes.push(format!("independent level solves failed: {f}")),
    }
    let rest = ReferenceSolution { level_optima: None, ..reference.clone() };
    let notes = reference_notes(mlp, &report, &rest, &tol);
    report.notes.extend(notes);
    report
}

/// Notes on level optima that differ from reference ones.
fn level_optima_notes<T: Scalar>(
    mlp: &MultilevelProblem<T>,
    optima: &[LevelOptimum<T>],
    ref_optima: &[Vec<T>],
    tol: &T,
) -> Vec<String> {
    let mut notes = Vec::new();
    for (o, r) in optima.iter().zip(ref_optima) {
        if o.x.len() == r.len() && o.x.iter().zip(r).all(|(u, v)| u.near(v, tol)) {
            continue;
        }
        let ref_value = mlp.objective(o.level).map(|c| crate::scalar::dot(c, r)).ok();
        let same_value = ref_value.as_ref().is_some_and(|v| v.near(&o.value, tol));
        if same_value {
            notes.push(format!(
                "alternate optimum at level {}: solver vertex {} differs from reference {} with equal objective; \
                 initial bounds depend on this choice",
                o.level,
                fmt_vec(&to_f64_vec(&o.x)),
                fmt_vec(&to_f64_vec(r)),
            ));
        } else {
            notes.push(format!(
                "level {} optimum {} with value {:.4} differs from reference {}",
                o.level,
                fmt_vec(&to_f64_vec(&o.x)),
                o.value.to_f64_lossy(),
                fmt_vec(&to_f64_vec(r)),
            ));
        }
    }
    notes
}

/// Human-readable notes on where a run departs from a reference.
pub fn reference_notes<T: Scalar>(
    mlp: &MultilevelProblem<T>,
    report: &CompromiseReport<T>,
    reference: &ReferenceSolution<T>,
    tol: &T,
) -> Vec<String> {
    let mut notes = match &reference.level_optima {
        Some(ref_optima) => level_optima_notes(mlp, &report.level_optima, ref_optima, tol),
        None => Vec::new(),
    };

    if let Some(point) = &reference.compromise {
        if point.len() == mlp.n() {
            let rows = mlp.a().mul_vec(point);
            for (i, (v, b)) in rows.iter().zip(mlp.b()).enumerate() {
                let excess = v.clone() - b.clone();
                if excess > *tol {
                    notes.push(format!(
                        "reference compromise {} violates row {}: {:.4} > {:.4}",
                        fmt_vec(&to_f64_vec(point)),
                        i + 1,
                        v.to_f64_lossy(),
                        b.to_f64_lossy(),
                    ));
                }
            }
        }
    }

    if let (Some(expected), Some(actual)) = (&reference.objectives, &report.compromise_objectives) {
        let round = T::from_f64_lossy(1e-4);
        let within = expected.len() == actual.len() && expected.iter().zip(actual).all(|(e, a)| e.near(a, &round));
        if !within {
            notes.push(format!(
                "compromise objectives {} differ from reference objectives {}",
                fmt_vec(&to_f64_vec(actual)),
                fmt_vec(&to_f64_vec(expected)),
            ));
        }
    }
    notes
}
