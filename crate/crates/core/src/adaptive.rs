//! The adaptive (support) method for `max c x  s.t.  A x = b,  l <= x <= u`.
//!
//! The iterate is a supporting feasible solution `{x, J_B}`: a feasible
//! point together with `m` columns whose submatrix `A_B` is nonsingular.
//! Unlike a simplex basis, nonsupport components of `x` may sit strictly
//! inside their bounds.
//!
//! Estimates follow the convention `E_j = c_B A_B^{-1} a_j - c_j`, so an
//! SFS is optimal when every nonsupport column with `E_j > 0` sits at its
//! lower bound and every column with `E_j < 0` at its upper bound. The
//! suboptimality estimate
//!
//! ```text
//! beta = sum_{E_j > 0} E_j (x_j - l_j) + sum_{E_j < 0} E_j (x_j - u_j)
//! ```
//!
//! bounds the gap `c x* - c x` from above.
//!
//! One iteration moves `x` towards the pseudo-plan (nonsupport columns
//! pushed to the bound their estimate prefers) until a support column
//! blocks, which scales `beta` by `1 - theta`. If the blocking column
//! leaves the support, the entering column is picked by a long dual step:
//! the piecewise-linear `beta` along the dual direction is minimized, so
//! the support change never increases `beta` and strictly lowers it unless
//! the estimates are dual degenerate. Ties are broken towards the smallest
//! column index.

use thiserror::Error;

use crate::linalg::Matrix;
use crate::lp_model::{ModelError, StandardLP};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid problem: {0}")]
    Model(#[from] ModelError),
    #[error("epsilon must be nonnegative")]
    NegativeEpsilon,
    #[error("the feasible set is empty")]
    Infeasible,
    #[error("the objective is unbounded above")]
    Unbounded,
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
    #[error("support matrix is singular")]
    SingularSupport,
    #[error("equality rows are linearly dependent; no full-rank support exists")]
    RankDeficient,
    #[error("invalid supporting solution: {0}")]
    InvalidSupport(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone)]
pub struct SolverConfig<T> {
    /// Feasibility tolerance for rows and bounds.
    pub tol_feas: T,
    /// `beta` at or below this counts as exactly optimal.
    pub tol_opt: T,
    /// Smallest pivot magnitude accepted; also the zero threshold for
    /// estimates and direction components.
    pub pivot_tol: T,
    /// Support changes between full refactorizations.
    pub refactor_interval: usize,
    /// Defaults to `10 (N + m)` when `None`.
    pub iteration_limit: Option<usize>,
    /// Keep a per-iteration trace in the result.
    pub record_trace: bool,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            tol_feas: T::tolerance(1e-9),
            tol_opt: T::tolerance(1e-9),
            pivot_tol: T::tolerance(1e-10),
            refactor_interval: 50,
            iteration_limit: None,
            record_trace: false,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    fn limit_for(&self, lp: &StandardLP<T>) -> usize {
        self.iteration_limit.unwrap_or(10 * (lp.n() + lp.m()))
    }

    /// Feasibility tolerance scaled to the magnitude of the data.
    fn feas_tol_for(&self, lp: &StandardLP<T>, x: &[T]) -> T {
        let scale = lp
            .b
            .iter()
            .chain(x.iter())
            .fold(T::one(), |acc, v| T::max_of(acc, v.abs()));
        self.tol_feas.clone() * scale
    }
}

/// A feasible point paired with a nonsingular support.
#[derive(Debug, Clone)]
pub struct SupportingFeasibleSolution<T> {
    x: Vec<T>,
    support: Vec<usize>,
    in_support: Vec<bool>,
    inverse: Matrix<T>,
    updates: usize,
}

impl<T: Scalar> SupportingFeasibleSolution<T> {
    /// Validates and factorizes `{x, support}` (0-based column indices).
    pub fn new(lp: &StandardLP<T>, x: Vec<T>, support: Vec<usize>, cfg: &SolverConfig<T>) -> Result<Self, SolveError> {
        if x.len() != lp.n() {
            return Err(SolveError::InvalidSupport(format!("point has {} entries, expected {}", x.len(), lp.n())));
        }
        if support.len() != lp.m() {
            return Err(SolveError::InvalidSupport(format!(
                "support has {} columns, expected {}",
                support.len(),
                lp.m()
            )));
        }
        let mut in_support = vec![false; lp.n()];
        for &j in &support {
            if j >= lp.n() || std::mem::replace(&mut in_support[j], true) {
                return Err(SolveError::InvalidSupport(format!("bad or repeated support column {j}")));
            }
        }
        let inverse = lp.a.select_columns(&support).inverse(&cfg.pivot_tol).ok_or(SolveError::SingularSupport)?;
        let violation = lp.max_violation(&x);
        if violation > cfg.feas_tol_for(lp, &x) {
            return Err(SolveError::InvalidSupport(format!("point violates constraints by {violation}")));
        }
        Ok(SupportingFeasibleSolution { x, support, in_support, inverse, updates: 0 })
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    /// Support columns `J_B` (0-based), ordered by factorization position.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Nonsupport columns `J_N` (0-based, ascending).
    pub fn nonsupport(&self) -> Vec<usize> {
        (0..self.x.len()).filter(|&j| !self.in_support[j]).collect()
    }

    pub fn is_support(&self, j: usize) -> bool {
        self.in_support[j]
    }

    /// `A_B^{-1}`.
    pub fn support_inverse(&self) -> &Matrix<T> {
        &self.inverse
    }

    /// Replaces the support column at `position` by `entering`.
    fn replace(
        &mut self,
        lp: &StandardLP<T>,
        position: usize,
        entering: usize,
        cfg: &SolverConfig<T>,
    ) -> Result<(), SolveError> {
        let w = self.inverse.mul_vec(&lp.a.column(entering));
        let pivot = w[position].clone();
        if pivot.abs() <= cfg.pivot_tol || pivot.is_zero() {
            return Err(SolveError::SingularSupport);
        }
        let leaving = self.support[position];
        self.in_support[leaving] = false;
        self.in_support[entering] = true;
        self.support[position] = entering;

        let pivot_row: Vec<T> = self.inverse.row(position).iter().map(|v| v.clone() / pivot.clone()).collect();
        for (i, wi) in w.iter().enumerate() {
            let row = self.inverse.row_mut(i);
            if i == position {
                row.clone_from_slice(&pivot_row);
            } else if !wi.is_zero() {
                for (r, p) in row.iter_mut().zip(&pivot_row) {
                    *r = r.clone() - wi.clone() * p.clone();
                }
            }
        }
        self.updates += 1;

        let max_w = w.iter().fold(T::zero(), |acc, v| T::max_of(acc, v.abs()));
        let ill_conditioned = !T::EXACT && pivot.abs() < T::tolerance(1e-8) * max_w;
        if self.updates >= cfg.refactor_interval || ill_conditioned {
            self.refactor(lp, cfg)?;
        }
        Ok(())
    }

    /// Recomputes `A_B^{-1}` from scratch and re-solves the support part of
    /// `x` from its nonsupport part.
    fn refactor(&mut self, lp: &StandardLP<T>, cfg: &SolverConfig<T>) -> Result<(), SolveError> {
        self.inverse = lp.a.select_columns(&self.support).inverse(&cfg.pivot_tol).ok_or(SolveError::SingularSupport)?;
        self.updates = 0;
        self.resolve_support_values(lp, cfg);
        Ok(())
    }

    fn resolve_support_values(&mut self, lp: &StandardLP<T>, cfg: &SolverConfig<T>) {
        let mut rhs = lp.b.clone();
        for j in self.nonsupport() {
            if self.x[j].is_zero() {
                continue;
            }
            for (i, r) in rhs.iter_mut().enumerate() {
                *r = r.clone() - lp.a[(i, j)].clone() * self.x[j].clone();
            }
        }
        let xb = self.inverse.mul_vec(&rhs);
        for (k, v) in xb.into_iter().enumerate() {
            let j = self.support[k];
            let lo = lp.lower[j].clone() - cfg.tol_feas.clone();
            let hi = lp.upper[j].clone() + cfg.tol_feas.clone();
            self.x[j] = if v >= lo && v <= hi { v.clamp_to(&lp.lower[j], &lp.upper[j]) } else { v };
        }
    }
}

/// Estimates `E_j = c_B A_B^{-1} a_j - c_j`, zero on the support.
pub fn reduced_estimates<T: Scalar>(lp: &StandardLP<T>, sfs: &SupportingFeasibleSolution<T>) -> Vec<T> {
    let c_b: Vec<T> = sfs.support.iter().map(|&j| lp.c[j].clone()).collect();
    let potentials = sfs.inverse.vec_mul(&c_b);
    let ya = lp.a.vec_mul(&potentials);
    ya.into_iter()
        .zip(&lp.c)
        .enumerate()
        .map(|(j, (v, c))| if sfs.in_support[j] { T::zero() } else { v - c.clone() })
        .collect()
}

/// The suboptimality estimate `beta(x, J_B)`.
pub fn suboptimality<T: Scalar>(lp: &StandardLP<T>, sfs: &SupportingFeasibleSolution<T>) -> T {
    let estimates = reduced_estimates(lp, sfs);
    beta_of(lp, &sfs.x, &estimates)
}

/// Estimates with entries below `tol` in magnitude set to zero, so that
/// `beta`, the pseudo-plan and the dual step all agree on which columns
/// are priced out. Far-away capped bounds would otherwise turn round-off
/// in an estimate into a visible `beta`.
fn working_estimates<T: Scalar>(lp: &StandardLP<T>, sfs: &SupportingFeasibleSolution<T>, tol: &T) -> Vec<T> {
    let mut estimates = reduced_estimates(lp, sfs);
    for e in &mut estimates {
        if e.abs() <= *tol {
            *e = T::zero();
        }
    }
    estimates
}

/// `beta` for a point and an estimate vector; support columns must carry
/// zero estimates.
pub(crate) fn beta_of<T: Scalar>(lp: &StandardLP<T>, x: &[T], estimates: &[T]) -> T {
    estimates.iter().enumerate().fold(T::zero(), |acc, (j, e)| {
        if e.gt_zero() {
            acc + e.clone() * (x[j].clone() - lp.lower[j].clone())
        } else if e.lt_zero() {
            acc + e.clone() * (x[j].clone() - lp.upper[j].clone())
        } else {
            acc
        }
    })
}

/// What one call to [`iterate`] did.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<T> {
    /// `beta` of the incoming SFS.
    pub beta_before: T,
    /// Primal step length in `[0, 1]`.
    pub theta: T,
    /// `beta` after the primal step, before any support change.
    pub beta_after_step: T,
    /// `beta` of the outgoing SFS.
    pub beta_after: T,
    /// `(leaving, entering)` when the support changed.
    pub support_change: Option<(usize, usize)>,
}

/// Outcome of [`iterate`].
#[derive(Debug, Clone, PartialEq)]
pub enum IterateOutcome<T> {
    /// `beta <= epsilon` already held; nothing was changed.
    WithinEpsilon(T),
    Stepped(Step<T>),
}

/// One adaptive-method iteration.
pub fn iterate<T: Scalar>(
    lp: &StandardLP<T>,
    sfs: &mut SupportingFeasibleSolution<T>,
    epsilon: &T,
    cfg: &SolverConfig<T>,
) -> Result<IterateOutcome<T>, SolveError> {
    let zero_tol = &cfg.pivot_tol;
    let estimates = working_estimates(lp, sfs, zero_tol);
    let beta_before = beta_of(lp, &sfs.x, &estimates);
    if &beta_before <= epsilon {
        return Ok(IterateOutcome::WithinEpsilon(beta_before));
    }

    let n = lp.n();
    let is_fixed = |j: usize| lp.lower[j] == lp.upper[j];

    // Direction towards the pseudo-plan.
    let mut direction = vec![T::zero(); n];
    for j in sfs.nonsupport() {
        if is_fixed(j) {
            continue;
        }
        let e = &estimates[j];
        if e > zero_tol {
            direction[j] = lp.lower[j].clone() - sfs.x[j].clone();
        } else if e < &-zero_tol.clone() {
            direction[j] = lp.upper[j].clone() - sfs.x[j].clone();
        }
    }
    // Column by column, so that round-off in `B^-1 a_j` is not amplified
    // by moves towards capped bounds.
    let mut support_direction = vec![T::zero(); sfs.support.len()];
    for j in sfs.nonsupport() {
        if direction[j].is_zero() {
            continue;
        }
        for (k, v) in sfs.inverse.mul_vec(&lp.a.column(j)).into_iter().enumerate() {
            if v.abs() > *zero_tol {
                support_direction[k] = support_direction[k].clone() - v * direction[j].clone();
            }
        }
    }
    for (k, &j) in sfs.support.iter().enumerate() {
        direction[j] = support_direction[k].clone();
    }

    // Ratio test over the support: the step is the smallest ratio; among
    // columns that reach their bound within the feasibility tolerance at
    // that step, the smallest index leaves.
    let mut ratios: Vec<(usize, usize, T)> = Vec::new();
    for (k, &j) in sfs.support.iter().enumerate() {
        let d = &direction[j];
        let ratio = if d > zero_tol {
            (lp.upper[j].clone() - sfs.x[j].clone()) / d.clone()
        } else if d < &-zero_tol.clone() {
            (lp.lower[j].clone() - sfs.x[j].clone()) / d.clone()
        } else {
            continue;
        };
        ratios.push((k, j, T::max_of(ratio, T::zero())));
    }
    let mut theta = T::one();
    let mut blocking: Option<(usize, usize)> = None;
    if let Some(min) = ratios.iter().map(|r| r.2.clone()).reduce(T::min_of) {
        if min < theta {
            theta = min;
            blocking = ratios
                .iter()
                .filter(|(_, j, ratio)| (ratio.clone() - theta.clone()) * direction[*j].abs() <= cfg.tol_feas)
                .min_by_key(|(_, j, _)| *j)
                .map(|(k, j, _)| (*k, *j));
        }
    }

    for (j, d) in direction.iter().enumerate() {
        if !d.is_zero() {
            sfs.x[j] = sfs.x[j].clone() + theta.clone() * d.clone();
        }
    }
    if theta.is_one() {
        for j in sfs.nonsupport() {
            if !direction[j].is_zero() {
                let e = &estimates[j];
                sfs.x[j] = if e.gt_zero() { lp.lower[j].clone() } else { lp.upper[j].clone() };
            }
        }
    }
    let mut leaving_at_lower = false;
    if let Some((_, j0)) = blocking {
        leaving_at_lower = direction[j0].lt_zero();
        sfs.x[j0] = if leaving_at_lower { lp.lower[j0].clone() } else { lp.upper[j0].clone() };
    }
    snap_into_box(lp, &mut sfs.x, &cfg.tol_feas);

    let beta_after_step = beta_of(lp, &sfs.x, &estimates);
    let Some((position, leaving)) = blocking else {
        return Ok(IterateOutcome::Stepped(Step {
            beta_before,
            theta,
            beta_after: beta_after_step.clone(),
            beta_after_step,
            support_change: None,
        }));
    };
    if &beta_after_step <= epsilon {
        return Ok(IterateOutcome::Stepped(Step {
            beta_before,
            theta,
            beta_after: beta_after_step.clone(),
            beta_after_step,
            support_change: None,
        }));
    }

    let entering = long_dual_step(lp, sfs, &estimates, position, leaving_at_lower, cfg)?;
    sfs.replace(lp, position, entering, cfg)?;
    let beta_after = beta_of(lp, &sfs.x, &working_estimates(lp, sfs, zero_tol));
    Ok(IterateOutcome::Stepped(Step {
        beta_before,
        theta,
        beta_after_step,
        beta_after,
        support_change: Some((leaving, entering)),
    }))
}

/// Chooses the entering column when the support column at `position`
/// leaves. Walks the breakpoints of `beta` along the dual direction and
/// stops where its slope turns nonnegative.
fn long_dual_step<T: Scalar>(
    lp: &StandardLP<T>,
    sfs: &SupportingFeasibleSolution<T>,
    estimates: &[T],
    position: usize,
    leaving_at_lower: bool,
    cfg: &SolverConfig<T>,
) -> Result<usize, SolveError> {
    let zero_tol = &cfg.pivot_tol;
    let row = sfs.inverse.row(position);
    let row_a = lp.a.vec_mul(row);
    let sign = if leaving_at_lower { T::one() } else { -T::one() };

    let mut slope = T::zero();
    let mut breakpoints: Vec<(T, usize, T)> = Vec::new();
    for j in sfs.nonsupport() {
        if lp.lower[j] == lp.upper[j] {
            continue;
        }
        if row_a[j].abs() <= *zero_tol {
            continue;
        }
        let delta = sign.clone() * row_a[j].clone();
        let e = &estimates[j];
        let e_zero = e.abs() <= *zero_tol;
        if !e_zero {
            let target = if e.gt_zero() { &lp.lower[j] } else { &lp.upper[j] };
            slope = slope + delta.clone() * (sfs.x[j].clone() - target.clone());
        }
        if e_zero {
            let target = if delta.gt_zero() { &lp.lower[j] } else { &lp.upper[j] };
            let increment = delta * (sfs.x[j].clone() - target.clone());
            breakpoints.push((T::zero(), j, increment));
        } else if (e.clone() * delta.clone()).lt_zero() {
            let at = -e.clone() / delta.clone();
            let increment = delta.abs() * (lp.upper[j].clone() - lp.lower[j].clone());
            breakpoints.push((at, j, increment));
        }
    }
    breakpoints.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));

    if breakpoints.is_empty() {
        return Err(SolveError::Invariant("support change found no entering column".into()));
    }
    // Capped bounds make the slope terms large while their sum stays
    // small, so the sign test is relative to the largest term seen.
    let mut scale = T::max_of(T::one(), slope.abs());
    let flat = |slope: &T, scale: &T| slope >= &-(zero_tol.clone() * scale.clone());
    if flat(&slope, &scale) {
        return Ok(breakpoints[0].1);
    }
    for (_, j, increment) in &breakpoints {
        scale = T::max_of(scale, increment.abs());
        slope = slope + increment.clone();
        if flat(&slope, &scale) {
            return Ok(*j);
        }
    }
    Err(SolveError::Invariant("suboptimality estimate decreases without bound along the dual direction".into()))
}

fn snap_into_box<T: Scalar>(lp: &StandardLP<T>, x: &mut [T], tol: &T) {
    for (j, v) in x.iter_mut().enumerate() {
        let (l, u) = (&lp.lower[j], &lp.upper[j]);
        if (v.clone() < l.clone() && l.clone() - v.clone() <= *tol) || (v.clone() > u.clone() && v.clone() - u.clone() <= *tol)
        {
            *v = v.clone().clamp_to(l, u);
        }
    }
}

/// Builds an initial SFS. Columns start at the point of their box closest
/// to zero; each row is then balanced by a unit column of that row where
/// one fits. Remaining residuals get auxiliary columns whose total is
/// driven to zero by an adaptive phase-1 solve.
pub fn initial_sfs<T: Scalar>(
    lp: &StandardLP<T>,
    cfg: &SolverConfig<T>,
) -> Result<SupportingFeasibleSolution<T>, SolveError> {
    lp.validate()?;
    let n = lp.n();
    let m = lp.m();
    let mut x: Vec<T> = (0..n).map(|j| T::zero().clamp_to(&lp.lower[j], &lp.upper[j])).collect();
    let mut residual: Vec<T> = lp.b.iter().zip(lp.a.mul_vec(&x)).map(|(b, ax)| b.clone() - ax).collect();

    // Scan from the right so slack columns, which come last, are preferred.
    let mut support: Vec<Option<usize>> = vec![None; m];
    for j in (0..n).rev() {
        if lp.lower[j] == lp.upper[j] {
            continue;
        }
        let Some(row) = unit_column_row(&lp.a, j) else { continue };
        if support[row].is_some() {
            continue;
        }
        let coef = lp.a[(row, j)].clone();
        let wanted = x[j].clone() + residual[row].clone() / coef.clone();
        let value = wanted.clone().clamp_to(&lp.lower[j], &lp.upper[j]);
        residual[row] = residual[row].clone() - coef * (value.clone() - x[j].clone());
        x[j] = value;
        if wanted == x[j] {
            support[row] = Some(j);
        }
    }

    let needs_aux: Vec<usize> = (0..m).filter(|&i| support[i].is_none()).collect();
    if needs_aux.is_empty() {
        let support: Vec<usize> = support.into_iter().map(|s| s.expect("all rows covered")).collect();
        return SupportingFeasibleSolution::new(lp, x, support, cfg);
    }
    phase_one(lp, x, residual, support, &needs_aux, cfg)
}

/// Row index of the only nonzero entry of column `j`, if there is exactly one.
fn unit_column_row<T: Scalar>(a: &Matrix<T>, j: usize) -> Option<usize> {
    let mut found = None;
    for i in 0..a.rows() {
        if !a[(i, j)].is_zero() {
            if found.is_some() {
                return None;
            }
            found = Some(i);
        }
    }
    found
}

fn phase_one<T: Scalar>(
    lp: &StandardLP<T>,
    x: Vec<T>,
    residual: Vec<T>,
    partial_support: Vec<Option<usize>>,
    aux_rows: &[usize],
    cfg: &SolverConfig<T>,
) -> Result<SupportingFeasibleSolution<T>, SolveError> {
    let n = lp.n();
    let m = lp.m();
    let k = aux_rows.len();

    let mut a = Matrix::zeros(m, n + k);
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = lp.a[(i, j)].clone();
        }
    }
    let mut c = vec![T::zero(); n + k];
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    let mut x_aux = x;
    let mut support = partial_support;
    for (t, &row) in aux_rows.iter().enumerate() {
        let col = n + t;
        let r = residual[row].clone();
        a[(row, col)] = if r.lt_zero() { -T::one() } else { T::one() };
        c[col] = -T::one();
        lower.push(T::zero());
        upper.push(r.abs());
        x_aux.push(r.abs());
        support[row] = Some(col);
    }
    let aux_lp = StandardLP {
        c,
        a,
        b: lp.b.clone(),
        lower,
        upper,
        structural: lp.structural,
        capped: lp.capped.iter().copied().chain(std::iter::repeat_n(false, k)).collect(),
    };
    let support: Vec<usize> = support.into_iter().map(|s| s.expect("every row covered")).collect();
    let mut sfs = SupportingFeasibleSolution::new(&aux_lp, x_aux, support, cfg)?;

    let limit = cfg.limit_for(&aux_lp);
    let mut iterations = 0;
    loop {
        match iterate(&aux_lp, &mut sfs, &cfg.tol_opt, cfg)? {
            IterateOutcome::WithinEpsilon(_) => break,
            IterateOutcome::Stepped(_) => {
                iterations += 1;
                if iterations >= limit {
                    return Err(SolveError::IterationLimit(limit));
                }
            }
        }
    }

    let infeasibility = sfs.x[n..].iter().fold(T::zero(), |acc, v| acc + v.clone());
    if infeasibility > cfg.feas_tol_for(lp, &sfs.x[..n]) {
        return Err(SolveError::Infeasible);
    }

    // Pivot auxiliary columns out of the support.
    for position in 0..m {
        if sfs.support[position] < n {
            continue;
        }
        let row_a = lp.a.vec_mul(sfs.inverse.row(position));
        let mut best: Option<(usize, T, bool)> = None;
        for (j, coefficient) in row_a.iter().enumerate().take(n) {
            if sfs.in_support[j] {
                continue;
            }
            let magnitude = coefficient.abs();
            if magnitude <= cfg.pivot_tol || magnitude.is_zero() {
                continue;
            }
            let free = lp.lower[j] != lp.upper[j];
            let better = match &best {
                None => true,
                Some((_, best_mag, best_free)) => (free && !best_free) || (free == *best_free && magnitude > *best_mag),
            };
            if better {
                best = Some((j, magnitude, free));
            }
        }
        let (entering, _, _) = best.ok_or(SolveError::RankDeficient)?;
        sfs.replace(&aux_lp, position, entering, cfg)?;
    }

    let mut point = sfs.x;
    point.truncate(n);
    let support = sfs.support;
    let mut result = SupportingFeasibleSolution {
        in_support: {
            let mut flags = vec![false; n];
            for &j in &support {
                flags[j] = true;
            }
            flags
        },
        x: point,
        support,
        inverse: Matrix::zeros(m, m),
        updates: 0,
    };
    result.refactor(lp, cfg)?;
    let violation = lp.max_violation(&result.x);
    if violation > cfg.feas_tol_for(lp, &result.x) {
        return Err(SolveError::Invariant(format!("phase-1 point violates constraints by {violation}")));
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolveStatus {
    Optimal,
    EpsilonOptimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl SolveStatus {
    /// `true` for the two statuses that carry a usable solution.
    pub fn is_solved(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::EpsilonOptimal)
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::EpsilonOptimal => "epsilon-optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration limit",
        };
        f.write_str(s)
    }
}

/// One visited SFS transition.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    pub objective_before: T,
    pub objective_after: T,
    pub step: Step<T>,
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub status: SolveStatus,
    /// Final point (all `N` columns); empty when infeasible.
    pub x: Vec<T>,
    pub objective: T,
    pub beta: T,
    pub iterations: usize,
    /// Terminal SFS, when one exists.
    pub sfs: Option<SupportingFeasibleSolution<T>>,
    pub trace: Vec<IterationRecord<T>>,
}

impl<T: Scalar> SolveResult<T> {
    fn without_solution(status: SolveStatus) -> Self {
        SolveResult {
            status,
            x: Vec::new(),
            objective: T::zero(),
            beta: T::zero(),
            iterations: 0,
            sfs: None,
            trace: Vec::new(),
        }
    }
}

/// Solves `lp` to `epsilon`-optimality.
///
/// Infeasibility, unboundedness and the iteration cap are reported through
/// [`SolveResult::status`]; `Err` is reserved for invalid input and
/// numerical breakdown. Unboundedness is detected when a column whose upper
/// bound stands in for infinity ends at that cap.
pub fn solve<T: Scalar>(lp: &StandardLP<T>, epsilon: &T, cfg: &SolverConfig<T>) -> Result<SolveResult<T>, SolveError> {
    if epsilon.lt_zero() {
        return Err(SolveError::NegativeEpsilon);
    }
    let sfs = match initial_sfs(lp, cfg) {
        Ok(sfs) => sfs,
        Err(SolveError::Infeasible) => return Ok(SolveResult::without_solution(SolveStatus::Infeasible)),
        Err(SolveError::IterationLimit(_)) => return Ok(SolveResult::without_solution(SolveStatus::IterationLimit)),
        Err(e) => return Err(e),
    };
    solve_from(lp, sfs, epsilon, cfg)
}

/// Runs adaptive iterations from a given SFS.
pub fn solve_from<T: Scalar>(
    lp: &StandardLP<T>,
    mut sfs: SupportingFeasibleSolution<T>,
    epsilon: &T,
    cfg: &SolverConfig<T>,
) -> Result<SolveResult<T>, SolveError> {
    let stop_at = T::max_of(epsilon.clone(), cfg.tol_opt.clone());
    let limit = cfg.limit_for(lp);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let beta = loop {
        let objective_before = lp.objective(&sfs.x);
        match iterate(lp, &mut sfs, &stop_at, cfg)? {
            IterateOutcome::WithinEpsilon(beta) => break beta,
            IterateOutcome::Stepped(step) => {
                iterations += 1;
                let violation = lp.max_violation(&sfs.x);
                if violation > cfg.feas_tol_for(lp, &sfs.x) {
                    return Err(SolveError::Invariant(format!(
                        "iterate {iterations} violates constraints by {violation}"
                    )));
                }
                if cfg.record_trace {
                    trace.push(IterationRecord {
                        iteration: iterations,
                        objective_before,
                        objective_after: lp.objective(&sfs.x),
                        step,
                    });
                }
                if iterations >= limit {
                    let beta = beta_of(lp, &sfs.x, &working_estimates(lp, &sfs, &cfg.pivot_tol));
                    if beta <= stop_at {
                        break beta;
                    }
                    return Ok(SolveResult {
                        status: SolveStatus::IterationLimit,
                        objective: lp.objective(&sfs.x),
                        x: sfs.x.clone(),
                        beta,
                        iterations,
                        sfs: Some(sfs),
                        trace,
                    });
                }
            }
        }
    };

    let status = if hits_infinity_cap(lp, &sfs.x, cfg) {
        SolveStatus::Unbounded
    } else if beta <= cfg.tol_opt {
        SolveStatus::Optimal
    } else {
        SolveStatus::EpsilonOptimal
    };
    Ok(SolveResult { status, objective: lp.objective(&sfs.x), x: sfs.x.clone(), beta, iterations, sfs: Some(sfs), trace })
}

fn hits_infinity_cap<T: Scalar>(lp: &StandardLP<T>, x: &[T], cfg: &SolverConfig<T>) -> bool {
    x.iter().enumerate().any(|(j, v)| {
        lp.capped[j] && {
            let cap = &lp.upper[j];
            let slack = cfg.tol_feas.clone() * T::max_of(T::one(), cap.abs());
            v.clone() >= cap.clone() - T::max_of(slack, T::zero())
        }
    })
}

/// Checks the termination certificate: every nonsupport column with a
/// positive estimate sits at its lower bound, every negative one at its
/// upper bound.
pub fn satisfies_optimality_certificate<T: Scalar>(
    lp: &StandardLP<T>,
    sfs: &SupportingFeasibleSolution<T>,
    tol: &T,
) -> bool {
    let estimates = reduced_estimates(lp, sfs);
    sfs.nonsupport().into_iter().all(|j| {
        let e = &estimates[j];
        if lp.lower[j] == lp.upper[j] || e.abs() <= *tol {
            true
        } else if e.gt_zero() {
            sfs.x[j].near(&lp.lower[j], tol)
        } else {
            sfs.x[j].near(&lp.upper[j], tol)
        }
    })
}
