//! Range reduction of the variables controlled by the level above.
//!
//! Before level `p` solves, level `p - 1` narrows the box of each variable
//! `x[p-1, j]` it controls, depending on where its own optimum `t` fell in
//! the current range `[l, u]`:
//!
//! * interior (`l < t < u`): keep `[l, t]` if its objective coefficient on
//!   the variable is negative, `[t, u]` if positive, and nothing when
//!   either level `p - 1` or level `p` ignores the variable;
//! * at the upper end (`t = u`): keep `[l, u - alpha]`;
//! * at the lower end (`t = l`): keep `[l + alpha, u]`.
//!
//! Every choice is an increasing affine map of `[l, u]` onto the kept
//! interval; the map is applied to both ends of the box. Variables of
//! other levels pass through unchanged, and so do zero-width ranges.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp_model::{LevelIndex, ModelError, MultilevelProblem};
use crate::scalar::Scalar;

/// Fraction of the range width used for `alpha` when none is given.
pub const DEFAULT_ALPHA_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("interval [{a1}, {a2}] is empty or a single point")]
    DegenerateInterval { a1: f64, a2: f64 },
    #[error("split point {t} is not strictly inside [{a1}, {a2}]")]
    SplitOutsideInterval { a1: f64, a2: f64, t: f64 },
    #[error("alpha {alpha} must be smaller than the range width {width}")]
    AlphaTooLarge { alpha: f64, width: f64 },
    #[error("alpha {alpha} for {var} must be smaller than its range width {width}")]
    ComponentAlphaTooLarge { var: LevelIndex, alpha: f64, width: f64 },
    #[error("alpha for {var} is negative")]
    NegativeAlpha { var: LevelIndex },
    #[error("{var} is not at an end of its range")]
    NotBoundary { var: LevelIndex },
    #[error("{var} is not strictly inside its range")]
    NotInterior { var: LevelIndex },
    #[error("level optimum of {var} lies outside its current range")]
    OptimumOutsideRange { var: LevelIndex },
    #[error("reduction level {p} is outside 2..={levels}")]
    LevelOutOfRange { p: usize, levels: usize },
    #[error("expected {expected} values, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Three-valued sign with a dead zone of width `tol` around zero.
pub fn sign<T: Scalar>(t: &T, tol: &T) -> i8 {
    if t < &-tol.clone() {
        -1
    } else if t.abs() <= *tol {
        0
    } else {
        1
    }
}

fn f(v: &impl Scalar) -> f64 {
    v.to_f64_lossy()
}

fn check_split<T: Scalar>(a1: &T, a2: &T, t: &T) -> Result<(), ReductionError> {
    if a2 <= a1 {
        return Err(ReductionError::DegenerateInterval { a1: f(a1), a2: f(a2) });
    }
    if t <= a1 || t >= a2 {
        return Err(ReductionError::SplitOutsideInterval { a1: f(a1), a2: f(a2), t: f(t) });
    }
    Ok(())
}

fn check_alpha<T: Scalar>(l: &T, u: &T, alpha: &T) -> Result<(), ReductionError> {
    let width = u.clone() - l.clone();
    if alpha >= &width {
        return Err(ReductionError::AlphaTooLarge { alpha: f(alpha), width: f(&width) });
    }
    Ok(())
}

/// Maps `[a1, a2]` onto `[a1, t]`.
pub fn lower_map<T: Scalar>(a1: &T, a2: &T, t: &T, x: &T) -> Result<T, ReductionError> {
    check_split(a1, a2, t)?;
    let num = (t.clone() - a1.clone()) * x.clone() + a1.clone() * (a2.clone() - t.clone());
    Ok(num / (a2.clone() - a1.clone()))
}

/// Maps `[a1, a2]` onto `[t, a2]`.
pub fn upper_map<T: Scalar>(a1: &T, a2: &T, t: &T, x: &T) -> Result<T, ReductionError> {
    check_split(a1, a2, t)?;
    let num = (a2.clone() - t.clone()) * x.clone() + a2.clone() * (t.clone() - a1.clone());
    Ok(num / (a2.clone() - a1.clone()))
}

/// Maps `[l, u]` onto `[l, u - alpha]`.
pub fn lower_alpha_map<T: Scalar>(l: &T, u: &T, alpha: &T, x: &T) -> Result<T, ReductionError> {
    check_alpha(l, u, alpha)?;
    // Written as a shift of `x` so that `alpha = 0` is exactly the identity.
    Ok(x.clone() - alpha.clone() * (x.clone() - l.clone()) / (u.clone() - l.clone()))
}

/// Maps `[l, u]` onto `[l + alpha, u]`.
pub fn upper_alpha_map<T: Scalar>(l: &T, u: &T, alpha: &T, x: &T) -> Result<T, ReductionError> {
    check_alpha(l, u, alpha)?;
    Ok(x.clone() + alpha.clone() * (u.clone() - x.clone()) / (u.clone() - l.clone()))
}

/// Where the level optimum sits in a component's current range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReductionCase {
    /// `l = u`; nothing to reduce.
    ZeroWidth,
    /// `l < t < u`.
    Interior,
    /// `t = u`.
    AtUpper,
    /// `t = l`.
    AtLower,
}

/// How `alpha` is chosen for boundary components.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPolicy<T> {
    /// Used as `fraction * (u - l)` where no override exists.
    pub fraction: T,
    /// Absolute values keyed by variable.
    pub overrides: BTreeMap<LevelIndex, T>,
}

impl<T: Scalar> Default for AlphaPolicy<T> {
    fn default() -> Self {
        AlphaPolicy { fraction: T::from_f64_lossy(DEFAULT_ALPHA_FRACTION), overrides: BTreeMap::new() }
    }
}

impl<T: Scalar> AlphaPolicy<T> {
    /// Only explicit values; components without one get `alpha = 0`.
    pub fn explicit(overrides: impl IntoIterator<Item = (LevelIndex, T)>) -> Self {
        AlphaPolicy { fraction: T::zero(), overrides: overrides.into_iter().collect() }
    }

    pub fn resolve(&self, var: LevelIndex, width: &T) -> T {
        if width.is_zero() {
            return T::zero();
        }
        match self.overrides.get(&var) {
            Some(a) => a.clone(),
            None => self.fraction.clone() * width.clone(),
        }
    }
}

/// Everything needed to reduce level `p - 1`'s ranges before level `p`
/// solves.
#[derive(Debug, Clone)]
pub struct RangeReductionContext<'a, T> {
    problem: &'a MultilevelProblem<T>,
    level_optima: &'a [Vec<T>],
    lower: &'a [T],
    upper: &'a [T],
    p: usize,
    cases: Vec<ReductionCase>,
    alpha: Vec<Option<T>>,
    tol_sign: T,
}

impl<'a, T: Scalar> RangeReductionContext<'a, T> {
    /// `level_optima[q]` is the optimum of level `q + 1`; `lower`/`upper`
    /// are the bounds in force before this reduction.
    pub fn new(
        problem: &'a MultilevelProblem<T>,
        level_optima: &'a [Vec<T>],
        lower: &'a [T],
        upper: &'a [T],
        p: usize,
        alpha: &AlphaPolicy<T>,
        tol_sign: T,
    ) -> Result<Self, ReductionError> {
        let levels = problem.levels();
        if p < 2 || p > levels {
            return Err(ReductionError::LevelOutOfRange { p, levels });
        }
        if level_optima.len() != levels {
            return Err(ReductionError::Dimension { expected: levels, found: level_optima.len() });
        }
        let n = problem.n();
        for v in level_optima.iter().map(Vec::len).chain([lower.len(), upper.len()]) {
            if v != n {
                return Err(ReductionError::Dimension { expected: n, found: v });
            }
        }
        for (e, (l, u)) in lower.iter().zip(upper).enumerate() {
            if u < l {
                return Err(ModelError::InvertedBounds { index: e + 1 }.into());
            }
        }

        let level = p - 1;
        let size = problem.level_sizes()[level - 1];
        let mut cases = Vec::with_capacity(size);
        let mut alphas = Vec::with_capacity(size);
        for j in 1..=size {
            let var = LevelIndex::new(level, j);
            let e = problem.flat_index(level, j)? - 1;
            let (l, u, t) = (&lower[e], &upper[e], &level_optima[level - 1][e]);
            let width = u.clone() - l.clone();
            let case = if sign(&width, &tol_sign) == 0 {
                ReductionCase::ZeroWidth
            } else if sign(&(u.clone() - t.clone()), &tol_sign) == 0 {
                ReductionCase::AtUpper
            } else if sign(&(t.clone() - l.clone()), &tol_sign) == 0 {
                ReductionCase::AtLower
            } else if t > l && t < u {
                ReductionCase::Interior
            } else {
                return Err(ReductionError::OptimumOutsideRange { var });
            };
            let a = match case {
                ReductionCase::AtUpper | ReductionCase::AtLower => {
                    let a = alpha.resolve(var, &width);
                    if a.lt_zero() {
                        return Err(ReductionError::NegativeAlpha { var });
                    }
                    if a >= width {
                        return Err(ReductionError::ComponentAlphaTooLarge { var, alpha: f(&a), width: f(&width) });
                    }
                    Some(a)
                }
                _ => None,
            };
            cases.push(case);
            alphas.push(a);
        }
        Ok(RangeReductionContext { problem, level_optima, lower, upper, p, cases, alpha: alphas, tol_sign })
    }

    /// The level about to solve; ranges of level `p - 1` are reduced.
    pub fn level(&self) -> usize {
        self.p
    }

    pub fn lower(&self) -> &[T] {
        self.lower
    }

    pub fn upper(&self) -> &[T] {
        self.upper
    }

    /// Case of component `x[p-1, j]`.
    pub fn case(&self, j: usize) -> Result<ReductionCase, ReductionError> {
        Ok(self.cases[self.slot(j)?])
    }

    /// `alpha` of component `x[p-1, j]`; present for boundary cases only.
    pub fn alpha(&self, j: usize) -> Result<Option<&T>, ReductionError> {
        Ok(self.alpha[self.slot(j)?].as_ref())
    }

    fn slot(&self, j: usize) -> Result<usize, ReductionError> {
        let size = self.cases.len();
        if j == 0 || j > size {
            return Err(ModelError::PositionOutOfRange { level: self.p - 1, position: j, size }.into());
        }
        Ok(j - 1)
    }

    fn var(&self, j: usize) -> LevelIndex {
        LevelIndex::new(self.p - 1, j)
    }

    /// `(l, u, t)` for component `x[p-1, j]`.
    fn component(&self, j: usize) -> Result<(&T, &T, &T), ReductionError> {
        self.slot(j)?;
        let e = self.problem.flat_index(self.p - 1, j)? - 1;
        Ok((&self.lower[e], &self.upper[e], &self.level_optima[self.p - 2][e]))
    }

    /// Signs of `c_{p-1}` and `c_p` on `x[p-1, j]`.
    fn coefficient_signs(&self, j: usize) -> Result<(i8, i8), ReductionError> {
        let var = self.var(j);
        let own = self.problem.coefficient(self.p - 1, var)?;
        let next = self.problem.coefficient(self.p, var)?;
        Ok((sign(own, &self.tol_sign), sign(next, &self.tol_sign)))
    }

    /// Position selectors `(A, B) = (sign(u - t), sign(t - l))`.
    pub fn selectors(&self, j: usize) -> Result<(i8, i8), ReductionError> {
        let (l, u, t) = self.component(j)?;
        Ok((sign(&(u.clone() - t.clone()), &self.tol_sign), sign(&(t.clone() - l.clone()), &self.tol_sign)))
    }

    /// Case weights `(H1, H2)`: `(0, 1)` for an interior optimum, `(1, 0)`
    /// at either end.
    pub fn case_weights(&self, j: usize) -> Result<(i8, i8), ReductionError> {
        let (a, b) = self.selectors(j)?;
        let h1 = (1 + a) * (1 - a) + (1 + b) * (1 - b);
        let h2 = a * b;
        Ok((h1, h2))
    }

    /// `1` when both level `p - 1` and level `p` weigh `x[p-1, j]`, else `0`.
    pub fn gate(&self, j: usize) -> Result<i8, ReductionError> {
        let (own, next) = self.coefficient_signs(j)?;
        Ok((own * next) * (own * next))
    }

    /// Interior map: the lower part for a negative own coefficient, the
    /// upper part for a positive one, their mean for a zero one.
    pub fn psi(&self, j: usize, x: &T) -> Result<T, ReductionError> {
        let (l, u, t) = self.component(j)?;
        let (own, _) = self.coefficient_signs(j)?;
        let weight_lower = T::from_int((1 - own) as i64);
        let weight_upper = T::from_int((1 + own) as i64);
        let mut value = T::zero();
        if !weight_lower.is_zero() {
            value = value + weight_lower * lower_map(l, u, t, x)?;
        }
        if !weight_upper.is_zero() {
            value = value + weight_upper * upper_map(l, u, t, x)?;
        }
        Ok(value / T::from_int(2))
    }

    /// [`psi`](Self::psi) behind the coefficient gate.
    pub fn nu(&self, j: usize, x: &T) -> Result<T, ReductionError> {
        if self.gate(j)? == 1 {
            self.psi(j, x)
        } else {
            Ok(x.clone())
        }
    }

    /// Boundary map: shrink from the end the optimum sits on. Identity on a
    /// zero-width range.
    pub fn psi_hat(&self, j: usize, x: &T) -> Result<T, ReductionError> {
        let slot = self.slot(j)?;
        if self.cases[slot] == ReductionCase::ZeroWidth {
            return Ok(x.clone());
        }
        let (a, b) = self.selectors(j)?;
        if a != 0 && b != 0 {
            return Err(ReductionError::NotBoundary { var: self.var(j) });
        }
        let (l, u, _) = self.component(j)?;
        let alpha = self.alpha[slot].clone().unwrap_or_else(T::zero);
        let mut value = T::zero();
        if b != 0 {
            value = value + T::from_int(b as i64) * lower_alpha_map(l, u, &alpha, x)?;
        }
        if a != 0 {
            value = value + T::from_int(a as i64) * upper_alpha_map(l, u, &alpha, x)?;
        }
        Ok(value)
    }

    /// [`psi_hat`](Self::psi_hat) behind the coefficient gate.
    pub fn nu_hat(&self, j: usize, x: &T) -> Result<T, ReductionError> {
        if self.gate(j)? == 1 {
            self.psi_hat(j, x)
        } else {
            Ok(x.clone())
        }
    }

    /// The reduction map applied to a value of variable `var`.
    pub fn xi(&self, var: LevelIndex, x: &T) -> Result<T, ReductionError> {
        self.problem.flat_index(var.level, var.position)?;
        if var.level != self.p - 1 {
            return Ok(x.clone());
        }
        let j = var.position;
        if self.case(j)? == ReductionCase::ZeroWidth {
            return Ok(x.clone());
        }
        let (h1, h2) = self.case_weights(j)?;
        let mut value = T::zero();
        if h1 != 0 {
            value = value + T::from_int(h1 as i64) * self.psi_hat(j, x)?;
        }
        if h2 != 0 {
            value = value + T::from_int(h2 as i64) * self.nu(j, x)?;
        }
        Ok(value)
    }

    /// [`xi`](Self::xi) addressed by 0-based flat index.
    pub fn xi_flat(&self, e: usize, x: &T) -> Result<T, ReductionError> {
        let var = crate::lp_model::level_index(self.problem.level_sizes(), e + 1)?;
        self.xi(var, x)
    }

    /// New bounds: the map applied to both bound vectors.
    pub fn reduce_bounds(&self) -> Result<(Vec<T>, Vec<T>), ReductionError> {
        let lower = self.lower.iter().enumerate().map(|(e, v)| self.xi_flat(e, v)).collect::<Result<Vec<_>, _>>()?;
        let upper = self.upper.iter().enumerate().map(|(e, v)| self.xi_flat(e, v)).collect::<Result<Vec<_>, _>>()?;
        Ok((lower, upper))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{reference_level_optima, three_level_problem};
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_int(n) / Rational::from_int(d)
    }

    #[test]
    fn sign_examples() {
        assert_eq!(sign(&-5.0, &1e-12), -1);
        assert_eq!(sign(&0.0, &1e-12), 0);
        assert_eq!(sign(&3.0, &1e-12), 1);
        assert_eq!(sign(&1e-13, &1e-12), 0);
    }

    #[test]
    fn interval_maps_examples() {
        assert_eq!(lower_map(&0.0, &2.0, &1.0, &2.0).unwrap(), 1.0);
        assert_eq!(lower_map(&0.0, &2.0, &1.0, &0.0).unwrap(), 0.0);
        assert_eq!(lower_map(&0.0, &4.0, &3.0, &2.0).unwrap(), 1.5);
        assert_eq!(upper_map(&0.0, &2.0, &0.25, &0.0).unwrap(), 0.25);
        assert_eq!(upper_map(&0.0, &2.0, &1.0, &2.0).unwrap(), 2.0);
        assert_eq!(upper_map(&0.0, &4.0, &1.0, &2.0).unwrap(), 2.5);
        assert!(lower_map(&2.0, &2.0, &2.0, &2.0).is_err());
        assert!(upper_map(&0.0, &2.0, &2.0, &1.0).is_err());
    }

    #[test]
    fn alpha_maps_examples() {
        assert_eq!(lower_alpha_map(&0.0, &2.0, &0.25, &2.0).unwrap(), 1.75);
        assert_eq!(lower_alpha_map(&0.0, &2.0, &0.25, &0.0).unwrap(), 0.0);
        assert_eq!(lower_alpha_map(&0.0, &3.0, &0.25, &3.0).unwrap(), 2.75);
        assert_eq!(upper_alpha_map(&0.0, &2.0, &0.25, &0.0).unwrap(), 0.25);
        assert_eq!(upper_alpha_map(&0.0, &3.0, &0.25, &0.0).unwrap(), 0.25);
        assert_eq!(upper_alpha_map(&0.0, &2.0, &0.25, &2.0).unwrap(), 2.0);
        assert!(matches!(
            upper_alpha_map(&0.0, &2.0, &2.0, &1.0),
            Err(ReductionError::AlphaTooLarge { .. })
        ));
        assert_eq!(lower_alpha_map(&0.0, &2.0, &0.0, &1.3).unwrap(), 1.3);
    }

    fn example_context<'a>(
        mlp: &'a MultilevelProblem<Rational>,
        optima: &'a [Vec<Rational>],
        lower: &'a [Rational],
        upper: &'a [Rational],
        p: usize,
        alpha: (usize, usize),
    ) -> RangeReductionContext<'a, Rational> {
        let policy = AlphaPolicy::explicit([(LevelIndex::new(alpha.0, alpha.1), r(1, 4))]);
        RangeReductionContext::new(mlp, optima, lower, upper, p, &policy, Rational::from_int(0)).unwrap()
    }

    #[test]
    fn example_first_reduction() {
        let mlp = three_level_problem::<Rational>();
        let optima = reference_level_optima::<Rational>();
        let lower = vec![r(0, 1); 4];
        let upper = vec![r(2, 1), r(0, 1), r(3, 1), r(2, 3)];
        let ctx = example_context(&mlp, &optima, &lower, &upper, 2, (1, 1));
        assert_eq!(ctx.case(1).unwrap(), ReductionCase::AtLower);
        assert_eq!(ctx.case(2).unwrap(), ReductionCase::ZeroWidth);
        assert_eq!(ctx.psi_hat(1, &r(0, 1)).unwrap(), r(1, 4));
        assert_eq!(ctx.psi_hat(1, &r(2, 1)).unwrap(), r(2, 1));
        let (l, u) = ctx.reduce_bounds().unwrap();
        assert_eq!(l, vec![r(1, 4), r(0, 1), r(0, 1), r(0, 1)]);
        assert_eq!(u, upper);
    }

    #[test]
    fn example_second_reduction() {
        let mlp = three_level_problem::<Rational>();
        let optima = reference_level_optima::<Rational>();
        let lower = vec![r(1, 4), r(0, 1), r(0, 1), r(0, 1)];
        let upper = vec![r(2, 1), r(0, 1), r(3, 1), r(2, 3)];
        let ctx = example_context(&mlp, &optima, &lower, &upper, 3, (2, 1));
        assert_eq!(ctx.case(1).unwrap(), ReductionCase::AtLower);
        let (l, u) = ctx.reduce_bounds().unwrap();
        assert_eq!(l, vec![r(1, 4), r(0, 1), r(1, 4), r(0, 1)]);
        assert_eq!(u, upper);
    }

    /// Two-level instance whose only level-1 variable can be placed anywhere
    /// in its range through the level optima.
    fn two_level(c1: f64, c2: f64) -> MultilevelProblem<f64> {
        MultilevelProblem::new(vec![1, 1], vec![vec![c1, 0.0], vec![c2, 1.0]], vec![vec![1.0, 1.0]], vec![10.0])
            .unwrap()
    }

    fn ctx_for<'a>(
        mlp: &'a MultilevelProblem<f64>,
        optima: &'a [Vec<f64>],
        lower: &'a [f64],
        upper: &'a [f64],
    ) -> RangeReductionContext<'a, f64> {
        RangeReductionContext::new(mlp, optima, lower, upper, 2, &AlphaPolicy::default(), 1e-12).unwrap()
    }

    #[test]
    fn psi_follows_own_coefficient_sign() {
        let optima = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
        let (lower, upper) = (vec![0.0, 0.0], vec![4.0, 4.0]);
        let pos = two_level(3.0, 1.0);
        let ctx = ctx_for(&pos, &optima, &lower, &upper);
        assert_eq!(ctx.case(1).unwrap(), ReductionCase::Interior);
        for x in [0.0, 1.0, 2.5, 4.0] {
            assert_eq!(ctx.psi(1, &x).unwrap(), upper_map(&0.0, &4.0, &1.0, &x).unwrap());
        }
        let neg = two_level(-3.0, 1.0);
        let ctx = ctx_for(&neg, &optima, &lower, &upper);
        for x in [0.0, 1.0, 2.5, 4.0] {
            assert_eq!(ctx.psi(1, &x).unwrap(), lower_map(&0.0, &4.0, &1.0, &x).unwrap());
        }
        let zero = two_level(0.0, 1.0);
        let ctx = ctx_for(&zero, &optima, &lower, &upper);
        let x = 2.0;
        let mean = (lower_map(&0.0, &4.0, &1.0, &x).unwrap() + upper_map(&0.0, &4.0, &1.0, &x).unwrap()) / 2.0;
        assert_eq!(ctx.psi(1, &x).unwrap(), mean);
    }

    #[test]
    fn gates_on_zero_coefficients() {
        let optima = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
        let (lower, upper) = (vec![0.0, 0.0], vec![4.0, 4.0]);
        let both = two_level(3.0, -2.0);
        let ctx = ctx_for(&both, &optima, &lower, &upper);
        assert_eq!(ctx.gate(1).unwrap(), 1);
        assert_eq!(ctx.nu(1, &2.0).unwrap(), ctx.psi(1, &2.0).unwrap());
        for mlp in [two_level(3.0, 0.0), two_level(0.0, 2.0)] {
            let ctx = ctx_for(&mlp, &optima, &lower, &upper);
            assert_eq!(ctx.gate(1).unwrap(), 0);
            assert_eq!(ctx.nu(1, &2.0).unwrap(), 2.0);
            assert_eq!(ctx.xi(LevelIndex::new(1, 1), &2.0).unwrap(), 2.0);
        }
    }

    #[test]
    fn boundary_maps_and_nu_hat() {
        let (lower, upper) = (vec![0.0, 0.0], vec![2.0, 4.0]);
        let mlp = two_level(3.0, 1.0);
        let at_upper = vec![vec![2.0, 0.0], vec![0.0, 0.0]];
        let ctx = RangeReductionContext::new(
            &mlp,
            &at_upper,
            &lower,
            &upper,
            2,
            &AlphaPolicy::explicit([(LevelIndex::new(1, 1), 0.25)]),
            1e-12,
        )
        .unwrap();
        assert_eq!(ctx.case(1).unwrap(), ReductionCase::AtUpper);
        assert_eq!(ctx.selectors(1).unwrap(), (0, 1));
        assert_eq!(ctx.psi_hat(1, &2.0).unwrap(), 1.75);
        assert_eq!(ctx.nu_hat(1, &2.0).unwrap(), 1.75);
        assert_eq!(ctx.xi(LevelIndex::new(1, 1), &2.0).unwrap(), 1.75);

        let gated = two_level(3.0, 0.0);
        let ctx = RangeReductionContext::new(&gated, &at_upper, &lower, &upper, 2, &AlphaPolicy::default(), 1e-12)
            .unwrap();
        assert_eq!(ctx.nu_hat(1, &2.0).unwrap(), 2.0);
        assert!(ctx.psi(1, &1.0).is_err());
    }

    #[test]
    fn interior_rejects_psi_hat() {
        let optima = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
        let (lower, upper) = (vec![0.0, 0.0], vec![4.0, 4.0]);
        let mlp = two_level(3.0, 1.0);
        let ctx = ctx_for(&mlp, &optima, &lower, &upper);
        assert!(matches!(ctx.psi_hat(1, &1.0), Err(ReductionError::NotBoundary { .. })));
    }

    #[test]
    fn case_weights_table() {
        let mlp = two_level(3.0, 1.0);
        let (lower, upper) = (vec![0.0, 0.0], vec![4.0, 4.0]);
        for (t, expected_case, weights) in [
            (1.0, ReductionCase::Interior, (0, 1)),
            (4.0, ReductionCase::AtUpper, (1, 0)),
            (0.0, ReductionCase::AtLower, (1, 0)),
        ] {
            let optima = vec![vec![t, 0.0], vec![0.0, 0.0]];
            let ctx = ctx_for(&mlp, &optima, &lower, &upper);
            assert_eq!(ctx.case(1).unwrap(), expected_case);
            assert_eq!(ctx.case_weights(1).unwrap(), weights);
        }
    }

    #[test]
    fn alpha_at_or_above_width_is_rejected() {
        let mlp = two_level(3.0, 1.0);
        let optima = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let (lower, upper) = (vec![0.0, 0.0], vec![2.0, 4.0]);
        let policy = AlphaPolicy::explicit([(LevelIndex::new(1, 1), 2.0)]);
        let err = RangeReductionContext::new(&mlp, &optima, &lower, &upper, 2, &policy, 1e-12).unwrap_err();
        assert!(matches!(err, ReductionError::ComponentAlphaTooLarge { .. }));
        let policy = AlphaPolicy::explicit([(LevelIndex::new(1, 1), -1.0)]);
        let err = RangeReductionContext::new(&mlp, &optima, &lower, &upper, 2, &policy, 1e-12).unwrap_err();
        assert!(matches!(err, ReductionError::NegativeAlpha { .. }));
    }

    #[test]
    fn optimum_outside_range_is_rejected() {
        let mlp = two_level(3.0, 1.0);
        let optima = vec![vec![5.0, 0.0], vec![0.0, 0.0]];
        let (lower, upper) = (vec![0.0, 0.0], vec![2.0, 4.0]);
        let err = RangeReductionContext::new(&mlp, &optima, &lower, &upper, 2, &AlphaPolicy::default(), 1e-12)
            .unwrap_err();
        assert!(matches!(err, ReductionError::OptimumOutsideRange { .. }));
    }

    #[test]
    fn identity_when_nothing_reducible() {
        let mlp = three_level_problem::<f64>();
        let optima = vec![vec![0.0; 4]; 3];
        let zeros = vec![0.0; 4];
        let ctx =
            RangeReductionContext::new(&mlp, &optima, &zeros, &zeros, 2, &AlphaPolicy::default(), 1e-12).unwrap();
        let (l, u) = ctx.reduce_bounds().unwrap();
        assert_eq!(l, zeros);
        assert_eq!(u, zeros);
    }

    proptest! {
        #[test]
        fn interval_maps_are_increasing_bijections(
            a1 in -50.0f64..50.0,
            w in 0.01f64..50.0,
            s in 0.01f64..0.99,
            x1 in 0.0f64..1.0,
            x2 in 0.0f64..1.0,
        ) {
            let a2 = a1 + w;
            let t = a1 + s * w;
            let tol = 1e-12 * (1.0 + a1.abs() + a2.abs());
            prop_assert!((lower_map(&a1, &a2, &t, &a1).unwrap() - a1).abs() <= tol);
            prop_assert!((lower_map(&a1, &a2, &t, &a2).unwrap() - t).abs() <= tol);
            prop_assert!((upper_map(&a1, &a2, &t, &a1).unwrap() - t).abs() <= tol);
            prop_assert!((upper_map(&a1, &a2, &t, &a2).unwrap() - a2).abs() <= tol);
            let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
            let (lo, hi) = (a1 + lo * w, a1 + hi * w);
            if hi - lo > 1e-9 {
                prop_assert!(lower_map(&a1, &a2, &t, &lo).unwrap() < lower_map(&a1, &a2, &t, &hi).unwrap());
                prop_assert!(upper_map(&a1, &a2, &t, &lo).unwrap() < upper_map(&a1, &a2, &t, &hi).unwrap());
            }
        }
    }
}
