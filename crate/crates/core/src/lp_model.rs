//! Problem representation.
//!
//! A [`MultilevelProblem`] holds `P` objective rows over a shared feasible
//! set `{x : A x <= b, x >= 0}`. Variables are laid out level by level: the
//! `j`-th variable controlled by level `i` lives at [`flat_index`]`(i, j)`.
//! Levels and positions are 1-based on the public surface.

use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::{dot, Scalar};

/// Default finite stand-in for an infinite upper bound.
pub const DEFAULT_INFINITY_CAP: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("a multilevel problem needs at least two levels, got {0}")]
    TooFewLevels(usize),
    #[error("level {level} controls no variables")]
    EmptyLevel { level: usize },
    #[error("expected {expected} objective rows, got {found}")]
    ObjectiveCount { expected: usize, found: usize },
    #[error("objective {level} has {found} coefficients, expected {expected}")]
    ObjectiveLength { level: usize, expected: usize, found: usize },
    #[error("constraint row {row} has {found} coefficients, expected {expected}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("{rows} constraint rows but {rhs} right-hand sides")]
    RhsLength { rows: usize, rhs: usize },
    #[error("level {level} is out of range 1..={levels}")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error("position {position} is out of range 1..={size} for level {level}")]
    PositionOutOfRange { level: usize, position: usize, size: usize },
    #[error("flat index {index} is out of range 1..={n}")]
    FlatIndexOutOfRange { index: usize, n: usize },
    #[error("vector has length {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("bounds of variable {index} are inverted")]
    InvertedBounds { index: usize },
}

/// A (level, position) pair, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct LevelIndex {
    pub level: usize,
    pub position: usize,
}

impl LevelIndex {
    pub fn new(level: usize, position: usize) -> Self {
        LevelIndex { level, position }
    }
}

impl std::fmt::Display for LevelIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "x[{},{}]", self.level, self.position)
    }
}

/// Maps a (level, position) pair to its 1-based position in the flat
/// variable vector.
pub fn flat_index(level_sizes: &[usize], level: usize, position: usize) -> Result<usize, ModelError> {
    if level == 0 || level > level_sizes.len() {
        return Err(ModelError::LevelOutOfRange { level, levels: level_sizes.len() });
    }
    let size = level_sizes[level - 1];
    if position == 0 || position > size {
        return Err(ModelError::PositionOutOfRange { level, position, size });
    }
    Ok(level_sizes[..level - 1].iter().sum::<usize>() + position)
}

/// Inverse of [`flat_index`].
pub fn level_index(level_sizes: &[usize], index: usize) -> Result<LevelIndex, ModelError> {
    let n: usize = level_sizes.iter().sum();
    if index == 0 || index > n {
        return Err(ModelError::FlatIndexOutOfRange { index, n });
    }
    let mut offset = 0;
    for (i, &size) in level_sizes.iter().enumerate() {
        if index <= offset + size {
            return Ok(LevelIndex::new(i + 1, index - offset));
        }
        offset += size;
    }
    unreachable!("index checked against the total size")
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultilevelProblem<T> {
    level_sizes: Vec<usize>,
    objectives: Vec<Vec<T>>,
    a: Matrix<T>,
    b: Vec<T>,
}

impl<T: Scalar> MultilevelProblem<T> {
    pub fn new(
        level_sizes: Vec<usize>,
        objectives: Vec<Vec<T>>,
        a_rows: Vec<Vec<T>>,
        b: Vec<T>,
    ) -> Result<Self, ModelError> {
        let levels = level_sizes.len();
        if levels < 2 {
            return Err(ModelError::TooFewLevels(levels));
        }
        if let Some(pos) = level_sizes.iter().position(|&s| s == 0) {
            return Err(ModelError::EmptyLevel { level: pos + 1 });
        }
        let n: usize = level_sizes.iter().sum();
        if objectives.len() != levels {
            return Err(ModelError::ObjectiveCount { expected: levels, found: objectives.len() });
        }
        for (p, c) in objectives.iter().enumerate() {
            if c.len() != n {
                return Err(ModelError::ObjectiveLength { level: p + 1, expected: n, found: c.len() });
            }
        }
        for (i, row) in a_rows.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::RowLength { row: i + 1, expected: n, found: row.len() });
            }
        }
        if a_rows.len() != b.len() {
            return Err(ModelError::RhsLength { rows: a_rows.len(), rhs: b.len() });
        }
        let a = Matrix::from_rows(a_rows, n).expect("row lengths checked");
        Ok(MultilevelProblem { level_sizes, objectives, a, b })
    }

    /// Number of levels `P`.
    pub fn levels(&self) -> usize {
        self.level_sizes.len()
    }

    /// Total number of variables `n`.
    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// Number of constraint rows `m`.
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn level_sizes(&self) -> &[usize] {
        &self.level_sizes
    }

    pub fn objectives(&self) -> &[Vec<T>] {
        &self.objectives
    }

    /// Objective row of level `p` (1-based).
    pub fn objective(&self, p: usize) -> Result<&[T], ModelError> {
        self.check_level(p)?;
        Ok(&self.objectives[p - 1])
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn flat_index(&self, level: usize, position: usize) -> Result<usize, ModelError> {
        flat_index(&self.level_sizes, level, position)
    }

    /// 1-based flat indices of the variables controlled by `level`.
    pub fn level_range(&self, level: usize) -> Result<std::ops::RangeInclusive<usize>, ModelError> {
        self.check_level(level)?;
        let start = self.level_sizes[..level - 1].iter().sum::<usize>() + 1;
        Ok(start..=start + self.level_sizes[level - 1] - 1)
    }

    /// Coefficient of variable `(i, j)` in objective `p`; all indices 1-based.
    pub fn coefficient(&self, p: usize, var: LevelIndex) -> Result<&T, ModelError> {
        let e = self.flat_index(var.level, var.position)?;
        Ok(&self.objective(p)?[e - 1])
    }

    /// `(f_1(x), ..., f_P(x))`.
    pub fn evaluate_objectives(&self, x: &[T]) -> Result<Vec<T>, ModelError> {
        if x.len() != self.n() {
            return Err(ModelError::Dimension { expected: self.n(), found: x.len() });
        }
        Ok(self.objectives.iter().map(|c| dot(c, x)).collect())
    }

    /// The single-objective LP `max c_p x  s.t. A x <= b, x >= 0`.
    pub fn build_level_lp(&self, p: usize) -> Result<BoundedLP<T>, ModelError> {
        let c = self.objective(p)?.to_vec();
        Ok(BoundedLP {
            c,
            a: self.a.clone(),
            b: self.b.clone(),
            lower: vec![T::zero(); self.n()],
            upper: vec![None; self.n()],
        })
    }

    /// The level-`p` LP restricted to the box `[lower, upper]`. Lower bounds
    /// are lifted to zero where negative since `x >= 0` always holds.
    pub fn build_boxed_lp(&self, p: usize, lower: &[T], upper: &[T]) -> Result<BoundedLP<T>, ModelError> {
        let mut lp = self.build_level_lp(p)?;
        for v in [lower, upper] {
            if v.len() != self.n() {
                return Err(ModelError::Dimension { expected: self.n(), found: v.len() });
            }
        }
        lp.lower = lower.iter().map(|l| T::max_of(l.clone(), T::zero())).collect();
        lp.upper = upper.iter().cloned().map(Some).collect();
        lp.validate()?;
        Ok(lp)
    }

    /// Largest violation of `A x <= b` and `x >= 0` at `x` (zero if feasible).
    pub fn max_violation(&self, x: &[T]) -> T {
        let ax = self.a.mul_vec(x);
        let rows = ax.into_iter().zip(&self.b).map(|(v, b)| v - b.clone());
        let signs = x.iter().map(|v| -v.clone());
        rows.chain(signs).fold(T::zero(), T::max_of)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> MultilevelProblem<U> {
        MultilevelProblem {
            level_sizes: self.level_sizes.clone(),
            objectives: self.objectives.iter().map(|c| c.iter().map(&f).collect()).collect(),
            a: self.a.map(&f),
            b: self.b.iter().map(&f).collect(),
        }
    }

    fn check_level(&self, p: usize) -> Result<(), ModelError> {
        if p == 0 || p > self.levels() {
            return Err(ModelError::LevelOutOfRange { level: p, levels: self.levels() });
        }
        Ok(())
    }
}

/// `max c x  s.t.  A x <= b,  lower <= x <= upper`. An upper bound of
/// `None` means unbounded above.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedLP<T> {
    pub c: Vec<T>,
    pub a: Matrix<T>,
    pub b: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<Option<T>>,
}

impl<T: Scalar> BoundedLP<T> {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.n();
        if self.a.cols() != n {
            return Err(ModelError::RowLength { row: 1, expected: n, found: self.a.cols() });
        }
        if self.a.rows() != self.b.len() {
            return Err(ModelError::RhsLength { rows: self.a.rows(), rhs: self.b.len() });
        }
        for v in [self.lower.len(), self.upper.len()] {
            if v != n {
                return Err(ModelError::Dimension { expected: n, found: v });
            }
        }
        for (j, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if matches!(u, Some(u) if u < l) {
                return Err(ModelError::InvertedBounds { index: j + 1 });
            }
        }
        Ok(())
    }
}

/// `max c x  s.t.  A_eq x = b,  lower <= x <= upper` with all bounds finite.
///
/// When produced by [`to_standard_form`], the first `structural` columns
/// are the original variables and the remaining `m` are slacks.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardLP<T> {
    pub c: Vec<T>,
    pub a: Matrix<T>,
    pub b: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    /// Number of leading structural columns.
    pub structural: usize,
    /// Columns whose upper bound stands in for `+inf`.
    pub capped: Vec<bool>,
}

impl<T: Scalar> StandardLP<T> {
    /// An equality-form LP with no slack bookkeeping.
    pub fn new(c: Vec<T>, a: Matrix<T>, b: Vec<T>, lower: Vec<T>, upper: Vec<T>) -> Result<Self, ModelError> {
        let n = c.len();
        let lp = StandardLP { capped: vec![false; n], structural: n, c, a, b, lower, upper };
        lp.validate()?;
        Ok(lp)
    }

    /// Number of columns `N`.
    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// Number of equality rows.
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.n();
        if self.a.cols() != n {
            return Err(ModelError::RowLength { row: 1, expected: n, found: self.a.cols() });
        }
        if self.a.rows() != self.b.len() {
            return Err(ModelError::RhsLength { rows: self.a.rows(), rhs: self.b.len() });
        }
        for v in [self.lower.len(), self.upper.len(), self.capped.len()] {
            if v != n {
                return Err(ModelError::Dimension { expected: n, found: v });
            }
        }
        for (j, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if u < l {
                return Err(ModelError::InvertedBounds { index: j + 1 });
            }
        }
        Ok(())
    }

    pub fn objective(&self, x: &[T]) -> T {
        dot(&self.c, x)
    }

    /// Largest violation of the equality rows and the box at `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let residual = self.a.mul_vec(x).into_iter().zip(&self.b).map(|(ax, b)| (ax - b.clone()).abs());
        let bounds = x.iter().zip(self.lower.iter().zip(&self.upper)).map(|(v, (l, u))| {
            T::max_of(l.clone() - v.clone(), v.clone() - u.clone())
        });
        residual.chain(bounds).fold(T::zero(), T::max_of)
    }

    /// Structural part of a full-length point.
    pub fn structural_part<'a>(&self, x: &'a [T]) -> &'a [T] {
        &x[..self.structural]
    }

    /// Appends slack values `b - A x` to a structural point.
    pub fn complete_with_slacks(&self, x: &[T]) -> Vec<T> {
        let m = self.m();
        let structural_a = self.a.select_columns(&(0..self.structural).collect::<Vec<_>>());
        let ax = structural_a.mul_vec(x);
        let mut full = x.to_vec();
        full.extend(self.b.iter().zip(ax).map(|(b, v)| b.clone() - v));
        debug_assert_eq!(full.len(), self.structural + m);
        full
    }

    /// Same LP with column `perm[k]` placed at position `k`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        StandardLP {
            c: perm.iter().map(|&j| self.c[j].clone()).collect(),
            a: self.a.select_columns(perm),
            b: self.b.clone(),
            lower: perm.iter().map(|&j| self.lower[j].clone()).collect(),
            upper: perm.iter().map(|&j| self.upper[j].clone()).collect(),
            structural: self.n(),
            capped: perm.iter().map(|&j| self.capped[j]).collect(),
        }
    }
}

/// Appends one slack per row, `A x + s = b` with `s` in `[0, cap]`.
/// Infinite upper bounds are replaced by `cap` and flagged in
/// [`StandardLP::capped`].
pub fn to_standard_form<T: Scalar>(lp: &BoundedLP<T>, cap: &T) -> StandardLP<T> {
    let n = lp.n();
    let m = lp.a.rows();
    let mut a = Matrix::zeros(m, n + m);
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = lp.a[(i, j)].clone();
        }
        a[(i, n + i)] = T::one();
    }
    let mut c = lp.c.clone();
    c.extend(std::iter::repeat_n(T::zero(), m));
    let mut lower = lp.lower.clone();
    lower.extend(std::iter::repeat_n(T::zero(), m));
    let mut upper = Vec::with_capacity(n + m);
    let mut capped = Vec::with_capacity(n + m);
    for u in &lp.upper {
        match u {
            Some(u) => {
                upper.push(u.clone());
                capped.push(false);
            }
            None => {
                upper.push(cap.clone());
                capped.push(true);
            }
        }
    }
    upper.extend(std::iter::repeat_n(cap.clone(), m));
    capped.extend(std::iter::repeat_n(true, m));
    StandardLP { c, a, b: lp.b.clone(), lower, upper, structural: n, capped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::three_level_problem;
    use proptest::prelude::*;

    #[test]
    fn flat_index_examples() {
        let sizes = [2, 1, 1];
        assert_eq!(flat_index(&sizes, 1, 2), Ok(2));
        assert_eq!(flat_index(&sizes, 2, 1), Ok(3));
        assert_eq!(flat_index(&sizes, 3, 1), Ok(4));
        assert!(flat_index(&sizes, 4, 1).is_err());
        assert!(flat_index(&sizes, 2, 2).is_err());
        assert!(flat_index(&sizes, 0, 1).is_err());
    }

    #[test]
    fn level_lp_extraction() {
        let mlp = three_level_problem::<f64>();
        let lp1 = mlp.build_level_lp(1).unwrap();
        assert_eq!(lp1.c, vec![-5.0, 1.0, 2.0, 3.0]);
        assert_eq!(lp1.a.rows(), 7);
        assert_eq!(lp1.b, vec![6.0, 3.0, -2.0, 2.0, 5.0, 4.0, 2.0]);
        assert!(lp1.upper.iter().all(Option::is_none));
        assert_eq!(mlp.build_level_lp(3).unwrap().c, vec![0.0, -1.0, 2.0, 3.0]);
        assert_eq!(
            mlp.build_level_lp(4).unwrap_err(),
            ModelError::LevelOutOfRange { level: 4, levels: 3 }
        );
    }

    #[test]
    fn standard_form_single_row() {
        let lp = BoundedLP {
            c: vec![1.0],
            a: Matrix::from_rows(vec![vec![1.0]], 1).unwrap(),
            b: vec![5.0],
            lower: vec![0.0],
            upper: vec![None],
        };
        let s = to_standard_form(&lp, &1e9);
        assert_eq!(s.c, vec![1.0, 0.0]);
        assert_eq!(s.a.row(0), &[1.0, 1.0]);
        assert_eq!(s.b, vec![5.0]);
        assert_eq!(s.capped, vec![true, true]);
    }

    #[test]
    fn standard_form_example_and_fixed_bounds() {
        let mlp = three_level_problem::<f64>();
        let lp = mlp.build_boxed_lp(1, &[0.0, 0.0, 0.0, 0.0], &[2.0, 0.0, 3.0, 2.0 / 3.0]).unwrap();
        let s = to_standard_form(&lp, &1e9);
        assert_eq!(s.n(), 11);
        assert_eq!(s.m(), 7);
        assert_eq!(s.lower[1], 0.0);
        assert_eq!(s.upper[1], 0.0);
        assert!(!s.capped[1]);
    }

    #[test]
    fn objectives_at_reference_points() {
        let mlp = three_level_problem::<f64>();
        let f = mlp.evaluate_objectives(&[0.0, 0.0, 2.0, 2.0 / 3.0]).unwrap();
        assert!((f[0] - 6.0).abs() < 1e-12);
        let f = mlp.evaluate_objectives(&[2.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f[1], 12.0);
        assert_eq!(mlp.evaluate_objectives(&[0.0; 4]).unwrap(), vec![0.0; 3]);
        assert!(mlp.evaluate_objectives(&[0.0; 3]).is_err());
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        let ok = || (vec![1, 1], vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0, 1.0]], vec![1.0]);
        let (s, c, a, b) = ok();
        assert!(MultilevelProblem::new(s, c, a, b).is_ok());
        let (_, c, a, b) = ok();
        assert_eq!(MultilevelProblem::new(vec![2], c, a, b).unwrap_err(), ModelError::TooFewLevels(1));
        let (s, _, a, b) = ok();
        assert!(MultilevelProblem::new(s, vec![vec![1.0, 0.0]], a, b).is_err());
        let (s, c, _, b) = ok();
        assert!(MultilevelProblem::new(s, c, vec![vec![1.0]], b).is_err());
        let (s, c, a, _) = ok();
        assert!(MultilevelProblem::new(s, c, a, vec![]).is_err());
        let (_, c, a, b) = ok();
        assert!(MultilevelProblem::new(vec![2, 0], c, a, b).is_err());
    }

    proptest! {
        #[test]
        fn flat_index_is_a_bijection(sizes in proptest::collection::vec(1usize..5, 2..6)) {
            let n: usize = sizes.iter().sum();
            let mut seen = vec![false; n + 1];
            for (i, &size) in sizes.iter().enumerate() {
                for j in 1..=size {
                    let e = flat_index(&sizes, i + 1, j).unwrap();
                    prop_assert!((1..=n).contains(&e));
                    prop_assert!(!seen[e]);
                    seen[e] = true;
                    prop_assert_eq!(level_index(&sizes, e).unwrap(), LevelIndex::new(i + 1, j));
                }
            }
            prop_assert!(seen[1..].iter().all(|&s| s));
        }

        #[test]
        fn slack_completion_round_trips(
            x in proptest::collection::vec(0.0f64..3.0, 4),
        ) {
            let mlp = three_level_problem::<f64>();
            let s = to_standard_form(&mlp.build_level_lp(1).unwrap(), &1e9);
            let full = s.complete_with_slacks(&x);
            let residual: f64 = s.a.mul_vec(&full).iter().zip(&s.b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(residual < 1e-9);
            let feasible = mlp.max_violation(&x) <= 0.0;
            let slacks_ok = full[4..].iter().all(|&v| v >= 0.0);
            prop_assert_eq!(feasible, slacks_ok);
        }

        #[test]
        fn objectives_are_linear(
            x in proptest::collection::vec(-5.0f64..5.0, 4),
            y in proptest::collection::vec(-5.0f64..5.0, 4),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let mlp = three_level_problem::<f64>();
            let z: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            let fx = mlp.evaluate_objectives(&x).unwrap();
            let fy = mlp.evaluate_objectives(&y).unwrap();
            let fz = mlp.evaluate_objectives(&z).unwrap();
            for p in 0..3 {
                prop_assert!((fz[p] - (a * fx[p] + b * fy[p])).abs() < 1e-9);
            }
        }
    }
}
