//! Brute-force LP ground truth by basic-solution enumeration.
//!
//! Every `m`-subset of columns with a nonsingular submatrix is tried with
//! every assignment of the remaining columns to a bound; points inside the
//! box are candidates and the best candidate is the optimum. Only meant for
//! desk-scale instances.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp_model::StandardLP;
use crate::scalar::Scalar;

/// Default limit on the number of column subsets, `C(N, m)`.
pub const DEFAULT_MAX_COMBINATIONS: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration needs {combinations} column subsets, above the cap of {cap}")]
    CapExceeded { combinations: u128, cap: u128 },
}

#[derive(Debug, Clone)]
pub struct OracleConfig<T> {
    /// Feasibility tolerance, scaled by the magnitude of the data.
    pub tol_feas: T,
    /// Objective values within this of the best count as optimal.
    pub tol_opt: T,
    pub pivot_tol: T,
    pub max_combinations: u128,
}

impl<T: Scalar> Default for OracleConfig<T> {
    fn default() -> Self {
        OracleConfig {
            tol_feas: T::tolerance(1e-9),
            tol_opt: T::tolerance(1e-9),
            pivot_tol: T::tolerance(1e-10),
            max_combinations: DEFAULT_MAX_COMBINATIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleStatus {
    Optimal,
    Infeasible,
    /// The best vertex sits on a bound that stands in for infinity.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    pub status: OracleStatus,
    /// Best objective value; `None` when infeasible.
    pub value: Option<T>,
    /// Distinct optimal vertices, in enumeration order.
    pub vertices: Vec<Vec<T>>,
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn combinations(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Calls `visit` with every basic solution of `lp` that lies in its box.
/// The same point may be reported more than once under degeneracy.
pub fn enumerate_basic_solutions<T: Scalar>(
    lp: &StandardLP<T>,
    cfg: &OracleConfig<T>,
    mut visit: impl FnMut(&[T]),
) -> Result<(), OracleError> {
    let (n, m) = (lp.n(), lp.m());
    let count = combinations(n, m);
    if count > cfg.max_combinations {
        return Err(OracleError::CapExceeded { combinations: count, cap: cfg.max_combinations });
    }
    if m > n {
        return Ok(());
    }
    let finite_upper = lp.upper.iter().zip(&lp.capped).filter(|(_, &c)| !c).map(|(u, _)| u);
    let scale = lp.b.iter().chain(&lp.lower).chain(finite_upper).fold(T::one(), |acc, v| T::max_of(acc, v.abs()));
    let tol = cfg.tol_feas.clone() * scale;

    let mut subset: Vec<usize> = (0..m).collect();
    let mut in_subset = vec![false; n];
    let mut x = vec![T::zero(); n];
    loop {
        for &j in &subset {
            in_subset[j] = true;
        }
        let nonbasic: Vec<usize> = (0..n).filter(|&j| !in_subset[j]).collect();
        if let Some(inv) = lp.a.select_columns(&subset).inverse(&cfg.pivot_tol) {
            let base = inv.mul_vec(&lp.b);
            let cols: Vec<Vec<T>> = nonbasic.iter().map(|&j| inv.mul_vec(&lp.a.column(j))).collect();
            visit_assignments(lp, &subset, &nonbasic, &base, &cols, &tol, &mut x, &mut visit);
        }
        for &j in &subset {
            in_subset[j] = false;
        }
        if !next_combination(&mut subset, n) {
            break;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn visit_assignments<T: Scalar>(
    lp: &StandardLP<T>,
    basic: &[usize],
    nonbasic: &[usize],
    base: &[T],
    cols: &[Vec<T>],
    tol: &T,
    x: &mut [T],
    visit: &mut impl FnMut(&[T]),
) {
    // Odometer over nonbasic bound choices; fixed columns have one choice.
    let mut at_upper = vec![false; nonbasic.len()];
    loop {
        for (k, &j) in nonbasic.iter().enumerate() {
            x[j] = if at_upper[k] { lp.upper[j].clone() } else { lp.lower[j].clone() };
        }
        let mut feasible = true;
        for (r, &j) in basic.iter().enumerate() {
            let mut v = base[r].clone();
            for (k, &nj) in nonbasic.iter().enumerate() {
                if !x[nj].is_zero() && !cols[k][r].is_zero() {
                    v = v - cols[k][r].clone() * x[nj].clone();
                }
            }
            if v < lp.lower[j].clone() - tol.clone() || v > lp.upper[j].clone() + tol.clone() {
                feasible = false;
                break;
            }
            x[j] = v.clamp_to(&lp.lower[j], &lp.upper[j]);
        }
        if feasible {
            visit(x);
        }
        let mut k = 0;
        loop {
            if k == nonbasic.len() {
                return;
            }
            let j = nonbasic[k];
            if !at_upper[k] && lp.lower[j] != lp.upper[j] {
                at_upper[k] = true;
                break;
            }
            at_upper[k] = false;
            k += 1;
        }
    }
}

fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - k + i {
            subset[i] += 1;
            for t in i + 1..k {
                subset[t] = subset[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Collects the distinct basic solutions of `lp`.
pub fn basic_solutions<T: Scalar>(lp: &StandardLP<T>, cfg: &OracleConfig<T>) -> Result<Vec<Vec<T>>, OracleError> {
    let mut points: Vec<Vec<T>> = Vec::new();
    enumerate_basic_solutions(lp, cfg, |x| {
        if !points.iter().any(|p| same_point(p, x, &cfg.tol_feas)) {
            points.push(x.to_vec());
        }
    })?;
    Ok(points)
}

fn same_point<T: Scalar>(a: &[T], b: &[T], tol: &T) -> bool {
    a.iter().zip(b).all(|(u, v)| u.near(v, tol))
}

/// Maximizes `c x` over all basic solutions.
pub fn oracle_solve<T: Scalar>(lp: &StandardLP<T>, cfg: &OracleConfig<T>) -> Result<OracleResult<T>, OracleError> {
    let mut best: Option<T> = None;
    let mut vertices: Vec<Vec<T>> = Vec::new();
    enumerate_basic_solutions(lp, cfg, |x| {
        let value = lp.objective(x);
        match &best {
            Some(b) if value < b.clone() - cfg.tol_opt.clone() => {}
            Some(b) if value <= b.clone() + cfg.tol_opt.clone() => {
                if !vertices.iter().any(|p| same_point(p, x, &cfg.tol_feas)) {
                    vertices.push(x.to_vec());
                }
                if &value > b {
                    best = Some(value);
                }
            }
            _ => {
                best = Some(value);
                vertices.clear();
                vertices.push(x.to_vec());
            }
        }
    })?;
    // The running maximum may have crept up within tolerance; keep only
    // vertices within tolerance of the final value.
    if let Some(b) = &best {
        vertices.retain(|v| lp.objective(v) >= b.clone() - cfg.tol_opt.clone());
    }
    let status = match &best {
        None => OracleStatus::Infeasible,
        Some(_) if vertices.iter().any(|v| at_cap(lp, v, &cfg.tol_feas)) => OracleStatus::Unbounded,
        Some(_) => OracleStatus::Optimal,
    };
    Ok(OracleResult { status, value: best, vertices })
}

fn at_cap<T: Scalar>(lp: &StandardLP<T>, x: &[T], tol: &T) -> bool {
    x.iter().enumerate().any(|(j, v)| {
        lp.capped[j] && v.clone() >= lp.upper[j].clone() - tol.clone() * T::max_of(T::one(), lp.upper[j].abs())
    })
}

/// Checks a candidate against the oracle value: `Ok(gap)` with
/// `gap = oracle - value`, or `Err` when the oracle finds no optimum.
pub fn optimality_gap<T: Scalar>(lp: &StandardLP<T>, value: &T, cfg: &OracleConfig<T>) -> Result<Option<T>, OracleError> {
    Ok(oracle_solve(lp, cfg)?.value.map(|best| best - value.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::three_level_problem;
    use crate::linalg::Matrix;
    use crate::lp_model::{to_standard_form, BoundedLP, DEFAULT_INFINITY_CAP};
    use crate::scalar::Rational;

    fn segment() -> StandardLP<f64> {
        let lp = BoundedLP {
            c: vec![1.0],
            a: Matrix::from_rows(vec![vec![1.0]], 1).unwrap(),
            b: vec![1.0],
            lower: vec![0.0],
            upper: vec![None],
        };
        to_standard_form(&lp, &DEFAULT_INFINITY_CAP)
    }

    #[test]
    fn segment_vertices() {
        let pts = basic_solutions(&segment(), &OracleConfig::default()).unwrap();
        let mut xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![0.0, 1.0]);
        let res = oracle_solve(&segment(), &OracleConfig::default()).unwrap();
        assert_eq!(res.status, OracleStatus::Optimal);
        assert_eq!(res.value, Some(1.0));
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(11, 7), 330);
        assert_eq!(combinations(5, 0), 1);
        assert_eq!(combinations(3, 4), 0);
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = OracleConfig { max_combinations: 1, ..OracleConfig::default() };
        let lp = to_standard_form(&three_level_problem::<f64>().build_level_lp(1).unwrap(), &DEFAULT_INFINITY_CAP);
        assert!(matches!(oracle_solve(&lp, &cfg), Err(OracleError::CapExceeded { combinations: 330, .. })));
    }

    #[test]
    fn example_levels_exact() {
        let mlp = three_level_problem::<Rational>();
        let cap = Rational::from_int(1_000_000_000);
        for (p, expected) in [(1, 6), (2, 12), (3, 6)] {
            let lp = to_standard_form(&mlp.build_level_lp(p).unwrap(), &cap);
            let res = oracle_solve(&lp, &OracleConfig::default()).unwrap();
            assert_eq!(res.status, OracleStatus::Optimal);
            assert_eq!(res.value, Some(Rational::from_int(expected)));
        }
        let lp = to_standard_form(&mlp.build_level_lp(2).unwrap(), &cap);
        let pts = basic_solutions(&lp, &OracleConfig::default()).unwrap();
        let target: Vec<Rational> = [2, 0, 0, 0].iter().map(|&v| Rational::from_int(v)).collect();
        assert!(pts.iter().any(|p| p[..4] == target[..]));
    }

    #[test]
    fn infeasible_is_empty() {
        let lp = BoundedLP {
            c: vec![1.0],
            a: Matrix::from_rows(vec![vec![1.0]], 1).unwrap(),
            b: vec![-1.0],
            lower: vec![0.0],
            upper: vec![None],
        };
        let lp = to_standard_form(&lp, &DEFAULT_INFINITY_CAP);
        assert!(basic_solutions(&lp, &OracleConfig::default()).unwrap().is_empty());
        assert_eq!(oracle_solve(&lp, &OracleConfig::default()).unwrap().status, OracleStatus::Infeasible);
    }

    #[test]
    fn zero_objective_makes_every_vertex_optimal() {
        let mut lp = segment();
        lp.c = vec![0.0, 0.0];
        let res = oracle_solve(&lp, &OracleConfig::default()).unwrap();
        assert_eq!(res.value, Some(0.0));
        assert_eq!(res.vertices.len(), basic_solutions(&lp, &OracleConfig::default()).unwrap().len());
    }

    #[test]
    fn unbounded_detected_at_cap() {
        let lp = BoundedLP {
            c: vec![1.0, 0.0],
            a: Matrix::from_rows(vec![vec![1.0, -1.0]], 2).unwrap(),
            b: vec![0.0],
            lower: vec![0.0, 0.0],
            upper: vec![None, None],
        };
        let lp = to_standard_form(&lp, &DEFAULT_INFINITY_CAP);
        assert_eq!(oracle_solve(&lp, &OracleConfig::default()).unwrap().status, OracleStatus::Unbounded);
    }

    #[test]
    fn permutation_invariant() {
        let lp = to_standard_form(&three_level_problem::<f64>().build_level_lp(3).unwrap(), &DEFAULT_INFINITY_CAP);
        let base = oracle_solve(&lp, &OracleConfig::default()).unwrap().value.unwrap();
        let n = lp.n();
        let perm: Vec<usize> = (0..n).rev().collect();
        let shuffled = lp.permute_columns(&perm);
        let value = oracle_solve(&shuffled, &OracleConfig::default()).unwrap().value.unwrap();
        assert!((base - value).abs() <= 1e-9);
    }
}
