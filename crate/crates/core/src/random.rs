//! Seeded random bounded LPs for cross-checking the solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Matrix;
use crate::lp_model::{BoundedLP, MultilevelProblem};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomLpShape {
    pub max_vars: usize,
    pub max_rows: usize,
    /// All data lies in `[-magnitude, magnitude]`.
    pub magnitude: i64,
    /// Widest box; `0` allows only fixed variables.
    pub max_width: i64,
    /// One instance in this many gets an unconstrained right-hand side and
    /// may be infeasible; the rest are feasible by construction.
    pub wild_rhs_every: u32,
}

impl Default for RandomLpShape {
    fn default() -> Self {
        RandomLpShape { max_vars: 6, max_rows: 6, magnitude: 9, max_width: 6, wild_rhs_every: 8 }
    }
}

/// `max c x  s.t.  A x <= b,  l <= x <= u` with integer data and finite
/// boxes.
pub fn random_bounded_lp<T: Scalar, R: Rng>(rng: &mut R, shape: &RandomLpShape) -> BoundedLP<T> {
    let k = shape.magnitude;
    let n = rng.gen_range(1..=shape.max_vars);
    let m = rng.gen_range(1..=shape.max_rows);
    let c: Vec<i64> = (0..n).map(|_| rng.gen_range(-k..=k)).collect();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for _ in 0..n {
        let l = rng.gen_range(-k..=k);
        let u = (l + rng.gen_range(0..=shape.max_width)).min(k);
        lower.push(l);
        upper.push(u);
    }
    let wild = shape.wild_rhs_every > 0 && rng.gen_ratio(1, shape.wild_rhs_every);
    let anchor: Vec<i64> = lower.iter().zip(&upper).map(|(&l, &u)| rng.gen_range(l..=u)).collect();
    let mut rows = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for _ in 0..m {
        loop {
            let row: Vec<i64> = (0..n).map(|_| rng.gen_range(-k..=k)).collect();
            let rhs = if wild {
                rng.gen_range(-k..=k)
            } else {
                row.iter().zip(&anchor).map(|(a, x)| a * x).sum::<i64>() + rng.gen_range(0..=3)
            };
            if rhs.abs() <= k {
                rows.push(row.into_iter().map(T::from_int).collect());
                b.push(T::from_int(rhs));
                break;
            }
        }
    }
    BoundedLP {
        c: c.into_iter().map(T::from_int).collect(),
        a: Matrix::from_rows(rows, n).expect("rows have n entries"),
        b,
        lower: lower.into_iter().map(T::from_int).collect(),
        upper: upper.into_iter().map(|u| Some(T::from_int(u))).collect(),
    }
}

/// `count` instances from a ChaCha stream seeded with `seed`.
pub fn random_instances<T: Scalar>(seed: u64, count: usize, shape: &RandomLpShape) -> Vec<BoundedLP<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_bounded_lp(&mut rng, shape)).collect()
}

/// A multilevel problem with `2..=max_levels` levels of `1..=max_level_size`
/// variables each. The rows always include `sum x <= magnitude` and the
/// right-hand side is nonnegative, so `x = 0` is feasible and every level
/// LP is bounded.
pub fn random_multilevel<T: Scalar, R: Rng>(
    rng: &mut R,
    max_levels: usize,
    max_level_size: usize,
    max_rows: usize,
    magnitude: i64,
) -> MultilevelProblem<T> {
    let levels = rng.gen_range(2..=max_levels.max(2));
    let sizes: Vec<usize> = (0..levels).map(|_| rng.gen_range(1..=max_level_size.max(1))).collect();
    let n: usize = sizes.iter().sum();
    let k = magnitude;
    let objectives: Vec<Vec<T>> =
        (0..levels).map(|_| (0..n).map(|_| T::from_int(rng.gen_range(-k..=k))).collect()).collect();
    let mut rows: Vec<Vec<T>> = vec![vec![T::one(); n]];
    let mut b = vec![T::from_int(k)];
    for _ in 0..rng.gen_range(0..max_rows.max(1)) {
        rows.push((0..n).map(|_| T::from_int(rng.gen_range(-k..=k))).collect());
        b.push(T::from_int(rng.gen_range(0..=k)));
    }
    MultilevelProblem::new(sizes, objectives, rows, b).expect("generated dimensions agree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_respect_shape_and_are_reproducible() {
        let shape = RandomLpShape::default();
        let a: Vec<BoundedLP<f64>> = random_instances(7, 50, &shape);
        let b: Vec<BoundedLP<f64>> = random_instances(7, 50, &shape);
        assert_eq!(a, b);
        for lp in &a {
            lp.validate().unwrap();
            assert!(lp.n() <= 6 && lp.a.rows() <= 6);
            let all = lp.c.iter().chain(&lp.b).chain(&lp.lower).chain(lp.upper.iter().flatten());
            assert!(all.clone().all(|v| v.abs() <= 9.0 && v.fract() == 0.0));
            for i in 0..lp.a.rows() {
                assert!(lp.a.row(i).iter().all(|v| v.abs() <= 9.0));
            }
        }
    }

    #[test]
    fn multilevel_instances_are_feasible_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mlp: MultilevelProblem<f64> = random_multilevel(&mut rng, 3, 2, 4, 9);
            assert!(mlp.levels() >= 2);
            assert_eq!(mlp.max_violation(&vec![0.0; mlp.n()]), 0.0);
        }
    }
}
