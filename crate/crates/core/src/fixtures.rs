//! Reference instances.

use crate::lp_model::MultilevelProblem;
use crate::scalar::Scalar;

/// A three-level instance with level sizes `(2, 1, 1)` and seven shared
/// constraints. Level optima are `6`, `12` and `6`.
pub fn three_level_problem<T: Scalar>() -> MultilevelProblem<T> {
    let v = |row: &[i64]| row.iter().map(|&x| T::from_int(x)).collect::<Vec<T>>();
    MultilevelProblem::new(
        vec![2, 1, 1],
        vec![v(&[-5, 1, 2, 3]), v(&[6, 2, -3, 1]), v(&[0, -1, 2, 3])],
        vec![
            v(&[3, 2, 1, 2]),
            v(&[1, 3, -2, -1]),
            v(&[-2, -5, -2, 0]),
            v(&[-1, 4, 1, 0]),
            v(&[1, -1, 1, 2]),
            v(&[1, 0, 1, 3]),
            v(&[0, 0, 0, 1]),
        ],
        v(&[6, 3, -2, 2, 5, 4, 2]),
    )
    .expect("reference instance is well formed")
}

/// Reference level optima of [`three_level_problem`], one row per level.
pub fn reference_level_optima<T: Scalar>() -> Vec<Vec<T>> {
    let two_thirds = T::from_int(2) / T::from_int(3);
    let i = |x: i64| T::from_int(x);
    vec![
        vec![i(0), i(0), i(2), two_thirds],
        vec![i(2), i(0), i(0), i(0)],
        vec![i(1), i(0), i(3), i(0)],
    ]
}
