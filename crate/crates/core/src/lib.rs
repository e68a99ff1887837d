//! Multilevel linear programming with the adaptive (support) method.
//!
//! The crate solves `P`-level single-objective linear programs by a
//! satisficing scheme: every level's LP is solved on its own, the spread of
//! the level optima gives an initial box on every variable, and then each
//! level in turn shrinks the ranges of the variables it controls before the
//! next level maximizes its objective over the reduced box. The last solve
//! yields the compromise.
//!
//! Modules:
//!
//! * [`lp_model`]: problem types, per-level LPs, standard form, index map.
//! * [`adaptive`]: the adaptive method with suboptimality estimates.
//! * [`range_reduction`]: interval reduction maps and the bound update.
//! * [`multilevel`]: the end-to-end compromise search.
//! * [`oracle`]: brute-force basic-solution enumeration for verification.
//! * [`io`]: problem documents and reports.

pub mod adaptive;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod lp_model;
pub mod multilevel;
pub mod oracle;
pub mod random;
pub mod range_reduction;
pub mod scalar;

pub use adaptive::{solve, SolveResult, SolveStatus, SolverConfig, SupportingFeasibleSolution};
pub use lp_model::{BoundedLP, LevelIndex, MultilevelProblem, StandardLP};
pub use multilevel::{run, CompromiseReport, MultilevelConfig};
pub use scalar::{Rational, Scalar};
