//! Problem documents and run reports.
//!
//! A problem document is JSON:
//!
//! ```json
//! {
//!   "levels": [2, 1, 1],
//!   "objectives": [[-5, 1, 2, 3], [6, 2, -3, 1], [0, -1, 2, 3]],
//!   "A": [[1, 1, 1, 1], ...],
//!   "b": [6, ...],
//!   "alpha": [{"level": 1, "position": 1, "value": 0.25}],
//!   "epsilon": 0
//! }
//! ```
//!
//! `levels` lists the number of variables each level controls; `A x <= b`
//! and `x >= 0` define the feasible set and every objective is maximized.
//! Any number may also be written as a string such as `"2/3"`, which is
//! read exactly in rational mode. Optional fields: `alpha_fraction`,
//! `epsilon` (one number or one per level), `tolerances`, `infinity_cap`,
//! `iteration_limit`, `format` and `reference` (a known solution to compare
//! against).
//!
//! Every error carries a stable code, see [`IoError::code`].

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp_model::{LevelIndex, ModelError, MultilevelProblem};
use crate::multilevel::{CompromiseReport, MultilevelConfig, ReferenceSolution};
use crate::range_reduction::AlphaPolicy;
use crate::scalar::{parse_scalar, Scalar};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed document at line {line}, column {column}: {message}")]
    Malformed { line: usize, column: usize, message: String },
    #[error("field `{field}`: `{text}` is not a number")]
    BadNumber { field: String, text: String },
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
    #[error("alpha override for {var} refers to a variable that does not exist")]
    UnknownAlphaComponent { var: LevelIndex },
    #[error("alpha for {what} must be nonnegative and, as a fraction, below 1")]
    AlphaValue { what: String },
    /// Raised while reducing ranges, once the widths are known.
    #[error("{0}")]
    AlphaRange(String),
    #[error("epsilon: {0}")]
    Epsilon(String),
    #[error("setting `{field}`: {message}")]
    Setting { field: String, message: String },
}

impl IoError {
    /// Stable error code.
    ///
    /// | code  | meaning |
    /// |-------|---------|
    /// | ML001 | file cannot be read |
    /// | ML002 | malformed JSON or wrong field types/names |
    /// | ML003 | a number cannot be parsed |
    /// | ML004 | inconsistent model dimensions |
    /// | ML005 | alpha override for a nonexistent variable |
    /// | ML006 | negative alpha, or alpha fraction outside `[0, 1)` |
    /// | ML007 | alpha not smaller than the range width |
    /// | ML008 | negative epsilon or wrong number of entries |
    /// | ML009 | invalid tolerance, cap or limit |
    pub fn code(&self) -> &'static str {
        match self {
            IoError::Read { .. } => "ML001",
            IoError::Malformed { .. } => "ML002",
            IoError::BadNumber { .. } => "ML003",
            IoError::Model(_) => "ML004",
            IoError::UnknownAlphaComponent { .. } => "ML005",
            IoError::AlphaValue { .. } => "ML006",
            IoError::AlphaRange(_) => "ML007",
            IoError::Epsilon(_) => "ML008",
            IoError::Setting { .. } => "ML009",
        }
    }
}

/// A number as written in a document: a JSON number or a string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberText {
    Number(serde_json::Number),
    Text(String),
}

impl NumberText {
    fn text(&self) -> String {
        match self {
            NumberText::Number(n) => n.to_string(),
            NumberText::Text(s) => s.clone(),
        }
    }

    fn parse<T: Scalar>(&self, field: &str) -> Result<T, IoError> {
        let text = self.text();
        parse_scalar(&text).ok_or_else(|| IoError::BadNumber { field: field.to_string(), text })
    }

    /// Writes a scalar: JSON numbers for floats and integers, `"p/q"`
    /// strings for non-integral rationals.
    pub fn from_scalar<T: Scalar>(v: &T) -> Self {
        if T::EXACT {
            let s = v.to_string();
            match s.parse::<i64>() {
                Ok(i) => NumberText::Number(i.into()),
                Err(_) => NumberText::Text(s),
            }
        } else {
            let f = v.to_f64_lossy();
            if f.fract() == 0.0 && f.abs() < 9.0e15 {
                NumberText::Number((f as i64).into())
            } else {
                serde_json::Number::from_f64(f).map(NumberText::Number).unwrap_or_else(|| NumberText::Text(f.to_string()))
            }
        }
    }
}

impl From<f64> for NumberText {
    fn from(v: f64) -> Self {
        NumberText::from_scalar(&v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaEntry {
    pub level: usize,
    pub position: usize,
    pub value: NumberText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSetting {
    All(NumberText),
    PerLevel(Vec<NumberText>),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<NumberText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimality: Option<NumberText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot: Option<NumberText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<NumberText>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_optima: Option<Vec<Vec<NumberText>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compromise: Option<Vec<NumberText>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objectives: Option<Vec<NumberText>>,
}

/// The on-disk problem document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub levels: Vec<usize>,
    pub objectives: Vec<Vec<NumberText>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<NumberText>>,
    pub b: Vec<NumberText>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<AlphaEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_fraction: Option<NumberText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<EpsilonSetting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinity_cap: Option<NumberText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iteration_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<ReportFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceDocument>,
}

/// Everything a document describes, in scalar type `T`.
#[derive(Debug, Clone)]
pub struct LoadedProblem<T> {
    pub problem: MultilevelProblem<T>,
    pub config: MultilevelConfig<T>,
    pub reference: Option<ReferenceSolution<T>>,
    pub format: ReportFormat,
}

fn malformed(e: serde_json::Error) -> IoError {
    IoError::Malformed { line: e.line(), column: e.column(), message: e.to_string() }
}

fn numbers<T: Scalar>(values: &[NumberText], field: &str) -> Result<Vec<T>, IoError> {
    values.iter().enumerate().map(|(k, v)| v.parse(&format!("{field}[{k}]"))).collect()
}

fn matrix<T: Scalar>(rows: &[Vec<NumberText>], field: &str) -> Result<Vec<Vec<T>>, IoError> {
    rows.iter().enumerate().map(|(i, r)| numbers(r, &format!("{field}[{i}]"))).collect()
}

fn setting<T: Scalar>(v: &Option<NumberText>, field: &str, default: T) -> Result<T, IoError> {
    let Some(v) = v else {
        return Ok(default);
    };
    let value: T = v.parse(field)?;
    if value.lt_zero() {
        return Err(IoError::Setting { field: field.into(), message: "must be nonnegative".into() });
    }
    Ok(value)
}

impl ProblemDocument {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        serde_json::from_str(text).map_err(malformed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    /// Validates the document and builds the model and run configuration.
    pub fn load<T: Scalar>(&self) -> Result<LoadedProblem<T>, IoError> {
        let problem = MultilevelProblem::new(
            self.levels.clone(),
            matrix(&self.objectives, "objectives")?,
            matrix(&self.a, "A")?,
            numbers(&self.b, "b")?,
        )?;

        let mut config = MultilevelConfig::<T>::default();
        if let Some(f) = &self.alpha_fraction {
            let fraction: T = f.parse("alpha_fraction")?;
            if fraction.lt_zero() || fraction >= T::one() {
                return Err(IoError::AlphaValue { what: "alpha_fraction".into() });
            }
            config.alpha.fraction = fraction;
        }
        for (k, entry) in self.alpha.iter().enumerate() {
            let var = LevelIndex::new(entry.level, entry.position);
            if problem.flat_index(entry.level, entry.position).is_err() {
                return Err(IoError::UnknownAlphaComponent { var });
            }
            let value: T = entry.value.parse(&format!("alpha[{k}].value"))?;
            if value.lt_zero() {
                return Err(IoError::AlphaValue { what: var.to_string() });
            }
            config.alpha.overrides.insert(var, value);
        }

        config.epsilon = match &self.epsilon {
            None => Vec::new(),
            Some(EpsilonSetting::All(v)) => vec![v.parse("epsilon")?; problem.levels()],
            Some(EpsilonSetting::PerLevel(vs)) => {
                if vs.len() != problem.levels() {
                    return Err(IoError::Epsilon(format!(
                        "{} entries given for {} levels",
                        vs.len(),
                        problem.levels()
                    )));
                }
                numbers(vs, "epsilon")?
            }
        };
        if config.epsilon.iter().any(|v| v.lt_zero()) {
            return Err(IoError::Epsilon("must be nonnegative".into()));
        }

        if let Some(t) = &self.tolerances {
            let s = &mut config.solver;
            s.tol_feas = setting(&t.feasibility, "tolerances.feasibility", s.tol_feas.clone())?;
            s.tol_opt = setting(&t.optimality, "tolerances.optimality", s.tol_opt.clone())?;
            s.pivot_tol = setting(&t.pivot, "tolerances.pivot", s.pivot_tol.clone())?;
            config.tol_sign = setting(&t.sign, "tolerances.sign", config.tol_sign.clone())?;
        }
        config.infinity_cap = setting(&self.infinity_cap, "infinity_cap", config.infinity_cap.clone())?;
        if !config.infinity_cap.gt_zero() {
            return Err(IoError::Setting { field: "infinity_cap".into(), message: "must be positive".into() });
        }
        if let Some(limit) = self.iteration_limit {
            config.solver.iteration_limit = Some(limit);
        }

        let reference = self
            .reference
            .as_ref()
            .map(|r| -> Result<ReferenceSolution<T>, IoError> {
                Ok(ReferenceSolution {
                    level_optima: r.level_optima.as_ref().map(|m| matrix(m, "reference.level_optima")).transpose()?,
                    compromise: r.compromise.as_ref().map(|v| numbers(v, "reference.compromise")).transpose()?,
                    objectives: r.objectives.as_ref().map(|v| numbers(v, "reference.objectives")).transpose()?,
                })
            })
            .transpose()?;

        Ok(LoadedProblem { problem, config, reference, format: self.format.unwrap_or_default() })
    }

    /// Document describing `problem` with the given alpha overrides.
    pub fn from_problem<T: Scalar>(problem: &MultilevelProblem<T>, alpha: &AlphaPolicy<T>) -> Self {
        let row = |r: &[T]| r.iter().map(NumberText::from_scalar).collect::<Vec<_>>();
        ProblemDocument {
            levels: problem.level_sizes().to_vec(),
            objectives: problem.objectives().iter().map(|c| row(c)).collect(),
            a: problem.a().to_rows().iter().map(|r| row(r)).collect(),
            b: row(problem.b()),
            alpha: alpha
                .overrides
                .iter()
                .map(|(var, v)| AlphaEntry {
                    level: var.level,
                    position: var.position,
                    value: NumberText::from_scalar(v),
                })
                .collect(),
            alpha_fraction: Some(NumberText::from_scalar(&alpha.fraction)),
            epsilon: None,
            tolerances: None,
            infinity_cap: None,
            iteration_limit: None,
            format: None,
            reference: None,
        }
    }
}

/// Reads and validates a problem file.
pub fn parse_problem<T: Scalar>(path: impl AsRef<Path>) -> Result<LoadedProblem<T>, IoError> {
    read_document(path)?.load()
}

pub fn read_document(path: impl AsRef<Path>) -> Result<ProblemDocument, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
    ProblemDocument::from_json(&text)
}

fn vec_text(v: &[f64], decimals: usize) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{:.*}", decimals, clean(*x))).collect();
    format!("({})", parts.join(", "))
}

/// Avoids printing `-0.000000`.
fn clean(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

fn opt_text(v: Option<f64>, decimals: usize) -> String {
    v.map(|v| format!("{:.*}", decimals, clean(v))).unwrap_or_else(|| "-".into())
}

/// Renders a report as a plain-text table or as JSON.
pub fn emit_report(report: &CompromiseReport<f64>, format: ReportFormat, decimals: usize) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("finite reports serialize"),
        ReportFormat::Table => emit_table(report, decimals),
    }
}

fn emit_table(report: &CompromiseReport<f64>, d: usize) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "Level optima");
    let _ = writeln!(w, "  {:<6} {:<16} {:>14}  x", "level", "status", "f_p");
    for o in &report.level_optima {
        let status = if o.provided { "provided".to_string() } else { o.status.to_string() };
        let _ = writeln!(w, "  {:<6} {:<16} {:>14.*}  {}", o.level, status, d, clean(o.value), vec_text(&o.x, d));
    }
    if !report.initial_lower.is_empty() {
        let _ = writeln!(w, "Initial bounds");
        let _ = writeln!(w, "  l(1) = {}", vec_text(&report.initial_lower, d));
        let _ = writeln!(w, "  u(1) = {}", vec_text(&report.initial_upper, d));
    }
    for it in &report.iterations {
        let p = it.level;
        let _ = writeln!(w, "Iteration p = {p} (level {} reduces, level {p} solves)", p - 1);
        for r in &it.reductions {
            let alpha = r.alpha.map(|a| format!("  alpha = {:.*}", d, a)).unwrap_or_default();
            let _ = writeln!(w, "  {:<8} {:?}{alpha}", r.variable.to_string(), r.case);
        }
        let _ = writeln!(w, "  l({p}) = {}", vec_text(&it.lower, d));
        let _ = writeln!(w, "  u({p}) = {}", vec_text(&it.upper, d));
        let _ = writeln!(w, "  status = {}, iterations = {}", it.status, it.iterations);
        if !it.x.is_empty() {
            let _ = writeln!(w, "  x({p}) = {}", vec_text(&it.x, d));
            let _ = writeln!(w, "  f     = {}", vec_text(&it.objectives, d));
        }
        let _ = writeln!(w, "  beta = {:.*}, beta_xi = {}", d, clean(it.beta), opt_text(it.beta_xi, d));
    }
    if let (Some(x), Some(f)) = (&report.compromise, &report.compromise_objectives) {
        let _ = writeln!(w, "Compromise");
        let _ = writeln!(w, "  x = {}", vec_text(x, d));
        let _ = writeln!(w, "  f = {}", vec_text(f, d));
    }
    if let Some(f) = &report.failure {
        let _ = writeln!(w, "Failure");
        let _ = writeln!(w, "  level {}, stage {:?}, kind {:?}", f.level, f.stage, f.kind);
        let _ = writeln!(w, "  {}", f.message);
    }
    if !report.notes.is_empty() {
        let _ = writeln!(w, "Notes");
        for n in &report.notes {
            let _ = writeln!(w, "  - {n}");
        }
    }
    out
}

/// Reads back a report written with [`ReportFormat::Json`].
pub fn parse_report_json(text: &str) -> Result<CompromiseReport<f64>, IoError> {
    serde_json::from_str(text).map_err(malformed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{reference_level_optima, three_level_problem};
    use crate::multilevel::{run, run_from_level_optima};
    use crate::scalar::Rational;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"{
        "levels": [1, 1],
        "objectives": [[1, 0], [0, "1/2"]],
        "A": [[1, 1]],
        "b": [4]
    }"#;

    #[test]
    fn minimal_document_loads_with_defaults() {
        let loaded = ProblemDocument::from_json(MINIMAL).unwrap().load::<Rational>().unwrap();
        assert_eq!(loaded.problem.levels(), 2);
        assert_eq!(loaded.problem.objectives()[1][1], Rational::new(1.into(), 2.into()));
        assert_eq!(loaded.config.alpha.fraction, Rational::new(1.into(), 4.into()));
        assert_eq!(loaded.config.epsilon_for(1), Rational::from_int(0));
        assert_eq!(loaded.format, ReportFormat::Table);
    }

    #[test]
    fn errors_have_codes() {
        let cases: Vec<(&str, &str)> = vec![
            ("{", "ML002"),
            (r#"{"levels": [1, 1], "objectives": [[1, 0], [0, 1]], "A": [[1, 1]], "b": [4], "bogus": 1}"#, "ML002"),
            (r#"{"levels": [1, 1], "objectives": [[1, 0], [0, "x"]], "A": [[1, 1]], "b": [4]}"#, "ML003"),
            (r#"{"levels": [1, 1], "objectives": [[1, 0], [0, 1]], "A": [[1, 1, 1]], "b": [4]}"#, "ML004"),
            (
                r#"{"levels": [1, 1], "objectives": [[1, 0], [0, 1]], "A": [[1, 1]], "b": [4],
                   "alpha": [{"level": 1, "position": 2, "value": 0.1}]}"#,
                "ML005",
            ),
            (
                r#"{"levels": [1, 1], "objectives": [[1, 0], [0, 1]], "A": [[1, 1]], "b": [4],
                   "alpha": [{"level": 1, "position": 1, "value": -0.1}]}"#,
                "ML006",
            ),
            (r#"{"levels": [1, 1], "objectives": [[1, 0], [0, 1]], "A": [[1, 1]], "b": [4], "epsilon": [0]}"#, "ML008"),
            (
                r#"{"levels": [1, 1], "objectives": [[1, 0], [0, 1]], "A": [[1, 1]], "b": [4], "infinity_cap": 0}"#,
                "ML009",
            ),
        ];
        for (text, code) in cases {
            let err = ProblemDocument::from_json(text).and_then(|d| d.load::<f64>().map(|_| ())).expect_err(text);
            assert_eq!(err.code(), code, "{text}: {err}");
        }
    }

    #[test]
    fn malformed_reports_position() {
        let err = ProblemDocument::from_json("{\n  \"levels\": [1,\n").unwrap_err();
        assert!(matches!(err, IoError::Malformed { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn example_document_round_trips_exactly() {
        let mlp = three_level_problem::<Rational>();
        let doc = ProblemDocument::from_problem(&mlp, &AlphaPolicy::default());
        let again = ProblemDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(again, doc);
        assert_eq!(again.load::<Rational>().unwrap().problem, mlp);
    }

    #[test]
    fn table_lists_bounds_and_failures() {
        let cfg = MultilevelConfig {
            alpha: AlphaPolicy::explicit([(LevelIndex::new(1, 1), 0.25), (LevelIndex::new(2, 1), 0.25)]),
            ..MultilevelConfig::default()
        };
        let report = run_from_level_optima(&three_level_problem::<f64>(), reference_level_optima(), &cfg).to_f64();
        let table = emit_report(&report, ReportFormat::Table, 6);
        for label in ["l(1) =", "u(1) =", "l(2) =", "u(2) =", "l(3) =", "u(3) =", "Compromise"] {
            assert!(table.contains(label), "missing {label}");
        }
        assert!(table.contains("l(2) = (0.250000, 0.000000, 0.000000, 0.000000)"));
        assert!(table.contains("u(2) = (2.000000, 0.000000, 3.000000, 0.666667)"));
        assert!(table.contains("l(3) = (0.250000, 0.000000, 0.250000, 0.000000)"));
        assert!(table.contains("u(3) = (2.000000, 0.000000, 3.000000, 0.666667)"));

        let mlp = MultilevelProblem::new(vec![1, 1], vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0, 1.0]], vec![-1.0])
            .unwrap();
        let partial = run(&mlp, &MultilevelConfig::default()).to_f64();
        let table = emit_report(&partial, ReportFormat::Table, 6);
        assert!(table.contains("Failure") && table.contains("level 1"));
    }

    #[test]
    fn json_report_round_trips() {
        let report = run(&three_level_problem::<f64>(), &MultilevelConfig::default()).to_f64();
        let text = emit_report(&report, ReportFormat::Json, 6);
        assert_eq!(parse_report_json(&text).unwrap(), report);
    }

    proptest! {
        #[test]
        fn float_documents_round_trip(
            c in proptest::collection::vec(-1e6f64..1e6, 4),
            a in proptest::collection::vec(-100.0f64..100.0, 4),
            b in -50.0f64..50.0,
        ) {
            let mlp = MultilevelProblem::new(
                vec![3, 1],
                vec![c.clone(), c.iter().rev().copied().collect()],
                vec![a],
                vec![b],
            ).unwrap();
            let doc = ProblemDocument::from_problem(&mlp, &AlphaPolicy::default());
            let back = ProblemDocument::from_json(&doc.to_json()).unwrap().load::<f64>().unwrap();
            prop_assert_eq!(back.problem, mlp);
        }
    }
}
