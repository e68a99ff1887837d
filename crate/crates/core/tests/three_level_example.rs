use std::path::PathBuf;

use multilevel_lp::fixtures::{reference_level_optima, three_level_problem};
use multilevel_lp::io::{emit_report, parse_problem, parse_report_json, ReportFormat};
use multilevel_lp::lp_model::LevelIndex;
use multilevel_lp::multilevel::{check_compromise, run, run_from_level_optima, run_with_reference, MultilevelConfig};
use multilevel_lp::range_reduction::{AlphaPolicy, ReductionCase};
use multilevel_lp::scalar::{Rational, Scalar};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/three_level.json")
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_int(n) / Rational::from_int(d)
}

fn quarter_policy() -> AlphaPolicy<Rational> {
    AlphaPolicy::explicit([(LevelIndex::new(1, 1), q(1, 4)), (LevelIndex::new(2, 1), q(1, 4))])
}

#[test]
fn reference_optima_reproduce_the_worked_iterations() {
    let mlp = three_level_problem::<Rational>();
    let cfg = MultilevelConfig { alpha: quarter_policy(), ..MultilevelConfig::default() };
    let report = run_from_level_optima(&mlp, reference_level_optima(), &cfg);
    assert!(report.is_complete());

    let first = &report.iterations[0];
    assert_eq!(first.reductions[0].case, ReductionCase::AtLower);
    assert_eq!(first.reductions[1].case, ReductionCase::ZeroWidth);
    assert_eq!(first.lower, vec![q(1, 4), q(0, 1), q(0, 1), q(0, 1)]);
    assert_eq!(first.objectives[1], q(12, 1));

    let second = &report.iterations[1];
    assert_eq!(second.lower, vec![q(1, 4), q(0, 1), q(1, 4), q(0, 1)]);
    assert_eq!(second.upper, vec![q(2, 1), q(0, 1), q(3, 1), q(2, 3)]);
    assert_eq!(report.compromise_objectives.as_ref().unwrap()[2], q(6, 1));
    assert!(check_compromise(&mlp, &report, &q(0, 1), &q(0, 1), &q(0, 1)));
}

#[test]
fn default_run_converges_and_agrees_across_arithmetics() {
    let exact = run(&three_level_problem::<Rational>(), &MultilevelConfig::default());
    let float = run(&three_level_problem::<f64>(), &MultilevelConfig::default());
    assert!(exact.is_complete() && float.is_complete());
    let fe = exact.compromise_objectives.as_ref().unwrap();
    let ff = float.compromise_objectives.as_ref().unwrap();
    for (a, b) in fe.iter().zip(ff) {
        assert!((a.to_f64_lossy() - b).abs() < 1e-9);
    }
    assert!(check_compromise(&three_level_problem::<f64>(), &float, &0.0, &1e-9, &1e-9));
}

#[test]
fn fixture_document_drives_the_same_run() {
    let loaded = parse_problem::<Rational>(fixture()).unwrap();
    let reference = loaded.reference.clone().unwrap();
    let report = run_with_reference(&loaded.problem, &loaded.config, &reference, true);
    let direct = run_from_level_optima(
        &three_level_problem(),
        reference_level_optima(),
        &MultilevelConfig { alpha: quarter_policy(), ..MultilevelConfig::default() },
    );
    assert_eq!(report.iterations, direct.iterations);
    assert!(report.notes.iter().any(|n| n.contains("violates row 4")));
}

#[test]
fn reports_survive_both_output_formats() {
    let loaded = parse_problem::<f64>(fixture()).unwrap();
    let reference = loaded.reference.clone().unwrap();
    let report = run_with_reference(&loaded.problem, &loaded.config, &reference, true);

    let json = emit_report(&report, ReportFormat::Json, 6);
    assert_eq!(parse_report_json(&json).unwrap(), report);

    let table = emit_report(&report, ReportFormat::Table, 4);
    assert!(table.contains("l(2) = (0.2500, 0.0000, 0.0000, 0.0000)"));
    assert!(table.contains("l(3) = (0.2500, 0.0000, 0.2500, 0.0000)"));
    assert!(table.contains("u(3) = (2.0000, 0.0000, 3.0000, 0.6667)"));
}
