use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use multilevel_lp::io::parse_report_json;
use tempfile::NamedTempFile;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/three_level.json")
}

fn mllp(args: &[&str], file: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mllp"));
    cmd.args(args);
    if let Some(f) = file {
        cmd.arg(f);
    }
    cmd.output().expect("binary runs")
}

fn document(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: &str = r#"{"levels": [1, 1], "objectives": [[1, 0], [0, 1]], "A": [[1, 1]], "b": [4]}"#;

#[test]
fn solve_prints_the_table() {
    let out = mllp(&["solve", "--from-reference", "--decimals", "4"], Some(&fixture()));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("l(3) = (0.2500, 0.0000, 0.2500, 0.0000)"));
    assert!(text.contains("Compromise"));
}

#[test]
fn json_output_parses_back() {
    for extra in [&[][..], &["--exact"][..]] {
        let mut args = vec!["solve", "--format", "json"];
        args.extend_from_slice(extra);
        let out = mllp(&args, Some(&fixture()));
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let report = parse_report_json(&stdout(&out)).unwrap();
        assert!(report.is_complete());
        assert_eq!(report.levels, 3);
    }
}

#[test]
fn single_level_and_oracle_commands() {
    let doc = document(SMALL);
    let out = mllp(&["solve-level", "--p", "2", "--exact"], Some(doc.path()));
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("level 2: optimal"));
    let out = mllp(&["oracle"], Some(doc.path()));
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("level 1: Optimal, value 4"));
}

#[test]
fn verify_passes() {
    let out = mllp(&["verify", "--from-reference"], Some(&fixture()));
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
    let out = mllp(&["verify", "--random", "40", "--seed", "3"], None);
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
}

#[test]
fn infeasible_model_exits_with_one() {
    let doc = document(r#"{"levels": [1, 1], "objectives": [[1, 0], [0, 1]], "A": [[1, 1]], "b": [-1]}"#);
    let out = mllp(&["solve"], Some(doc.path()));
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("infeasible"));
}

#[test]
fn input_errors_exit_with_two_and_a_code() {
    let cases: [(&str, &[&str], &str); 6] = [
        (r#"{"levels": [1]"#, &[], "[ML002]"),
        (r#"{"levels": [1, 1], "objectives": [[1, 0]], "A": [[1, 1]], "b": [4]}"#, &[], "[ML004]"),
        (
            r#"{"levels": [1, 1], "objectives": [[1, 0], [0, 1]], "A": [[1, 1]], "b": [4],
                "alpha": [{"level": 3, "position": 1, "value": 0.1}]}"#,
            &[],
            "[ML005]",
        ),
        (SMALL, &["--alpha", "1,1,50"], "[ML007]"),
        (SMALL, &["--epsilon", "1,2,3"], "--epsilon"),
        (r#"{"levels": [1, 1], "objectives": [[1, 0], [0, 1]], "A": [[1, 1]], "b": ["x"]}"#, &[], "[ML003]"),
    ];
    for (text, extra, code) in cases {
        let doc = document(text);
        let mut args = vec!["solve"];
        args.extend_from_slice(extra);
        let out = mllp(&args, Some(doc.path()));
        assert_eq!(out.status.code(), Some(2), "{text}: {}", stderr(&out));
        assert!(stderr(&out).contains(code), "{text}: {}", stderr(&out));
    }
    let out = mllp(&["solve"], Some(Path::new("/nonexistent/problem.json")));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("[ML001]"));
}
