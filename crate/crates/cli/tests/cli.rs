use std::path::Path;
use std::process::{Command, Output};

use nrlimit::limit_lab::read_sweep_csv;
use nrlimit::{load_snapshot, NonlinearityKind, OperatorKind, SweepSummary};
use nrlimit_cli::{parse_config, parse_config_with_overrides, parse_for_command, CliError, Command as Cmd};

fn nrlimit(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nrlimit"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("NRLIMIT_OUT")
        .output()
        .unwrap()
}

fn violations(e: CliError) -> Vec<String> {
    match e {
        CliError::Invalid(v) => v,
        other => panic!("expected a validation error, got {other}"),
    }
}

#[test]
fn minimal_config_gets_defaults() {
    let cfg = parse_config(r#"{"command": "solve", "problem": {"n": 1, "p": 3}}"#).unwrap();
    assert_eq!(cfg.command, Some(Cmd::Solve));
    assert_eq!(cfg.grid.length(), 32.0);
    assert_eq!(cfg.grid.points(), 1024);
    assert_eq!(cfg.solver.tolerance, 1e-12);
    assert_eq!(cfg.nonlinearity.exponent(), 3);
    assert_eq!(cfg.operator.kind(), OperatorKind::Nonrelativistic);

    let empty = parse_config("{}").unwrap();
    assert_eq!(empty.nonlinearity.exponent(), 4);
    assert_eq!(empty.c_list, vec![4.0, 8.0, 16.0, 32.0, 64.0]);
    let three = parse_config(r#"{"problem": {"n": 3}}"#).unwrap();
    assert_eq!(three.nonlinearity.kind(), NonlinearityKind::Hartree);
    assert_eq!((three.grid.length(), three.grid.points()), (16.0, 64));
    assert_eq!(three.c_list, vec![4.0, 8.0, 16.0, 32.0]);
}

#[test]
fn hartree_outside_three_dimensions_is_rejected() {
    let v = violations(parse_config(r#"{"problem": {"n": 1, "nonlinearity": "hartree"}}"#).unwrap_err());
    assert_eq!(v.len(), 1);
    assert!(v[0].starts_with("problem.nonlinearity") && v[0].contains("n = 3"), "{v:?}");
}

#[test]
fn supercritical_power_is_rejected() {
    let v = violations(parse_config(r#"{"problem": {"n": 2, "p": 5}}"#).unwrap_err());
    assert!(v[0].contains("2n/(n-1) = 4"), "{v:?}");
}

#[test]
fn all_violations_are_listed() {
    let text = r#"{
        "grid": {"N": 15},
        "operator": {"kind": "pseudo_relativistic"},
        "solver": {"tolerance": 1e-20},
        "analysis": {"s_list": [1, 0.5]}
    }"#;
    let v = violations(parse_config(text).unwrap_err());
    let fields: Vec<&str> = v.iter().map(|m| m.split(':').next().unwrap()).collect();
    assert_eq!(fields, ["grid", "operator.c", "solver", "analysis.s_list"]);
}

#[test]
fn unknown_keys_name_their_line() {
    let text = "{\n  \"grid\": {\n    \"L\": 32,\n    \"points\": 512\n  }\n}";
    let msg = parse_config(text).unwrap_err().to_string();
    assert!(msg.contains("unknown field `points`") && msg.contains("line 4"), "{msg}");
    assert!(matches!(parse_config("{\"grid\": "), Err(CliError::Json(_))));
}

#[test]
fn overrides_apply_on_top() {
    let cfg = parse_config_with_overrides(
        r#"{"grid": {"N": 256}}"#,
        &["grid.N=512".into(), "operator.c=8".into(), "output.snapshot_format=csv".into()],
    )
    .unwrap();
    assert_eq!(cfg.grid.points(), 512);
    assert_eq!(cfg.operator.c(), Some(8.0));
    assert_eq!(cfg.snapshot_format, nrlimit::SnapshotFormat::Csv);

    assert!(parse_config_with_overrides("{}", &["grid.M=3".into()]).is_err());
    assert!(parse_config_with_overrides("{}", &["grid.N".into()]).is_err());

    let symbols = parse_for_command("{}", &[], Cmd::VerifySymbols).unwrap();
    assert_eq!(symbols.c_list.len(), 8);
    let v = violations(parse_for_command(r#"{"command": "sweep"}"#, &[], Cmd::Solve).unwrap_err());
    assert!(v[0].starts_with("command"));
}

#[test]
fn solve_writes_the_soliton() {
    let dir = tempfile::tempdir().unwrap();
    let out = nrlimit(&["solve"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let field = load_snapshot(&dir.path().join("state.bin")).unwrap();
    let err = field
        .grid()
        .coordinates()
        .iter()
        .zip(field.values().unwrap())
        .map(|(x, v)| (v - 2f64.sqrt() / x[0].cosh()).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-6, "{err}");
    let record: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("solve.json")).unwrap()).unwrap();
    for key in ["operator", "c", "nonlinearity", "p", "n", "L", "N", "residual", "action", "iterations"] {
        assert!(record.get(key).is_some(), "missing {key}");
    }
    assert!(record["residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn sweep_is_deterministic_and_passes_the_report() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = nrlimit(&["sweep", "--threads", "2"], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["sweep.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
    let rows = read_sweep_csv(std::fs::File::open(a.path().join("sweep.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 5 * 4);
    let summary: SweepSummary = serde_json::from_slice(&std::fs::read(a.path().join("summary.json")).unwrap()).unwrap();
    let slope = summary.fit(1.0).unwrap().slope;
    assert!((-2.15..=-1.85).contains(&slope), "{slope}");
    assert!(summary.gap.unwrap() > 0.0);

    let out = nrlimit(&["report"], a.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let md = std::fs::read_to_string(a.path().join("report.md")).unwrap();
    assert!(md.contains("checks passed") && !md.contains("FAIL"));
}

#[test]
fn failed_checks_give_exit_four_and_still_write_the_report() {
    let dir = tempfile::tempdir().unwrap();
    // at s = 4 the c = 4 state overshoots the limit's norm by more than 1.5x
    let out = nrlimit(&["sweep", "--override", "analysis.s_list=[0.5,1,2,3,4]"], dir.path());
    assert!(out.status.success());
    let out = nrlimit(&["report"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("uniform bound, s = 4"));
    let md = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert!(md.contains("| uniform bound, s = 4 | FAIL |"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let invalid = nrlimit(&["solve", "--override", "problem.nonlinearity=\"hartree\""], dir.path());
    assert_eq!(invalid.status.code(), Some(2));
    let stuck = nrlimit(&["solve", "--override", "solver.max_iterations=3"], dir.path());
    assert_eq!(stuck.status.code(), Some(3));
    let no_summary = nrlimit(&["report"], dir.path());
    assert_eq!(no_summary.status.code(), Some(1));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unwritable_output_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let out = nrlimit(&["solve"], &blocker.join("sub"));
    assert!(!out.status.success());
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
}

#[test]
fn output_root_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nrlimit"))
        .args(["verify-symbols", "--override", "grid.N=64"])
        .env("NRLIMIT_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("symbols.json")).unwrap()).unwrap();
    assert_eq!(report["checks"].as_array().unwrap().len(), 8);
    assert!(report["min_ratio"].as_f64().unwrap() >= 0.5);
}

#[test]
fn nondeg_writes_the_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = nrlimit(&["nondeg", "--override", "grid.N=512"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let record: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("nondeg.json")).unwrap()).unwrap();
    assert!((record["d"].as_f64().unwrap() - 0.5).abs() <= 1e-9);
    assert!(dir.path().join("mode.bin").exists());
}
