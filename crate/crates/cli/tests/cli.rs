//! End-to-end runs of the `pql` binary: exit codes, report formats and
//! determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

use pql_core::interchange::configuration_from_json;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(name: &str) -> String {
    root().join("corpus").join(name).to_string_lossy().into_owned()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).to_string_lossy().into_owned()
}

fn pql(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pql")).args(args).env_remove("PQL_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_confirms_the_declared_type() {
    let o = pql(&["check", &corpus("exp.pql"), "--type", "qubit * I"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("v_c : qubit |- "));
    assert!(stdout(&o).trim_end().ends_with(": qubit * I"));
}

#[test]
fn check_reports_a_wrong_type() {
    let o = pql(&["check", &corpus("exp.pql"), "--type", "qubit"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[TypeMismatch]"), "{}", stderr(&o));
}

#[test]
fn duplicated_linear_variable_is_a_type_error() {
    let o = pql(&["check", &fixture("linear_dup.pql")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error[LinearityError]"), "{}", stderr(&o));
    assert!(stderr(&o).contains("variable `x`"));
}

#[test]
fn malformed_file_is_a_usage_error() {
    let o = pql(&["check", &fixture("malformed.pql")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error[SyntaxError]") && stderr(&o).contains(":2:"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(pql(&["check", &corpus("exp.pql"), "--type", "qubit *"]).status.code(), Some(2));
    assert_eq!(pql(&["check", "/no/such/file.pql"]).status.code(), Some(2));
    assert_eq!(pql(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pql(&["run", &corpus("exp.pql"), "--emit", "svg"]).status.code(), Some(2));
}

#[test]
fn run_prints_the_final_configuration() {
    let o = pql(&["run", &corpus("exp.pql")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "steps: 5\nchannel: meas v_c { init tt w_0; free v_c; eps{w_0} | eps{v_c} }\nvalue: [<w_0, *>, <v_c, *>]\n");
    let o = pql(&["run", &corpus("tt.pql")]);
    assert_eq!(stdout(&o), "steps: 0\nchannel: eps{}\nvalue: tt\n");
}

#[test]
fn run_rejects_ill_typed_programs_and_exhausted_fuel() {
    assert_eq!(pql(&["run", &fixture("linear_dup.pql")]).status.code(), Some(1));
    let o = pql(&["run", &corpus("exp.pql"), "--fuel", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FuelExhausted"));
}

#[test]
fn traces_are_deterministic_per_seed() {
    let a = pql(&["run", &corpus("nested_meas.pql"), "--trace", "--seed", "7"]);
    let b = pql(&["run", &corpus("nested_meas.pql"), "--trace", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_pql"))
        .args(["run", &corpus("nested_meas.pql"), "--trace"])
        .env("PQL_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
    let lines: Vec<String> = stdout(&a).lines().map(String::from).collect();
    assert!(lines[0].starts_with("1 "));
    configuration_from_json(&lines[0][lines[0].find('{').unwrap()..]).unwrap();
}

#[test]
fn emitted_json_and_dot_describe_the_final_configuration() {
    let o = pql(&["run", &corpus("exp.pql"), "--emit", "json"]);
    let c = configuration_from_json(stdout(&o).trim()).unwrap();
    assert_eq!(c.channel.to_string(), "meas v_c { init tt w_0; free v_c; eps{w_0} | eps{v_c} }");
    let d1 = pql(&["run", &corpus("exp.pql"), "--emit", "dot"]);
    let d2 = pql(&["run", &corpus("exp.pql"), "--emit", "dot"]);
    assert_eq!(d1.stdout, d2.stdout);
    assert!(stdout(&d1).starts_with("digraph configuration {"));
}

#[test]
fn simulate_splits_exp_on_plus() {
    let o = pql(&["simulate", &corpus("exp.pql"), "--in", "v_c=+"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("leaf 0 path tt p=0.500000000000 value <w_0, *>"), "{out}");
    assert!(out.contains("leaf 1 path ff p=0.500000000000 value <v_c, *>"), "{out}");
}

#[test]
fn simulate_needs_every_input_wire() {
    let o = pql(&["simulate", &corpus("exp.pql")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("v_c"));
    assert_eq!(pql(&["simulate", &corpus("exp.pql"), "--in", "v_c=2"]).status.code(), Some(2));
    assert_eq!(pql(&["simulate", &corpus("exp.pql"), "--in", "v_c=0,q=1"]).status.code(), Some(2));
}

#[test]
fn soundness_passes_on_exp() {
    let o = pql(&["soundness", &corpus("exp.pql")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("initial outcomes: [<*, *>, <*, *>]\n"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("step ")).count(), 5);
    assert!(out.trim_end().ends_with("PASS at tolerance 1e-9"));
}

#[test]
fn non_observable_programs_are_refused_by_soundness() {
    let o = pql(&["soundness", &fixture("not_observable.pql")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NotObservableType"));
}

#[test]
fn denote_lists_the_image_and_choi_matrices() {
    let o = pql(&["denote", &corpus("exp.pql")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["image"], serde_json::json!(["<*, *>", "<*, *>"]));
    assert_eq!(v["inputWires"], serde_json::json!(["v_c"]));
    let choi = &v["outcomes"][0]["choi"];
    assert_eq!(choi.as_array().unwrap().len(), 4);
    assert_eq!(choi[3][3], serde_json::json!([1.0, 0.0]));
}

#[test]
fn whole_corpus_checks_runs_and_is_sound() {
    let dir = root().join("corpus");
    let mut n = 0;
    for e in std::fs::read_dir(&dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_none_or(|x| x != "pql") {
            continue;
        }
        let f = p.to_string_lossy().into_owned();
        for cmd in ["check", "run", "soundness"] {
            let o = pql(&[cmd, &f]);
            assert_eq!(o.status.code(), Some(0), "{cmd} {f}: {}", stderr(&o));
        }
        n += 1;
    }
    assert!(n >= 20, "only {n} corpus programs");
}
