use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn randdehn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randdehn"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error JSON on stderr")
}

#[test]
fn rdehn_writes_one_row_per_step_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = randdehn(
        &["rdehn", "--group", "z2", "--chain", "srw", "-n", "64,128,256", "--trials", "100", "--seed", "1", "-o", "out.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,trials,mean_fill,std_fill,ci_lo,ci_hi,mean_boundary_len,exact_fraction");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("64,100,"));
    assert!(lines[3].starts_with("256,100,"));
}

#[test]
fn unknown_group_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = randdehn(&["rdehn", "--group", "no-such-group"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["field"], "group");
    assert_eq!(err["error"], "invalid-input");
}

#[test]
fn area_of_commutator_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = randdehn(&["area", "--group", "z2", "--word", "abAB"], dir.path());
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], 1);
    assert_eq!(v["grade"], "exact");
}

#[test]
fn exhausted_budget_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.txt"), "group t\ngens a b\nrel aaabbb\n").unwrap();
    let out = randdehn(
        &["area", "--group", "t.txt", "--word", "aaabbbaaabbbaaabbb", "--slack", "0", "--cap", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "not-filled-within-budget");
}

#[test]
fn non_null_homotopic_word_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = randdehn(&["area", "--group", "z2", "--word", "abA"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["field"], "word");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"group": "z2", "trails": 5}"#).unwrap();
    let out = randdehn(&["run", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["field"], "config");
    assert!(err["message"].as_str().unwrap().contains("trails"));
}

#[test]
fn dumped_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["subwalk", "--group", "f2", "-n", "32,64", "--trials", "20", "--c3", "4,8", "--seed", "5"];
    let direct = randdehn(&args, dir.path());
    assert!(direct.status.success());
    let mut dump_args = args.to_vec();
    dump_args.push("--dump-config");
    let dump = randdehn(&dump_args, dir.path());
    std::fs::write(dir.path().join("c.json"), &dump.stdout).unwrap();
    let rerun = randdehn(&["run", "--config", "c.json"], dir.path());
    assert!(rerun.status.success());
    assert_eq!(direct.stdout, rerun.stdout);
}

#[test]
fn flags_override_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"experiment": "area", "group": "f2", "word": "ab"}"#).unwrap();
    let out = randdehn(&["run", "--config", "c.json", "--group", "z2", "--word", "abAB"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], 1);
}

#[test]
fn reports_do_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    for jobs in ["1", "8"] {
        let out = randdehn(
            &["rdehn", "--group", "raag-p3", "-n", "32,64", "--trials", "40", "--seed", "3", "--jobs", jobs, "-o", &format!("r{jobs}.json")],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("r1.json")).unwrap();
    let b = std::fs::read(dir.path().join("r8.json")).unwrap();
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["meta"]["group"], "raag-p3");
    assert_eq!(v["meta"]["seed"], 3);
}

#[test]
fn csv_needs_a_tabular_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = randdehn(&["tameness", "--group", "f2", "--n-max", "10", "-o", "t.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["field"], "format");
}

#[test]
fn fill_reports_corridor_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let out = randdehn(
        &["fill", "--group", "raag-p3", "-n", "128", "--seed", "3", "--corridor", "--corridor-c1", "2", "--spacing-factor", "1"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let c = &v["corridor"];
    assert!(c["total_bound"].as_u64().unwrap() >= v["area"]["value"].as_u64().unwrap() || v["area"]["grade"] != "exact");
    assert_eq!(c["loop_areas"].as_array().unwrap().len(), c["loop_lengths"].as_array().unwrap().len());
}

#[test]
fn presentation_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("torus.txt"), "group torus\ngens x y\nrel xyXY\n").unwrap();
    let out = randdehn(&["area", "--group", "torus.txt", "--word", "xxyyXXYY"], dir.path());
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], 4);
}

#[test]
fn dehn_worst_matches_abelian_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = randdehn(&["dehn-worst", "--group", "z2", "--max-len", "8"], dir.path());
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().any(|l| l == "4,1,abAB,1,0"));
    assert!(csv.lines().any(|l| l.starts_with("8,4,aabbAABB,")));
}
