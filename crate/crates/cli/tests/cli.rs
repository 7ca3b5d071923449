//! End-to-end checks of the binary: exit codes, output formats, and the
//! config-file merge.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cokernel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn theorem_main_passes_and_round_trips() {
    let out = run(&[
        "verify",
        "theorem-main",
        "--p",
        "2",
        "--poly",
        "1,1,1",
        "--n",
        "2",
        "--N",
        "1",
        "--G",
        "1",
        "--fibers",
        "all",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["overall_pass"], serde_json::Value::Bool(true));
    // canonical JSON: re-render equals the original byte for byte
    let reparsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&reparsed).unwrap(), text.trim_end());
}

#[test]
fn lemma_lee_and_formats() {
    for format in ["json", "csv", "md"] {
        let out = run(&[
            "verify", "lemma-lee", "--p", "2", "--poly", "1,1,1", "--n", "2", "--N", "1",
            "--format", format,
        ]);
        assert_eq!(out.status.code(), Some(0), "format {format}");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn snf_reports_exponents_and_type() {
    let out = run(&[
        "snf", "--p", "2", "--N", "1", "--poly", "0,1", "--matrix", "[[2,0],[0,1]]",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["diagonal_exponents"], serde_json::json!([0, 1]));
    assert_eq!(v["module_type"], "1");
    assert_eq!(v["transforms_verified"], true);

    // zero matrix: every exponent is N+1
    let out = run(&[
        "snf", "--p", "2", "--N", "1", "--poly", "0,1", "--matrix", "[[0,0],[0,0]]",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["diagonal_exponents"], serde_json::json!([2, 2]));
    assert_eq!(v["module_type"], "2,2");
}

#[test]
fn config_error_exits_2() {
    // 4 is not prime
    let out = run(&[
        "verify", "lemma-lee", "--p", "4", "--poly", "0,1", "--n", "1", "--N", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // missing required options
    let out = run(&["verify", "lemma-lee", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_exceeded_exits_3() {
    let out = run(&[
        "verify",
        "geo-identity",
        "--p",
        "2",
        "--poly",
        "0,1",
        "--n",
        "2",
        "--N",
        "1",
        "--G",
        "1",
        "--budget",
        "4",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn aut_order_agrees() {
    let out = run(&["aut-order", "--G", "2,1", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["closed_form"], "8");
    assert_eq!(v["bruteforce"], "8");
    assert_eq!(v["matched"], true);

    // trivial module over any q
    let out = run(&["aut-order", "--G", "", "--q", "5"]);
    let v = stdout_json(&out);
    assert_eq!(v["closed_form"], "1");
}

#[test]
fn conjecture_is_evidence_mode() {
    let out = run(&[
        "verify",
        "conjecture",
        "--p",
        "2",
        "--N",
        "1",
        "--n",
        "2",
        "--polys",
        "0,1;1,1",
        "--Gs",
        "1;",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v["mode"], "evidence");
}

#[test]
fn config_file_merges_under_flags() {
    let dir = std::env::temp_dir().join(format!("cok-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.conf");
    std::fs::write(
        &cfg,
        "p = 2\nN = 1\npoly = 1,1,1\nn = 2\nG = 1\nfibers = all\n# comment\n",
    )
    .unwrap();
    let out = run(&[
        "verify",
        "theorem-main",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    // a flag overrides the file: G=3 is not annihilated, so config error
    let out = run(&[
        "verify",
        "theorem-main",
        "--config",
        cfg.to_str().unwrap(),
        "--G",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_file_is_written() {
    let dir = std::env::temp_dir().join(format!("cok-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(&[
        "verify",
        "fw-case",
        "--p",
        "2",
        "--n",
        "1",
        "--N",
        "1",
        "--G",
        "1",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["overall_pass"], true);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn lemma_r_explicit_residue() {
    let out = run(&[
        "verify",
        "lemma-r",
        "--p",
        "2",
        "--poly",
        "1,1,1",
        "--N",
        "1",
        "--n",
        "1",
        "--G",
        "1",
        "--zbar",
        "[[[0,0]]]",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v["overall_pass"], true);
}
