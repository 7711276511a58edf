use serde_json::Value;
use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lplab"))
        .args(args)
        .env_remove("LPLAB_PRECISION")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn verdict<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["criterion"] == name)
        .unwrap_or_else(|| panic!("no verdict {name}"))
}

fn has_flag(v: &Value, flag: &str) -> bool {
    v["flags"]
        .as_array()
        .is_some_and(|f| f.iter().any(|x| x == flag))
}

fn strip_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn analyze_partial_theta() {
    let out = run(&["analyze", "--family", "partial-theta", "--a", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(verdict(&r, "hutchinson")["status"], "holds");
    let t1 = verdict(&r, "thm1_zero_segment");
    assert_eq!(t1["status"], "holds");
    assert!(t1["witness"]["x"].is_number());
    assert_eq!(r["roots"]["report"]["verdict"], "all-real-negative");
    assert_eq!(r["spec"]["family"], "partial-theta");
    assert_eq!(r["quotients"]["q"][0], 4.0);
}

#[test]
fn report_keys_are_in_schema_order() {
    let out = run(&["analyze", "--family", "exponential", "--degree", "20"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let keys = [
        "\"schema_version\"",
        "\"spec\"",
        "\"quotients\"",
        "\"verdicts\"",
        "\"roots\"",
        "\"theta\"",
        "\"suites\"",
        "\"timestamp\"",
        "\"version\"",
    ];
    let pos: Vec<usize> = keys
        .iter()
        .map(|k| text.find(&format!("\n  {k}")).unwrap())
        .collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{pos:?}");
}

#[test]
fn analyze_exponential_flags_newton_equality() {
    let out = run(&["analyze", "--family", "exponential"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(has_flag(verdict(&r, "newton"), "exponential-equality"));
    assert_eq!(verdict(&r, "hutchinson")["status"], "fails");
    assert_eq!(verdict(&r, "thm1_zero_segment")["status"], "inconclusive");
}

#[test]
fn short_coefficient_list_is_rejected() {
    let out = run(&["analyze", "--coeffs", "1,1,0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("coeffs"));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_spec_files_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::File::create(&p)
        .unwrap()
        .write_all(br#"{"family": "partial-theta", "q": [4, 4]}"#)
        .unwrap();
    let out = run(&["analyze", "--input", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`q`"));
    let out = run(&[
        "analyze",
        "--input",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn toml_spec_file_runs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.toml");
    std::fs::write(&p, "q = [4.0, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0]\na0 = 2.0\n").unwrap();
    let out = run(&[
        "analyze",
        "--input",
        p.to_str().unwrap(),
        "--criteria",
        "newton,hutchinson",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["verdicts"].as_array().unwrap().len(), 2);
    assert_eq!(verdict(&r, "hutchinson")["status"], "holds");
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(
        run(&["analyze", "--family", "exponential", "--tol", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "analyze",
            "--family",
            "exponential",
            "--root-finder",
            "nope"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&["analyze", "--family", "partial-theta", "--a", "0.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["analyze", "--bogus"]).status.code(), Some(2));
}

#[test]
fn theta_small_bracket() {
    let out = run(&["theta", "--n-max", "5", "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let th = &r["theta"];
    assert!((th["c"]["2"].as_f64().unwrap() - 4.0).abs() < 1e-8);
    assert!((th["c"]["3"].as_f64().unwrap() - 3.0).abs() < 1e-8);
    assert_eq!(th["contains_literature_value"], true);
    assert!(th["monotonicity"]["even"].is_array());
}

#[test]
fn theta_two_terms_and_table() {
    let out = run(&["theta", "--n-max", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let c = r["theta"]["c"].as_object().unwrap();
    assert_eq!(c.len(), 1);
    assert!((c["2"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    let out = run(&["theta", "--n-max", "3", "--output", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,c_n");
    assert!(lines[1].starts_with("2,4.0000000"));
    assert!(lines[2].starts_with("3,3.0000000") || lines[2].starts_with("3,2.9999999"));
}

#[test]
fn theta_one_term_is_rejected() {
    assert_eq!(run(&["theta", "--n-max", "1"]).status.code(), Some(2));
}

#[test]
fn verify_lemmas_default_run_passes() {
    let out = run(&["verify-lemmas"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let suites = r["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 4);
    for s in suites {
        assert_eq!(s["status"], "pass", "{s}");
        assert_eq!(s["trials"], 1000);
        assert!(s["worst_margin"].as_f64().unwrap() >= 0.0);
    }
    assert_eq!(r["rng"]["seed"], 42);
    assert!(r["rng"]["algorithm"].as_str().unwrap().contains("pcg64"));
}

#[test]
fn verify_lemmas_verdicts_do_not_depend_on_seed() {
    let statuses = |seed: &str| -> Vec<Value> {
        let r = json(&run(&["verify-lemmas", "--seed", seed, "--trials", "200"]));
        r["suites"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| s["status"].clone())
            .collect()
    };
    let base = statuses("1");
    for seed in ["2", "3", "4", "5"] {
        assert_eq!(statuses(seed), base);
    }
}

#[test]
fn injected_parameter_is_a_domain_violation() {
    let out = run(&[
        "verify-lemmas",
        "--inject-lemma1-a",
        "2.5",
        "--trials",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let l1 = &r["suites"][0];
    assert_eq!(l1["suite"], "lemma1_circle_minimum");
    assert_eq!(l1["status"], "domain-violation");
    assert_eq!(l1["failed"], 0);
    assert_eq!(l1["domain_violations"], 50);
}

#[test]
fn reports_are_identical_apart_from_the_timestamp() {
    for args in [
        &["analyze", "--family", "partial-theta", "--a", "1.9"][..],
        &["verify-lemmas", "--trials", "100", "--seed", "7"][..],
        &["theta", "--n-max", "6"][..],
    ] {
        let a = strip_timestamp(json(&run(args)));
        let b = strip_timestamp(json(&run(args)));
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}

#[test]
fn table_output_lists_every_criterion() {
    let out = run(&[
        "analyze",
        "--family",
        "euler-like",
        "--a",
        "3",
        "--output",
        "table",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text
        .lines()
        .any(|l| l.starts_with("monotone_classify") && l.contains("fails")));
    assert_eq!(text.lines().filter(|l| !l.is_empty()).count(), 1 + 12 + 1);
}
