//! CLI behavior: golden outputs, exit codes, schema conformance, caching.

mod common;

use common::{assert_matches_schema, bin, run_ok};

#[test]
fn dist_golden_small() {
    let out = run_ok(&["dist", "--kind", "x", "--n", "1", "--p", "1"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "m,num,den,prob\n1,1,1,1\n");

    let out = run_ok(&["dist", "--kind", "y", "--n", "2", "--p", "2"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "m,num,den,prob\n2,1,1,1\n");

    let out = run_ok(&["dist", "--kind", "x", "--n", "2", "--p", "1"]);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "m,num,den,prob\n1,1,2,0.5\n2,1,2,0.5\n"
    );
}

#[test]
fn dist_matches_brute_force_csv() {
    // byte-for-byte: DP pmf rows equal exhaustive-enumeration pmf rows
    let out = run_ok(&["dist", "--kind", "x", "--n", "8", "--p", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let bf = treespan_core::exactdist::brute_force_pmfs(8, 3).unwrap();
    let mut expected = String::from("m,num,den,prob\n");
    for (m, w) in bf.x {
        expected.push_str(&format!(
            "{m},{},{},{}\n",
            w.numer(),
            w.denom(),
            treespan_core::combinatorics::rational_to_f64(&w)
        ));
    }
    assert_eq!(text, expected);
}

#[test]
fn exit_codes() {
    // 2: argument errors (clap-level and validation-level)
    let out = bin().args(["dist", "--kind", "q", "--n", "3", "--p", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["dist", "--kind", "x", "--n", "3", "--p", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["simulate", "--n", "0", "--p", "0", "--trials", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["mqs-run", "--n", "5", "--p", "2", "--ranks", "1,2", "--trials", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // 3: resource cap (table far beyond the build budget)
    let out = bin()
        .args(["dist", "--kind", "x", "--n", "5000", "--p", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // 0 plus verification on the happy path
    let out = bin()
        .args(["moments", "--n", "12", "--p", "3", "--verify"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn json_outputs_match_schemas() {
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("dist.schema.json", vec!["dist", "--kind", "y", "--n", "6", "--p", "2"]),
        ("moments.schema.json", vec!["moments", "--n", "9", "--p", "2", "--verify"]),
        (
            "simulate.schema.json",
            vec!["simulate", "--n", "15", "--p", "2", "--trials", "400", "--seed", "3"],
        ),
        (
            "simulate.schema.json",
            vec!["simulate", "--n", "2000", "--p", "2", "--trials", "400", "--seed", "3"],
        ),
        (
            "mqs-run.schema.json",
            vec!["mqs-run", "--n", "12", "--ranks", "1,4,9", "--trials", "200"],
        ),
        (
            "gof.schema.json",
            vec!["gof", "--kind", "y", "--n", "40", "--p", "2", "--trials", "5000"],
        ),
        (
            "gof.schema.json",
            vec!["gof", "--kind", "x", "--n", "5000", "--p", "2", "--trials", "2000", "--center", "moments"],
        ),
        (
            "gof.schema.json",
            vec!["gof", "--kind", "y", "--n", "100", "--p", "2", "--trials", "4000", "--center", "exact"],
        ),
        (
            "gof.schema.json",
            vec!["gof", "--kind", "y", "--n", "60", "--p", "2", "--source", "exact"],
        ),
        (
            "quasipower.schema.json",
            vec!["quasipower", "--kind", "x", "--p", "2", "--s", "0.05", "--n-list", "10,20,30"],
        ),
        (
            "gf-check.schema.json",
            vec!["gf-check", "--z", "0.2", "--u", "0.5", "--v", "1.1", "--trunc", "60", "--ptrunc", "10"],
        ),
    ];
    for (schema, mut args) in cases {
        args.extend_from_slice(&["--format", "json"]);
        let out = run_ok(&args);
        assert_matches_schema(schema, &String::from_utf8(out.stdout).unwrap());
    }
}

#[test]
fn gf_check_at_origin_has_zero_residual() {
    let out = run_ok(&[
        "gf-check", "--z", "0", "--u", "0.3", "--v", "1.2", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["phi_rel_residual"].as_f64().unwrap(), 0.0);
    assert_eq!(v["f_rel_residual"].as_f64().unwrap(), 0.0);
    assert_eq!(v["phi"]["re"].as_f64().unwrap(), 1.0);
    assert_eq!(v["f"]["re"].as_f64().unwrap(), 1.0);
}

#[test]
fn simulate_trivial_histogram() {
    let out = run_ok(&[
        "simulate", "--n", "2", "--p", "2", "--trials", "50", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["hist_y"], serde_json::json!([{ "count": 50, "m": 2 }]));
}

#[test]
fn quasipower_at_zero_is_one() {
    let out = run_ok(&[
        "quasipower", "--kind", "y", "--p", "2", "--s", "0", "--n-list", "8,16", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for row in v["rows"].as_array().unwrap() {
        assert!((row["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn cache_round_trip_and_corruption_recovery() {
    let dir = std::env::temp_dir().join(format!("treespan-cache-test-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let dir_str = dir.to_str().unwrap();

    let args = ["dist", "--kind", "y", "--n", "12", "--p", "2", "--cache-dir", dir_str];
    let first = run_ok(&args);
    let cache_file = dir.join("table-y-n12-p2.json");
    assert!(cache_file.exists(), "cache file written");
    // cached table validates against the cache schema
    assert_matches_schema(
        "table-cache.schema.json",
        &std::fs::read_to_string(&cache_file).unwrap(),
    );
    // second run hits the cache and emits identical bytes
    let second = run_ok(&args);
    assert_eq!(first.stdout, second.stdout);
    // corrupt the cache; the command must rebuild and still answer correctly
    std::fs::write(&cache_file, "{ not json").unwrap();
    let third = run_ok(&args);
    assert_eq!(first.stdout, third.stdout);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn gof_exact_center_bounds() {
    // exact-moment standardization is capped for the span size
    let out = bin()
        .args(["gof", "--kind", "y", "--n", "9999", "--p", "2", "--trials", "100", "--center", "exact"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cache_dir_env_var_is_honored() {
    let dir = std::env::temp_dir().join(format!("treespan-env-cache-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let out = bin()
        .args(["dist", "--kind", "x", "--n", "9", "--p", "2"])
        .env("TREESPAN_CACHE_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.join("table-x-n9-p2.json").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn moments_closed_forms_only_skip_table_budget() {
    // closed forms evaluate far beyond the table build cap
    let out = run_ok(&["moments", "--n", "2000", "--p", "2", "--source", "closed-form"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() == 2 && text.contains(",Y,"), "{text}");
}

#[test]
fn out_flag_writes_identical_bytes() {
    let path = std::env::temp_dir().join(format!("treespan-out-{}.csv", std::process::id()));
    let stdout_run = run_ok(&["dist", "--kind", "x", "--n", "7", "--p", "2"]);
    run_ok(&[
        "dist", "--kind", "x", "--n", "7", "--p", "2", "--out", path.to_str().unwrap(),
    ]);
    let file_bytes = std::fs::read(&path).unwrap();
    assert_eq!(stdout_run.stdout, file_bytes);
    let _ = std::fs::remove_file(&path);
}
