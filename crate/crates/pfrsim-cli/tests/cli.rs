//! End-to-end tests for the `pfrsim` binary.
//!
//! Every invocation here uses deliberately tiny workloads: under `cargo test`
//! the binary links a lightly-optimized build of the library, so these tests
//! pin interface behaviour (headers, exit codes, determinism), not statistics.
//! Statistical checks live in the library's own suites.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Golden column schema for `dme` and `metric` reports. Changing the report
/// layout is a breaking change for downstream consumers; update this constant
/// deliberately, together with the README, when that is intended.
const REPORT_HEADER: &str = "experiment,seed,mechanism,n,d,clip,eps,delta,alpha,\
     chunk_dim,bit_budget,trials,eps_effective,mse,mse_stderr,mean_bits_per_client,\
     bits_bound,central_eps,central_delta,local_eps,local_delta,metric_coeff,\
     noise_std,points_mean,points_max,wall_time_s";

/// Golden column schema for `adn` reports.
const ADN_HEADER: &str = "experiment,preset,seed,trials,bound,bound_stderr,\
     zero_denominator_events,error_rate,error_stderr,ideal_error_rate,\
     mismatch_rate,dominated,wall_time_s";

/// Golden column schema for `secrecy` reports.
const SECRECY_HEADER: &str = "experiment,scheme,attack,seed,trials,bound,\
     failure_rate,failure_stderr,mismatch_rate,secrecy_tv,tv_sampling_scale,\
     objective,wall_time_s";

/// Golden column schema for `ppr-bench` stdout.
const BENCH_HEADER: &str = "chunk_dim,eps_effective,trials,mean_wall_s,\
     stderr_wall_s,points_mean,points_max,mean_log2_k,mean_bits";

fn normalize(header: &str) -> String {
    header.split_whitespace().collect::<String>()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pfrsim"))
}

/// Per-test scratch directory; recreated on each run so stale files from an
/// aborted run cannot leak into assertions.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pfrsim-cli-test-{name}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

fn write_file(path: &Path, contents: &str) {
    fs::write(path, contents).expect("write test fixture");
}

fn read_file(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn pfrsim");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_err(cmd: &mut Command, expected_code: i32) -> Output {
    let out = cmd.output().expect("spawn pfrsim");
    assert_eq!(
        out.status.code(),
        Some(expected_code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Drops the final column (wall-clock seconds) from every CSV line so runs can
/// be compared for bitwise determinism.
fn strip_wall_time(csv: &str) -> String {
    csv.lines()
        .map(|line| match line.rfind(',') {
            Some(idx) => &line[..idx],
            None => line,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

const TINY_DME_CONFIG: &str = r#"{
  "n": 20,
  "d": 8,
  "chunk_dim": 2,
  "trials": 3,
  "seed": 99,
  "eps_grid": [0.8],
  "budgets": [40],
  "mechanisms": ["ppr_gaussian", "csgm"]
}"#;

#[test]
fn dme_grid_emits_golden_header_and_rows() {
    let dir = scratch("dme-golden");
    let cfg = dir.join("grid.json");
    let out = dir.join("report.csv");
    let summary = dir.join("summary.json");
    write_file(&cfg, TINY_DME_CONFIG);

    run_ok(bin().args([
        "dme",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]));

    let csv = read_file(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), normalize(REPORT_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2, "one row per (mechanism, eps, budget) point");
    let expected_cols = normalize(REPORT_HEADER).split(',').count();
    for row in &rows {
        assert_eq!(row.split(',').count(), expected_cols, "row: {row}");
        assert!(row.starts_with("dme,99,"), "row: {row}");
    }
    assert!(rows[0].contains(",ppr_gaussian,"));
    assert!(rows[1].contains(",csgm,"));

    let summary: serde_json::Value = serde_json::from_str(&read_file(&summary)).unwrap();
    assert_eq!(summary["experiment"], "dme");
    assert_eq!(summary["config"]["seed"], 99);
    assert_eq!(summary["rows"].as_array().unwrap().len(), 2);
    assert!(summary["rows"][0]["mse"].as_f64().unwrap() > 0.0);
}

#[test]
fn dme_runs_are_deterministic_modulo_wall_time() {
    let dir = scratch("dme-determinism");
    let cfg = dir.join("grid.json");
    write_file(&cfg, TINY_DME_CONFIG);

    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.join(name);
        run_ok(bin().args([
            "dme",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--summary",
            dir.join("sink.json").to_str().unwrap(),
        ]));
        outputs.push(strip_wall_time(&read_file(&out)));
    }
    assert_eq!(outputs[0], outputs[1], "same config + seed must reproduce");
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = scratch("dme-seed-flag");
    let cfg = dir.join("grid.json");
    write_file(&cfg, TINY_DME_CONFIG);

    let base = dir.join("base.csv");
    let reseeded = dir.join("reseeded.csv");
    run_ok(bin().args([
        "dme",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        base.to_str().unwrap(),
        "--summary",
        dir.join("s1.json").to_str().unwrap(),
    ]));
    run_ok(bin().args([
        "dme",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "1234",
        "--out",
        reseeded.to_str().unwrap(),
        "--summary",
        dir.join("s2.json").to_str().unwrap(),
    ]));

    let base_csv = strip_wall_time(&read_file(&base));
    let reseeded_csv = strip_wall_time(&read_file(&reseeded));
    assert_ne!(base_csv, reseeded_csv, "a new seed must change the draws");
    assert!(reseeded_csv.contains("dme,1234,"), "seed column reflects the override");

    let summary: serde_json::Value =
        serde_json::from_str(&read_file(&dir.join("s2.json"))).unwrap();
    assert_eq!(summary["config"]["seed"], 1234);
}

#[test]
fn usage_errors_exit_with_code_two() {
    run_err(bin().args(["dme", "--bogus-flag", "x"]), 2);
    run_err(bin().args(["no-such-subcommand"]), 2);
}

#[test]
fn malformed_configs_are_rejected() {
    let dir = scratch("dme-bad-config");

    let unknown_key = dir.join("unknown.json");
    write_file(&unknown_key, r#"{ "eps_grid": [1.0], "budgets": [40], "wat": 3 }"#);
    let out = run_err(
        bin().args([
            "dme",
            "--config",
            unknown_key.to_str().unwrap(),
            "--out",
            dir.join("o.csv").to_str().unwrap(),
        ]),
        1,
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
    assert!(stderr.contains("unknown field"), "stderr: {stderr}");

    let not_json = dir.join("not.json");
    write_file(&not_json, "definitely not json");
    let out = run_err(
        bin().args([
            "dme",
            "--config",
            not_json.to_str().unwrap(),
            "--out",
            dir.join("o.csv").to_str().unwrap(),
        ]),
        1,
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let missing = dir.join("nonexistent.json");
    let out = run_err(
        bin().args([
            "dme",
            "--config",
            missing.to_str().unwrap(),
            "--out",
            dir.join("o.csv").to_str().unwrap(),
        ]),
        1,
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn infeasible_budget_reports_error() {
    let dir = scratch("dme-infeasible");
    let cfg = dir.join("grid.json");
    write_file(
        &cfg,
        r#"{
          "n": 10, "d": 4, "chunk_dim": 2, "trials": 2,
          "eps_grid": [1.0], "budgets": [5], "mechanisms": ["ppr_gaussian"]
        }"#,
    );
    let out = run_err(
        bin().args([
            "dme",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.join("o.csv").to_str().unwrap(),
        ]),
        1,
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("infeasible"), "stderr: {stderr}");
}

#[test]
fn dme_rejects_metric_only_mechanisms() {
    let dir = scratch("dme-wrong-mechanism");
    let cfg = dir.join("grid.json");
    write_file(
        &cfg,
        r#"{ "eps_grid": [1.0], "budgets": [40], "mechanisms": ["discrete_laplace"] }"#,
    );
    let out = run_err(
        bin().args([
            "dme",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.join("o.csv").to_str().unwrap(),
        ]),
        1,
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("metric"), "stderr: {stderr}");
}

#[test]
fn metric_emits_compressed_and_baseline_rows() {
    let dir = scratch("metric-pairs");
    let cfg = dir.join("grid.json");
    let out = dir.join("report.csv");
    write_file(
        &cfg,
        r#"{
          "n": 10, "d": 4, "chunk_dim": 2, "trials": 3, "seed": 7,
          "eps_grid": [1.0], "budgets": [30]
        }"#,
    );
    run_ok(bin().args([
        "metric",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--summary",
        dir.join("summary.json").to_str().unwrap(),
    ]));

    let csv = read_file(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), normalize(REPORT_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2, "one compressed row plus one baseline row");
    assert!(rows[0].contains(",ppr_laplace,"), "row: {}", rows[0]);
    assert!(rows[1].contains(",discrete_laplace,"), "row: {}", rows[1]);
    for row in &rows {
        assert!(row.starts_with("metric,7,"), "row: {row}");
    }
}

#[test]
fn adn_runs_presets_and_reports_domination() {
    let dir = scratch("adn-presets");
    let out = dir.join("report.csv");
    run_ok(bin().args([
        "adn",
        "--preset",
        "p2p",
        "--preset",
        "cascade",
        "--trials",
        "300",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]));

    let csv = read_file(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), normalize(ADN_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("adn,p2p,5,300,"));
    assert!(rows[1].starts_with("adn,cascade,5,300,"));
    for row in &rows {
        let dominated = row.split(',').nth(11).unwrap();
        assert_eq!(dominated, "true", "row: {row}");
    }
}

#[test]
fn adn_accepts_config_file() {
    let dir = scratch("adn-config");
    let cfg = dir.join("adn.json");
    let out = dir.join("report.csv");
    write_file(&cfg, r#"{ "presets": ["p2p"], "trials": 250, "seed": 9 }"#);
    run_ok(bin().args([
        "adn",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    let csv = read_file(&out);
    assert!(csv.lines().nth(1).unwrap().starts_with("adn,p2p,9,250,"));

    let bad = dir.join("bad.json");
    write_file(&bad, r#"{ "presets": ["no_such_preset"] }"#);
    let err = run_err(
        bin().args([
            "adn",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]),
        1,
    );
    assert!(String::from_utf8_lossy(&err.stderr).contains("error:"));
}

#[test]
fn secrecy_emits_hiding_and_wiretap_rows() {
    let dir = scratch("secrecy-rows");
    let out = dir.join("report.csv");
    run_ok(bin().args([
        "secrecy",
        "--scheme",
        "both",
        "--trials",
        "300",
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
    ]));

    let csv = read_file(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), normalize(SECRECY_HEADER));
    let rows: Vec<&str> = lines.collect();
    let hiding: Vec<&&str> = rows.iter().filter(|r| r.contains(",hiding,")).collect();
    let wiretap: Vec<&&str> = rows.iter().filter(|r| r.contains(",wiretap,")).collect();
    assert_eq!(hiding.len(), 3, "one row per reference-set attack channel");
    assert_eq!(wiretap.len(), 4, "one row per decoder/eavesdropper pair");
    for row in &rows {
        assert!(row.starts_with("secrecy,"), "row: {row}");
    }
}

#[test]
fn ppr_bench_prints_stats_to_stdout() {
    let out = run_ok(bin().args([
        "ppr-bench",
        "--alpha",
        "2.0",
        "--chunk",
        "2",
        "--eps",
        "1.0",
        "--budget",
        "40",
        "--trials",
        "10",
        "--n",
        "20",
        "--d",
        "8",
        "--seed",
        "3",
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), normalize(BENCH_HEADER));
    let row = lines.next().expect("one stats row");
    assert!(row.starts_with("2,1,10,"), "row: {row}");
}
