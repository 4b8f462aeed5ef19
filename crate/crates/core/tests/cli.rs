use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use netdetect::cli::num;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn netdetect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netdetect")).args(args).output().unwrap()
}

fn run_to(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    netdetect(&args)
}

/// Header plus rows as string fields.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn field<'a>(header: &[String], row: &'a [String], name: &str) -> &'a str {
    &row[header.iter().position(|h| h == name).unwrap()]
}

#[test]
fn scalar_example_simulation_matches_the_corrected_formula() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let o = run_to("simulate", &config("scalar.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = read_csv(&out);
    assert_eq!(rows.len(), 1);
    let p_hat: f64 = field(&h, &rows[0], "p_hat").parse().unwrap();
    let se: f64 = field(&h, &rows[0], "std_err").parse().unwrap();
    let analytic: f64 = field(&h, &rows[0], "analytic_pe").parse().unwrap();
    // Q(0.2 sqrt(50) / (2 sqrt(2))) for mu shift 0.2, unit variances, N = 50
    assert!((analytic - 0.308_537_538_725_986_9).abs() < 1e-12, "{analytic}");
    assert!((p_hat - analytic).abs() <= 3.0 * se, "{p_hat} vs {analytic} (se {se})");
}

#[test]
fn repeated_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let cfg = config("scalar.json");
    run_to("simulate", &cfg, &a, &["--seed", "7", "--trials", "5000"]);
    run_to("simulate", &cfg, &b, &["--seed", "7", "--trials", "5000"]);
    run_to("simulate", &cfg, &c, &["--seed", "8", "--trials", "5000"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn zero_trials_is_a_validation_error() {
    let o = netdetect(&["simulate", "--config", config("scalar.json").to_str().unwrap(), "--trials", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(netdetect(&[]).status.code(), Some(1));
    assert_eq!(netdetect(&["analyze"]).status.code(), Some(1));
    assert_eq!(netdetect(&["analyze", "--config", "x", "--trials", "many"]).status.code(), Some(1));
}

#[test]
fn ten_node_analysis_finds_the_cutset_worse() {
    let o = netdetect(&["analyze", "--config", config("ten_node_short.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    let verdicts: Vec<&str> = text.lines().filter(|l| l.starts_with("verdict")).collect();
    assert_eq!(verdicts.len(), 3, "{text}");
    assert!(verdicts.iter().all(|l| l.ends_with("=> cutset_worse")), "{verdicts:?}");
}

#[test]
fn fifty_node_ranking_puts_the_cutset_first() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rank.csv");
    let o = run_to("rank", &config("fifty_node.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = read_csv(&out);
    assert_eq!(rows.len(), 120);
    assert_eq!(field(&h, &rows[0], "is_cutset"), "true");
    assert_eq!(field(&h, &rows[0], "subset"), "22;30;38");
    assert_eq!(rows.iter().filter(|r| field(&h, r, "is_cutset") == "true").count(), 1);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(field(&h, row, "rank"), (i + 1).to_string());
        assert_eq!(field(&h, row, "label"), (120 - i).to_string());
    }
}

#[test]
fn existing_output_is_overwritten_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    std::fs::write(&out, "stale").unwrap();
    let o = run_to("toeplitz", &config("toeplitz.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("warning: overwriting"), "{err}");
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("node,gain"));
}

#[test]
fn single_node_ranking_on_the_line_follows_distance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("line.csv");
    let o = run_to("rank", &config("toeplitz.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = read_csv(&out);
    let order: Vec<&str> = rows.iter().map(|r| field(&h, r, "subset")).collect();
    assert_eq!(order, ["5", "6", "7", "8", "9", "10"]);
    let pe: Vec<f64> = rows.iter().map(|r| field(&h, r, "pe_mean").parse().unwrap()).collect();
    assert!(pe.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn toeplitz_profile_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("profile.csv");
    let o = run_to("toeplitz", &config("toeplitz.json"), &out, &[]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("strictly_decreasing"), "{text}");
    assert!(text.contains("cutset node best = true"), "{text}");
    let (h, rows) = read_csv(&out);
    let gains: Vec<f64> = rows.iter().map(|r| field(&h, r, "gain").parse().unwrap()).collect();
    assert!(gains.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn no_partition_means_no_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("plain.json");
    std::fs::write(
        &cfg,
        r#"{
  "network": {"n": 3, "edges": [[2, 1, 0.5], [3, 2, 0.5]], "inputs": "1"},
  "scenarios": [{"name": "m", "model": "mean_shift", "mu1": 1, "mu2": 0, "sigma1": 1, "sigma_v2": 0.5, "horizon": 10}],
  "sensors": ["2", "3"]
}"#,
    )
    .unwrap();
    let o = netdetect(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(!text.contains("verdict"), "{text}");
    assert!(text.contains("{2}") && text.contains("{3}"));
}

#[test]
fn malformed_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"network\": {\"n\": 2,\n  \"edges\": [[2, 1, 0.5]]\n  oops }").unwrap();
    let o = netdetect(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
    let missing = netdetect(&["analyze", "--config", dir.path().join("none.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn csv_numbers_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("analyze.csv");
    run_to("analyze", &config("ten_node_long.json"), &out, &[]);
    let (h, rows) = read_csv(&out);
    let mut seen = 0;
    for row in &rows {
        for name in ["sigma_v2", "eta_hat", "eta_asym", "r_hat", "r_asym", "pe_finite", "pe_asym"] {
            let s = field(&h, row, name);
            if s.is_empty() {
                continue;
            }
            let x: f64 = s.parse().unwrap();
            assert_eq!(num(x), s);
            seen += 1;
        }
    }
    assert!(seen > 50);
}
