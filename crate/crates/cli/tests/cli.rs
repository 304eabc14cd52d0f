use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn trajdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trajdist")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn series_csv(tracks: &[&[f64]]) -> String {
    let mut s = String::from("track_id,frame,x1\n");
    for (id, xs) in tracks.iter().enumerate() {
        for (t, x) in xs.iter().enumerate() {
            s.push_str(&format!("{},{},{x}\n", id + 1, t + 1));
        }
    }
    s
}

/// Ground truth and hypothesis of two 1-D tracks where the cheaper pairing crosses labels.
fn crossing_pair(dir: &Path) -> (String, String) {
    let gt = series_csv(&[&[-0.90, -0.78, -0.66, -0.54, -0.42, -0.30], &[-0.7, -0.42, -0.14, 0.14, 0.42, 0.70]]);
    let hyp = series_csv(&[&[-1.00, -0.64, -0.28, 0.08, 0.44, 0.80], &[-0.60, -0.56, -0.52, -0.48, -0.44, -0.40]]);
    (write(dir, "gt.csv", &gt), write(dir, "hyp.csv", &hyp))
}

fn swapped_pair(dir: &Path) -> (String, String) {
    let gt = series_csv(&[&[1.0, 0.6, 0.2, -0.2, -0.6, -1.0], &[-1.0, -0.6, -0.2, 0.2, 0.6, 1.0]]);
    let hyp = series_csv(&[&[1.0, 0.6, 0.2, 0.2, 0.6, 1.0], &[-1.0, -0.6, -0.2, -0.2, -0.6, -1.0]]);
    (write(dir, "a.csv", &gt), write(dir, "b.csv", &hyp))
}

#[test]
fn ospa_reports_value_and_association() {
    let dir = TempDir::new().unwrap();
    let (gt, hyp) = crossing_pair(dir.path());
    let out = trajdist(&["dist", &gt, &hyp, "--M", "10", "--metric", "ospa", "--association"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 1.68).abs() < 1e-9);
    assert_eq!(v["m"], 4);
    assert_eq!(v["t_horizon"], 6);
    assert_eq!(v["association"]["permutations"][0][0], 2);
    assert_eq!(v["inputs"]["ground_truth"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn each_metric_on_a_swapped_tracker() {
    let dir = TempDir::new().unwrap();
    let (a, b) = swapped_pair(dir.path());
    let value = |extra: &[&str]| {
        let mut args = vec!["dist", &a, &b, "--M", "10"];
        args.extend_from_slice(extra);
        let out = trajdist(&args);
        assert_eq!(code(&out), 0, "{extra:?}: {}", stderr(&out));
        json(&out)["value"].as_f64().unwrap()
    };
    assert!((value(&["--metric", "motp", "--thr", "0.19"])).abs() < 1e-9);
    assert!((value(&["--metric", "dnat", "--K", "count", "--alpha", "0.1", "--cap", "1e9"]) - 0.1).abs() < 1e-9);
    let simplex = value(&["--metric", "dcomp", "--alpha", "0.1", "--backend", "simplex"]);
    assert!((simplex - 0.2).abs() < 1e-9);
    let admm = value(&["--metric", "dcomp", "--alpha", "0.1"]);
    assert!((admm - simplex).abs() <= 0.01 * simplex);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let (gt, hyp) = crossing_pair(dir.path());
    let missing_m = trajdist(&["dist", &gt, &hyp, "--metric", "ospa"]);
    assert_eq!(code(&missing_m), 2);

    let bad = write(dir.path(), "bad.csv", "1,1,0.5\n1,2,oops\n");
    let out = trajdist(&["dist", &gt, &bad, "--M", "1", "--metric", "ospa"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let out = trajdist(&["dist", &gt, &hyp, "--M", "1", "--metric", "motp"]);
    assert_eq!(code(&out), 2);

    let out = trajdist(&["dist", &gt, "/nonexistent.csv", "--M", "1", "--metric", "ospa"]);
    assert_eq!(code(&out), 2);

    let out = Command::new(env!("CARGO_BIN_EXE_trajdist"))
        .args(["dist", &gt, &hyp, "--M", "1", "--metric", "ospa"])
        .env("TRAJDIST_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn oversized_exhaustive_search_points_to_the_relaxation() {
    let dir = TempDir::new().unwrap();
    let (a, b) = swapped_pair(dir.path());
    let out = trajdist(&["dist", &a, &b, "--M", "10", "--metric", "dnat", "--K", "count", "--cap", "1000"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("dcomp"), "{}", stderr(&out));
}

#[test]
fn iteration_cap_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let prefix = dir.path().join("p");
    let out = trajdist(&[
        "gen", "--n-traj", "6", "--t-horizon", "30", "--AMPnoise", "2", "--SWIdist", "5", "--seed", "4", "--out-prefix",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (gt, hyp) = (format!("{}_gt.csv", prefix.display()), format!("{}_hyp.csv", prefix.display()));
    let out = trajdist(&["dist", &gt, &hyp, "--M", "5", "--metric", "dcomp", "--alpha", "1", "--tol", "1e-9", "--max-iter", "2"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert_eq!(json(&out)["converged"], false);
}

fn gen_files(dir: &Path, name: &str, extra: &[&str]) -> (PathBuf, String, String) {
    let prefix = dir.join(name);
    let mut args = vec!["gen", "--n-traj", "5", "--t-horizon", "20", "--out-prefix", prefix.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = trajdist(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let read = |suffix: &str| std::fs::read_to_string(format!("{}{suffix}", prefix.display())).unwrap();
    let (gt, hyp) = (read("_gt.csv"), read("_hyp.csv"));
    (prefix, gt, hyp)
}

#[test]
fn generator_is_deterministic_given_a_seed() {
    let dir = TempDir::new().unwrap();
    let knobs = ["--seed", "9", "--AMPnoise", "1", "--FRAGprob", "0.1", "--DELprob", "0.2", "--SWIdist", "3"];
    let (p1, gt1, hyp1) = gen_files(dir.path(), "one", &knobs);
    let (_, gt2, hyp2) = gen_files(dir.path(), "two", &knobs);
    assert_eq!((gt1, hyp1), (gt2, hyp2));
    let cfg: Value = serde_json::from_str(&std::fs::read_to_string(format!("{}_config.json", p1.display())).unwrap()).unwrap();
    assert_eq!(cfg["seed"], 9);
    assert_eq!(cfg["del_prob"], 0.2);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "cfg.json", r#"{"n_traj": 3, "t_horizon": 15, "seed": 21, "amp_noise": 0.5}"#);
    let prefix = dir.path().join("c");
    let out = trajdist(&["gen", "--config", &config, "--t-horizon", "16", "--out-prefix", prefix.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let echoed: Value = serde_json::from_slice(&out.stdout).unwrap();
    let cfg: Value = serde_json::from_str(&std::fs::read_to_string(format!("{}_config.json", prefix.display())).unwrap()).unwrap();
    assert_eq!(echoed, cfg);
    assert_eq!(cfg["n_traj"], 3);
    assert_eq!(cfg["t_horizon"], 16);
    assert_eq!(cfg["seed"], 21);
    assert_eq!(cfg["amp_noise"], 0.5);

    let unknown = write(dir.path(), "bad.json", r#"{"n_trajectories": 3}"#);
    let out = trajdist(&["gen", "--config", &unknown, "--out-prefix", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn deleting_every_point_leaves_an_empty_hypothesis() {
    let dir = TempDir::new().unwrap();
    let (_, gt, hyp) = gen_files(dir.path(), "d", &["--seed", "1", "--DELprob", "1"]);
    assert!(gt.lines().count() > 1);
    assert_eq!(hyp.lines().count(), 1, "{hyp}");
}

#[test]
fn tradeoff_csv_and_its_auc() {
    let dir = TempDir::new().unwrap();
    let (a, b) = swapped_pair(dir.path());
    let out = trajdist(&["tradeoff", &a, &b, "--M", "10", "--alphas", "0.01,0.1,1,10"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,dist,swi,on_hull");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("# auc="));

    let curve = write(dir.path(), "curve.csv", &text);
    let out = trajdist(&["auc", "--curve", &curve, "--max-dist", "28.8", "--max-swi", "10"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let auc = json(&out)["auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));

    let out = trajdist(&["tradeoff", &a, &b, "--M", "10", "--kind", "motp"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("thr,dist,swi,on_hull\n"));

    let out = trajdist(&["tradeoff", &a, &b, "--M", "10", "--alphas", "1,0.1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn pair_auc_of_identical_sets_is_zero() {
    let dir = TempDir::new().unwrap();
    let (a, _) = swapped_pair(dir.path());
    let out = trajdist(&["auc", &a, &a, "--M", "10"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert!(v["auc_comp"].as_f64().unwrap().abs() < 1e-9);
    assert!(v["auc_motp"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn small_sweep_prints_one_row_per_value() {
    let out = trajdist(&[
        "auc", "--M", "10", "--sweep", "del-prob", "--values", "0,0.5", "--repeats", "2", "--n-traj", "3", "--t-horizon", "12",
        "--seed", "2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# seed=2");
    assert!(lines[1].starts_with("knob,value,n,"));
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("del_prob,0,2,"));
}

#[test]
fn verify_suites_report_and_exit_cleanly() {
    let out = trajdist(&["verify", "--suite", "counterexamples"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    for name in ["motp-triangle", "motp-switch", "maxcount-composition", "maxcount-triangle"] {
        assert!(text.lines().any(|l| l.starts_with("PASS") && l.contains(name)), "{text}");
    }
    let out = trajdist(&["verify", "--suite", "norm", "--norm-samples", "200", "--json"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let v = json(&out);
    let statuses: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["status"].as_str().unwrap()).collect();
    assert!(statuses.contains(&"expected_fail"), "{statuses:?}");
}
