use std::path::Path;
use std::process::{Command, Output};

fn orlicz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orlicz")).args(args).output().expect("run orlicz")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn luxemburg_norm_of_a_gaussian() {
    let out = orlicz(&["norm", "--space", "LA", "--A", "power(2)", "--fn", "gaussian(0,1)", "--points", "256"]);
    assert!(out.status.success(), "{out:?}");
    let v: f64 = stdout(&out).trim().parse().unwrap();
    // |e^{-x^2/2}|_2 = pi^{1/4}
    assert!((v / std::f64::consts::PI.powf(0.25) - 1.0).abs() < 1e-12, "{v}");
}

#[test]
fn config_file_supplies_flags_and_is_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# norm run\nspace = LA\na = power(2)\nfn = gaussian(0,1)\npoints = 256\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let base: f64 = stdout(&orlicz(&["--config", cfg, "norm"])).trim().parse().unwrap();
    assert!((base / std::f64::consts::PI.powf(0.25) - 1.0).abs() < 1e-12);
    let out = orlicz(&["--config", cfg, "norm", "--A", "power(4)"]);
    let over: f64 = stdout(&out).trim().parse().unwrap();
    assert_ne!(over, base);

    std::fs::write(dir.path().join("bad.cfg"), "bogus = 1\n").unwrap();
    let out = orlicz(&["--config", dir.path().join("bad.cfg").to_str().unwrap(), "norm"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn norm_reads_grid_files_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("u.csv");
    let mut text = String::from("x,value\n");
    for i in 0..64 {
        let x = -4.0 + i as f64 * 0.125;
        text.push_str(&format!("{x},{}\n", (-x * x).exp()));
    }
    std::fs::write(&grid, text).unwrap();
    let report = dir.path().join("r.json");
    let out = orlicz(&[
        "--report",
        report.to_str().unwrap(),
        "norm",
        "--space",
        "W",
        "--A",
        "power(2)",
        "--s",
        "0.5",
        "--fn",
        grid.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "norm");
    let value: f64 = stdout(&out).trim().parse().unwrap();
    assert_eq!(v["suites"][0]["checks"][0]["value"].as_f64().unwrap(), value);
    assert_eq!(v["suites"][0]["settings"]["points"], "64");
}

#[test]
fn bad_input_exits_with_two() {
    let out = orlicz(&["norm", "--space", "Q", "--A", "power(2)", "--s", "0.5", "--fn", "gaussian(0,1)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown space"));
    let out = orlicz(&["norm", "--space", "LA", "--A", "power(0.5)", "--fn", "gaussian(0,1)"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn young_eval_tabulates_the_conjugate() {
    let out = orlicz(&["young", "eval", "--A", "power(2)", "--t-min", "1", "--t-max", "4", "--count", "3"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rows.headers().unwrap().iter().collect::<Vec<_>>(), ["t", "A", "a", "A_inv", "conjugate"]);
    for row in rows.records() {
        let r: Vec<f64> = row.unwrap().iter().map(|x| x.parse().unwrap()).collect();
        let t = r[0];
        assert!((r[1] - t * t).abs() <= 1e-12 * t * t);
        assert!((r[4] - t * t / 4.0).abs() <= 1e-12 * t * t);
    }
}

#[test]
fn lp_blocks_sum_back_to_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("blocks");
    let out = orlicz(&["lp", "blocks", "--fn", "trigpoly(3,1)", "--points", "64", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let mut files: Vec<_> = std::fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(files.len() >= 2);
    let read = |p: &Path| -> Vec<f64> { csv::Reader::from_path(p).unwrap().records().map(|r| r.unwrap()[1].parse().unwrap()).collect() };
    let mut sum = vec![0.0; 64];
    for f in &files {
        for (s, v) in sum.iter_mut().zip(read(f)) {
            *s += v;
        }
    }
    let expect =
        orlicz::family::sample(orlicz::Generator::Trigpoly { degree: 3, seed: 1 }, orlicz::GridSpec { n: 1, points: 64, half_width: 8.0 })
            .unwrap();
    for (s, u) in sum.iter().zip(expect.values()) {
        assert!((s - u).abs() < 1e-10);
    }
}

#[test]
fn verify_prints_a_line_per_suite() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.csv");
    let out = orlicz(&["--format", "csv", "--report", report.to_str().unwrap(), "verify", "young-axioms", "--cases", "5"]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).starts_with("PASS young-axioms"));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("suite,kind,group"));
}
