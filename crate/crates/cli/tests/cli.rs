use std::path::Path;
use std::process::{Command, Output};

fn cclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cclab"))
        .args(args)
        .env_remove("CCLAB_THREADS")
        .output()
        .expect("spawn cclab")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("valid json")
}

const SMALL_SCAN: &[&str] = &[
    "scan",
    "--n",
    "3",
    "--epsilon-frac",
    "0.5",
    "--balls",
    "24",
    "--points",
    "30",
];

#[test]
fn dimension_below_three_is_a_validation_error() {
    let out = cclab(&["fowler", "--n", "2", "--epsilon", "0.1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("n must be >= 3"));
}

#[test]
fn unknown_flags_are_rejected() {
    let out = cclab(&["fowler", "--n", "3", "--epsilon", "0.1", "--colour", "red"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn epsilon_and_fraction_are_exclusive() {
    let out = cclab(&[
        "fowler",
        "--n",
        "3",
        "--epsilon",
        "0.1",
        "--epsilon-frac",
        "0.5",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn epsilon_above_equilibrium_is_rejected() {
    let out = cclab(&["fowler", "--n", "3", "--epsilon", "5.0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn help_lists_exit_codes() {
    let out = cclab(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["Exit codes", "hypothesis violated", "positivity failure"] {
        assert!(text.contains(needle), "missing {needle:?}");
    }
}

#[test]
fn cylinder_orbit_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cyl.csv");
    let out = cclab(&[
        "fowler",
        "--n",
        "4",
        "--epsilon-frac",
        "1.0",
        "--t-max",
        "50",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let summary = json(&out.stdout);
    assert!(summary["period"].is_null());
    let v0 = summary["v0"].as_f64().unwrap();
    let mut rows = 0;
    for line in std::fs::read_to_string(&csv).unwrap().lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - v0).abs() < 1e-10 && cols[2].abs() < 1e-10);
        rows += 1;
    }
    assert_eq!(rows, 50_001);
}

#[test]
fn fowler_csv_uses_seventeen_digits() {
    let out = cclab(&[
        "fowler",
        "--n",
        "3",
        "--epsilon-frac",
        "0.5",
        "--t-max",
        "0.01",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,v,w,H"));
    let first = lines.next().unwrap();
    let v = first.split(',').nth(1).unwrap();
    let mantissa = v.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{v}");
    // summary goes to stderr when the CSV takes stdout
    assert!(json(&out.stderr)["period"].as_f64().unwrap() > 0.0);
}

#[test]
fn scan_output_is_identical_across_thread_counts_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "8", "1"] {
        let path = dir.path().join(format!("scan{}.json", outputs.len()));
        let mut args = vec!["--threads", threads];
        args.extend_from_slice(SMALL_SCAN);
        args.extend(["--out", path.to_str().unwrap()]);
        assert_eq!(code(&cclab(&args)), 0);
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let report = json(&outputs[0]);
    assert_eq!(report["balls"].as_array().unwrap().len(), 24);
    assert!(report["global_min_h"].as_f64().unwrap() > 0.0);
    assert_eq!(report["seed"], 42);
}

#[test]
fn thread_count_from_environment() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_cclab"))
            .args(SMALL_SCAN)
            .env("CCLAB_THREADS", threads)
            .output()
            .unwrap()
    };
    let (a, b) = (run("2"), run("5"));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cylinder_scan_is_convex() {
    let out = cclab(&["scan", "--n", "3", "--epsilon-frac", "1.0", "--seed", "42"]);
    assert_eq!(code(&out), 0);
    let report = json(&out.stdout);
    assert!(report["global_min_h"].as_f64().unwrap() > 0.0);
    assert_eq!(report["balls"].as_array().unwrap().len(), 200);
}

#[test]
fn different_seeds_sample_different_balls() {
    let mut a = SMALL_SCAN.to_vec();
    a.extend(["--seed", "1"]);
    let mut b = SMALL_SCAN.to_vec();
    b.extend(["--seed", "2"]);
    assert_ne!(cclab(&a).stdout, cclab(&b).stdout);
}

#[test]
fn ascending_phase_fails_the_hypotheses() {
    // t0 = 1 lies on the rising half of the n = 3, ε = v0/2 orbit
    let out = cclab(&[
        "scan",
        "--n",
        "3",
        "--epsilon-frac",
        "0.5",
        "--t0",
        "1.0",
        "--balls",
        "4",
    ]);
    assert_eq!(code(&out), 4);
    assert!(out.stdout.is_empty());

    let out = cclab(&[
        "scan",
        "--n",
        "3",
        "--epsilon-frac",
        "0.5",
        "--t0",
        "1.0",
        "--balls",
        "4",
        "--override-hypotheses",
    ]);
    assert_eq!(code(&out), 4);
    assert_eq!(json(&out.stdout)["balls"].as_array().unwrap().len(), 4);
}

#[test]
fn scan_csv_has_one_row_per_ball() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("balls.csv");
    let mut args = SMALL_SCAN.to_vec();
    args.extend(["--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&cclab(&args)), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("index,c1,c2,c3,radius,min_h,a1,a2,a3\n"));
    assert_eq!(text.lines().count(), 25);
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn config_file_supplies_command_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "# small scan\ncommand = scan\nn = 3\nepsilon_frac = 0.5\nballs = 24\npoints = 30\n",
    );
    let from_file = cclab(&["--config", &cfg]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, cclab(SMALL_SCAN).stdout);
}

#[test]
fn command_line_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "command = scan\nn = 3\nepsilon_frac = 0.5\nballs = 24\npoints = 30\n",
    );
    let out = cclab(&["--config", &cfg, "--balls", "5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out.stdout)["balls"].as_array().unwrap().len(), 5);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "command = scan\nn = 3\nepsilon_frac = 0.5\nradius = 2\n",
    );
    assert_eq!(code(&cclab(&["--config", &cfg])), 2);
}

#[test]
fn period_table_approaches_linear_limit() {
    let out = cclab(&["period-table", "--n", "3,5", "--fractions", "0.5,0.999"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for r in rows.iter().filter(|r| r[1] == 0.999) {
        assert!((r[3] - r[4]).abs() / r[4] < 1e-3, "{r:?}");
    }
    // period grows as the orbit moves away from the equilibrium
    assert!(rows[0][3] > rows[1][3]);
}

#[test]
fn kelvin_check_fixtures_pass() {
    for fixture in ["bubble", "cylinder", "fowler"] {
        let out = cclab(&[
            "kelvin-check",
            "--fixture",
            fixture,
            "--n",
            "4",
            "--points",
            "40",
        ]);
        assert_eq!(code(&out), 0, "{fixture}");
        let r = json(&out.stdout);
        assert_eq!(r["kind"], fixture);
        assert!(r["max_analytic"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn symmetric_moving_plane_fixture_stops_at_the_symmetry_plane() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("w.csv");
    let out = cclab(&[
        "moving-planes",
        "--fixture",
        "symmetric",
        "--field-csv",
        field.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out.stdout);
    let plane = r["expected_plane"].as_f64().unwrap();
    let lambda0 = r["step"]["search"]["lambda0"].as_f64().unwrap();
    assert!((lambda0 - plane).abs() < 1e-3);
    assert_eq!(r["step"]["branch"], "symmetric");
    let text = std::fs::read_to_string(&field).unwrap();
    assert!(text.starts_with("x1,x2,x3,w\n"));
    assert!(text.lines().count() > 1000);
}
