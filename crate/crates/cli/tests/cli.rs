// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cdcluster_cli::RunConfig;

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdcluster"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn print_config_emits_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["print-config"], dir.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let back = RunConfig::from_toml(&text).unwrap();
    assert_eq!(back, RunConfig::default().resolve().unwrap());
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "np = 6\nlambda0 = 0.4\nt_list = [3.0]\n").unwrap();
    let o = run(&["print-config", "--config", "run.toml", "--np", "4", "--t", "0.5,2"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c = RunConfig::from_toml(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!((c.np, c.lambda0), (4, 0.4));
    assert_eq!(c.t_list, vec![0.5, 2.0]);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "lambda = 1.0\n").unwrap();
    fs::write(dir.path().join("odd.toml"), "np = 5\n").unwrap();
    for args in [
        vec!["spectrum", "--lambda-grid", ""],
        vec!["cd-check", "--lambda-grid", ""],
        vec!["evolve", "--t", ""],
        vec!["evolve", "--t", "0.1,-2"],
        vec!["spectrum", "--config", "bad.toml"],
        vec!["spectrum", "--config", "odd.toml"],
        vec!["spectrum", "--config", "missing.toml"],
        vec!["cluster", "--signs", "1,1,1"],
        vec!["evolve", "--cd-mode", "fast"],
        vec!["spectrum", "--nmax", "0"],
        vec!["spectrum", "--j", "-1"],
        vec!["nonsense"],
    ] {
        let o = run(&args, dir.path());
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn oversized_step_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["evolve", "--t", "2", "--dt", "0.5", "--cd-mode", "none", "--out", "o"], dir.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn spectrum_files_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--lambda-grid", "0,0.25,0.5", "--out", "o"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("o/spectrum.csv")).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 1 + 256 + 16 + 1);
    assert_eq!(header[1], "E_full_1");
    assert_eq!(header[256], "E_full_256");
    assert_eq!(header[257], "E_vf_1");
    assert_eq!(*header.last().unwrap(), "gap_vf");
    assert_eq!(lines.count(), 3);
    let s = json(&dir.path().join("o/spectrum_summary.json"));
    assert_eq!(s["vortex_free_dim"], 16);
    assert_eq!(s["config"]["lambda_grid"].as_array().unwrap().len(), 3);
    assert!(s["gap_at_lambda0"].as_f64().unwrap() > 0.1);
}

#[test]
fn evolve_writes_one_file_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["evolve", "--t", "0.05,0.1", "--cd-mode", "all", "--out", "o"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for mode in ["none", "oracle", "analytic"] {
        for t in ["0.05", "0.1"] {
            let text = fs::read_to_string(dir.path().join(format!("o/evolve_{mode}_{t}.csv"))).unwrap();
            assert!(text.starts_with("# config: {"));
            assert!(text.contains("# status: complete"));
            let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
            assert_eq!(header, "t,lambda,fidelity,norm,energy,W_1,W_2,W_3,W_4");
        }
    }
    let s = json(&dir.path().join("o/evolve_summary.json"));
    assert_eq!(s["runs"].as_array().unwrap().len(), 6);
    assert_eq!(s["complete"], true);
    let f = |mode: &str| {
        s["runs"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["mode"] == mode && r["t_total"] == 0.1)
            .unwrap()["final_fidelity"]
            .as_f64()
            .unwrap()
    };
    assert!(f("none") < f("oracle"));
}

#[test]
fn zero_rate_gives_zero_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["cd-check", "--rate", "0", "--lambda-grid", "0.1,0.3", "--out", "o"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("o/cd_report.json"));
    for row in r["rows"].as_array().unwrap() {
        for key in ["best_fit_scale", "ground_action_error", "hermitian_residual"] {
            assert_eq!(row[key].as_f64().unwrap(), 0.0, "{key}");
        }
        assert_eq!(row["max_weight"], 0);
    }
}

#[test]
fn cosine_kernel_reports_instead_of_failing() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.toml"), "lambda_grid = [0.3]\n[convention]\nkernel = \"cosine\"\n").unwrap();
    let o = run(&["cd-check", "--config", "p.toml", "--out", "o"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("o/cd_report.json"));
    assert_eq!(r["calibration"]["ok"], false);
    assert!(r["rows"][0]["ground_action_error"].as_f64().unwrap() > 0.5);
    // the same kernel in a quench cannot be calibrated at all
    let o = run(&["evolve", "--config", "p.toml", "--t", "0.1", "--cd-mode", "analytic", "--out", "o"], dir.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn cluster_with_flipped_signs_is_another_valid_state() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["cluster", "--out", "a"], dir.path());
    assert_eq!(code(&o), 0);
    let o = run(&["cluster", "--signs", "1,-1,1,-1", "--out", "b"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let a = json(&dir.path().join("a/cluster_state.json"));
    let b = json(&dir.path().join("b/cluster_state.json"));
    assert_eq!(a["signs_source"], "measured");
    assert_eq!(b["signs_source"], "config");
    assert_eq!(b["dimension"], 1);
    assert_eq!(b["verification"]["within_tolerance"], true);
    assert_eq!(b["verification"]["stabilizers"][1]["expected"], -1);
    let amps = |v: &serde_json::Value| -> Vec<(f64, f64)> {
        v["amplitudes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| (p[0].as_f64().unwrap(), p[1].as_f64().unwrap()))
            .collect()
    };
    let (pa, pb) = (amps(&a), amps(&b));
    assert_eq!(pa.len(), 256);
    let overlap: f64 = pa.iter().zip(&pb).map(|(x, y)| x.0 * y.0 + x.1 * y.1).sum();
    assert!(overlap.abs() < 1e-12);
}

#[test]
fn same_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--t", "0.05", "--lambda-grid", "0.1,0.4", "--out", "o"];
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        for cmd in ["spectrum", "evolve", "cd-check", "cluster"] {
            let mut full = vec![cmd];
            full.extend(args);
            assert_eq!(code(&run(&full, dir.path())), 0, "{cmd}");
        }
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir.path().join("o"))
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        snapshots.push(files);
    }
    assert_eq!(snapshots[0].len(), 8);
    assert_eq!(snapshots[0], snapshots[1]);
}
