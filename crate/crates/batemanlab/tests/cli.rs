//! Black-box tests of the command-line binary: happy paths for every
//! subcommand, deterministic reruns, and the error exits not already covered
//! by the acceptance suite.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_batemanlab"));
    c.env_remove("BATEMANLAB_THREADS");
    c
}

fn write_config(dir: &Path, name: &str, value: &serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited normally")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn simulate_config() -> serde_json::Value {
    serde_json::json!({
        "system_a": {"m": 1.0, "gamma": 0.2, "kappa": 1.0},
        "initial_state": {"xy": {"x": 1.0, "y": 0.1, "p_x": 0.0, "p_y": 0.5}},
        "integrator": {"method": "rk4", "dt": 0.01, "t_end": 1.0}
    })
}

#[test]
fn simulate_writes_trajectory_and_conservation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sim.json", &simulate_config());
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));

    let csv = read(&out_dir.join("trajectory.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# chart=xy"), "chart tag line");
    assert_eq!(lines.next(), Some("t,x,y,p_x,p_y,H,C,J2"), "header line");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 101, "0.01 steps over 1.0 give 101 samples");
    for row in &rows {
        assert_eq!(row.split(',').count(), 8, "malformed row: {row}");
    }
    let first: Vec<f64> = rows[0].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0, "first sample at t = 0");
    assert_eq!(first[1], 1.0, "x starts at the configured value");

    let report: serde_json::Value =
        serde_json::from_str(&read(&out_dir.join("conservation.json"))).unwrap();
    for key in ["H_drift", "C_drift", "J2_drift"] {
        let drift = report[key]
            .as_f64()
            .unwrap_or_else(|| panic!("{key} missing"));
        assert!(
            drift.is_finite() && drift < 1e-8,
            "{key} = {drift} over one time unit"
        );
    }
}

#[test]
fn simulate_accepts_rotated_chart_states() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "rot.json",
        &serde_json::json!({
            "system_a": {"m": 1.0, "gamma": 0.0, "kappa": 2.0},
            "initial_state": {"rot": {"x1": 0.7, "x2": 0.1, "p1": 0.0, "p2": 0.3}},
            "integrator": {"method": "rk45", "dt": 1e-10, "t_end": 2.0}
        }),
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let csv = read(&out_dir.join("trajectory.csv"));
    assert!(
        csv.starts_with("# chart=rot\nt,x1,x2,p1,p2,H,C,J2\n"),
        "rot header"
    );
    let last = csv.lines().last().unwrap();
    let t_final: f64 = last.split(',').next().unwrap().parse().unwrap();
    assert_eq!(t_final, 2.0, "adaptive run lands exactly on t_end");
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sim.json", &simulate_config());
    let mut artifacts = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = bin()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
        artifacts.push((
            std::fs::read(out_dir.join("trajectory.csv")).unwrap(),
            std::fs::read(out_dir.join("conservation.json")).unwrap(),
        ));
    }
    assert_eq!(
        artifacts[0], artifacts[1],
        "identical config must give identical bytes"
    );
}

#[test]
fn verify_algebra_reports_nineteen_relations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "alg.json",
        &serde_json::json!({
            "seed": 9,
            "system_a": {"m": 1.0, "gamma": 0.2, "kappa": 1.0},
            "system_b": {"m": 1.5, "gamma": 0.6, "kappa": 2.5},
            "algebra": {"n_points": 60}
        }),
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["verify-algebra", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .args(["--seed", "123"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));

    let report: serde_json::Value =
        serde_json::from_str(&read(&out_dir.join("bracket_report.json"))).unwrap();
    assert_eq!(report["seed"], 123, "flag overrides the config seed");
    assert_eq!(report["n_points"], 60);
    assert_eq!(report["relations"].as_array().unwrap().len(), 19);
    assert!(report["violations"].as_array().unwrap().is_empty());
    let max = report["max_residual"].as_f64().unwrap();
    assert!(max < 1e-6, "max residual {max}");
}

fn spectrum_config(grid: bool) -> serde_json::Value {
    let mut cfg = serde_json::json!({
        "system_a": {"m": 1.0, "gamma": 0.1, "kappa": 1.0},
        "spectrum": {"isotonic": {
            "n_coef": 1.0, "q_coef": 1.0, "r_coef": 1.5, "n_max": 4
        }}
    });
    if grid {
        cfg["grid"] = serde_json::json!({"r_max": 12.0, "n_points": 4000});
    }
    cfg
}

#[test]
fn spectrum_analytic_writes_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "spec.json", &spectrum_config(false));
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));

    let csv = read(&out_dir.join("spectrum.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,n_b,branch,energy"));
    let rows: Vec<&str> = lines.collect();
    // R/N = 1.5 is repulsive: only the "+" branch survives.
    assert_eq!(rows.len(), 5, "five plus-branch levels");
    for (n, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], n.to_string());
        assert_eq!(fields[2], "+");
        let e: f64 = fields[3].parse().unwrap();
        let want = 2.0 * n as f64 + 2.5;
        assert!((e - want).abs() < 1e-12, "level {n}: {e} vs {want}");
    }

    let doc: serde_json::Value =
        serde_json::from_str(&read(&out_dir.join("spectrum.json"))).unwrap();
    assert_eq!(doc["validity"], "repulsive_plus_only");
}

#[test]
fn spectrum_numeric_matches_ladder_loosely() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "spec.json", &spectrum_config(true));
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .args(["--mode", "numeric"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));

    let csv = read(&out_dir.join("oracle.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,energy"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    for (n, row) in rows.iter().enumerate() {
        let e: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        let want = 2.0 * n as f64 + 2.5;
        assert!(
            (e - want).abs() / want < 1e-2,
            "numeric level {n}: {e} vs {want}"
        );
    }
}

#[test]
fn spectrum_compare_passes_on_a_converged_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "spec.json", &spectrum_config(true));
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .args(["--mode", "compare"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let csv = read(&out_dir.join("compare.csv"));
    assert!(csv.starts_with("n,analytic,numeric,rel_dev\n"));
    assert_eq!(csv.lines().count(), 6, "header plus five levels");
}

#[test]
fn spectrum_numeric_rejects_non_isotonic_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "spec.json",
        &serde_json::json!({
            "system_a": {"m": 1.0, "gamma": 0.2, "kappa": 1.0},
            "system_b": {"m": 1.4, "gamma": 0.5, "kappa": 2.2},
            "spectrum": {"emergent": {"mu_a": 0.1, "n_max": 3}},
            "grid": {"r_max": 12.0, "n_points": 2000}
        }),
    );
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .args(["--mode", "numeric"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2, "stderr: {}", stderr_of(&out));
    assert!(
        stderr_of(&out).contains("isotonic"),
        "error should point at the supported kind"
    );
}

#[test]
fn sw_section_domain_is_checked_at_load_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sw.json",
        &serde_json::json!({
            "system_a": {"m": 1.0, "gamma": 0.1, "kappa": 1.0},
            "spectrum": {"sw": {
                "omega": 1.0, "mu_a": 0.3, "gamma_ratio": 0.5, "n_max": 3
            }}
        }),
    );
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2, "mu_a = 0.3 is outside [-1/4, 1/4]");
}

#[test]
fn asymptotic_spectrum_enumerates_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "asym.json",
        &serde_json::json!({
            "system_a": {"m": 1.0, "gamma": 0.2, "kappa": 1.0},
            "system_b": {"m": 1.4, "gamma": 0.5, "kappa": 2.2},
            "spectrum": {"asymptotic": {"n_max": 3}}
        }),
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let csv = read(&out_dir.join("spectrum.csv"));
    assert_eq!(
        csv.lines().count(),
        1 + 16,
        "header plus a 4x4 grid of levels"
    );
}

fn sweep_config() -> serde_json::Value {
    serde_json::json!({
        "seed": 31,
        "system_a": {"m": 1.0, "gamma": 0.2, "kappa": 1.0},
        "system_b": {"m": 1.4, "gamma": 0.5, "kappa": 2.2},
        "spectrum": {"emergent": {"mu_a": 0.1, "n_max": 4}}
    })
}

fn run_sweep(cfg: &Path, out_dir: &Path, threads: Option<&str>) -> Output {
    let mut cmd = bin();
    if let Some(t) = threads {
        cmd.env("BATEMANLAB_THREADS", t);
    }
    cmd.args(["sweep", "--config"])
        .arg(cfg)
        .arg("--out")
        .arg(out_dir)
        .args(["--parameter", "mu_a", "--range=-0.2,0.2", "--steps", "9"])
        .output()
        .unwrap()
}

#[test]
fn sweep_is_even_in_the_coupling_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.json", &sweep_config());

    let serial_dir = dir.path().join("serial");
    let out = run_sweep(&cfg, &serial_dir, Some("1"));
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let parallel_dir = dir.path().join("parallel");
    let out = run_sweep(&cfg, &parallel_dir, Some("4"));
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));

    let serial = std::fs::read(serial_dir.join("sweep.csv")).unwrap();
    let parallel = std::fs::read(parallel_dir.join("sweep.csv")).unwrap();
    assert_eq!(serial, parallel, "worker count must not change the bytes");

    let text = String::from_utf8(serial).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("parameter,value,n,n_b,branch,radical,energy")
    );
    #[derive(Debug)]
    struct Row {
        value: f64,
        branch: String,
        n: u32,
        radical: f64,
        energy: f64,
    }
    let rows: Vec<Row> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f[0], "mu_a");
            Row {
                value: f[1].parse().unwrap(),
                n: f[2].parse().unwrap(),
                branch: f[4].to_string(),
                radical: f[5].parse().unwrap(),
                energy: f[6].parse().unwrap(),
            }
        })
        .collect();
    // 9 sweep values, two branches of five levels each.
    assert_eq!(rows.len(), 9 * 10);
    let blocks: Vec<&[Row]> = rows.chunks(10).collect();
    for (i, block) in blocks.iter().enumerate() {
        let mirror = blocks[blocks.len() - 1 - i];
        for (a, b) in block.iter().zip(mirror.iter()) {
            assert!(
                (a.value + b.value).abs() < 1e-12,
                "sweep values should mirror: {} vs {}",
                a.value,
                b.value
            );
            assert_eq!((a.n, &a.branch), (b.n, &b.branch), "row order per block");
            assert!(
                (a.radical - b.radical).abs() < 1e-12,
                "radical must be even in the coupling: {} vs {}",
                a.radical,
                b.radical
            );
            assert!(
                (a.energy - b.energy).abs() < 1e-12,
                "levels must be even in the coupling: {} vs {}",
                a.energy,
                b.energy
            );
        }
    }
}

#[test]
fn sweep_argument_errors_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.json", &sweep_config());

    let descending = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o1"))
        .args(["--parameter", "mu_a", "--range=0.2,-0.2", "--steps", "5"])
        .output()
        .unwrap();
    assert_eq!(code(&descending), 2, "descending range");

    let no_steps = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o2"))
        .args(["--parameter", "mu_a", "--range=-0.1,0.1", "--steps", "0"])
        .output()
        .unwrap();
    assert_eq!(code(&no_steps), 2, "zero steps");

    let bad_threads = run_sweep(&cfg, &dir.path().join("o3"), Some("abc"));
    assert_eq!(code(&bad_threads), 2, "unparsable thread count");
}

#[test]
fn simulate_without_integrator_section_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bare.json",
        &serde_json::json!({
            "system_a": {"m": 1.0, "gamma": 0.1, "kappa": 1.0},
            "initial_state": {"xy": {"x": 1.0, "y": 0.0, "p_x": 0.0, "p_y": 0.0}}
        }),
    );
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2, "stderr: {}", stderr_of(&out));
    assert!(
        stderr_of(&out).contains("integrator"),
        "names the missing section"
    );
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let out = bin().arg(flag).output().unwrap();
        assert_eq!(code(&out), 0, "{flag} should succeed");
    }
    let sub_help = bin().args(["sweep", "--help"]).output().unwrap();
    assert_eq!(code(&sub_help), 0, "subcommand help should succeed");
}
