use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frac-orlicz"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(command: &str, config: &Path, out: &Path) -> Output {
    binary()
        .args([command, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn tilde_power_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "t.cfg", "command = tilde\nG = power(2)\nn = 1\na = 0.25, 0.5, 1, 2, 4\n");
    let o = run("tilde", &cfg, &dir.path().join("out"));
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&dir.path().join("out/tilde.csv"));
    assert_eq!(rows.len(), 5);
    for r in rows {
        let rel: f64 = r[3].parse().unwrap();
        assert!(rel <= 1e-6, "{r:?}");
    }
}

#[test]
fn tilde_without_closed_form_leaves_column_empty() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "t.cfg", "G = sum(0.5*power(2), 0.5*power(3))\nn = 2\na = 1\n");
    let o = run("tilde", &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&dir.path().join("tilde.csv"));
    assert_eq!(rows[0][2], "");
    assert!(rows[0][1].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn solve_with_zero_rhs_writes_zero_minimiser() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", "command = solve\nG = power(2)\ns = 0.5\nN = 17\ndomain = 0, 1\nrhs = 0\n");
    let o = run("solve", &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&dir.path().join("solution.csv"));
    assert_eq!(rows.len(), 17);
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() == 0.0));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    for key in ["energy=", "iterations=", "grad_norm=", "weak_residual="] {
        assert!(summary.lines().any(|l| l.starts_with(key)), "{summary}");
    }
}

#[test]
fn solve_local_problem_midpoint() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", "command = solve\nG = power(2)\ns = 1\nN = 65\ndomain = 0, 1\nrhs = 1\n");
    let o = run("solve", &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&dir.path().join("solution.csv"));
    let mid: f64 = rows[32][1].parse().unwrap();
    assert!((mid - 0.0625).abs() < 1e-4, "{mid}");
}

#[test]
fn bbm_has_extrapolated_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.cfg",
        "command = bbm\nG = power(2)\nN = 65\ns_list = 0.9,0.95,0.99\ndomain = -1,1\n",
    );
    let o = run("bbm", &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&dir.path().join("bbm.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[3][0], "EXTRAPOLATED");
    let target: f64 = rows[3][2].parse().unwrap();
    assert!((target - 2.0).abs() < 1e-12);
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.cfg",
        "command = bbm\nG = max(power(2), power(3))\nN = 33\ns_list = 0.5, 0.9\ndomain = -1,1\nu = random(5)\n",
    );
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("out{threads}"));
        let o = binary()
            .env("OF_THREADS", threads)
            .args(["bbm", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(std::fs::read(out.join("bbm.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn poincare_and_gamma_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.cfg",
        "command = poincare\nG = power(3)\nN = 33\ns_list = 0.3, 0.6, 0.9\ndomain = 0, 2\nu = random(1)\n",
    );
    let o = run("poincare", &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&dir.path().join("poincare.csv"));
    assert!(table.iter().all(|r| r[5] == "true"));

    let cfg = write_config(
        dir.path(),
        "g.cfg",
        "command = gamma\nG = power(2)\nN = 33\ns_list = 0.6, 0.9\ndomain = 0, 1\nrhs = 1\n",
    );
    let o = run("gamma", &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let table = rows(&dir.path().join("gamma.csv"));
    assert_eq!(table[0][0], "LOCAL");
    let gaps: Vec<f64> = table[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(gaps[1] < gaps[0], "{gaps:?}");
}

#[test]
fn check_on_one_function() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.cfg",
        "command = check\nG = power(2)\ntrials = 200\nfunctions = 2\nN = 33\n",
    );
    let o = run("check", &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("check.csv")).unwrap();
    assert!(text.contains("modular") && text.contains("orlicz"));
}

#[test]
fn invalid_config_exits_with_one_and_names_lines() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "command = tilde\nn = 1\nG = power(0.5)\nwarp = 3\n");
    let o = run("tilde", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("line 3") && err.contains("invalid parameter"), "{err}");
    assert!(err.contains("line 4") && err.contains("unknown key"), "{err}");
}

#[test]
fn unknown_command_in_file_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "w.cfg", "command = warp\n");
    let o = run("bbm", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown command"));
}

#[test]
fn numeric_failure_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.cfg",
        "command = solve\nG = power(3)\ns = 0.5\nN = 33\ndomain = 0, 1\nrhs = 50\nmax_iter = 1\n",
    );
    let o = run("solve", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("no convergence"));
}

#[test]
fn missing_config_file_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let o = run("bbm", &dir.path().join("absent.cfg"), dir.path());
    assert_eq!(o.status.code(), Some(1));
}
