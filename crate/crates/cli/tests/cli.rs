use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kgpoint_cli::config::RunConfig;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn kgpoint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgpoint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn zero_text() -> String {
    std::fs::read_to_string(configs().join("zero.toml")).unwrap()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records()
        .map(|rec| rec.unwrap()[idx].parse().unwrap())
        .collect()
}

#[test]
fn zero_data_gives_zero_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("zero.toml");
    let out = kgpoint(&[
        "simulate",
        "--quiet",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let traj = dir.path().join("trajectory.csv");
    for col in ["re_zeta", "im_zeta", "abs_zeta", "re_lambda", "im_lambda"] {
        assert!(column(&traj, col).iter().all(|&x| x == 0.0), "{col}");
    }
    let dist = column(&dir.path().join("attraction.csv"), "dist");
    assert_eq!(dist.len(), 5);
    assert!(dist.iter().all(|&x| x == 0.0));
    assert!(dir.path().join("field_10.csv").exists());
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(s["schema_version"], 1);
    assert_eq!(s["status"], "ok");
    assert_eq!(s["sup_abs_zeta"], 0.0);
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg_dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("perturbed-soliton.toml"))
        .unwrap()
        .replace("t_final = 200.0", "t_final = 40.0")
        .replace(
            "snapshot_times = [0.0, 50.0, 200.0]",
            "snapshot_times = [20.0]",
        )
        .replace(
            "spectrum_windows = [[0.0, 150.0], [25.0, 175.0], [50.0, 200.0]]",
            "spectrum_windows = []",
        )
        .replace("sample_every = 10.0", "sample_every = 20.0")
        .replace("r_out = 60.0", "r_out = 20.0");
    let cfg = write(cfg_dir.path(), "short.toml", &text);
    for d in [&a, &b] {
        let out = kgpoint(&[
            "simulate",
            "--quiet",
            "--threads",
            "3",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 6);
    for n in names {
        if n == "timing.json" {
            continue;
        }
        let x = std::fs::read(a.path().join(&n)).unwrap();
        let y = std::fs::read(b.path().join(&n)).unwrap();
        assert!(x == y, "{n:?} differs");
    }
}

#[test]
fn degree_one_potential_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        &zero_text().replace("potential = [0.0, -1.0, 1.0]", "potential = [0.0, 1.0]"),
    );
    let out = kgpoint(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N >= 2"));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        &zero_text().replace("dt = 0.05", "dt = 0.05\nstep_size = 0.1"),
    );
    let out = kgpoint(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step_size"));
}

#[test]
fn missing_config_is_a_config_error() {
    let out = kgpoint(&["soliton-scan", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_round_trip() {
    for name in ["zero.toml", "soliton.toml", "perturbed-soliton.toml"] {
        let cfg = RunConfig::load(&configs().join(name)).unwrap();
        let once = cfg.to_toml();
        let back = RunConfig::parse(&once).unwrap();
        assert_eq!(back, cfg, "{name}");
        assert_eq!(back.to_toml(), once, "{name}");
        assert_eq!(back.hash(), cfg.hash());
    }
}

#[test]
fn kernels_pass_for_other_mass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "k.toml",
        &zero_text().replace("m = 1.0", "m = 2.5"),
    );
    let out = kgpoint(&[
        "verify-kernels",
        "--quiet",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).matches("PASS").count(),
        4
    );
}

#[test]
fn corrupted_tolerance_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{}\n[kernels]\nk_hat_transform = 1e-20\nl_hat_limit = 1e-20\nj1_series = 1e-20\nj1_derivative_identity = 1e-20\n", zero_text());
    let cfg = write(dir.path(), "k.toml", &text);
    let out = kgpoint(&["verify-kernels", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn scan_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("zero.toml");
    let out = kgpoint(&[
        "soliton-scan",
        "--quiet",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let p = dir.path().join("soliton_scan.csv");
    let (w, q, res) = (column(&p, "omega"), column(&p, "q"), column(&p, "residual"));
    assert_eq!(w.len(), 201);
    let mid = w.iter().position(|&x| x == 0.0).unwrap();
    assert!((q[mid] - 0.5f64.sqrt()).abs() < 1e-10);
    assert!(res.iter().all(|&r| r <= 1e-10));
    assert!((w[0] + 0.999).abs() < 1e-12 && (w[200] - 0.999).abs() < 1e-12);
    assert!(w.iter().all(|x| x.abs() < 1.0));
}

#[test]
fn blow_up_writes_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("perturbed-soliton.toml"))
        .unwrap()
        .replace("t_final = 200.0", "t_final = 20.0\nblowup_threshold = 0.71")
        .replace("snapshot_times = [0.0, 50.0, 200.0]", "snapshot_times = []")
        .replace(
            "spectrum_windows = [[0.0, 150.0], [25.0, 175.0], [50.0, 200.0]]",
            "spectrum_windows = []",
        )
        .replace("sample_every = 10.0", "sample_every = 0.0");
    let cfg = write(dir.path(), "b.toml", &text);
    let out_dir = dir.path().join("out");
    let out = kgpoint(&[
        "simulate",
        "--quiet",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(s["status"], "numerical_fault");
    assert!(s["t_end"].as_f64().unwrap() < 20.0);
    assert!(!column(&out_dir.join("trajectory.csv"), "t").is_empty());
}

#[test]
fn spectrum_verb_recomputes_windows() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("soliton.toml"))
        .unwrap()
        .replace("sample_every = 10.0", "sample_every = 0.0")
        .replace("snapshot_times = [0.0, 50.0]", "snapshot_times = []");
    let cfg = write(dir.path(), "s.toml", &text);
    let run = dir.path().join("run");
    let out = kgpoint(&[
        "simulate",
        "--quiet",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        run.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let again = dir.path().join("again");
    let input = run.join("trajectory.csv");
    let out = kgpoint(&[
        "spectrum",
        "--quiet",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        std::fs::read(run.join("spectrum_0.csv")).unwrap(),
        std::fs::read(again.join("spectrum_0.csv")).unwrap()
    );
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    let t: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(again.join("spectrum_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(s["windows"], t["windows"]);
    // the bundled soliton run recovers its own dispersion relation
    assert!(s["qsol_residual"].as_f64().unwrap() <= 1e-2);
    assert!((s["omega_hat"].as_f64().unwrap() - 0.5).abs() <= 2.0 * std::f64::consts::PI / 150.0);
}
