use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn znelab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_znelab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

const SMALL: &[&str] = &["--points-per-axis", "3", "--epochs", "10"];

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend_from_slice(SMALL);
    v
}

#[test]
fn staged_commands_match_run_all() {
    let root = tempfile::tempdir().unwrap();
    let (staged, whole) = (root.path().join("staged"), root.path().join("whole"));
    // Small networks keep this quick; the layer sizes come from a config file.
    let cfg = root.path().join("small.toml");
    fs::write(&cfg, "layer_sizes = [1, 16, 1]\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    for cmd in [
        "scan-ideal",
        "gen-dataset",
        "train",
        "scan-device",
        "report",
        "plot-data",
    ] {
        let out = znelab(&with_small(&[cmd, "--config", cfg]), &staged);
        assert!(
            out.status.success(),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let out = znelab(&with_small(&["run-all", "--config", cfg]), &whole);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    for name in [
        "report.json",
        "dataset.csv",
        "model.json",
        "ideal_scan.csv",
        "device_scan.csv",
        "noisy_scan_p0.03.csv",
        "comparison.csv",
        "training_curve.csv",
        "extrapolation_curves.csv",
    ] {
        assert_eq!(
            fs::read(staged.join(name)).unwrap(),
            fs::read(whole.join(name)).unwrap(),
            "{name}"
        );
    }

    let out = znelab(&with_small(&["extrapolate", "--config", cfg]), &staged);
    assert!(out.status.success());
    let ex: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(whole.join("report.json")).unwrap()).unwrap();
    assert_eq!(ex["nn"], report["nn_prediction"]);
    assert_eq!(ex["richardson"], report["baseline_richardson"]);
}

#[test]
fn flags_override_config() {
    let root = tempfile::tempdir().unwrap();
    let cfg = root.path().join("c.toml");
    fs::write(&cfg, "points_per_axis = 2\nshots = 10\nmaster_seed = 1\n").unwrap();
    let out_dir = root.path().join("o");
    let out = znelab(
        &[
            "scan-device",
            "--config",
            cfg.to_str().unwrap(),
            "--shots",
            "64",
            "--estimator",
            "paper00",
        ],
        &out_dir,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(out_dir.join("device_scan.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "grid_index,theta_0,theta_1,theta_2,theta_3,noise_p,shots,mode,expectation"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.contains(",64,sampled,")));
}

#[test]
fn scan_noisy_writes_requested_levels() {
    let root = tempfile::tempdir().unwrap();
    let out = znelab(&with_small(&["scan-noisy", "--p", "0.1,0.2"]), root.path());
    assert!(out.status.success());
    assert!(root.path().join("noisy_scan_p0.1.csv").exists());
    assert!(root.path().join("noisy_scan_p0.2.csv").exists());
    assert!(!root.path().join("noisy_scan_p0.01.csv").exists());
}

#[test]
fn exit_codes() {
    let root = tempfile::tempdir().unwrap();
    let out_dir = root.path().join("o");

    let bad = root.path().join("bad.toml");
    fs::write(&bad, "n_qubits = 2\nbogus = 1\n").unwrap();
    let out = znelab(&["run-all", "--config", bad.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let out = znelab(&["scan-ideal", "--n-qubits", "0"], &out_dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_qubits"));

    let out = znelab(&["scan-noisy", "--p", "0.9"], &out_dir);
    assert_eq!(out.status.code(), Some(2));

    let out = znelab(&["train"], &root.path().join("empty"));
    assert_eq!(out.status.code(), Some(4));

    let missing = root.path().join("missing.toml");
    let out = znelab(
        &["scan-ideal", "--config", missing.to_str().unwrap()],
        &out_dir,
    );
    assert_eq!(out.status.code(), Some(4));

    let diverge = root.path().join("diverge.toml");
    fs::write(&diverge, "layer_sizes = [1, 4, 1]\nadam_alpha = 1e300\n").unwrap();
    let out = znelab(
        &with_small(&["run-all", "--config", diverge.to_str().unwrap()]),
        &out_dir,
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("train"));
    assert!(out_dir.join("dataset.csv.partial").exists());
    assert!(!out_dir.join("report.json").exists());
}
