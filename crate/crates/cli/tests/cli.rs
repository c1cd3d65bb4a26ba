use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cohmig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohmig"))
        .args(args)
        .output()
        .expect("spawn cohmig")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn shipped_configs_validate() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = cohmig(&["validate", path.to_str().unwrap()]);
            assert!(out.status.success(), "{}: {}", path.display(), stderr(&out));
            assert!(stderr(&out).is_empty());
            seen += 1;
        }
    }
    assert!(seen >= 4);
}

#[test]
fn validate_reports_range_error_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scenario = \"spdc\"\n[spdc]\nfwhm_um = -1\n");
    let out = cohmig(&["validate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("line 3") && err.contains("fwhm_um"), "{err}");
}

#[test]
fn validate_reports_exclusivity_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scenario = \"spdc\"\n[spdc]\n[cphase]\n");
    let out = cohmig(&["validate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr(&out).lines().count(), 1);
}

#[test]
fn run_with_bad_config_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario = \"cphase\"\n[cphase]\nwhite_noise_weight = 2\n",
    );
    let out_dir = dir.path().join("out");
    let out = cohmig(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn missing_config_exits_3() {
    let out = cohmig(&["validate", "/nonexistent/cfg.toml"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_config(dir.path(), "scenario = \"spdc\"\n[spdc]\n");
    let target = blocker.join("sub");
    let out = cohmig(&["run", &cfg, "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn conservation_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario = \"conservation\"\n[conservation]\nsamples = 10\ntolerance = 1e-40\n",
    );
    let out_dir = dir.path().join("out");
    let out = cohmig(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("conservation violated"));
}

#[test]
fn cphase_run_writes_table_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = configs_dir().join("cphase.toml");
    let out = cohmig(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = fs::read_to_string(out_dir.join("cphase_table.csv")).unwrap();
    let row: Vec<&str> = table.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(
        &row[..8],
        [
            "0.000000", "0.707107", "0.000000", "0.707107", "0.000000", "0.500000", "0.000000",
            "1.000000"
        ]
    );
    assert!(out_dir.join("cphase_curves.csv").exists());
}

#[test]
fn seed_override_changes_tomography_output_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario = \"tomo-roundtrip\"\n[tomo-roundtrip]\nstates = 3\ncounts_per_setting = 2000\n",
    );
    let run = |seed: &str, name: &str| {
        let out_dir = dir.path().join(name);
        let out = cohmig(&[
            "run",
            &cfg,
            "--seed",
            seed,
            "--out",
            out_dir.to_str().unwrap(),
            "-q",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read(out_dir.join("tomography.csv")).unwrap()
    };
    let a = run("5", "a");
    let b = run("5", "b");
    let c = run("6", "c");
    assert_eq!(a, b);
    assert_ne!(a, c);
}
