//! End-to-end exercises of the `ngrc` binary: the full
//! generate → train → forecast → sweep → report-complexity pipeline on the
//! cheap flat preset, plus the exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

use ngrc::io::{read_trajectory, read_weights};
use ngrc::ridge::ReadoutMode;

fn ngrc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ngrc"))
        .args(args)
        .current_dir(cwd)
        .env("NGRC_WORKERS", "1")
        .output()
        .expect("spawn ngrc")
}

fn assert_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn full_pipeline_on_flat_preset() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // generate: 100 MTU of the flat preset -> 40 x 10000 grid + sidecar + CSV
    let out = ngrc(
        &["generate", "--preset", "flat", "--t-record", "100", "--csv", "--out", "traj.l96t"],
        root,
    );
    assert_ok(&out, "generate");
    let grid = read_trajectory(&root.join("traj.l96t")).unwrap();
    assert_eq!((grid.n_locations(), grid.n_samples()), (40, 10000));
    assert!(root.join("traj.l96t.meta.toml").exists(), "metadata sidecar missing");
    assert!(root.join("traj.csv").exists(), "csv copy missing");

    // train: shared readout
    let out = ngrc(
        &[
            "train", "--preset", "flat", "--mode", "shared", "--alpha", "1e-5",
            "--t-train", "10", "--trajectory", "traj.l96t", "--out", "weights.ngrw",
        ],
        root,
    );
    assert_ok(&out, "train");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("d_total = 136"), "train output: {stdout}");
    assert!(stdout.contains("M = 1000"), "train output: {stdout}");
    let weights = read_weights(&root.join("weights.ngrw")).unwrap();
    assert_eq!(weights.mode, ReadoutMode::Shared);
    assert_eq!(weights.weights.ncols(), 136);

    // forecast: emits the four plot CSVs and prints a horizon in both units
    let out = ngrc(
        &[
            "forecast", "--preset", "flat", "--trajectory", "traj.l96t",
            "--weights", "weights.ngrw", "--out", "fc",
        ],
        root,
    );
    assert_ok(&out, "forecast");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("horizon:") && stdout.contains("Lyapunov"), "forecast output: {stdout}");
    for file in ["truth.csv", "predicted.csv", "nrmse.csv", "difference.csv"] {
        assert!(root.join("fc").join(file).exists(), "missing forecast artifact {file}");
    }

    // forecast with zero steps: still succeeds, horizon censored at 0
    let out = ngrc(
        &[
            "forecast", "--preset", "flat", "--trajectory", "traj.l96t",
            "--weights", "weights.ngrw", "--n-steps", "0", "--out", "fc0",
        ],
        root,
    );
    assert_ok(&out, "forecast --n-steps 0");
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 MTU (censored)"));

    // sweep: one alpha cell over a reduced trial count is still a sweep
    let out = ngrc(
        &[
            "sweep", "--axis", "alpha", "--preset", "flat", "--mode", "shared",
            "--t-train", "5", "--grid", "1e-5", "--trajectory", "traj.l96t", "--out", "sw",
        ],
        root,
    );
    assert_ok(&out, "sweep");
    let sweep_csv = std::fs::read_to_string(root.join("sw").join("sweep.csv")).unwrap();
    assert!(sweep_csv.starts_with("axis,mean,std_of_mean,n"), "sweep csv: {sweep_csv}");
    assert!(root.join("sw").join("samples.csv").exists());

    // report-complexity: both tables
    let out = ngrc(&["report-complexity", "--table", "both", "--out", "tables"], root);
    assert_ok(&out, "report-complexity");
    for file in ["complexity_small.csv", "complexity_flat.csv"] {
        assert!(root.join("tables").join(file).exists(), "missing {file}");
    }
}

#[test]
fn generate_zero_length_recording_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    let out = ngrc(
        &["generate", "--preset", "flat", "--t-record", "0", "--out", "empty.l96t"],
        dir.path(),
    );
    assert_ok(&out, "generate --t-record 0");
    let grid = read_trajectory(&dir.path().join("empty.l96t")).unwrap();
    assert_eq!((grid.n_locations(), grid.n_samples()), (40, 0));
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // config error: unknown preset
    let out = ngrc(&["generate", "--preset", "nonsense", "--t-record", "1"], root);
    assert_eq!(out.status.code(), Some(2), "unknown preset should exit 2");

    // config error: unknown sweep axis
    let out = ngrc(
        &["sweep", "--axis", "bogus", "--preset", "flat", "--trajectory", "missing.l96t"],
        root,
    );
    assert_eq!(out.status.code(), Some(2), "unknown axis should exit 2");

    // io error: missing trajectory file
    let out = ngrc(
        &["train", "--preset", "flat", "--trajectory", "missing.l96t"],
        root,
    );
    assert_eq!(out.status.code(), Some(4), "missing input should exit 4");

    // format error: corrupt magic bytes
    std::fs::write(root.join("bad.l96t"), b"XXXXgarbage").unwrap();
    let out = ngrc(
        &["train", "--preset", "flat", "--trajectory", "bad.l96t"],
        root,
    );
    assert_eq!(out.status.code(), Some(2), "corrupt magic should exit 2");
}
