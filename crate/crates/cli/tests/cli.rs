use std::path::Path;
use std::process::{Command, Output};

fn risdoa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risdoa")).args(args).output().expect("spawn risdoa")
}

fn ok(args: &[&str]) -> String {
    let out = risdoa(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(path: &Path, text: &str) -> String {
    std::fs::write(path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["simulate", "--seed", "4", "--out", a.to_str().unwrap()]);
    ok(&["simulate", "--seed", "4", "--out", b.to_str().unwrap()]);
    for f in ["ideal.csv", "ideal.json", "impaired.csv", "impaired.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn bench_without_model_methods_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("plan.toml"), "methods = [\"fft\", \"omp\", \"crb\"]\ntrials = 3\ntiming = false\n");
    let out = dir.path().join("run");
    let table = ok(&["bench", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(table.contains("omp"));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.starts_with("method,snr_db,trial,rmse_deg,seconds"));
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenario_hash"].as_str().unwrap().len(), 64);

    let ranked = ok(&["compare", out.join("results.csv").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(ranked.contains("SNR 20 dB"));
    assert!(out.join("ranking.csv").exists());
}

#[test]
fn bench_with_denoise_methods_needs_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = risdoa(&["bench", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("model"));
}

#[test]
fn train_then_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir.path().join("plan.toml"),
        "[train]\nepochs = 3\ndataset_size = 16\nbatch_size = 8\nlearning_rate = 1e-3\n",
    );
    let out = dir.path().join("m");
    ok(&["train", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let first = std::fs::read_to_string(out.join("loss.csv")).unwrap();
    assert_eq!(first.lines().count(), 4);
    let model = out.join("model.bin");
    let more = dir.path().join("m2");
    let stdout = ok(&["train", "--config", &cfg, "--out", more.to_str().unwrap(), "--resume", model.to_str().unwrap()]);
    assert!(stdout.contains("epochs 4..6"), "{stdout}");
}

#[test]
fn bad_inputs_are_reported() {
    assert!(!risdoa(&["simulate", "--preset", "huge"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir.path().join("plan.toml"), "trials = 0\n");
    assert!(!risdoa(&["simulate", "--config", &cfg]).status.success());
    let bogus = write(&dir.path().join("r.csv"), "a,b\n1,2\n");
    assert!(!risdoa(&["compare", &bogus]).status.success());
}
