//! Acceptance criterion 10: two runs of the full scenario suite with the
//! same seed produce byte-identical CSV reports.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_abvac")
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run_into(config: &Path, out_dir: &Path, seed: u64) -> PathBuf {
    let out = Command::new(bin())
        .args([
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            &seed.to_string(),
        ])
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "run of {} failed: {}",
        config.display(),
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_dir(out_dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .find(|p| p.extension().is_some_and(|x| x == "csv"))
        .expect("a csv report was written");
    csv
}

#[test]
fn acceptance_10_determinism() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut all_identical = true;
    let mut details = Vec::new();
    for name in ["magnetic.toml", "intermediate.toml", "electric.toml", "kernel_check.toml"] {
        let cfg = repo_config(name);
        let first = run_into(&cfg, &dir.path().join(format!("{name}.run1")), 42);
        let second = run_into(&cfg, &dir.path().join(format!("{name}.run2")), 42);
        let identical = std::fs::read(&first).unwrap() == std::fs::read(&second).unwrap();
        all_identical &= identical;
        details.push(format!("{name}: {}", if identical { "identical" } else { "DIFFERS" }));
    }
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "acceptance 10 (determinism): {} — same seed, byte-identical CSVs: {} [{elapsed:.1} s]",
        if all_identical { "PASS" } else { "FAIL" },
        details.join(", ")
    );
    assert!(all_identical);
}
