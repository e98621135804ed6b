use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

fn mts(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mts"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MTS_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn write_dataset(dir: &Path) {
    let mut text = String::from("f1,f2,f3,label\n");
    for i in 0..90 {
        let y = i % 2;
        let shift = if y == 1 { 1.0 } else { -1.0 };
        let jitter = ((i * 37) % 17) as f64 / 8.5 - 1.0;
        let _ = writeln!(
            text,
            "{:.3},{:.3},{:.3},{}",
            shift + jitter,
            -shift + 0.5 * jitter,
            jitter,
            if y == 1 { "yes" } else { "no" }
        );
    }
    std::fs::write(dir.join("toy.csv"), text).unwrap();
}

#[test]
fn run_writes_reports_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path());
    let mut logs = Vec::new();
    for out in ["a", "b"] {
        let o = mts(
            &[
                "--seed",
                "3",
                "run",
                "--dataset",
                "toy.csv",
                "--methods",
                "hmts,dmts",
                "--output-dir",
                out,
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let log = dir.path().join(out).join("toy_seed3_decisions.csv");
        logs.push(std::fs::read(log).unwrap());
        for ext in ["md", "csv", "txt"] {
            assert!(dir.path().join(out).join(format!("toy_seed3.{ext}")).exists());
        }
    }
    assert_eq!(logs[0], logs[1]);

    let o = mts(&["inspect", "a/toy_seed3_decisions.csv", "--limit", "2"], dir.path());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("hmts"));
}

#[test]
fn theory_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = mts(&["theory-check", "--cases", "100"], dir.path());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
}

#[test]
fn errors_are_structured() {
    let dir = tempfile::tempdir().unwrap();
    let o = mts(&["run", "--dataset", "missing.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    let json = stderr.trim().strip_prefix("error: ").expect("error prefix");
    let value: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(value["kind"], "io");

    let o = mts(
        &["run", "--dataset", "missing.csv", "--methods", "nonsense"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}
