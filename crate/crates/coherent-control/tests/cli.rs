//! End-to-end checks of the `bellman` binary: exit-code contract, fixture
//! round trips and the `BELLMAN_THREADS` reproducibility guarantee.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bellman"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[test]
fn verify_fixture_exit_codes() {
    let ok = bin().arg("verify").arg(fixture("box_picking.sys")).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let out = String::from_utf8_lossy(&ok.stdout);
    assert!(out.contains("PASS") && out.contains("7/6"));

    let bad = bin()
        .arg("verify")
        .arg(fixture("box_picking_classical.sys"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let out = String::from_utf8_lossy(&bad.stdout);
    assert!(out.contains("FAIL"));
    assert!(out.contains("4/3"), "witness values must be printed:\n{out}");

    let empty = bin().arg("verify").arg(fixture("empty_controls.sys")).output().unwrap();
    assert_eq!(empty.status.code(), Some(0));
    let out = String::from_utf8_lossy(&empty.stdout);
    assert!(out.contains("-inf"));
}

#[test]
fn verify_rejects_garbage_with_usage_exit() {
    let dir = std::env::temp_dir().join("bellman-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.sys");
    std::fs::write(&path, "{ this is not json").unwrap();
    let out = bin().arg("verify").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line") && err.contains("column"), "{err}");
}

#[test]
fn galmarino_small_campaign_and_empty_campaign() {
    let out = bin()
        .args(["galmarino", "--campaign", "40", "--seed", "7"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let empty = bin().args(["galmarino", "--campaign", "0"]).output().unwrap();
    assert_eq!(empty.status.code(), Some(0));
}

#[test]
fn verify_lemma_cases_pass() {
    for case in ["a", "b"] {
        let out = bin().args(["mc", "verify-lemma", "--case", case]).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "case {case}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
}

#[test]
fn bellman_threads_does_not_change_estimates() {
    let run = |threads: &str| {
        let out = bin()
            .env("BELLMAN_THREADS", threads)
            .args([
                "mc", "poisson", "--alpha", "1", "--t", "0.6931", "--paths", "4000", "--seed",
                "3",
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        String::from_utf8_lossy(&out.stdout).into_owned()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn example_box_picking_passes() {
    let out = bin().args(["example", "box-picking"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("7/6"));
    assert!(text.contains("E W*_1 = 4/3"));
}
