use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use escape_lab::{scenario_dir, RunSummary};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_escape-lab"))
}

fn shipped(name: &str) -> String {
    std::fs::read_to_string(scenario_dir().join(name)).unwrap()
}

/// The free scenario with short ladders. The propagation grid stays at full size:
/// on smaller boxes the filtered seed already has boundary mass above the trust threshold.
fn tiny() -> String {
    let text = shipped("free_particle.cfg");
    let start = text.find("[baseline]").unwrap();
    let end = text.find("[[seeds]]").unwrap();
    let text = format!("{}{}", &text[..start], &text[end..]);
    text.replace("half_width = 16.0\npoints = 256", "half_width = 12.0\npoints = 96")
        .replace("half_width = 64.0\npoints = 512", "half_width = 24.0\npoints = 128")
        .replace("s = [8.0, 16.0, 32.0, 64.0]", "s = [2.0, 3.0, 4.0, 5.0]")
        .replace("eta = [0.25, 0.125, 0.0625]", "eta = [1.0, 0.5, 0.25]")
        .replace("times = [2.0, 5.0, 10.0]", "times = [1.0, 2.0]")
        .replace("horizon = 40.0", "horizon = 8.0")
        .replace("ruelle_radius = 10.0", "ruelle_radius = 6.0")
        .replace("dir = \"free_particle\"", "dir = \"tiny\"")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(cfg: &Path, out: &Path) -> Output {
    bin().arg("run").arg(cfg).env("ESCAPE_LAB_OUTPUT", out).output().unwrap()
}

#[test]
fn validate_accepts_shipped_scenarios() {
    for name in ["free_particle.cfg", "lorentz_well.cfg"] {
        let out = bin().arg("validate").arg(scenario_dir().join(name)).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = shipped("free_particle.cfg").replace("n_max = 4", "n_max = 4\npotental = 3");
    let cfg = write(dir.path(), "bad.cfg", &text);
    for cmd in ["validate", "run"] {
        let out = bin().arg(cmd).arg(&cfg).env("ESCAPE_LAB_OUTPUT", dir.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("potential.potental"));
    }
    let out = bin().arg("validate").arg(dir.path().join("missing.cfg")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn list_scenarios_names_both_files() {
    let out = bin().arg("list-scenarios").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("free_particle.cfg") && text.contains("lorentz_well.cfg"), "{text}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tiny.cfg", &tiny());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ra = run(&cfg, &a);
    let rb = run(&cfg, &b);
    assert!(matches!(ra.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&ra.stderr));
    assert_eq!(ra.status.code(), rb.status.code());
    let mut files: Vec<_> = std::fs::read_dir(a.join("tiny")).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    assert!(files.iter().any(|f| f == "summary.json") && files.iter().any(|f| f == "thm11.csv"));
    for f in files.iter().filter(|f| *f != "timings.json") {
        let x = std::fs::read(a.join("tiny").join(f)).unwrap();
        let y = std::fs::read(b.join("tiny").join(f)).unwrap();
        assert!(x == y, "{f:?} differs between runs");
    }
    let text = std::fs::read_to_string(a.join("tiny/summary.json")).unwrap();
    let summary = RunSummary::from_json(&text).unwrap();
    assert_eq!(summary.to_json(), text);
    assert_eq!(summary.certificate.as_ref().unwrap().theta.0, 2.0);
    let csv = std::fs::read_to_string(a.join("tiny/thm11.csv")).unwrap();
    assert!(csv.starts_with("series,x,y\n"));
    let report = std::fs::read_to_string(a.join("tiny/report.txt")).unwrap();
    assert_eq!(report.lines().filter(|l| l.ends_with("PASS") || l.ends_with("FAILED")).count(), summary.checks.len());
}

#[test]
fn stage_failure_is_a_runtime_error_with_failed_rows() {
    let dir = tempfile::tempdir().unwrap();
    // a seed centred far outside the box has no amplitude on the grid
    let text = tiny().replace("center = 0.0\nmomentum = 1.7", "center = 1000.0\nmomentum = 1.7");
    assert_ne!(text, tiny());
    let cfg = write(dir.path(), "dead.cfg", &text);
    let out = run(&cfg, dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = RunSummary::from_json(&std::fs::read_to_string(dir.path().join("tiny/summary.json")).unwrap()).unwrap();
    let failure = summary.failure.as_ref().unwrap();
    assert_eq!(failure.stage, "certify");
    assert!(failure.error.contains("norm"), "{}", failure.error);
    assert!(!summary.passed);
    let report = std::fs::read_to_string(dir.path().join("tiny/report.txt")).unwrap();
    for stage in ["certify", "thm11", "dynamics"] {
        assert!(report.lines().any(|l| l.starts_with(stage) && l.ends_with("FAILED")), "{stage}\n{report}");
    }
}
