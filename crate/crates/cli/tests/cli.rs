use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_airline-recovery"))
}

fn example_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/example")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn validate_clean_example_is_silent() {
    let o = bin().arg("validate").arg(example_dir()).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
}

#[test]
fn validate_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    for e in std::fs::read_dir(example_dir()).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), dir.path().join(e.file_name())).unwrap();
    }
    let airports = dir.path().join("airports.csv");
    let text = std::fs::read_to_string(&airports).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let header: Vec<&str> = lines[0].split(',').collect();
    let col = header.iter().position(|h| *h == "min_crew_connection").unwrap();
    let mut cells: Vec<String> = lines[1].split(',').map(String::from).collect();
    cells[col] = "0".into();
    lines[1] = cells.join(",");
    std::fs::write(&airports, lines.join("\n") + "\n").unwrap();
    let o = bin().arg("validate").arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), 1);
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 1);
    assert!(out.contains("min_crew_connection"));
}

#[test]
fn bad_flags_exit_two() {
    let o = bin().arg("solve").arg("--no-such-flag").output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = bin().arg("validate").arg("/nonexistent/instance.json").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn solve_example_delays_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["solve", "--generations", "3", "--threads", "1", "--budget", "60", "--plots", "--out"])
        .arg(dir.path())
        .arg(example_dir())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("cancellations  0"), "{stdout}");
    let plan: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("plan.json")).unwrap()).unwrap();
    let kinds: Vec<String> = plan["orders"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["kind"].to_string().to_lowercase())
        .collect();
    assert!(kinds.iter().any(|k| k.contains("delay")), "{kinds:?}");
    assert!(kinds.iter().all(|k| !k.contains("cancel") && !k.contains("swap")), "{kinds:?}");
    for f in ["report.csv", "problem.svg", "solution.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }

    let svg = dir.path().join("plan.svg");
    let o = bin()
        .args(["plot", "--kind", "solution", "--plan"])
        .arg(dir.path().join("plan.json"))
        .arg("--out")
        .arg(&svg)
        .arg(example_dir())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn generate_then_bench() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("tiny.json");
    let o = bin().args(["gen-instance", "--preset", "tiny", "--seed", "3", "--out"]).arg(&json).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = bin().arg("validate").arg(&json).output().unwrap();
    assert_eq!(code(&o), 0);

    let csv = dir.path().join("bench.csv");
    let o = bin()
        .args(["bench", "--preset", "tiny", "--seeds", "1..3", "--generations", "2", "--threads", "1", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(csv).unwrap();
    assert_eq!(rows.lines().count(), 4);
    assert!(String::from_utf8(o.stdout).unwrap().contains("tiny"));
}
