use std::path::Path;
use std::process::{Command, Output};

use subgamma_cli::{load_report, Outcome};

fn subgamma(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subgamma"))
        .args(args)
        .env("SUBGAMMA_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn certify_heisenberg_exits_zero_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.toml", "[certify]\nbase_points = 20\njets_per_point = 200\n");
    let o = subgamma(&["certify-cd", "--model", "heisenberg-1", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = load_report(&dir.path().join("certify-cd.json")).unwrap();
    assert!(doc.checks.iter().any(|c| c.id == "CD" && c.outcome == Outcome::Pass));
    assert!(dir.path().join("certify-cd.csv").exists());
    let shown = subgamma(&["report", &dir.path().join("certify-cd.json").display().to_string()], dir.path());
    assert_eq!(shown.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&shown.stdout).contains("COMMUTATION"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "model = \"heisenberg-1\"\nbogus = 1\n");
    assert_eq!(subgamma(&["certify-cd", "--config", &bad], dir.path()).status.code(), Some(2));
    assert_eq!(subgamma(&["certify-cd", "--model", "no-such-model"], dir.path()).status.code(), Some(2));
    // Heisenberg is not CD with positive rho1.
    let wrong = write(
        dir.path(),
        "wrong.toml",
        "[params]\nrho1 = 0.1\n[certify]\nbase_points = 20\njets_per_point = 200\n",
    );
    assert_eq!(subgamma(&["certify-cd", "--model", "heisenberg-1", "--config", &wrong], dir.path()).status.code(), Some(1));
    // An explicitly requested check whose preconditions fail is a configuration error.
    let heat = write(
        dir.path(),
        "heat.toml",
        "model = \"heisenberg-1\"\n[grid]\nh = 0.5\nextents = [[-2, 2], [-2, 2], [-1, 1]]\n[heat]\nids = [\"POINCARE\"]\nbattery = \"heisenberg\"\n",
    );
    assert_eq!(subgamma(&["heat-verify", "--config", &heat], dir.path()).status.code(), Some(2));
}

#[test]
fn runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ou.toml",
        "model = \"ornstein-uhlenbeck-1\"\n[grid]\nh = 0.1\nextents = [[-6, 6]]\n[isoperimetry]\nrandom_sets = 5\nrho0 = 1.0\n",
    );
    let mut records = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = subgamma(&["isoperimetry", "--config", &cfg, "--seed", "3", "--out", &out.display().to_string()], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        records.push(load_report(&out.join("isoperimetry.json")).unwrap().checks_json());
    }
    assert_eq!(records[0], records[1]);
}
