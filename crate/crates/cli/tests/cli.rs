use std::path::Path;
use std::process::{Command, Output};

fn multikink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multikink")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn bad_configs_exit_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.json", r#"{"schema_version":1,"scenario":{"kind":"identities","bogus":1}}"#);
    assert_eq!(multikink(&["identities", "--config", &unknown]).status.code(), Some(2));
    let version = write(dir.path(), "b.json", r#"{"schema_version":9,"scenario":{"kind":"identities"}}"#);
    assert_eq!(multikink(&["identities", "--config", &version]).status.code(), Some(2));
    let other = write(dir.path(), "c.json", r#"{"schema_version":1,"scenario":{"kind":"collision"}}"#);
    let out = multikink(&["identities", "--config", &other]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("collision"));
    assert_eq!(multikink(&["identities", "--config", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn unstable_step_is_a_config_error() {
    assert_eq!(multikink(&["solver", "--dt", "2.0"]).status.code(), Some(2));
}

#[test]
fn report_needs_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let out = multikink(&["report", "--out", dir.path().to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no summary.json"));
}

#[test]
fn identities_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = multikink(&["identities", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("identities/summary.json").is_file());
    let rep = multikink(&["report", "--out", d]);
    assert_eq!(rep.status.code(), Some(0));
    let text = String::from_utf8_lossy(&rep.stdout);
    assert!(text.contains("identities [PASS]") && text.contains("overall PASS"));
}

#[test]
fn seeded_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"schema_version":1,"scenario":{"kind":"even-stability","alphas":[0.02,0.01],
            "shape":{"shape":"noise","offset":0,"width":4,"k_max":1.5},
            "grid":{"n":512,"length":320},"horizon":2,"output_interval":0.5}}"#,
    );
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|sub| {
            let out = dir.path().join(sub);
            let o = multikink(&["stability", "--parity", "even", "--config", &cfg, "--seed", "11", "--out", out.to_str().unwrap()]);
            assert!(matches!(o.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&o.stderr));
            out.join("even-stability")
        })
        .collect();
    for name in ["modulation_track_alpha_0.02.csv", "diagnostics_alpha_0.01.csv", "monotonicity_alpha_0.02.json"] {
        let a = std::fs::read(runs[0].join(name)).unwrap();
        let b = std::fs::read(runs[1].join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let header = std::fs::read_to_string(runs[0].join("modulation_track_alpha_0.02.csv")).unwrap();
    assert!(header.starts_with("t,x_1,x_2,c_1,c_2,z_h1"));
}
