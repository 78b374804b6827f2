use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mockbci");

/// A small subject so each invocation stays quick.
const SMALL: &str = "laps = 1\n[synth]\ntrials_per_class = 10\n";

fn mockbci(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn mockbci")
}

fn small_config(dir: &Path) -> String {
    let p = dir.join("small.toml");
    std::fs::write(&p, SMALL).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn dump_defaults_parses_back() {
    let o = mockbci(&["dump-defaults"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cfg = mockbci::study::ExperimentConfig::from_toml(&stdout(&o)).unwrap();
    assert_eq!(cfg, mockbci::study::ExperimentConfig::default());
}

#[test]
fn bad_config_fields_exit_2_and_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "[csp]\nbogus_field = 3\n").unwrap();
    let o = mockbci(&["dump-defaults", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus_field"), "{}", stderr(&o));

    std::fs::write(&p, "[synth.beta]\nlow_hz = 12.5\nhigh_hz = 30.0\namplitude_uv = 3.0\nerd_drop = 2.0\n").unwrap();
    let o = mockbci(&["dump-defaults", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("beta.erd_drop"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mockbci(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(mockbci(&["synth", "--seed", "abc"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let o = mockbci(&["stream-sim", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "missing sessions: {}", stderr(&o));
}

fn file_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().map_or(true, |e| e != "toml"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn synth_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let cfg = small_config(d.path());
        let o = mockbci(&["synth", "--config", &cfg, "--seed", "7", "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (fa, fb) = (file_bytes(a.path()), file_bytes(b.path()));
    assert!(fa.len() >= 4);
    assert_eq!(fa, fb);
}

#[test]
fn stream_sim_passes_fails_when_tampered_and_ignores_chunking() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let sessions = dir.path().to_str().unwrap();
    let o = mockbci(&["synth", "--config", &cfg, "--out", sessions]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let mut csvs = Vec::new();
    for chunk in ["1", "256"] {
        let out = dir.path().join(format!("chunk{chunk}"));
        let o = mockbci(&[
            "stream-sim",
            "--config",
            &cfg,
            "--sessions",
            sessions,
            "--out",
            out.to_str().unwrap(),
            "--chunk-samples",
            chunk,
        ]);
        assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
        assert!(stdout(&o).starts_with("PASS"), "{}", stdout(&o));
        csvs.push(std::fs::read(out.join("stream_predictions.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);

    let out = dir.path().join("tampered");
    let o = mockbci(&["stream-sim", "--tamper", "--config", &cfg, "--sessions", sessions, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).starts_with("FAIL"), "{}", stdout(&o));
}
