use std::fs;

use pucci_cli::{load_config, CliError, Command, RunConfig};

fn write(dir: &tempfile::TempDir, text: &str) -> std::path::PathBuf {
    let path = dir.path().join("run.json");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn minimal_constants_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load_config(&write(&dir, r#"{"command":"constants","lambda":1,"Lambda":2,"n":5}"#)).unwrap();
    assert_eq!(cfg.command, Command::Constants);
    assert_eq!((cfg.lambda, cfg.big_lambda, cfg.n), (Some(1.0), Some(2.0), Some(5)));
}

#[test]
fn subunit_power_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_config(&write(&dir, r#"{"command":"shoot","lambda":1,"Lambda":2,"n":5,"p":0.5}"#)).unwrap_err();
    assert!(matches!(err, CliError::Usage(_)), "{err}");
}

#[test]
fn pair_sources_are_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"command":"transform","pair":"texp","g":"1","f":"t","op":"phi","at":1}"#;
    let err = load_config(&write(&dir, text)).unwrap_err();
    assert!(matches!(err, CliError::Usage(_)), "{err}");
}

#[test]
fn unknown_and_foreign_keys_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = r#"{"command":"constants","lambda":1,"Lambda":2,"n":5,"bogus":1}"#;
    assert!(matches!(load_config(&write(&dir, unknown)), Err(CliError::Usage(_))));
    // A real key that means nothing to this command is not silently ignored.
    let foreign = r#"{"command":"constants","lambda":1,"Lambda":2,"n":5,"amplitude":2}"#;
    let err = load_config(&write(&dir, foreign)).unwrap_err();
    assert!(err.to_string().contains("amplitude"), "{err}");
}

#[test]
fn missing_required_field() {
    let mut cfg = RunConfig::new(Command::Eigen);
    cfg.lambda = Some(1.0);
    cfg.big_lambda = Some(1.0);
    cfg.n = Some(3);
    assert!(cfg.validate().is_err());
    cfg.radius = Some(1.0);
    cfg.validate().unwrap();
}

#[test]
fn config_roundtrips_through_json() {
    let mut cfg = RunConfig::new(Command::Scan);
    cfg.lambda = Some(1.0);
    cfg.big_lambda = Some(1.0);
    cfg.n = Some(3);
    cfg.pair = Some("proto-uniq".into());
    cfg.radius = Some(3.0);
    cfg.amplitudes = Some("0.01:100:20".into());
    let text = serde_json::to_string(&cfg).unwrap();
    let back: RunConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    back.validate().unwrap();
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_config(&write(&dir, "{\"command\":\n  \"constants\",,}")).unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
}
