use pucci_cli::export::{export_table, table_csv, TableFormat};
use pucci_cli::{run_config, Command, RunConfig, RunRecord};
use serde_json::json;

fn record(command: Command, results: serde_json::Value) -> RunRecord {
    RunRecord { config: RunConfig::new(command), results, version: "test".into(), duration_s: 0.5, warnings: vec![] }
}

#[test]
fn constants_record_is_one_row() {
    let mut cfg = RunConfig::new(Command::Constants);
    cfg.lambda = Some(1.0);
    cfg.big_lambda = Some(2.0);
    cfg.n = Some(5);
    let (rec, _) = run_config(&cfg).unwrap();
    let text = table_csv(&[rec]).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("command,version,duration_s,"));
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    let col = header.iter().position(|h| *h == "p_s_plus").unwrap();
    assert_eq!(row[col].parse::<f64>().unwrap(), 3.0);
}

#[test]
fn empty_list_is_header_only() {
    assert_eq!(table_csv(&[]).unwrap(), "command,version,duration_s\n");
}

#[test]
fn heterogeneous_records_rejected() {
    let a = record(Command::Eigen, json!({"mu1": 1.0}));
    let b = record(Command::Eigen, json!({"mu1": 1.0, "extra": 2.0}));
    assert!(table_csv(&[a, b]).is_err());
}

#[test]
fn floats_keep_seventeen_digits_and_lf() {
    let x: f64 = 0.1 + 0.2;
    let text = table_csv(&[record(Command::Eigen, json!({"mu1": x, "nested": {"k": 3}}))]).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.starts_with("command,version,duration_s,mu1,nested.k\n"));
    let cell = text.lines().nth(1).unwrap().split(',').nth(3).unwrap();
    assert_eq!(cell.parse::<f64>().unwrap().to_bits(), x.to_bits());
    let mantissa = cell.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn array_results_give_one_row_each() {
    let rec = record(Command::Classify, json!([{"p": 2.0, "kind": "crossing"}, {"p": 3.0, "kind": "crossing"}]));
    assert_eq!(table_csv(&[rec]).unwrap().lines().count(), 3);
}

#[test]
fn json_export_is_an_array() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    export_table(&[record(Command::Eigen, json!({"mu1": 2.0}))], &path, TableFormat::Json).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["results"]["mu1"], 2.0);
    assert_eq!(v[0]["config"]["command"], "eigen");
}
