use std::process::{Command, Output};

fn fraclim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn constants_golden_rows() {
    let o = fraclim(&["constants", "--n", "1", "--p", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(text.lines().next().unwrap(), "n,p,s,ms_constant,bbm_constant,cns_normalization");
    assert_eq!(row[3], "4.00000000000");

    let o = fraclim(&["constants", "--n", "1", "--p", "2"]);
    assert_eq!(stdout(&o).lines().nth(1).unwrap().split(',').nth(4).unwrap(), "1.00000000000");

    // c(2, ½) = ½·2·Γ(3/2)/(π·Γ(½)) = 1/(2π)
    let o = fraclim(&["constants", "--n", "2", "--s", "0.5"]);
    let c: f64 = stdout(&o).lines().nth(1).unwrap().split(',').nth(5).unwrap().parse().unwrap();
    let oracle =
        0.5 * 2.0 * statrs::function::gamma::gamma(1.5) / (std::f64::consts::PI * statrs::function::gamma::gamma(0.5));
    assert!((c - oracle).abs() < 1e-11 * oracle);
}

#[test]
fn invalid_input_exits_2_with_one_line() {
    let o = fraclim(&["energy", "--s", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert_eq!(fraclim(&["energy", "--s", "0.5", "--field", "gaussian:w=-1"]).status.code(), Some(2));
    assert_eq!(fraclim(&["perimeter", "--s", "0.5"]).status.code(), Some(2));
    assert_eq!(fraclim(&["energy", "--s", "0.5", "--budget", "10"]).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"command": "energy", "s": 0.4, "n": 2, "field": "bump:r=1",
            "potential": "potential:rotational:b=1",
            "engine": {"method": "det", "det_levels": 2, "tolerance": 1e-15}}"#,
    )
    .unwrap();
    let o = fraclim(&["--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn scan_csv_schema_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &std::path::Path| {
        vec![
            "scan".to_string(),
            "--s-grid".into(),
            "0.4,0.2,0.1".into(),
            "--potential".into(),
            "potential:oscillatory:amp=1:freq=1".into(),
            "--budget".into(),
            "50000".into(),
            "--seed".into(),
            "3".into(),
            "--shards".into(),
            "5".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    for path in [&a, &b] {
        let v = args(path);
        let o = fraclim(&v.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "s,energy,stat_error,trunc_error,scaled");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 5);
        for cell in cells {
            let v: f64 = cell.parse().unwrap();
            if v != 0.0 {
                let digits = cell.split('e').next().unwrap().chars().filter(char::is_ascii_digit).collect::<String>();
                assert_eq!(digits.trim_start_matches('0').len(), 12, "{cell}");
            }
        }
    }
}

#[test]
fn json_report_reruns_byte_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let o = fraclim(&[
        "energy",
        "--s",
        "0.3",
        "--n",
        "2",
        "--field",
        "indicator:box:lo=0,0:hi=1,0.5",
        "--potential",
        "potential:constant:a=1,0",
        "--p",
        "1",
        "--budget",
        "40000",
        "--seed",
        "8",
        "--format",
        "json",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let mut config = report["config"].clone();
    let second = dir.path().join("second.json");
    config["out"] = serde_json::Value::String(second.to_str().unwrap().into());
    let cfg_path = dir.path().join("config.json");
    std::fs::write(&cfg_path, serde_json::to_string(&config).unwrap()).unwrap();
    assert!(fraclim(&["--config", cfg_path.to_str().unwrap()]).status.success());
    let again: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&second).unwrap()).unwrap();
    assert_eq!(report["result"], again["result"]);
    assert_eq!(report["config"]["field"], "indicator:box:lo=0,0:hi=1,0.5");
}

#[test]
fn perimeter_and_audit_commands() {
    let o = fraclim(&["perimeter", "--n", "1", "--field", "indicator:box:lo=0:hi=1", "--s", "0.5", "--method", "det"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "s,cross,cross_error,interaction,interaction_error,perimeter");
    // interval of unit length: 2/(s(1 − s))
    let per: f64 = text.lines().nth(1).unwrap().split(',').nth(5).unwrap().parse().unwrap();
    assert!((per - 8.0).abs() < 1e-6);

    let o = fraclim(&["audit", "--n", "2", "--potential", "potential:rotational:b=2", "--samples", "20000"]);
    assert!(o.status.success());
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(row.starts_with("20000,0,"), "{row}");
}

#[test]
fn verify_fault_exits_1_naming_the_check() {
    let o = fraclim(&["verify", "--inject-fault", "ms-constant"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.lines().any(|l| l.starts_with("[FAIL]") && l.contains("ms-limit-gaussian")), "{err}");
}
