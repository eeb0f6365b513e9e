use std::path::Path;
use std::process::{Command, Output};

fn thermocoh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermocoh")).args(args).output().unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn bound_sweep_table() {
    let out = thermocoh(&["bound-sweep", "--energies", "0,1", "--beta", "1.0986", "--grid", "11"]);
    assert!(out.status.success());
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(table[0], ["delta_e", "beta_prime", "bound_bits", "achieved_bits", "gap", "energy_err"]);
    assert_eq!(table.len(), 12);
    assert_eq!(table[1][0], "0");
    let last = &table[11];
    assert!(last[4].parse::<f64>().unwrap().abs() <= 1e-8);
    assert_eq!(last[1], "0");
}

#[test]
fn protocol_trace() {
    let out = thermocoh(&["protocol", "--energies", "0,1,2", "--beta", "1", "--delta-e", "0.2"]);
    assert!(out.status.success());
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(table[0], ["step", "axis_j", "axis_k", "angle_rad", "coherence_bits", "energy"]);
    assert_eq!(table.len(), 4);
    for row in &table[2..] {
        let a: f64 = row[3].parse().unwrap();
        assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&a));
    }
    let max = thermocoh(&["protocol", "--energies", "0,1", "--beta", "1", "--delta-e", "max"]);
    assert!(max.status.success());
}

#[test]
fn nogo_reports_deviation() {
    let out = thermocoh(&["nogo", "--eA", "1", "--eB", "1", "--beta", "1.0986", "--delta-e", "0.2", "--attempts", "64", "--seed", "7"]);
    assert!(out.status.success());
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(table.len(), 65);
    let min = table[1..].iter().map(|r| r[1].parse::<f64>().unwrap()).fold(f64::INFINITY, f64::min);
    assert!(min > 1e-3, "{min}");
}

#[test]
fn json_output_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trade.json");
    let out = thermocoh(&[
        "tradeoff", "--subsystems", "0,1;0,1", "--beta", "1", "--grid", "3", "--seed", "2",
        "--format", "json", "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(doc["columns"][0], "delta_e");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
    let meta_path = format!("{}.meta.json", path.display());
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(Path::new(&meta_path)).unwrap()).unwrap();
    assert_eq!(meta["seed"], 2);
    assert_eq!(meta["spec"]["command"]["command"], "tradeoff");
    assert_eq!(meta["results_path"], path.to_str().unwrap());
}

#[test]
fn oracle_certify_rows() {
    let out = thermocoh(&["oracle-certify", "--energies", "0,1", "--beta", "1", "--delta-e", "0.1", "--samples", "2000", "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(table.len(), 3);
    assert_eq!(table[1][0], "unconstrained");
    assert_eq!(table[2][0], "constrained");
    for row in &table[1..] {
        assert!(row[4].parse::<f64>().unwrap() <= 1e-6);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(thermocoh(&["bound-sweep", "--energies", "0,1", "--beta", "-1"]).status.code(), Some(2));
    assert_eq!(thermocoh(&["protocol", "--energies", "0,1", "--beta", "1", "--delta-e", "5"]).status.code(), Some(2));
    assert_eq!(thermocoh(&["nogo", "--eA", "1", "--eB", "1", "--beta", "1", "--delta-e", "0.1", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        thermocoh(&["oracle-certify", "--energies", "0,1", "--beta", "1", "--delta-e", "0.1", "--samples", "3", "--window", "1e-9"]).status.code(),
        Some(3)
    );
    assert_eq!(
        thermocoh(&["bound-sweep", "--energies", "0,1", "--beta", "1", "--output", "/nonexistent/dir/x.csv"]).status.code(),
        Some(4)
    );
}
