//! End-to-end checks of the `hybridcache` binary: scenario ingestion, exit
//! codes, and the reference Z-vector sweep.

use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hybridcache")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn z_vector_sweep_reproduces_reference_table() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("table.json");
    write(
        &scenario,
        r#"{
            "K": 10, "N": 1000, "M": 100, "Z": [10,10,10,10,10,10,10,10,10,10],
            "popularity": {"zipf": 1.0},
            "sweep": {
                "axis": "z",
                "schemes": ["hybrid"],
                "vectors": [
                    [10,10,10,10,10,10,10,10,10,10],
                    [8,9,9,9,9,10,11,11,12,12],
                    [6,8,9,9,9,10,11,12,12,14],
                    [5,7,9,9,9,10,11,12,13,15],
                    [4,6,9,9,9,10,11,12,14,16],
                    [3,5,7,9,9,11,11,13,15,17],
                    [2,4,6,8,9,11,12,14,16,18],
                    [1,3,5,7,9,11,13,15,17,19],
                    [0,2,4,6,9,11,14,16,18,20],
                    [0,2,2,3,7,11,14,16,20,25],
                    [1,1,1,1,1,5,15,20,25,30]
                ]
            }
        }"#,
    );
    let out = dir.path().join("table.csv");
    let status = Command::new(bin())
        .args(["sweep", "--scenario"])
        .arg(&scenario)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 11);
    // (sigma, N1*, M1*) per row; the sigmas are reference-table values, not
    // mathematical constants.
    #[allow(clippy::approx_constant)]
    let expected: [(f64, usize, usize); 11] = [
        (0.0, 352, 37),
        (1.4142, 344, 39),
        (2.3094, 340, 40),
        (2.9059, 332, 42),
        (3.5277, 328, 43),
        (4.3461, 316, 46),
        (5.1854, 240, 40),
        (6.0553, 240, 40),
        (6.9442, 233, 43),
        (8.5894, 219, 49),
        (11.4504, 172, 52),
    ];
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|&h| h == name).unwrap();
    for (row, (sigma, n1, m1)) in rows.iter().zip(expected) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[col("sweep_axis")], "z");
        let got_sigma: f64 = fields[col("sweep_value")].parse().unwrap();
        assert!((got_sigma - sigma).abs() < 1e-3, "sigma {got_sigma} vs {sigma}");
        assert_eq!(fields[col("m1")], m1.to_string(), "row {row}");
        assert_eq!(fields[col("n1")], n1.to_string(), "row {row}");
    }
}

#[test]
fn alpha_sweep_has_dominant_hybrid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("alpha.json");
    write(
        &scenario,
        r#"{
            "K": 10, "N": 1000, "M": 100, "Z": [10,10,10,10,10,10,10,10,10,10],
            "popularity": {"zipf": 1.0},
            "sweep": {"axis": "alpha", "from": 0.5, "to": 1.6, "step": 0.1}
        }"#,
    );
    let out = dir.path().join("alpha.csv");
    let status = Command::new(bin())
        .args(["sweep", "--scenario"])
        .arg(&scenario)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|&h| h == name).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 36, "12 alphas x 3 schemes");
    // Per alpha point: hybrid first, never above either baseline.
    for chunk in rows.chunks(3) {
        let r = |row: &Vec<&str>| row[col("r")].parse::<f64>().unwrap();
        assert_eq!(chunk[0][col("scheme")], "hybrid");
        assert!(r(&chunk[0]) <= r(&chunk[1]) && r(&chunk[0]) <= r(&chunk[2]),
            "hybrid should not exceed baselines at alpha {}", chunk[0][col("sweep_value")]);
    }
}

#[test]
fn exit_code_2_on_malformed_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.json");
    write(&scenario, r#"{"K": 2, "N": 4, "M": 1, "Z": [1,1], "popularity": {"zipf": 1.0}, "oops": 1}"#);
    let status = Command::new(bin())
        .args(["optimize", "--scenario"])
        .arg(&scenario)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn exit_code_3_on_z_length_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("badz.json");
    write(&scenario, r#"{"K": 3, "N": 4, "M": 1, "Z": [1,1], "popularity": {"zipf": 1.0}}"#);
    let status = Command::new(bin())
        .args(["optimize", "--scenario"])
        .arg(&scenario)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn exit_code_4_on_oversized_grouped_search() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("big.json");
    write(
        &scenario,
        r#"{"K": 3, "N": 50, "M": 5, "Z": [1,1,1], "popularity": {"zipf": 1.0}, "scheme": "hetero"}"#,
    );
    let status = Command::new(bin())
        .args(["optimize", "--scenario"])
        .arg(&scenario)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn simulate_writes_results_meta_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("sim.json");
    write(
        &scenario,
        r#"{
            "K": 3, "N": 20, "M": 4, "Z": [2, 3, 1],
            "popularity": {"zipf": 1.0},
            "placement": {"hybrid": {"m1": 1, "n1": 10}},
            "slots": 50, "seed": 9, "trace": true
        }"#,
    );
    let out = dir.path().join("sim.csv");
    let status = Command::new(bin())
        .args(["simulate", "--scenario"])
        .arg(&scenario)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().contains("simulate,"));

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sim.csv.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["command"], "simulate");

    let trace = std::fs::read_to_string(dir.path().join("sim.csv.trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 51, "header + one row per slot");
    assert!(trace.starts_with("slot,r1,r2,r,steps,local_hits"));
}

#[test]
fn fig1_demand_override() {
    let output = Command::new(bin())
        .args(["fig1", "--demands", "AAAAAAAA,AAAA,AAAAAA"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("total r = 0.000000"), "{text}");
}

#[test]
fn analyze_with_exact_oracle_fills_exact_column() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("tiny.json");
    write(
        &scenario,
        r#"{
            "K": 2, "N": 4, "M": 2, "Z": [1, 2],
            "popularity": {"zipf": 1.0},
            "placement": {"hybrid": {"m1": 1, "n1": 3}}
        }"#,
    );
    let out = dir.path().join("tiny.csv");
    let status = Command::new(bin())
        .args(["analyze", "--scenario"])
        .arg(&scenario)
        .args(["--exact-oracle", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let row = csv.lines().nth(1).unwrap();
    let exact = row.rsplit(',').next().unwrap();
    assert!(!exact.is_empty(), "exact_r column should be filled: {row}");
    let _: f64 = exact.parse().unwrap();
}
