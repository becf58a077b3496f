//! End-to-end tests of the `nullgeo` binary: exit codes, document shape,
//! golden factors, and determinism of the emitted JSON.

use std::process::{Command, Output};

use serde_json::Value;

fn nullgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nullgeo"))
        .args(args)
        .output()
        .expect("spawning the nullgeo binary")
}

fn json_stdout(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).expect("stdout is a JSON document")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process exited normally")
}

#[test]
fn report_on_the_cone_carries_the_golden_factors() {
    let out = nullgeo(&[
        "report", "--surface", "cone", "--n", "2", "--grid", "5x5x5",
    ]);
    assert_eq!(exit_code(&out), 0, "report should exit 0");
    let doc = json_stdout(&out);
    assert_eq!(doc["schema"], "nullgeo/1");
    assert_eq!(doc["config"]["grid"], serde_json::json!([5, 5, 5]));
    let points = doc["per_point"].as_array().expect("per_point array");
    assert_eq!(points.len(), 125);
    for pp in points {
        let rec = &pp["classification"];
        let u = rec["point"][0].as_f64().unwrap();
        let rho = rec["rho"].as_f64().unwrap();
        let varrho = rec["varrho"].as_f64().unwrap();
        assert!((rho + 1.0).abs() < 1e-9, "rho should be -1, got {rho}");
        assert!(
            (varrho + 1.0 / (2.0 * u * u)).abs() < 1e-9,
            "varrho at u={u} should be -1/(2u^2), got {varrho}"
        );
        assert_eq!(rec["umbilic"], Value::Bool(true));
    }
}

#[test]
fn report_on_the_hyperplane_is_totally_geodesic() {
    let out = nullgeo(&["report", "--surface", "hyperplane"]);
    assert_eq!(exit_code(&out), 0);
    let doc = json_stdout(&out);
    for pp in doc["per_point"].as_array().unwrap() {
        assert_eq!(pp["verdict"], "totally geodesic");
        for row in pp["tables"]["b"].as_array().unwrap() {
            for entry in row.as_array().unwrap() {
                assert_eq!(entry.as_f64().unwrap(), 0.0, "B must vanish");
            }
        }
    }
}

#[test]
fn report_with_a_range_outside_the_domain_exits_two() {
    let out = nullgeo(&["report", "--surface", "cone", "--range", "u=0:9"]);
    assert_eq!(exit_code(&out), 2);
    assert!(!out.stderr.is_empty(), "should print a diagnostic");
}

#[test]
fn report_with_mismatched_grid_axes_exits_two() {
    let out = nullgeo(&["report", "--surface", "cone", "--grid", "9x9"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unknown_surface_exits_two() {
    let out = nullgeo(&["report", "--surface", "klein-bottle"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unknown_suite_exits_two() {
    let out = nullgeo(&["verify", "--suite", "nosuch"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn single_suite_verify_reports_its_residual() {
    let out = nullgeo(&["verify", "--surface", "cone", "--suite", "proposition"]);
    assert_eq!(exit_code(&out), 0);
    let doc = json_stdout(&out);
    let suites = doc["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["suite"], "proposition");
    assert_eq!(suites[0]["passed"], Value::Bool(true));
    for check in suites[0]["checks"].as_array().unwrap() {
        let worst = check["worst"].as_f64().unwrap();
        assert!(worst < 1e-8, "proposition residual {worst} over tolerance");
    }
}

#[test]
fn verify_runs_every_applicable_suite_on_ruled_charts() {
    for surface in ["graph", "catenoid"] {
        let out = nullgeo(&["verify", "--surface", surface]);
        assert_eq!(exit_code(&out), 0, "{surface} suites should pass");
        let doc = json_stdout(&out);
        let suites = doc["suites"].as_array().unwrap();
        assert_eq!(suites.len(), 7, "cone-only suites are filtered out");
        assert!(suites.iter().all(|s| s["passed"] == Value::Bool(true)));
    }
}

#[test]
fn sweep_of_the_cone_squares_the_leaf_parameter() {
    let out = nullgeo(&[
        "sweep", "--surface", "cone", "--values", "1,2,4", "--format", "csv",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "u,rho,varrho,psi,lambda,r2,containment_residual"
    );
    let expected = [(1.0, 1.0), (2.0, 4.0), (4.0, 16.0)];
    for ((u, r2), line) in expected.iter().zip(lines) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cells[0] - u).abs() < 1e-12);
        assert!((cells[1] + 1.0).abs() < 1e-9, "rho column");
        assert!((cells[5] - r2).abs() < 1e-9, "r2 column at u={u}");
    }
}

#[test]
fn sweep_of_the_hyperplane_is_constant_zero() {
    let out = nullgeo(&["sweep", "--surface", "hyperplane", "--format", "csv"]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        for cell in line.split(',').skip(1) {
            assert_eq!(cell.parse::<f64>().unwrap(), 0.0, "row: {line}");
        }
    }
}

#[test]
fn single_value_sweep_matches_the_report_leaf() {
    let report = json_stdout(&nullgeo(&["report", "--surface", "cone", "--grid", "2x2x2"]));
    let sweep = json_stdout(&nullgeo(&["sweep", "--surface", "cone", "--values", "2.25"]));
    let report_leaf = &report["per_leaf"][0];
    let sweep_leaf = &sweep["per_leaf"][0];
    assert_eq!(report_leaf["u"], sweep_leaf["u"]);
    for key in ["rho", "varrho", "psi", "lambda", "r2", "containment_residual"] {
        assert_eq!(
            report_leaf[key], sweep_leaf[key],
            "leaf field {key} differs between report and sweep"
        );
    }
}

#[test]
fn sweep_value_outside_the_domain_exits_two() {
    let out = nullgeo(&["sweep", "--surface", "cone", "--values", "17"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn chart_config_files_are_accepted_as_surfaces() {
    let path = std::env::temp_dir().join("nullgeo-cli-test-chart.json");
    std::fs::write(&path, r#"{"family": "cone", "n": 3}"#).unwrap();
    let out = nullgeo(&["report", "--surface", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let doc = json_stdout(&out);
    assert_eq!(doc["config"]["n"], 3);
    std::fs::remove_file(&path).ok();
}

#[test]
fn csv_report_has_one_row_per_grid_point() {
    let out = nullgeo(&[
        "report", "--surface", "cone", "--grid", "3x3x3", "--format", "csv",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 27);
    assert!(lines[0].starts_with("index,u,theta1,phi,rho,varrho,psi"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = nullgeo(&["report", "--surface", "graph", "--grid", "3x3x3"]);
    let b = nullgeo(&["report", "--surface", "graph", "--grid", "3x3x3"]);
    assert_eq!(exit_code(&a), 0);
    assert_eq!(a.stdout, b.stdout, "identical configs must emit identical bytes");
}

#[test]
fn out_flag_writes_the_document_to_a_file() {
    let path = std::env::temp_dir().join("nullgeo-cli-test-out.json");
    let out = nullgeo(&[
        "verify",
        "--surface",
        "hyperplane",
        "--suite",
        "frame",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty(), "document goes to the file");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["schema"], "nullgeo/1");
    std::fs::remove_file(&path).ok();
}
