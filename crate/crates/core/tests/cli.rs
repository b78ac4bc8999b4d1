use std::path::Path;
use std::process::{Command, Output};

use ideal_rings::cli::KnotRecord;
use ideal_rings::knot::fixtures::trefoil_ring;
use ideal_rings::knot::KnotClass;
use ideal_rings::polygon_io::{read_rings, ring_vertices, write_json, write_text};
use ideal_rings::Ring;
use serde_json::Value;

fn ringmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ringmc")).args(args).output().expect("ringmc runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "ringmc failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sample_round_trips_through_reader() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("rings.txt");
    let out = ringmc(&["sample", "--n", "50", "--count", "10", "--seed", "7", "--out", path_str(&file)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&file).unwrap();
    let rings = read_rings(&text).unwrap();
    assert_eq!(rings.len(), 10);
    assert!(rings.iter().all(|r| r.len() == 50));

    let json = stdout(&ringmc(&["sample", "--n", "50", "--count", "10", "--seed", "7", "--format", "json"]));
    let from_json = read_rings(&json).unwrap();
    for (a, b) in rings.iter().zip(&from_json) {
        assert_eq!(a.edges(), b.edges());
    }
    let again = stdout(&ringmc(&["sample", "--n", "50", "--count", "10", "--seed", "7"]));
    assert_eq!(again, text);
}

#[test]
fn odd_n_is_rejected_with_exit_code_2() {
    let out = ringmc(&["sample", "--n", "51"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("even"), "{err}");
    for args in [
        vec!["profile", "--count", "0"],
        vec!["converge", "--replicates", "0"],
        vec!["trefoil-study", "--tolerance", "1.5"],
        vec!["trefoil-study", "--radius-factor", "2"],
        vec!["sample", "--format", "xml"],
        vec!["sample", "--threads", "0"],
    ] {
        assert_eq!(ringmc(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn help_lists_defaults() {
    let help = stdout(&ringmc(&["trefoil-study", "--help"]));
    for needle in ["[default: 100]", "[default: 0.5]", "[default: 10]", "[default: 200]", "6n"] {
        assert!(help.contains(needle), "missing {needle} in\n{help}");
    }
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

#[test]
fn profile_csv_matches_closed_forms() {
    let n = 50usize;
    let text = stdout(&ringmc(&["profile", "--n", "50", "--count", "100000", "--seed", "7"]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(
        header,
        ["k", "e2e_mean", "e2e_se", "rg_mean", "rg_se", "analytic_e2e", "analytic_rg", "open_e2e", "open_rg"]
    );
    assert_eq!(rows.len(), n);
    let f = |s: &str| s.parse::<f64>().unwrap();
    let nf = n as f64;
    for (i, row) in rows.iter().enumerate() {
        let k = (i + 1) as f64;
        if i + 1 < n {
            assert!((f(&row[5]) - k * (nf - k) / (nf - 1.0)).abs() <= 1e-12 * nf);
        }
        let rg = (k * k - 1.0) * (2.0 * nf - k) / (12.0 * k * (nf - 1.0));
        assert!((f(&row[6]) - rg).abs() <= 1e-12 * nf);
        assert!((f(&row[7]) - k).abs() <= 1e-12);
        assert!((f(&row[8]) - (k * k - 1.0) / (6.0 * k)).abs() <= 1e-12 * nf);
    }
    assert!((f(&rows[0][1]) - 1.0).abs() <= 1e-9);
    assert!(rows[n - 1][1].is_empty());
    let mid = &rows[24];
    assert!((f(&mid[1]) - 625.0 / 49.0).abs() <= 4.0 * f(&mid[2]));
    ideal_rings::ShapeProfile::from_csv(&text).unwrap();
}

fn knots(file: &Path, extra: &[&str]) -> Vec<KnotRecord> {
    let mut args = vec!["knots", path_str(file), "--format", "json"];
    args.extend_from_slice(extra);
    stdout(&ringmc(&args)).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn knots_on_fixture_files() {
    let dir = tempfile::tempdir().unwrap();
    let regular = dir.path().join("regular.txt");
    let polys: Vec<_> = [8, 20, 50].iter().map(|&n| ring_vertices(&Ring::regular(n).unwrap())).collect();
    std::fs::write(&regular, write_text(&polys)).unwrap();
    let records = knots(&regular, &[]);
    assert_eq!(records.len(), 3);
    assert!(records.iter().all(|r| r.class == Some(KnotClass::Unknot) && r.determinant == Some(1)));
    assert!(records.iter().all(|r| r.knot_length.is_none()));

    let trefoil = dir.path().join("trefoil.json");
    std::fs::write(&trefoil, write_json(&[ring_vertices(&trefoil_ring(40).unwrap())])).unwrap();
    let records = knots(&trefoil, &["--closures", "30"]);
    assert_eq!(records[0].class, Some(KnotClass::Trefoil));
    assert_eq!(records[0].determinant, Some(3));
    let length = records[0].knot_length.as_ref().unwrap();
    assert!(length.length >= 3 && length.length <= 40);

    let csv = stdout(&ringmc(&["knots", path_str(&trefoil), "--closures", "30"]));
    let (header, rows) = csv_rows(&csv);
    assert_eq!(header, ["index", "class", "determinant", "knot_start", "knot_length"]);
    assert_eq!(rows[0][1], "trefoil");
    assert_eq!(rows[0][4], length.length.to_string());
}

#[test]
fn malformed_polygon_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "0 0 0\n1 0 0\n1 1 zero\n0 1 0\n").unwrap();
    let out = ringmc(&["knots", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":3:"), "{err}");

    std::fs::write(&bad, "0 0 0\n2 0 0\n2 2 0\n0 2 0\n").unwrap();
    let out = ringmc(&["knots", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a valid ring"));

    let missing = dir.path().join("missing.txt");
    assert_eq!(ringmc(&["knots", path_str(&missing)]).status.code(), Some(2));
}

#[test]
fn converge_smoke_run() {
    let json = stdout(&ringmc(&["converge", "--sizes", "10,100", "--replicates", "2", "--format", "json"]));
    let v: Value = serde_json::from_str(&json).unwrap();
    assert!(v["build"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
    assert_eq!(v["seed"], 1);
    assert_eq!(v["parameters"]["moves"], 150);
    let report = &v["report"];
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    assert!(report["fit"]["slope"].is_number());
    assert!(report["per_replicate_fit"]["slope"].is_number());
    assert_eq!(report["reference_slope"], -1.559);

    let csv = stdout(&ringmc(&["converge", "--sizes", "10,100", "--replicates", "2"]));
    assert!(csv.starts_with("# build: "));
    let (header, rows) = csv_rows(&csv);
    assert_eq!(header, ["size", "replicate", "mean_rg", "abs_error"]);
    assert_eq!(rows.len(), 4);
}

#[test]
fn trefoil_study_reduced_scale() {
    let json = stdout(&ringmc(&["trefoil-study", "--target", "50", "--seed", "11", "--format", "json"]));
    let v: Value = serde_json::from_str(&json).unwrap();
    let r = &v["report"];
    assert_eq!(r["complete"], true);
    assert_eq!(r["trefoils"], 50);
    for field in [
        "trefoil_mean_rg",
        "trefoil_mean_rg_se",
        "trefoil_max_e2e",
        "effective_length_rg",
        "effective_length_max_e2e",
        "mean_knot_length",
        "knot_length_se",
    ] {
        assert!(!r[field].is_null(), "{field} missing");
    }
    let rg = r["trefoil_mean_rg"].as_f64().unwrap();
    assert!(rg < r["phantom"]["ring_rg_mean"].as_f64().unwrap());
    assert_eq!(r["knots"].as_array().unwrap().len(), 50);
    let first = &r["knots"][0][1];
    for key in ["start", "length", "spectrum", "complement", "n_closures", "tolerance"] {
        assert!(!first[key].is_null(), "{key} missing");
    }
}

#[test]
fn trefoil_study_budget_exhaustion_exits_3() {
    let out = ringmc(&["trefoil-study", "--n", "8", "--target", "5", "--budget-factor", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["complete"], false);
}
