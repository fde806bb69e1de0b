use std::process::{Command, Output};

use qufti_cli::ScenarioSpec;

fn qufti(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qufti"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn qcrb_closed_form() {
    let out = stdout(&qufti(&["qcrb", "--modes", "4", "--num-phases", "3"]));
    assert_eq!(out, "m,d,k,qcrb[per_measurement]\n4,3,1,0.75\n");
}

#[test]
fn scenario_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, r#"{"m":3,"d":2}"#).unwrap();
    let out = stdout(&qufti(&[
        "qcrb",
        "--modes",
        "4",
        "--num-phases",
        "3",
        "--k",
        "1",
        "--scenario",
        path.to_str().unwrap(),
    ]));
    assert_eq!(rows(&out), vec![vec!["3", "2", "1", "0.5"]]);
}

#[test]
fn exit_codes() {
    assert_eq!(
        qufti(&["qcrb", "--modes", "3", "--num-phases", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(qufti(&["qcrb", "--num-phases", "3"]).status.code(), Some(2));
    assert_eq!(qufti(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        qufti(&["cfi", "--modes", "3", "--num-phases", "2"])
            .status
            .code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"m":4,"d":3,"colour":"red"}"#).unwrap();
    let out = qufti(&["qcrb", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let missing = dir.path().join("missing.json");
    assert_eq!(
        qufti(&["qcrb", "--scenario", missing.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );
    let unwritable = dir.path().join("no/such/dir/out.csv");
    let out = qufti(&[
        "qcrb",
        "--modes",
        "3",
        "--num-phases",
        "2",
        "--out",
        unwritable.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));

    // Vacuum input only: nothing can be estimated.
    let out = qufti(&[
        "fig3",
        "--p-grid",
        "0:0:0.1",
        "--fixed-phases",
        "--phi",
        "1,2,3",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn qfi_numeric_matches_closed_form() {
    let out = stdout(&qufti(&[
        "qfi",
        "--modes",
        "4",
        "--num-phases",
        "3",
        "--k",
        "2",
    ]));
    let rows = rows(&out);
    assert_eq!(rows.len(), 9);
    for row in rows {
        let (a, n): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
        assert!((a - n).abs() < 1e-8);
    }
}

#[test]
fn cfi_reports_matrix_and_variance() {
    let out = qufti(&[
        "cfi",
        "--modes",
        "3",
        "--num-phases",
        "2",
        "--phi",
        "0.7,2.0",
        "--scheme",
        "spd",
    ]);
    let text = stdout(&out);
    assert_eq!(rows(&text).len(), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("total variance"));
}

#[test]
fn optimize_single_row() {
    let text = stdout(&qufti(&[
        "optimize",
        "--modes",
        "3",
        "--num-phases",
        "1",
        "--starts",
        "4",
        "--seed",
        "3",
    ]));
    let rows = rows(&text);
    assert_eq!(rows.len(), 1);
    let v: f64 = rows[0][4].parse().unwrap();
    assert!((v - 3.0 / 16.0).abs() < 1e-6, "{v}");
}

#[test]
fn fig2_small_range_with_chart() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig2.csv");
    let svg = dir.path().join("fig2.svg");
    let out = qufti(&[
        "fig2",
        "--modes",
        "4",
        "--starts",
        "6",
        "--seed",
        "7",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(!text.contains('\r'));
    let rows = rows(&text);
    assert_eq!(rows.len(), 9);
    let num = |r: &[String], i: usize| r[i].parse::<f64>().unwrap();
    for r in &rows {
        assert!(num(r, 3) >= num(r, 4) * (1.0 - 1e-9), "{r:?}");
        match r[0].as_str() {
            "2" => {
                assert_eq!(num(r, 4), 0.25);
                assert_eq!(num(r, 5), 0.25);
            }
            "4" => assert_eq!((num(r, 4), num(r, 5), num(r, 6)), (0.25, 0.5, 0.75)),
            _ => {}
        }
    }
    let chart = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(chart.matches("<polyline").count(), 6);
}

#[test]
fn fig3_fixed_phases() {
    let text = stdout(&qufti(&[
        "fig3",
        "--modes",
        "3",
        "--num-phases",
        "2",
        "--p-grid",
        "0.5:1:0.25",
        "--fixed-phases",
        "--phi",
        "0.7,2.0",
    ]));
    let rows = rows(&text);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[3] == "1.33333333333333"));
    let full: f64 = rows[2][2].parse().unwrap();
    assert!((full - 0.737673637289969).abs() < 1e-12);
}

#[test]
fn rendered_spec_round_trips() {
    let spec =
        qufti_cli::parse_scenario(r#"{"m":6,"d":4,"scheme":"one-nrd","resolved_mode":6}"#).unwrap();
    let again: ScenarioSpec = qufti_cli::parse_scenario(&spec.render()).unwrap();
    assert_eq!(again, spec);
}
