use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn nicolai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nicolai")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nicolai-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn build_verify_passes_on_small_ring() {
    let out = nicolai(&["build", "--ring", "--m", "2", "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["dimension"], 64);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "q_squared_zero"));
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn bad_configuration_exits_with_two() {
    for args in [
        &["build", "--torus", "3x3"][..],
        &["build", "--ring"],
        &["build", "--ring", "--m", "2", "--chain", "9"],
        &["charges", "--interval", "3", "1"],
        &["build", "--nonsense"],
    ] {
        let out = nicolai(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn oversized_requests_are_refused() {
    let out = nicolai(&["ergodicity", "--ring", "--m", "6"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_runs_leave_no_output_file() {
    let dir = scratch("nofile");
    let path = dir.join("out.json");
    let out = nicolai(&["build", "--torus", "5x4", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read_dir(&dir).unwrap().count(), 0);
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = scratch("seed");
    for format in ["json", "csv", "text"] {
        let mut bytes = Vec::new();
        for run in 0..2 {
            let path = dir.join(format!("{format}{run}"));
            let out = nicolai(&["verify", "--ring", "--m", "2", "--seed", "17", "--format", format, "--output", path.to_str().unwrap()]);
            assert_eq!(out.status.code(), Some(0));
            assert!(out.stdout.is_empty());
            bytes.push(fs::read(&path).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "{format}");
    }
    // only the finished files, no temporaries
    assert_eq!(fs::read_dir(&dir).unwrap().count(), 6);
}

#[test]
fn reference_tables_match_enumeration() {
    let out = nicolai(&["charges", "--reference-tables"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["all_match"], true);
    let sizes: Vec<usize> = v["tables"].as_array().unwrap().iter().map(|t| t["rows"].as_array().unwrap().len()).collect();
    assert_eq!(sizes, [2, 6, 18]);
}

#[test]
fn interval_listing_counts_rows() {
    let out = nicolai(&["charges", "--interval", "0", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 18);
    assert!(text.lines().nth(1).unwrap().ends_with("-------"));
}

#[test]
fn spec_files_drive_the_same_model() {
    let dir = scratch("spec");
    let path = dir.join("ring.json");
    fs::write(&path, r#"{"dimension": 1, "extent": [-3, 2], "boundary": "periodic"}"#).unwrap();
    let from_file = nicolai(&["build", "--spec", path.to_str().unwrap()]);
    let from_flags = nicolai(&["build", "--ring", "--m", "2"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, from_flags.stdout);

    fs::write(&path, r#"{"dimension": 1, "extent": [-3, 2], "boundary": "sideways"}"#).unwrap();
    assert_eq!(nicolai(&["build", "--spec", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn ground_counts_agree_with_transfer_matrix() {
    let out = nicolai(&["groundstates", "--chain", "9", "--transfer-matrix"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let listed = v["configurations"].as_array().unwrap().len() as u64;
    assert_eq!(v["count"].as_u64(), Some(listed));
    assert_eq!(v["transfer_count"].as_u64(), Some(listed));
    assert_eq!(v["transfer_matches_exhaustive"], true);
}

#[test]
fn spectrum_csv_is_sorted() {
    let out = nicolai(&["build", "--ring", "--m", "2", "--spectrum", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sector,eigenvalue,multiplicity"));
    let rows: Vec<(usize, f64, usize)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert!(rows.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
    assert_eq!(rows.iter().map(|r| r.2).sum::<usize>(), 64);
}

#[test]
fn torus_verification_passes() {
    let out = nicolai(&["verify", "--torus", "4x4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
