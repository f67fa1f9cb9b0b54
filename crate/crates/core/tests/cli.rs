use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use torus_bubbles::mesh::{load_json, validate};
use torus_bubbles::phase::read_csv;

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus-bubbles")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn build_writes_a_valid_mesh() {
    let dir = TempDir::new().unwrap();
    let o = bin(&["build", "--kind", "2s", "--v1", "0.3", "--v2", "0.2", "-o", "m.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = load_json(dir.path().join("m.json")).unwrap();
    assert!(validate(&m).is_valid());
}

#[test]
fn infeasible_candidate_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let o = bin(&["build", "--kind", "hh", "--v1", "0.3", "--v2", "0.3", "-o", "m.json"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(!dir.path().join("m.json").exists());
}

#[test]
fn malformed_arguments_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&bin(&["build", "--kind", "2s", "--v1", "0.3", "--v2", "0.2", "--lattice", "cubic:0", "-o", "m.json"], dir.path())), 2);
    assert_eq!(code(&bin(&["relax", "-i", "m.json", "-o", "r.json", "--schedule", "300:melt"], dir.path())), 2);
    assert_eq!(code(&bin(&["frobnicate"], dir.path())), 2);
    assert_eq!(code(&bin(&["--help"], dir.path())), 0);
}

#[test]
fn relax_then_area_report_targets() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    assert_eq!(code(&bin(&["build", "--kind", "sdb", "--v1", "0.03", "--v2", "0.02", "-o", "m.json"], p)), 0);
    let o = bin(&["relax", "-i", "m.json", "-o", "r.json", "--schedule", "40:refine,60", "--report", "rep.json"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = bin(&["area", "-i", "r.json"], p);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let vols = v["volumes"].as_array().unwrap();
    assert!((vols[1].as_f64().unwrap() - 0.03).abs() < 1e-9);
    assert!((vols[2].as_f64().unwrap() - 0.02).abs() < 1e-9);
    assert!(p.join("rep.json").exists());
    assert_eq!(code(&bin(&["validate", "-i", "r.json"], p)), 0);
}

#[test]
fn toy_phase_run_writes_table_and_portrait() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let o = bin(&["phase", "--step", "0.25", "--candidates", "2s,2c", "--csv", "t.csv", "--svg", "t.svg"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = read_csv(&std::fs::read_to_string(p.join("t.csv")).unwrap()).unwrap();
    // v1, v2 in {0.25, 0.5} with a nonempty complement
    assert_eq!(table.rows.len(), 3);
    assert!(table.rows.iter().all(|r| !r.winners.is_empty()));
    let svg = std::fs::read_to_string(p.join("t.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).expect("strict XML");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
}
