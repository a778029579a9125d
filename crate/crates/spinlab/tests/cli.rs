use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use spinlab::Table;

fn spinlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinlab")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn deer_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deer.csv");
    let out = spinlab(&["--out", path.to_str().unwrap(), "--steps", "20", "deer", "--r", "1.2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = Table::from_csv("deer", &fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(table.columns, ["t", "sz"]);
    assert_eq!(table.rows.len(), 20);
    assert_eq!(table.meta("table"), Some("deer"));
    assert_eq!(table.meta("r"), Some("1.2"));
    assert!(table.meta("version").unwrap().starts_with("spinlab "));
}

#[test]
fn json_to_stdout() {
    let out = spinlab(&["--format", "json", "--steps", "5", "deer"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["columns"], serde_json::json!(["t", "sz"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert_eq!(v["meta"]["table"], "deer");
}

#[test]
fn secondary_tables_get_suffixed_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pake.csv");
    let out = spinlab(&["--out", path.to_str().unwrap(), "--steps", "64", "pake", "--theta-points", "10"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let fid = dir.path().join("pake_fid.csv");
    assert!(path.exists() && fid.exists());
    let t = Table::from_csv("fid", &fs::read_to_string(fid).unwrap()).unwrap();
    assert_eq!(t.columns, ["t", "re", "im"]);
    assert_eq!(t.rows.len(), 64);
}

#[test]
fn identical_runs_are_bit_identical() {
    let args = ["--steps", "200", "scrp-mary", "--pulse-stop", "150"];
    let a = spinlab(&args);
    let b = spinlab(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn argument_errors_exit_2() {
    assert_eq!(code(&spinlab(&["deer", "--no-such-flag"])), 2);
    assert_eq!(code(&spinlab(&["--steps", "0", "deer"])), 2);
    assert_eq!(code(&spinlab(&["--dt", "1e-9", "nv-weak"])), 2);
    assert_eq!(code(&spinlab(&["mas", "--nu-r", "100e3", "--dt", "3e-6"])), 2);
    assert_eq!(code(&spinlab(&["frobnicate"])), 2);
}

#[test]
fn physics_errors_exit_3() {
    let out = spinlab(&["scrp-cwepr", "--purity", "1.5"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("spinlab: "));
}

#[test]
fn io_errors_exit_4() {
    let out = spinlab(&["--out", "/nonexistent-dir/x.csv", "--steps", "3", "deer"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(code(&spinlab(&["--help"])), 0);
    let v = spinlab(&["--version"]);
    assert_eq!(code(&v), 0);
    assert!(String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn every_command_writes_its_columns() {
    let cases: [(&[&str], &[&str]); 6] = [
        (&["--steps", "50", "nv-pl"], &["t", "pl0", "pl1"]),
        (&["--steps", "16", "nv-weak"], &["block", "signal"]),
        (&["--steps", "21", "scrp-cwepr", "--alpha-deg", "0,45"], &["field", "alpha_0", "alpha_45"]),
        (&["--steps", "100", "scrp-mary", "--b", "1e-3", "--pulse-stop", "60"], &["t", "pl_1mT"]),
        (&["--steps", "32", "pake"], &["frequency", "intensity"]),
        (&["--steps", "32", "mas", "--phi-points", "8"], &["frequency", "intensity"]),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (k, (args, cols)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("run{k}.csv"));
        let mut full = vec!["--out", path.to_str().unwrap()];
        full.extend_from_slice(args);
        let out = spinlab(&full);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let t = Table::from_csv("t", &fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(t.columns, *cols, "{args:?}");
        assert!(t.rows.iter().flatten().all(|x| x.is_finite()));
    }
}

fn csv_round_trip(path: &Path, table: &Table) -> Table {
    fs::write(path, table.to_csv()).unwrap();
    Table::from_csv(&table.name, &fs::read_to_string(path).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn csv_preserves_values(rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 3), 0..20), r in any::<f64>()) {
        let mut t = Table::new("p", &["a", "b", "c"]);
        t.set_meta("r", r);
        for row in rows {
            t.push(row);
        }
        let dir = tempfile::tempdir().unwrap();
        let back = csv_round_trip(&dir.path().join("p.csv"), &t);
        prop_assert_eq!(back, t);
    }
}
