use std::process::{Command, Output};

fn isospec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isospec")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn equal_surface_spectra_exit_zero() {
    let o = isospec(&["compare", "s1", "s2", "--cutoff", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_file_is_an_input_error() {
    let o = isospec(&["compare", "missing.json", "s2"]);
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());
}

#[test]
fn chamber_verdict_matches_expectation() {
    let o = isospec(&["chambers", "x1_nonhomeo", "x2_nonhomeo"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_flag_is_rejected() {
    assert_eq!(code(&isospec(&["compare", "s1", "s2", "--frobnicate"])), 1);
    assert_eq!(code(&isospec(&["--help"])), 0);
}

#[test]
fn bad_metric_is_rejected() {
    assert_eq!(code(&isospec(&["spectrum", "s1", "--cutoff", "1", "--metric", "0.4,0.6"])), 1);
}

#[test]
fn spectrum_csv_is_deterministic() {
    let a = isospec(&["spectrum", "s1", "--cutoff", "2.5"]);
    let b = isospec(&["spectrum", "s1", "--cutoff", "2.5"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("length,multiplicity\n0.500000000,4\n"));
}

#[test]
fn out_directory_gets_a_manifest() {
    let dir = std::env::temp_dir().join(format!("isospec-cli-{}", std::process::id()));
    let o = isospec(&["compare", "s1", "s2", "--cutoff", "2", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["cutoff"], 2.0);
    assert!(manifest["complexes"].to_string().contains("s1"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn commensurability_reports_the_ratio() {
    let o = isospec(&["commensurability"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("6/5"));
}

#[test]
fn derived_table_is_printed() {
    let o = isospec(&["derive-table", "s1", "s2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!o.stdout.is_empty());
}
