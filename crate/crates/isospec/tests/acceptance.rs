//! One pass/fail line per acceptance criterion, followed by the individual
//! checks. Set ISOSPEC_CRITERIA=1,2,7 to run a subset. Failing criteria are
//! reported but only fail the target when ISOSPEC_STRICT is set.

use std::process::ExitCode;

use isospec::reproduce::{self, Row, Settings};

fn main() -> ExitCode {
    let settings = Settings::default();
    let selected: Option<Vec<u8>> =
        std::env::var("ISOSPEC_CRITERIA").ok().map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let rows: Vec<Row> = match &selected {
        Some(ids) => ids
            .iter()
            .filter_map(|&id| reproduce::criterion(id, &settings))
            .inspect(|r| println!("{}", r.line()))
            .collect(),
        None => reproduce::run_all(&settings, |r| println!("{}", r.line())),
    };
    println!();
    for r in &rows {
        println!("criterion {}:", r.id);
        for c in &r.checks {
            println!("  {} {}: {}", if c.passed { "ok    " } else { "FAILED" }, c.name, c.detail);
        }
    }
    let passed = rows.iter().filter(|r| r.passed()).count();
    println!("\n{passed} of {} criteria pass", rows.len());
    if passed == rows.len() || std::env::var_os("ISOSPEC_STRICT").is_none() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
