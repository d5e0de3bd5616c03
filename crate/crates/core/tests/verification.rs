//! Whole-suite runs: every suite passes on the catalog and reports are reproducible.

use surflab::classify::Verdict;
use surflab::verify::{run_suite, Suite};

#[test]
fn every_suite_passes() {
    let report = run_suite(Suite::All, &[]);
    let failures: Vec<_> = report
        .failures()
        .map(|e| format!("{} {} {}: {:e}", e.suite, e.case, e.quantity, e.residual))
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
    assert_eq!(report.summary.indeterminate, 0);
    assert!(report.summary.pass > 500);
    for part in Suite::ALL.into_iter().filter(|s| *s != Suite::All) {
        assert!(
            report.entries.iter().any(|e| e.suite == part.as_str()),
            "no entries for {}",
            part.as_str()
        );
    }
}

#[test]
fn reports_are_byte_identical() {
    for suite in [Suite::MainTheorem, Suite::Numerics, Suite::Cartan] {
        assert_eq!(
            run_suite(suite, &[]).to_json(),
            run_suite(suite, &[]).to_json()
        );
    }
}

#[test]
fn informative_entries_never_gate() {
    let report = run_suite(Suite::Lemma, &[]);
    let informative: Vec<_> = report
        .entries
        .iter()
        .filter(|e| e.verdict == Verdict::Informative)
        .collect();
    assert!(!informative.is_empty());
    assert!(report.passed());
    assert_eq!(report.summary.informative, informative.len());
}
