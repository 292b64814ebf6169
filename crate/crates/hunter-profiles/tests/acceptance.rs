//! The acceptance criteria, one PASS or FAIL line each.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::process::Command;

use hunter_core::verify::{Outcome, Suite, VerifyConfig, LIBRARY_CRITERIA};

/// Two full runs of the binary must agree byte for byte.
fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_hunter-profiles"))
            .args(["verify", "--format", "json"])
            .env_remove("HUNTER_PROFILES_THREADS")
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    let mut details = vec![format!("{} bytes", a.stdout.len())];
    if !a.status.success() {
        details.push(format!("exit code {:?}", a.status.code()));
    }
    Outcome {
        id: LIBRARY_CRITERIA + 1,
        title: "determinism".into(),
        passed: a.stdout == b.stdout && !a.stdout.is_empty(),
        details,
    }
}

#[test]
fn acceptance() {
    let mut outcomes = Suite::new(VerifyConfig::default()).run_all();
    outcomes.push(determinism());
    for o in &outcomes {
        println!("{}", o.line());
    }
    assert_eq!(outcomes.len(), 11);
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
