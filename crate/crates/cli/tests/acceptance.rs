//! One line per criterion; the run fails if any criterion does. Runs without
//! the libtest harness so the lines are never captured.

use std::process::Command;

use cclab_core::acceptance::{run_all, SuiteOptions};

fn main() {
    let results = run_all(&SuiteOptions::default());
    for r in &results {
        println!(
            "[{}] {:>2} {} ({:.2}s): {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.title,
            r.seconds,
            r.detail
        );
    }

    // determinism once more, through the binary with different pools
    let scan = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_cclab"))
            .args([
                "--threads",
                threads,
                "scan",
                "--n",
                "4",
                "--epsilon-frac",
                "0.7",
                "--balls",
                "40",
                "--points",
                "40",
            ])
            .output()
            .expect("spawn cclab")
    };
    let (one, eight) = (scan("1"), scan("8"));
    let binary_ok = one.status.success() && one.stdout == eight.stdout && !one.stdout.is_empty();
    println!(
        "[{}] 12 Determinism through the binary: {} bytes, 1 vs 8 threads identical: {}",
        if binary_ok { "PASS" } else { "FAIL" },
        one.stdout.len(),
        one.stdout == eight.stdout
    );

    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if results.len() != 12 || !failed.is_empty() || !binary_ok {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
