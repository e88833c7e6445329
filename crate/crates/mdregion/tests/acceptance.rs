//! Acceptance battery: the ten headline properties, one pass/fail line
//! each, run through the shared verification suites with a fixed seed.

use mdregion::verify::{self, SuiteOutcome};
use std::time::Instant;

const SEED: u64 = 0xac5e_17ed;

struct Line {
    index: usize,
    outcome: SuiteOutcome,
    elapsed: f64,
    budget: Option<f64>,
}

fn run(index: usize, budget: Option<f64>, f: impl FnOnce() -> SuiteOutcome) -> Line {
    let start = Instant::now();
    let outcome = f();
    Line {
        index,
        outcome,
        elapsed: start.elapsed().as_secs_f64(),
        budget,
    }
}

#[test]
fn acceptance() {
    let lines = vec![
        run(1, Some(60.0), || verify::suite_scalar_tightness(SEED)),
        run(2, None, verify::suite_closed_form),
        run(3, None, || verify::suite_loose_central(SEED)),
        run(4, None, || verify::suite_single_group_grid(SEED)),
        run(5, None, || verify::suite_entropy_inequality(SEED)),
        run(6, None, || verify::suite_chain_monotonicity(SEED)),
        run(7, None, || verify::suite_channel_fixed_point(SEED)),
        run(8, None, || verify::suite_mmse_schur(SEED)),
        run(9, None, || verify::suite_enhancement(SEED)),
        run(10, None, || verify::suite_soundness(SEED)),
    ];

    let mut failed = Vec::new();
    for line in &lines {
        let within_budget = line.budget.is_none_or(|b| line.elapsed < b);
        let ok = line.outcome.passed() && within_budget;
        println!(
            "criterion {:02} {:<26} {} ({} checks, {:.1} s)",
            line.index,
            line.outcome.name,
            if ok { "PASS" } else { "FAIL" },
            line.outcome.cases,
            line.elapsed
        );
        if !line.outcome.passed() {
            println!("    {}", line.outcome.describe());
        }
        if !within_budget {
            println!(
                "    time budget exceeded: {:.1} s over {:.0} s",
                line.elapsed,
                line.budget.unwrap()
            );
        }
        if !ok {
            failed.push(line.index);
        }
    }
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
