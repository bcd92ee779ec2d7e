//! One PASS/FAIL line per acceptance criterion, at full size.
//! Run with `cargo test -p deanery-service --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use deanery_testkit::criteria::{self, Outcome};

type Check = (&'static str, Box<dyn Fn() -> Outcome>);

fn main() -> ExitCode {
    let checks: Vec<Check> = vec![
        (
            "exam sheet reproduction",
            Box::new(criteria::exam_sheet_reproduction),
        ),
        (
            "grade scale exactness",
            Box::new(criteria::grade_scale_exactness),
        ),
        (
            "rating option presets",
            Box::new(criteria::rating_option_presets),
        ),
        ("mastery thresholds", Box::new(criteria::mastery_thresholds)),
        (
            "debt oracle equivalence",
            Box::new(|| criteria::debt_oracle_equivalence(1000)),
        ),
        (
            "event replay and conservation",
            Box::new(|| criteria::replay_and_conservation(20, 1000)),
        ),
        (
            "audit oracle equivalence",
            Box::new(|| criteria::audit_oracle_equivalence(1000)),
        ),
        (
            "persistence round trip",
            Box::new(|| criteria::persistence_round_trip(1000)),
        ),
        (
            "api and core equivalence",
            Box::new(|| common::check_goldens(false)),
        ),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(summary) => println!("PASS {name} ({secs:.2}s): {summary}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({secs:.2}s): {why}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        checks.len() - failed,
        checks.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
