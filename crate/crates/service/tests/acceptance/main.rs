//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Run with `cargo test -p sisx-service --test acceptance`. Every criterion
//! is checked against an oracle implemented here, independently of the
//! library code under test; wall-clock budgets are part of each criterion.

mod inference;
mod kde;
mod ols;
mod service;
mod special;

use std::process::ExitCode;
use std::time::{Duration, Instant};

/// Result of one criterion body.
pub enum Outcome {
    Checked { failures: Vec<String>, notes: Vec<String> },
    Skipped(String),
}

/// Collects failures and notes for one criterion.
#[derive(Default)]
pub struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    pub fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn done(self) -> Outcome {
        Outcome::Checked { failures: self.failures, notes: self.notes }
    }
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

const MAX_LISTED_FAILURES: usize = 8;

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "sample-size formula", budget: Duration::from_secs(1), run: sample_size::run },
        Criterion { name: "OLS oracle equivalence", budget: Duration::from_secs(10), run: ols::run },
        Criterion { name: "inference correctness", budget: Duration::from_secs(30), run: inference::run },
        Criterion { name: "special functions", budget: Duration::from_secs(5), run: special::run },
        Criterion { name: "KDE", budget: Duration::from_secs(5), run: kde::run },
        Criterion {
            name: "public SIS dataset reproduction",
            budget: Duration::from_secs(60),
            run: public_dataset::run,
        },
        Criterion {
            name: "fit at full scale, synthetic 10^6 rows (proxy timing)",
            budget: Duration::from_secs(60),
            run: public_dataset::run_synthetic_scale,
        },
        Criterion { name: "service differential harness", budget: Duration::from_secs(120), run: service::run },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        match outcome {
            Outcome::Skipped(reason) => println!("SKIP  {}: {reason}", c.name),
            Outcome::Checked { mut failures, notes } => {
                if elapsed > c.budget {
                    failures.push(format!(
                        "took {:.2} s, budget {:.0} s",
                        elapsed.as_secs_f64(),
                        c.budget.as_secs_f64()
                    ));
                }
                let tag = if failures.is_empty() { "PASS" } else { "FAIL" };
                println!(
                    "{tag}  {} ({:.2} s of {:.0} s budget)",
                    c.name,
                    elapsed.as_secs_f64(),
                    c.budget.as_secs_f64()
                );
                for n in &notes {
                    println!("        {n}");
                }
                for f in failures.iter().take(MAX_LISTED_FAILURES) {
                    println!("      ! {f}");
                }
                if failures.len() > MAX_LISTED_FAILURES {
                    println!("      ! ... {} more", failures.len() - MAX_LISTED_FAILURES);
                }
                if !failures.is_empty() {
                    failed += 1;
                }
            }
        }
    }
    println!("acceptance: {} criteria, {failed} failed", criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
