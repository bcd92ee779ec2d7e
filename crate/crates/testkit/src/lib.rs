//! Shared fixtures, random generators and brute-force oracles for the
//! deanery test suites.

pub mod criteria;
pub mod fixtures;
pub mod gen;
pub mod oracle;

use chrono::NaiveDate;

/// Parses an ISO date; panics on bad input (fixtures only).
pub fn d(s: &str) -> NaiveDate {
    s.parse().unwrap_or_else(|_| panic!("bad fixture date {s}"))
}
