//! HTTP API and command-line front end over a deanery data directory.

pub mod api;
pub mod archive;
pub mod cli;
pub mod query;
pub mod state;

use std::fs;
use std::path::Path;

use deanery_core::store::load_registry;
use deanery_core::{AcademicCalendar, Error, Registry, Result};
use serde::Serialize;

/// Loads the store, optionally replacing its calendar with one read from `calendar`.
pub fn open_registry(root: &Path, calendar: Option<&Path>) -> Result<Registry> {
    let r = load_registry(root)?;
    match calendar {
        None => Ok(r),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::IoFailure {
                path: path.into(),
                reason: e.to_string(),
            })?;
            r.with_calendar(AcademicCalendar::parse(&text)?)
        }
    }
}

/// Pretty JSON with a trailing newline; struct fields keep declaration order.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("registry types serialize");
    s.push('\n');
    s
}
