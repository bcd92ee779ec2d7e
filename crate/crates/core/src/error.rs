use std::path::PathBuf;

use thiserror::Error;

use crate::model::{CurriculumEntryId, GroupId, StudentId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{path}:{line}: {reason}")]
    MalformedFile {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("student {student} has a delivery for entry {entry} which is not in the curriculum of group {group}")]
    DanglingReference {
        student: StudentId,
        group: GroupId,
        entry: CurriculumEntryId,
    },

    #[error("duplicate student id {0}")]
    DuplicateStudentId(StudentId),

    #[error("i/o failure on {path}: {reason}")]
    IoFailure { path: PathBuf, reason: String },

    #[error("unknown student {0}")]
    UnknownStudent(StudentId),

    #[error("unknown group {0}")]
    UnknownGroup(GroupId),

    #[error("entry {entry} is not in the curriculum of group {group}")]
    EntryNotInCurriculum {
        group: GroupId,
        entry: CurriculumEntryId,
    },

    #[error("field `{0}` cannot be edited here")]
    ImmutableField(String),

    #[error("{field} out of range: {value}")]
    RangeViolation { field: String, value: String },

    #[error("value {0} is outside the 0..=100 rating scale")]
    OutOfRange(i64),

    #[error("{kind} rejected: {detail}")]
    PreconditionViolated {
        kind: String,
        seq: Option<u64>,
        detail: String,
    },

    #[error("more than one curriculum entry of group {group} matches {discipline} (semester {semester})")]
    AmbiguousCurriculumEntry {
        group: GroupId,
        discipline: String,
        semester: u32,
    },

    #[error("no curriculum entry of group {group} matches {discipline} (semester {semester})")]
    UnknownCurriculumEntry {
        group: GroupId,
        discipline: String,
        semester: u32,
    },

    #[error("student {0} passed but the record carries no date")]
    MissingDateOnPass(StudentId),

    #[error("unknown rating option `{0}`")]
    UnknownOption(String),

    #[error("invalid value: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable variant name, used as the error code in API responses.
    pub fn name(&self) -> &'static str {
        match self {
            Error::MalformedFile { .. } => "MalformedFile",
            Error::DanglingReference { .. } => "DanglingReference",
            Error::DuplicateStudentId(_) => "DuplicateStudentId",
            Error::IoFailure { .. } => "IoFailure",
            Error::UnknownStudent(_) => "UnknownStudent",
            Error::UnknownGroup(_) => "UnknownGroup",
            Error::EntryNotInCurriculum { .. } => "EntryNotInCurriculum",
            Error::ImmutableField(_) => "ImmutableField",
            Error::RangeViolation { .. } => "RangeViolation",
            Error::OutOfRange(_) => "OutOfRange",
            Error::PreconditionViolated { .. } => "PreconditionViolated",
            Error::AmbiguousCurriculumEntry { .. } => "AmbiguousCurriculumEntry",
            Error::UnknownCurriculumEntry { .. } => "UnknownCurriculumEntry",
            Error::MissingDateOnPass(_) => "MissingDateOnPass",
            Error::UnknownOption(_) => "UnknownOption",
            Error::Invalid(_) => "Invalid",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::IoFailure {
            path: path.into(),
            reason: err.to_string(),
        }
    }

    pub(crate) fn malformed(
        path: impl Into<PathBuf>,
        line: usize,
        reason: impl Into<String>,
    ) -> Self {
        Error::MalformedFile {
            path: path.into(),
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn precondition(kind: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::PreconditionViolated {
            kind: kind.into(),
            seq: None,
            detail: detail.into(),
        }
    }
}
