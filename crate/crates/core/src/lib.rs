//! Registry of a teaching department: students, training plans, ratings,
//! debt monitoring, movement of the contingent and exchange with teachers.

pub mod audit;
pub mod calendar;
pub mod contingent;
pub mod error;
pub mod model;
pub mod monitor;
pub mod rating;
pub mod registry;
pub mod store;
pub mod sync;
pub mod table;

pub use calendar::AcademicCalendar;
pub use error::{Error, Result};
pub use model::{
    ControlCodeTable, ControlKind, CurriculumEntry, CurriculumEntryId, Funding, Group, GroupId,
    MeanScore, PersonName, Sex, StudentId, StudentRecord, StudentStatus,
};
pub use registry::{PersonalPatch, Registry};
pub use table::{Locale, Table};
