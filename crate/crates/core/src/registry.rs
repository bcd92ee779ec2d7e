//! The in-memory registry and its record-level edits.
//!
//! A [`Registry`] is a value: the editing operations borrow it and return a
//! new state, leaving the original untouched for readers that still hold it.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::calendar::AcademicCalendar;
use crate::contingent::MovementEvent;
use crate::error::{Error, Result};
use crate::model::{
    ControlCodeTable, CurriculumEntryId, Group, GroupId, MeanScore, Sex, StatusKind, StudentId,
    StudentRecord,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    pub(crate) calendar: AcademicCalendar,
    pub(crate) control_codes: ControlCodeTable,
    pub(crate) groups: BTreeMap<GroupId, Group>,
    pub(crate) students: BTreeMap<StudentId, StudentRecord>,
    pub(crate) log: Vec<MovementEvent>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::new(AcademicCalendar::default(), ControlCodeTable::default())
    }
}

impl Registry {
    pub fn new(calendar: AcademicCalendar, control_codes: ControlCodeTable) -> Self {
        Self {
            calendar,
            control_codes,
            groups: BTreeMap::new(),
            students: BTreeMap::new(),
            log: Vec::new(),
        }
    }

    pub fn calendar(&self) -> &AcademicCalendar {
        &self.calendar
    }

    pub fn with_calendar(mut self, calendar: AcademicCalendar) -> Result<Self> {
        calendar.validate()?;
        self.calendar = calendar;
        self.validate()?;
        Ok(self)
    }

    pub fn control_codes(&self) -> &ControlCodeTable {
        &self.control_codes
    }

    pub fn groups(&self) -> impl Iterator<Item = &Group> {
        self.groups.values()
    }

    pub fn students(&self) -> impl Iterator<Item = &StudentRecord> {
        self.students.values()
    }

    pub fn log(&self) -> &[MovementEvent] {
        &self.log
    }

    pub fn group(&self, id: &GroupId) -> Result<&Group> {
        self.groups
            .get(id)
            .ok_or_else(|| Error::UnknownGroup(id.clone()))
    }

    pub fn student(&self, id: &StudentId) -> Result<&StudentRecord> {
        self.students
            .get(id)
            .ok_or_else(|| Error::UnknownStudent(id.clone()))
    }

    /// Group of an existing student; the referential check on insert
    /// guarantees it resolves.
    pub fn group_of(&self, student: &StudentRecord) -> &Group {
        &self.groups[&student.group]
    }

    /// Sequence number the next movement event must carry.
    pub fn next_seq(&self) -> u64 {
        self.log.last().map_or(1, |e| e.seq + 1)
    }

    pub fn status_counts(&self) -> BTreeMap<StatusKind, usize> {
        let mut counts = BTreeMap::new();
        for s in self.students.values() {
            *counts.entry(s.status.kind()).or_insert(0) += 1;
        }
        counts
    }

    pub fn insert_group(&mut self, group: Group) -> Result<()> {
        group.validate(self.calendar.max_semesters())?;
        if self.groups.contains_key(&group.id) {
            return Err(Error::Invalid(format!("group {} already exists", group.id)));
        }
        self.groups.insert(group.id.clone(), group);
        Ok(())
    }

    pub fn insert_student(&mut self, student: StudentRecord) -> Result<()> {
        if self.students.contains_key(&student.id) {
            return Err(Error::DuplicateStudentId(student.id));
        }
        self.check_student(&student)?;
        self.students.insert(student.id.clone(), student);
        Ok(())
    }

    fn check_student(&self, s: &StudentRecord) -> Result<()> {
        s.name.validate()?;
        if s.course == 0 {
            return Err(Error::RangeViolation {
                field: "course".into(),
                value: "0".into(),
            });
        }
        if s.card_number.chars().any(|c| c.is_control()) {
            return Err(Error::Invalid(format!(
                "card number of {} has control characters",
                s.id
            )));
        }
        let group = self.group(&s.group)?;
        if let Some(entry) = s.deliveries.keys().find(|e| group.entry(**e).is_none()) {
            return Err(Error::DanglingReference {
                student: s.id.clone(),
                group: s.group.clone(),
                entry: *entry,
            });
        }
        match &s.status {
            crate::model::StudentStatus::AcademicLeave { since, until } if since >= until => Err(
                Error::Invalid(format!("leave of {} ends before it starts", s.id)),
            ),
            crate::model::StudentStatus::Expelled { reason, .. }
                if reason.chars().any(|c| c.is_control()) =>
            {
                Err(Error::Invalid(format!(
                    "expulsion reason of {} has control characters",
                    s.id
                )))
            }
            _ => Ok(()),
        }
    }

    /// Checks every invariant that spans more than one record.
    pub fn validate(&self) -> Result<()> {
        self.calendar.validate()?;
        for g in self.groups.values() {
            g.validate(self.calendar.max_semesters())?;
        }
        for s in self.students.values() {
            self.check_student(s)?;
        }
        for pair in self.log.windows(2) {
            if pair[1].seq != pair[0].seq + 1 {
                return Err(Error::PreconditionViolated {
                    kind: pair[1].kind.name().into(),
                    seq: Some(pair[1].seq),
                    detail: format!("sequence gap after {}", pair[0].seq),
                });
            }
        }
        Ok(())
    }

    /// Inserts (`Some`) or clears (`None`) one delivery date.
    pub fn set_delivery(
        &self,
        student: &StudentId,
        entry: CurriculumEntryId,
        date: Option<NaiveDate>,
    ) -> Result<Registry> {
        let record = self.student(student)?;
        if self.group_of(record).entry(entry).is_none() {
            return Err(Error::EntryNotInCurriculum {
                group: record.group.clone(),
                entry,
            });
        }
        let mut next = self.clone();
        let record = next.students.get_mut(student).expect("checked above");
        match date {
            Some(d) => {
                record.deliveries.insert(entry, d);
            }
            None => {
                record.deliveries.remove(&entry);
            }
        }
        Ok(next)
    }

    pub fn edit_personal(&self, student: &StudentId, patch: &PersonalPatch) -> Result<Registry> {
        let mut record = self.student(student)?.clone();
        if let Some(v) = &patch.surname {
            record.name.surname = v.clone();
        }
        if let Some(v) = &patch.given_name {
            record.name.given_name = v.clone();
        }
        if let Some(v) = &patch.patronymic {
            record.name.patronymic = v.clone();
        }
        if let Some(v) = &patch.card_number {
            record.card_number = v.clone();
        }
        if let Some(v) = patch.mean_score {
            record.mean_score = v;
        }
        if let Some(v) = patch.sex {
            record.sex = v;
        }
        self.check_student(&record)?;
        let mut next = self.clone();
        next.students.insert(student.clone(), record);
        Ok(next)
    }

    pub(crate) fn student_mut(&mut self, id: &StudentId) -> Result<&mut StudentRecord> {
        self.students
            .get_mut(id)
            .ok_or_else(|| Error::UnknownStudent(id.clone()))
    }
}

/// Editable personal fields. Group, course, funding and status change only
/// through movement events.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonalPatch {
    pub surname: Option<String>,
    pub given_name: Option<String>,
    pub patronymic: Option<String>,
    pub card_number: Option<String>,
    pub mean_score: Option<MeanScore>,
    pub sex: Option<Sex>,
}

impl PersonalPatch {
    const IMMUTABLE: [&'static str; 7] = [
        "id",
        "group",
        "course",
        "funding",
        "status",
        "direction",
        "deliveries",
    ];

    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    /// Builds a patch from `field = value` pairs, rejecting fields that are
    /// not editable here.
    pub fn from_pairs<K: AsRef<str>, V: AsRef<str>>(
        pairs: impl IntoIterator<Item = (K, V)>,
    ) -> Result<Self> {
        let mut patch = Self::default();
        for (key, value) in pairs {
            let (key, value) = (key.as_ref(), value.as_ref());
            match key {
                "surname" => patch.surname = Some(value.to_string()),
                "given_name" => patch.given_name = Some(value.to_string()),
                "patronymic" => patch.patronymic = Some(value.to_string()),
                "card_number" => patch.card_number = Some(value.to_string()),
                "mean_score" => patch.mean_score = Some(MeanScore::parse(value)?),
                "sex" => patch.sex = Some(value.parse()?),
                k if Self::IMMUTABLE.contains(&k) => {
                    return Err(Error::ImmutableField(k.to_string()))
                }
                k => return Err(Error::Invalid(format!("unknown field `{k}`"))),
            }
        }
        Ok(patch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ControlKind, CurriculumEntry, Funding, PersonName, StudentStatus};

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn fixture() -> Registry {
        let mut r = Registry::default();
        r.insert_group(Group {
            id: GroupId::new("5210M").unwrap(),
            course: 2,
            direction: "230400".into(),
            cohort_year: 2012,
            curriculum: vec![
                CurriculumEntry {
                    id: CurriculumEntryId(1),
                    discipline: "Философия".into(),
                    semester: 1,
                    control: ControlKind::Exam,
                },
                CurriculumEntry {
                    id: CurriculumEntryId(2),
                    discipline: "Криптология".into(),
                    semester: 2,
                    control: ControlKind::Credit,
                },
            ],
        })
        .unwrap();
        r.insert_student(StudentRecord {
            id: StudentId::new("s1").unwrap(),
            name: PersonName::new("Мишурин", "Олег", "Владимирович").unwrap(),
            card_number: "12/000".into(),
            group: GroupId::new("5210M").unwrap(),
            course: 2,
            funding: Funding::Budget,
            sex: Sex::Male,
            mean_score: MeanScore::parse("3.5").unwrap(),
            status: StudentStatus::Active,
            deliveries: BTreeMap::new(),
        })
        .unwrap();
        r
    }

    #[test]
    fn set_then_remove_is_identity() {
        let r = fixture();
        let s = StudentId::new("s1").unwrap();
        let set = r
            .set_delivery(&s, CurriculumEntryId(1), Some(d("2013-06-20")))
            .unwrap();
        assert_eq!(set.student(&s).unwrap().deliveries.len(), 1);
        let cleared = set.set_delivery(&s, CurriculumEntryId(1), None).unwrap();
        assert_eq!(cleared, r);
    }

    #[test]
    fn set_overwrites() {
        let r = fixture();
        let s = StudentId::new("s1").unwrap();
        let r = r
            .set_delivery(&s, CurriculumEntryId(1), Some(d("2013-01-10")))
            .unwrap();
        let r = r
            .set_delivery(&s, CurriculumEntryId(1), Some(d("2013-06-20")))
            .unwrap();
        assert_eq!(
            r.student(&s).unwrap().deliveries[&CurriculumEntryId(1)],
            d("2013-06-20")
        );
    }

    #[test]
    fn set_delivery_errors() {
        let r = fixture();
        let err = r
            .set_delivery(
                &StudentId::new("nobody").unwrap(),
                CurriculumEntryId(1),
                None,
            )
            .unwrap_err();
        assert_eq!(err.name(), "UnknownStudent");
        let err = r
            .set_delivery(&StudentId::new("s1").unwrap(), CurriculumEntryId(7), None)
            .unwrap_err();
        assert_eq!(err.name(), "EntryNotInCurriculum");
    }

    #[test]
    fn edit_personal_rules() {
        let r = fixture();
        let s = StudentId::new("s1").unwrap();
        assert_eq!(r.edit_personal(&s, &PersonalPatch::default()).unwrap(), r);

        let err = PersonalPatch::from_pairs([("mean_score", "5.01")]).unwrap_err();
        assert_eq!(err.name(), "RangeViolation");
        let err = PersonalPatch::from_pairs([("group", "5230M")]).unwrap_err();
        assert_eq!(err.name(), "ImmutableField");
        let err = PersonalPatch::from_pairs([("course", "3")]).unwrap_err();
        assert_eq!(err.name(), "ImmutableField");

        let patch =
            PersonalPatch::from_pairs([("mean_score", "3.01"), ("surname", "Мишура")]).unwrap();
        let edited = r.edit_personal(&s, &patch).unwrap();
        let rec = edited.student(&s).unwrap();
        assert_eq!(rec.mean_score.display_ru(), "3,01");
        assert_eq!(rec.name.surname, "Мишура");
        assert_eq!(rec.group, r.student(&s).unwrap().group);

        let blank = PersonalPatch {
            surname: Some(" ".into()),
            ..Default::default()
        };
        assert!(r.edit_personal(&s, &blank).is_err());
    }

    #[test]
    fn insert_rejects_dangling_and_duplicates() {
        let mut r = fixture();
        let mut dup = r.student(&StudentId::new("s1").unwrap()).unwrap().clone();
        assert_eq!(
            r.insert_student(dup.clone()).unwrap_err().name(),
            "DuplicateStudentId"
        );
        dup.id = StudentId::new("s2").unwrap();
        dup.deliveries
            .insert(CurriculumEntryId(99), d("2013-01-01"));
        assert_eq!(
            r.insert_student(dup).unwrap_err().name(),
            "DanglingReference"
        );
    }
}
