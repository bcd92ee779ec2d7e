//! Reference implementations written directly from the rules, sharing no
//! code with the library beyond its data types.

use std::collections::BTreeMap;

use chrono::{Datelike, Days, NaiveDate};
use deanery_core::audit::AuditRule;
use deanery_core::{AcademicCalendar, Registry, StudentId, StudentStatus};

/// Start of a semester: the k-th configured month-day, rolled into the next
/// calendar year once the month-days wrap around.
pub fn semester_start(cal: &AcademicCalendar, cohort_year: i32, semester: u32) -> NaiveDate {
    let spc = cal.semesters_per_course;
    let k = (semester - 1) % spc;
    let mut year = cohort_year + ((semester - 1) / spc) as i32;
    let first = &cal.semester_starts[0];
    let md = &cal.semester_starts[k as usize];
    if (md.month, md.day) < (first.month, first.day) {
        year += 1;
    }
    NaiveDate::from_ymd_opt(year, md.month, md.day).unwrap()
}

pub fn semester_end(cal: &AcademicCalendar, cohort_year: i32, semester: u32) -> NaiveDate {
    let exam_days = (cal.weeks_exams * 7.0).ceil() as u64;
    semester_start(cal, cohort_year, semester) + Days::new(cal.weeks_theory as u64 * 7 + exam_days)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteDebts {
    pub per_semester: BTreeMap<u32, u32>,
    pub total: u32,
    pub last_delivery: Option<NaiveDate>,
}

/// Re-scans every curriculum entry of the student's group.
pub fn brute_debts(r: &Registry, id: &StudentId, as_of: NaiveDate) -> BruteDebts {
    let s = r.student(id).unwrap();
    let g = r.group(&s.group).unwrap();
    let cal = r.calendar();
    let judged_on = match &s.status {
        StudentStatus::Active => as_of,
        StudentStatus::AcademicLeave { since, .. } => as_of.min(*since),
        StudentStatus::Expelled { date, .. } => as_of.min(*date),
    };
    let mut per_semester = BTreeMap::new();
    for e in &g.curriculum {
        if judged_on < semester_end(cal, g.cohort_year, e.semester) {
            continue;
        }
        let owed = match s.deliveries.get(&e.id) {
            None => 1,
            Some(d) if *d > as_of => 1,
            Some(_) => 0,
        };
        *per_semester.entry(e.semester).or_insert(0) += owed;
    }
    let mut last_delivery = None;
    for d in s.deliveries.values() {
        if *d <= as_of && last_delivery.is_none_or(|l| *d > l) {
            last_delivery = Some(*d);
        }
    }
    BruteDebts {
        total: per_semester.values().sum(),
        per_semester,
        last_delivery,
    }
}

/// Every (rule, student, due date) whose predicate holds, unordered.
pub fn brute_audit(r: &Registry, as_of: NaiveDate) -> Vec<(AuditRule, StudentId, NaiveDate)> {
    let cal = r.calendar();
    let mut out = Vec::new();
    for s in r.students() {
        let g = r.group(&s.group).unwrap();
        match &s.status {
            StudentStatus::AcademicLeave { until, .. } => {
                if *until < as_of {
                    out.push((AuditRule::OverdueLeaveExit, s.id.clone(), *until));
                }
            }
            StudentStatus::Active => {
                let last = g.curriculum.iter().map(|e| e.semester).max();
                if let Some(last) = last {
                    let end = semester_end(cal, g.cohort_year, last);
                    if end < as_of {
                        out.push((AuditRule::OverdueGraduation, s.id.clone(), end));
                    }
                }
                let courses = match last {
                    Some(l) => l.div_ceil(cal.semesters_per_course),
                    None => cal.max_courses,
                };
                if s.course < courses {
                    let start =
                        semester_start(cal, g.cohort_year, s.course * cal.semesters_per_course + 1);
                    if start < as_of {
                        out.push((AuditRule::OverdueCourseAdvance, s.id.clone(), start));
                    }
                }
            }
            StudentStatus::Expelled { .. } => {}
        }
    }
    out
}

/// All dates at which some student's debt picture can change: semester ends
/// and delivery dates, each with its neighbours.
pub fn interesting_dates(r: &Registry) -> Vec<NaiveDate> {
    let cal = r.calendar();
    let mut dates = Vec::new();
    for s in r.students() {
        let g = r.group(&s.group).unwrap();
        for e in &g.curriculum {
            dates.push(semester_end(cal, g.cohort_year, e.semester));
        }
        dates.extend(s.deliveries.values().copied());
    }
    let mut out: Vec<NaiveDate> = dates
        .iter()
        .flat_map(|d| [d.pred_opt().unwrap(), *d, d.succ_opt().unwrap()])
        .collect();
    out.sort();
    out.dedup();
    out
}

/// First day of the month after `d`.
pub fn next_month(d: NaiveDate) -> NaiveDate {
    if d.month() == 12 {
        NaiveDate::from_ymd_opt(d.year() + 1, 1, 1).unwrap()
    } else {
        NaiveDate::from_ymd_opt(d.year(), d.month() + 1, 1).unwrap()
    }
}
