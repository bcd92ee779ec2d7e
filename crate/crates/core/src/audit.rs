//! Automatic search for mistakes: students whose leave, studies or course
//! should already have changed according to the calendar.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::calendar::AcademicCalendar;
use crate::model::{Group, StudentId, StudentRecord, StudentStatus};
use crate::registry::Registry;
use crate::table::{Locale, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditRule {
    OverdueLeaveExit,
    OverdueGraduation,
    OverdueCourseAdvance,
}

impl AuditRule {
    pub fn as_str(self) -> &'static str {
        match self {
            AuditRule::OverdueLeaveExit => "overdue_leave_exit",
            AuditRule::OverdueGraduation => "overdue_graduation",
            AuditRule::OverdueCourseAdvance => "overdue_course_advance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditFinding {
    pub rule: AuditRule,
    pub student: StudentId,
    pub display_name: String,
    pub detail: String,
    pub due_date: NaiveDate,
    pub severity: Severity,
}

/// Number of courses the group's curriculum spans.
pub fn program_courses(group: &Group, cal: &AcademicCalendar) -> u32 {
    match group.final_semester() {
        Some(f) => f.div_ceil(cal.semesters_per_course),
        None => cal.max_courses,
    }
}

fn check_student(
    s: &StudentRecord,
    group: &Group,
    as_of: NaiveDate,
    cal: &AcademicCalendar,
    out: &mut Vec<(AuditRule, NaiveDate, String)>,
) {
    match &s.status {
        StudentStatus::AcademicLeave { until, .. } if *until < as_of => {
            out.push((
                AuditRule::OverdueLeaveExit,
                *until,
                format!("academic leave ended on {until} but the student has not returned"),
            ));
        }
        StudentStatus::Active => {
            if let Some(last) = group.final_semester() {
                let end = cal.semester_end(group.cohort_year, last);
                if end < as_of {
                    out.push((
                        AuditRule::OverdueGraduation,
                        end,
                        format!("final semester {last} of group {} ended on {end}", group.id),
                    ));
                }
            }
            if s.course < program_courses(group, cal) {
                let next = s.course + 1;
                let start = cal.course_start(group.cohort_year, next);
                if start < as_of {
                    out.push((
                        AuditRule::OverdueCourseAdvance,
                        start,
                        format!(
                            "course {next} started on {start}; record still shows course {}",
                            s.course
                        ),
                    ));
                }
            }
        }
        _ => {}
    }
}

pub fn run_audit(r: &Registry, as_of: NaiveDate, cal: &AcademicCalendar) -> Vec<AuditFinding> {
    let mut findings: Vec<(AuditFinding, &StudentRecord)> = Vec::new();
    let mut hits = Vec::new();
    for s in r.students() {
        hits.clear();
        check_student(s, r.group_of(s), as_of, cal, &mut hits);
        for (rule, due_date, detail) in hits.drain(..) {
            findings.push((
                AuditFinding {
                    rule,
                    student: s.id.clone(),
                    display_name: s.name.full(),
                    detail,
                    due_date,
                    severity: Severity::Error,
                },
                s,
            ));
        }
    }
    findings.sort_by(|(a, sa), (b, sb)| {
        a.rule
            .cmp(&b.rule)
            .then_with(|| sa.sort_key().cmp(&sb.sort_key()))
    });
    findings.into_iter().map(|(f, _)| f).collect()
}

pub fn audit_table(findings: &[AuditFinding], locale: Locale) -> Table {
    let mut t = Table::new([
        locale.pick("Правило", "Rule"),
        locale.pick("Студент", "Student"),
        locale.pick("ФИО", "Name"),
        locale.pick("Срок", "Due date"),
        locale.pick("Описание", "Detail"),
    ]);
    for f in findings {
        t.push(vec![
            f.rule.as_str().into(),
            f.student.to_string(),
            f.display_name.clone(),
            locale.date(f.due_date),
            f.detail.clone(),
        ]);
    }
    t
}
