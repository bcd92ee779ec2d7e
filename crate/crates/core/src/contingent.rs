//! Movement of the contingent: enrollment, expulsion, transfer and academic
//! leave, recorded as an append-only event log (`report.log`) that can be
//! replayed, and the monthly movement report built from it.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Funding, GroupId, MeanScore, PersonName, Sex, StudentId, StudentRecord, StudentStatus,
};
use crate::monitor::debts_for;
use crate::registry::Registry;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrollDetails {
    pub group: GroupId,
    pub course: u32,
    pub funding: Funding,
    pub sex: Sex,
    pub card_number: String,
    pub name: PersonName,
    #[serde(default)]
    pub mean_score: MeanScore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MovementKind {
    Enroll(EnrollDetails),
    Expel {
        reason: String,
        /// Filled in when the event is applied.
        #[serde(default)]
        debts_at_expulsion: u32,
    },
    Transfer {
        from: GroupId,
        to: GroupId,
    },
    LeaveStart {
        until: NaiveDate,
    },
    LeaveEnd,
    CourseAdvance,
}

impl MovementKind {
    pub fn name(&self) -> &'static str {
        match self {
            MovementKind::Enroll(_) => "enroll",
            MovementKind::Expel { .. } => "expel",
            MovementKind::Transfer { .. } => "transfer",
            MovementKind::LeaveStart { .. } => "leave_start",
            MovementKind::LeaveEnd => "leave_end",
            MovementKind::CourseAdvance => "course_advance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovementEvent {
    pub seq: u64,
    pub date: NaiveDate,
    pub student: StudentId,
    #[serde(flatten)]
    pub kind: MovementKind,
    pub actor: String,
}

/// Reason recorded on the expel event that ends a student's studies normally.
pub const GRADUATED: &str = "graduated";

fn violated(kind: &MovementKind, detail: impl Into<String>) -> Error {
    Error::precondition(kind.name(), detail)
}

impl Registry {
    /// Applies one movement event. `event.seq` must be [`Registry::next_seq`];
    /// the expulsion debt count is computed from the current state.
    pub fn apply_event(&self, event: MovementEvent) -> Result<Registry> {
        let mut next = self.clone();
        next.apply_in_place(event, true)?;
        Ok(next)
    }

    /// Assigns the next sequence number and applies the event.
    pub fn record_event(
        &self,
        date: NaiveDate,
        student: StudentId,
        kind: MovementKind,
        actor: impl Into<String>,
    ) -> Result<(Registry, MovementEvent)> {
        let event = MovementEvent {
            seq: self.next_seq(),
            date,
            student,
            kind,
            actor: actor.into(),
        };
        let mut next = self.clone();
        let applied = next.apply_in_place(event, true)?;
        Ok((next, applied))
    }

    fn apply_in_place(
        &mut self,
        mut event: MovementEvent,
        fresh_debts: bool,
    ) -> Result<MovementEvent> {
        let expected = self.next_seq();
        if event.seq != expected {
            return Err(violated(
                &event.kind,
                format!("expected seq {expected}, got {}", event.seq),
            ));
        }
        if let Some(last) = self.log.last() {
            if event.date < last.date {
                return Err(violated(
                    &event.kind,
                    format!(
                        "date {} precedes the previous event ({})",
                        event.date, last.date
                    ),
                ));
            }
        }
        if event.actor.chars().any(|c| c.is_control()) {
            return Err(Error::Invalid("actor contains control characters".into()));
        }
        if parse_log_line(&format_log_line(&event)).as_ref() != Ok(&event) {
            return Err(Error::Invalid(
                "event fields contain characters the log cannot hold".into(),
            ));
        }

        let date = event.date;
        let kind_name = event.kind.name();
        match &mut event.kind {
            MovementKind::Enroll(details) => {
                if self.students.contains_key(&event.student) {
                    return Err(Error::precondition(
                        kind_name,
                        format!("student id {} is already taken", event.student),
                    ));
                }
                self.group(&details.group)?;
                self.insert_student(StudentRecord {
                    id: event.student.clone(),
                    name: details.name.clone(),
                    card_number: details.card_number.clone(),
                    group: details.group.clone(),
                    course: details.course,
                    funding: details.funding,
                    sex: details.sex,
                    mean_score: details.mean_score,
                    status: StudentStatus::Active,
                    deliveries: BTreeMap::new(),
                })?;
            }
            MovementKind::Expel {
                reason,
                debts_at_expulsion,
            } => {
                let student = self.student(&event.student)?;
                if matches!(student.status, StudentStatus::Expelled { .. }) {
                    return Err(Error::precondition(
                        kind_name,
                        format!("student {} is already expelled", event.student),
                    ));
                }
                if reason.trim().is_empty() || reason.chars().any(|c| c.is_control()) {
                    return Err(Error::precondition(
                        kind_name,
                        "a printable reason is required",
                    ));
                }
                if fresh_debts {
                    *debts_at_expulsion = debts_for(self, student, date).total;
                }
                let status = StudentStatus::Expelled {
                    date,
                    reason: reason.clone(),
                    debts: *debts_at_expulsion,
                };
                self.student_mut(&event.student)?.status = status;
            }
            MovementKind::Transfer { from, to } => {
                let student = self.student(&event.student)?;
                if matches!(student.status, StudentStatus::Expelled { .. }) {
                    return Err(Error::precondition(
                        kind_name,
                        format!("student {} is expelled", event.student),
                    ));
                }
                if &student.group != from {
                    return Err(Error::precondition(
                        kind_name,
                        format!(
                            "student {} is in group {}, not {from}",
                            event.student, student.group
                        ),
                    ));
                }
                if from == to {
                    return Err(Error::precondition(
                        kind_name,
                        "source and target group are the same",
                    ));
                }
                let source = self.group(from)?;
                let target = self.group(to)?;
                let mut deliveries = BTreeMap::new();
                for (entry_id, d) in &student.deliveries {
                    let entry = source.entry(*entry_id).expect("deliveries resolve");
                    let mapped = target
                        .curriculum
                        .iter()
                        .find(|t| t.same_requirement(entry))
                        .ok_or_else(|| {
                            Error::precondition(
                                kind_name,
                                format!(
                                    "group {to} has no counterpart for delivered {}",
                                    entry.label()
                                ),
                            )
                        })?;
                    deliveries.insert(mapped.id, *d);
                }
                let course = target.course;
                let record = self.student_mut(&event.student)?;
                record.group = to.clone();
                record.course = course;
                record.deliveries = deliveries;
            }
            MovementKind::LeaveStart { until } => {
                let student = self.student(&event.student)?;
                if !student.status.is_active() {
                    return Err(Error::precondition(
                        kind_name,
                        format!("student {} is not active", event.student),
                    ));
                }
                if *until <= date {
                    return Err(Error::precondition(
                        kind_name,
                        format!("leave must end after {date}"),
                    ));
                }
                let status = StudentStatus::AcademicLeave {
                    since: date,
                    until: *until,
                };
                self.student_mut(&event.student)?.status = status;
            }
            MovementKind::LeaveEnd => {
                let student = self.student(&event.student)?;
                if !matches!(student.status, StudentStatus::AcademicLeave { .. }) {
                    return Err(Error::precondition(
                        kind_name,
                        format!("student {} is not on leave", event.student),
                    ));
                }
                self.student_mut(&event.student)?.status = StudentStatus::Active;
            }
            MovementKind::CourseAdvance => {
                let student = self.student(&event.student)?;
                if !student.status.is_active() {
                    return Err(Error::precondition(
                        kind_name,
                        format!("student {} is not active", event.student),
                    ));
                }
                if student.course >= self.calendar.max_courses {
                    return Err(Error::precondition(
                        kind_name,
                        format!("course {} is the last one", student.course),
                    ));
                }
                self.student_mut(&event.student)?.course += 1;
            }
        }
        self.log.push(event.clone());
        Ok(event)
    }
}

/// Folds `log` over `base`. Any invalid event aborts the whole replay and is
/// reported as a precondition violation carrying its sequence number.
pub fn replay(log: &[MovementEvent], base: &Registry) -> Result<Registry> {
    let mut r = base.clone();
    for event in log {
        let seq = event.seq;
        let kind = event.kind.name();
        r.apply_in_place(event.clone(), false)
            .map_err(|e| match e {
                Error::PreconditionViolated { kind, detail, .. } => Error::PreconditionViolated {
                    kind,
                    seq: Some(seq),
                    detail,
                },
                other => Error::PreconditionViolated {
                    kind: kind.into(),
                    seq: Some(seq),
                    detail: other.to_string(),
                },
            })?;
    }
    Ok(r)
}

pub fn format_log_line(e: &MovementEvent) -> String {
    let mut fields = vec![
        e.seq.to_string(),
        e.date.to_string(),
        e.kind.name().to_string(),
        e.student.to_string(),
    ];
    match &e.kind {
        MovementKind::Enroll(d) => fields.extend([
            d.group.to_string(),
            d.course.to_string(),
            d.funding.as_str().to_string(),
            d.sex.as_str().to_string(),
            d.card_number.clone(),
            d.name.surname.clone(),
            d.name.given_name.clone(),
            d.name.patronymic.clone(),
            d.mean_score.to_string(),
        ]),
        MovementKind::Expel {
            reason,
            debts_at_expulsion,
        } => fields.extend([reason.clone(), debts_at_expulsion.to_string()]),
        MovementKind::Transfer { from, to } => fields.extend([from.to_string(), to.to_string()]),
        MovementKind::LeaveStart { until } => fields.push(until.to_string()),
        MovementKind::LeaveEnd | MovementKind::CourseAdvance => {}
    }
    fields.push(e.actor.clone());
    fields.join("\t")
}

pub fn format_log(events: &[MovementEvent]) -> String {
    events.iter().map(|e| format_log_line(e) + "\n").collect()
}

pub fn parse_log_line(line: &str) -> std::result::Result<MovementEvent, String> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() < 5 {
        return Err(format!(
            "expected at least 5 tab-separated fields, got {}",
            f.len()
        ));
    }
    let date = |s: &str| {
        s.parse::<NaiveDate>()
            .map_err(|e| format!("bad date `{s}`: {e}"))
    };
    let seq = f[0]
        .parse::<u64>()
        .map_err(|_| format!("bad seq `{}`", f[0]))?;
    let student = StudentId::new(f[3]).map_err(|e| e.to_string())?;
    let extra = &f[4..f.len() - 1];
    let arity = |n: usize| {
        if extra.len() == n {
            Ok(())
        } else {
            Err(format!("`{}` takes {n} fields, got {}", f[2], extra.len()))
        }
    };
    let kind = match f[2] {
        "enroll" => {
            arity(9)?;
            MovementKind::Enroll(EnrollDetails {
                group: GroupId::new(extra[0]).map_err(|e| e.to_string())?,
                course: extra[1]
                    .parse()
                    .map_err(|_| format!("bad course `{}`", extra[1]))?,
                funding: extra[2].parse().map_err(|e: Error| e.to_string())?,
                sex: extra[3].parse().map_err(|e: Error| e.to_string())?,
                card_number: extra[4].to_string(),
                name: PersonName {
                    surname: extra[5].to_string(),
                    given_name: extra[6].to_string(),
                    patronymic: extra[7].to_string(),
                },
                mean_score: MeanScore::parse(extra[8]).map_err(|e| e.to_string())?,
            })
        }
        "expel" => {
            arity(2)?;
            MovementKind::Expel {
                reason: extra[0].to_string(),
                debts_at_expulsion: extra[1]
                    .parse()
                    .map_err(|_| format!("bad debt count `{}`", extra[1]))?,
            }
        }
        "transfer" => {
            arity(2)?;
            MovementKind::Transfer {
                from: GroupId::new(extra[0]).map_err(|e| e.to_string())?,
                to: GroupId::new(extra[1]).map_err(|e| e.to_string())?,
            }
        }
        "leave_start" => {
            arity(1)?;
            MovementKind::LeaveStart {
                until: date(extra[0])?,
            }
        }
        "leave_end" => {
            arity(0)?;
            MovementKind::LeaveEnd
        }
        "course_advance" => {
            arity(0)?;
            MovementKind::CourseAdvance
        }
        other => return Err(format!("unknown event kind `{other}`")),
    };
    Ok(MovementEvent {
        seq,
        date: date(f[1])?,
        student,
        kind,
        actor: f[f.len() - 1].to_string(),
    })
}

/// Parses a whole log; sequence numbers must run consecutively.
pub fn parse_log(text: &str, path: &Path) -> Result<Vec<MovementEvent>> {
    let mut events: Vec<MovementEvent> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let event = parse_log_line(line).map_err(|reason| Error::malformed(path, i + 1, reason))?;
        if let Some(prev) = events.last() {
            if event.seq != prev.seq + 1 {
                return Err(Error::malformed(
                    path,
                    i + 1,
                    format!("seq {} does not follow {}", event.seq, prev.seq),
                ));
            }
        }
        events.push(event);
    }
    Ok(events)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flow {
    Arrived,
    Left,
    Transferred,
}

impl Flow {
    pub const ALL: [Flow; 3] = [Flow::Arrived, Flow::Left, Flow::Transferred];

    pub fn as_str(self) -> &'static str {
        match self {
            Flow::Arrived => "arrived",
            Flow::Left => "left",
            Flow::Transferred => "transferred",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowCount {
    pub flow: Flow,
    pub funding: Funding,
    pub sex: Sex,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadCount {
    pub funding: Funding,
    pub sex: Sex,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovementReport {
    pub year: i32,
    pub month: u32,
    /// Nonzero flow cells, ordered by (flow, funding, sex).
    pub cells: Vec<FlowCount>,
    /// One entry per (funding, sex), ordered.
    pub opening: Vec<HeadCount>,
    pub closing: Vec<HeadCount>,
}

type Cohort = (Funding, Sex);

fn cohorts() -> impl Iterator<Item = Cohort> {
    Funding::ALL
        .into_iter()
        .flat_map(|f| Sex::ALL.into_iter().map(move |s| (f, s)))
}

impl MovementReport {
    pub fn empty(year: i32, month: u32) -> Self {
        let zero = || {
            cohorts()
                .map(|(funding, sex)| HeadCount {
                    funding,
                    sex,
                    count: 0,
                })
                .collect()
        };
        Self {
            year,
            month,
            cells: Vec::new(),
            opening: zero(),
            closing: zero(),
        }
    }

    pub fn period(&self) -> String {
        format!("{:04}-{:02}", self.year, self.month)
    }

    pub fn cell(&self, flow: Flow, funding: Funding, sex: Sex) -> u32 {
        self.cells
            .iter()
            .find(|c| c.flow == flow && c.funding == funding && c.sex == sex)
            .map_or(0, |c| c.count)
    }

    pub fn flow_total(&self, flow: Flow) -> u32 {
        self.cells
            .iter()
            .filter(|c| c.flow == flow)
            .map(|c| c.count)
            .sum()
    }

    fn head(counts: &[HeadCount], funding: Funding, sex: Sex) -> u32 {
        counts
            .iter()
            .find(|c| c.funding == funding && c.sex == sex)
            .map_or(0, |c| c.count)
    }

    pub fn opening_of(&self, funding: Funding, sex: Sex) -> u32 {
        Self::head(&self.opening, funding, sex)
    }

    pub fn closing_of(&self, funding: Funding, sex: Sex) -> u32 {
        Self::head(&self.closing, funding, sex)
    }

    /// closing = opening + arrived - left, per (funding, sex).
    pub fn conserves(&self) -> bool {
        cohorts().all(|(f, s)| {
            self.closing_of(f, s) as i64
                == self.opening_of(f, s) as i64 + self.cell(Flow::Arrived, f, s) as i64
                    - self.cell(Flow::Left, f, s) as i64
        })
    }
}

fn month_bounds(year: i32, month: u32) -> Result<(NaiveDate, NaiveDate)> {
    let start = NaiveDate::from_ymd_opt(year, month, 1)
        .ok_or_else(|| Error::Invalid(format!("invalid period {year}-{month:02}")))?;
    let end = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    }
    .ok_or_else(|| Error::Invalid(format!("invalid period {year}-{month:02}")))?;
    Ok((start, end))
}

/// Forward fold from head counts before `log[0]`.
fn fold_report(
    log: &[MovementEvent],
    mut present: BTreeMap<Cohort, i64>,
    mut attrs: HashMap<StudentId, Cohort>,
    year: i32,
    month: u32,
) -> Result<MovementReport> {
    let (start, end) = month_bounds(year, month)?;
    let mut flows: BTreeMap<(Flow, Funding, Sex), u32> = BTreeMap::new();
    let mut opening = None;
    for e in log {
        if e.date >= end {
            break;
        }
        if e.date >= start && opening.is_none() {
            opening = Some(present.clone());
        }
        if let MovementKind::Enroll(d) = &e.kind {
            attrs.insert(e.student.clone(), (d.funding, d.sex));
        }
        let Some(&(funding, sex)) = attrs.get(&e.student) else {
            continue;
        };
        let flow = match &e.kind {
            MovementKind::Enroll(_) => {
                *present.entry((funding, sex)).or_insert(0) += 1;
                Some(Flow::Arrived)
            }
            MovementKind::Expel { .. } => {
                *present.entry((funding, sex)).or_insert(0) -= 1;
                Some(Flow::Left)
            }
            MovementKind::Transfer { .. } => Some(Flow::Transferred),
            _ => None,
        };
        if let (Some(flow), true) = (flow, e.date >= start) {
            *flows.entry((flow, funding, sex)).or_insert(0) += 1;
        }
    }
    let opening = opening.unwrap_or_else(|| present.clone());
    let heads = |m: &BTreeMap<Cohort, i64>| -> Vec<HeadCount> {
        cohorts()
            .map(|(funding, sex)| HeadCount {
                funding,
                sex,
                count: m.get(&(funding, sex)).copied().unwrap_or(0).max(0) as u32,
            })
            .collect()
    };
    Ok(MovementReport {
        year,
        month,
        cells: flows
            .into_iter()
            .map(|((flow, funding, sex), count)| FlowCount {
                flow,
                funding,
                sex,
                count,
            })
            .collect(),
        opening: heads(&opening),
        closing: heads(&present),
    })
}

/// Monthly report for `log` applied on top of `r0`.
pub fn movement_report(
    log: &[MovementEvent],
    r0: &Registry,
    year: i32,
    month: u32,
) -> Result<MovementReport> {
    let mut present = BTreeMap::new();
    let mut attrs = HashMap::new();
    for s in r0.students() {
        attrs.insert(s.id.clone(), (s.funding, s.sex));
        if !matches!(s.status, StudentStatus::Expelled { .. }) {
            *present.entry((s.funding, s.sex)).or_insert(0) += 1;
        }
    }
    fold_report(log, present, attrs, year, month)
}

/// Monthly report from a registry's own log. Head counts before the first
/// event are inferred by taking the log's net effect off the current counts.
pub fn movement_report_current(r: &Registry, year: i32, month: u32) -> Result<MovementReport> {
    let attrs: HashMap<StudentId, Cohort> = r
        .students()
        .map(|s| (s.id.clone(), (s.funding, s.sex)))
        .collect();
    let mut present: BTreeMap<Cohort, i64> = BTreeMap::new();
    for s in r.students() {
        if !matches!(s.status, StudentStatus::Expelled { .. }) {
            *present.entry((s.funding, s.sex)).or_insert(0) += 1;
        }
    }
    for e in r.log() {
        let Some(&cohort) = attrs.get(&e.student) else {
            continue;
        };
        match e.kind {
            MovementKind::Enroll(_) => *present.entry(cohort).or_insert(0) -= 1,
            MovementKind::Expel { .. } => *present.entry(cohort).or_insert(0) += 1,
            _ => {}
        }
    }
    fold_report(r.log(), present, attrs, year, month)
}

const KIND_OPENING: &str = "opening";
const KIND_CLOSING: &str = "closing";
const ALL: &str = "all";

pub fn report_table(rep: &MovementReport) -> Table {
    let period = rep.period();
    let mut t = Table::new(["period", "kind", "funding", "sex", "count"]);
    let mut row = |kind: &str, funding: &str, sex: &str, count: u32| {
        t.push(vec![
            period.clone(),
            kind.into(),
            funding.into(),
            sex.into(),
            count.to_string(),
        ]);
    };
    for h in rep.opening.iter().filter(|h| h.count > 0) {
        row(KIND_OPENING, h.funding.as_str(), h.sex.as_str(), h.count);
    }
    for c in &rep.cells {
        row(c.flow.as_str(), c.funding.as_str(), c.sex.as_str(), c.count);
    }
    for h in rep.closing.iter().filter(|h| h.count > 0) {
        row(KIND_CLOSING, h.funding.as_str(), h.sex.as_str(), h.count);
    }
    let sum = |v: &[HeadCount]| v.iter().map(|h| h.count).sum::<u32>();
    row(KIND_OPENING, ALL, ALL, sum(&rep.opening));
    for flow in Flow::ALL {
        row(flow.as_str(), ALL, ALL, rep.flow_total(flow));
    }
    row(KIND_CLOSING, ALL, ALL, sum(&rep.closing));
    t
}

pub fn render_report_csv(rep: &MovementReport) -> String {
    report_table(rep).to_csv()
}

pub fn export_report(rep: &MovementReport, path: &Path) -> Result<()> {
    crate::store::write_atomic(path, render_report_csv(rep).as_bytes())
}

/// Reads back a report written by [`render_report_csv`]; totals rows are checked.
pub fn parse_report_csv(text: &str) -> Result<MovementReport> {
    let path = Path::new("<report>");
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let mut rep: Option<MovementReport> = None;
    let mut totals: BTreeMap<String, u32> = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::malformed(path, line, e.to_string()))?;
        if rec.len() != 5 {
            return Err(Error::malformed(path, line, "expected 5 columns"));
        }
        let (y, m) = rec[0]
            .split_once('-')
            .and_then(|(y, m)| Some((y.parse::<i32>().ok()?, m.parse::<u32>().ok()?)))
            .ok_or_else(|| Error::malformed(path, line, format!("bad period `{}`", &rec[0])))?;
        let rep = rep.get_or_insert_with(|| MovementReport::empty(y, m));
        if (rep.year, rep.month) != (y, m) {
            return Err(Error::malformed(path, line, "mixed periods"));
        }
        let count: u32 = rec[4]
            .parse()
            .map_err(|_| Error::malformed(path, line, format!("bad count `{}`", &rec[4])))?;
        if &rec[2] == ALL {
            totals.insert(rec[1].to_string(), count);
            continue;
        }
        let funding: Funding = rec[2]
            .parse()
            .map_err(|e: Error| Error::malformed(path, line, e.to_string()))?;
        let sex: Sex = rec[3]
            .parse()
            .map_err(|e: Error| Error::malformed(path, line, e.to_string()))?;
        let set_head = |v: &mut Vec<HeadCount>| {
            if let Some(h) = v.iter_mut().find(|h| h.funding == funding && h.sex == sex) {
                h.count = count;
            }
        };
        match &rec[1] {
            KIND_OPENING => set_head(&mut rep.opening),
            KIND_CLOSING => set_head(&mut rep.closing),
            k => {
                let flow = Flow::ALL
                    .into_iter()
                    .find(|f| f.as_str() == k)
                    .ok_or_else(|| Error::malformed(path, line, format!("unknown kind `{k}`")))?;
                rep.cells.push(FlowCount {
                    flow,
                    funding,
                    sex,
                    count,
                });
            }
        }
    }
    let mut rep = rep.ok_or_else(|| Error::malformed(path, 1, "no rows"))?;
    rep.cells.sort_by_key(|c| (c.flow, c.funding, c.sex));
    let sum = |v: &[HeadCount]| v.iter().map(|h| h.count).sum::<u32>();
    let mut expected = vec![
        (KIND_OPENING.to_string(), sum(&rep.opening)),
        (KIND_CLOSING.to_string(), sum(&rep.closing)),
    ];
    expected.extend(Flow::ALL.map(|f| (f.as_str().to_string(), rep.flow_total(f))));
    for (kind, value) in expected {
        if totals.get(&kind) != Some(&value) {
            return Err(Error::malformed(
                path,
                0,
                format!("totals row for `{kind}` does not match the cells"),
            ));
        }
    }
    Ok(rep)
}

/// Month of an event date, for grouping.
pub fn period_of(date: NaiveDate) -> (i32, u32) {
    (date.year(), date.month())
}

pub fn read_log_file(path: &Path) -> Result<Vec<MovementEvent>> {
    match fs::read_to_string(path) {
        Ok(text) => parse_log(&text, path),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(Error::io(path, e)),
    }
}
