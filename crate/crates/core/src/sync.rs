//! Exchange with the teacher's workplace: the per-discipline exchange file,
//! exam sheet generation, importing results as delivery dates, and the
//! outbound roster.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ControlCodeTable, ControlKind, CurriculumEntry, CurriculumEntryId, GroupId, StudentId,
    StudentRecord,
};
use crate::rating::{
    final_rating, is_admitted, passed, Grade, GradeScale, RatingOption, RatingRecord,
};
use crate::registry::Registry;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeLine {
    pub student: StudentId,
    pub record_book: String,
    pub semester_points: Option<u32>,
    pub exam_points: Option<u32>,
    #[serde(default)]
    pub bonus_points: u32,
    pub date: Option<NaiveDate>,
}

impl ExchangeLine {
    pub fn rating(&self, entry: Option<CurriculumEntryId>) -> RatingRecord {
        RatingRecord {
            student: self.student.clone(),
            entry,
            semester_points: self.semester_points,
            exam_points: self.exam_points,
            bonus_points: self.bonus_points,
            date: self.date,
        }
    }
}

/// Results of one discipline's control event for one group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeacherExchangeRecord {
    pub group: GroupId,
    pub discipline: String,
    pub semester: u32,
    pub control: ControlKind,
    /// Rating option preset name, `option1` or `option2`.
    pub option: String,
    pub sheet_date: NaiveDate,
    pub lines: Vec<ExchangeLine>,
}

fn opt_u32(s: &str) -> std::result::Result<Option<u32>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse()
            .map(Some)
            .map_err(|_| format!("`{s}` is not a whole number"))
    }
}

impl TeacherExchangeRecord {
    pub fn option(&self) -> Result<RatingOption> {
        RatingOption::preset(&self.option)
    }

    /// Header `group,discipline,semester,control code,option,sheet date`, then
    /// `student,record book,semester points,exam points,bonus points,date`.
    pub fn parse(text: &str, codes: &ControlCodeTable) -> Result<Self> {
        let path = std::path::Path::new("<exchange>");
        let bad = |line: usize, reason: String| Error::malformed(path, line, reason);
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = reader.records();
        let head = records
            .next()
            .ok_or_else(|| bad(1, "missing header line".into()))?
            .map_err(|e| bad(1, e.to_string()))?;
        if head.len() != 6 {
            return Err(bad(1, format!("header needs 6 fields, got {}", head.len())));
        }
        let code: u32 = head[3]
            .parse()
            .map_err(|_| bad(1, format!("bad control code `{}`", &head[3])))?;
        let control = codes
            .kind(code)
            .ok_or_else(|| bad(1, format!("control code {code} is not in the code table")))?;
        let mut x = TeacherExchangeRecord {
            group: GroupId::new(&head[0]).map_err(|e| bad(1, e.to_string()))?,
            discipline: head[1].to_string(),
            semester: head[2]
                .parse()
                .map_err(|_| bad(1, format!("bad semester `{}`", &head[2])))?,
            control,
            option: head[4].to_string(),
            sheet_date: head[5]
                .parse()
                .map_err(|_| bad(1, format!("bad date `{}`", &head[5])))?,
            lines: Vec::new(),
        };
        for (i, rec) in records.enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| bad(line, e.to_string()))?;
            if rec.len() != 6 {
                return Err(bad(line, format!("expected 6 fields, got {}", rec.len())));
            }
            x.lines.push(ExchangeLine {
                student: StudentId::new(&rec[0]).map_err(|e| bad(line, e.to_string()))?,
                record_book: rec[1].to_string(),
                semester_points: opt_u32(&rec[2]).map_err(|e| bad(line, e))?,
                exam_points: opt_u32(&rec[3]).map_err(|e| bad(line, e))?,
                bonus_points: opt_u32(&rec[4]).map_err(|e| bad(line, e))?.unwrap_or(0),
                date: match &rec[5] {
                    "" => None,
                    d => Some(
                        d.parse()
                            .map_err(|_| bad(line, format!("bad date `{d}`")))?,
                    ),
                },
            });
        }
        Ok(x)
    }

    pub fn render(&self, codes: &ControlCodeTable) -> Result<String> {
        let code = codes.code(self.control).ok_or_else(|| {
            Error::Invalid(format!(
                "no code for control kind {}",
                self.control.as_str()
            ))
        })?;
        let mut w = csv::WriterBuilder::new()
            .flexible(true)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::Invalid(e.to_string());
        w.write_record([
            self.group.to_string(),
            self.discipline.clone(),
            self.semester.to_string(),
            code.to_string(),
            self.option.clone(),
            self.sheet_date.to_string(),
        ])
        .map_err(io)?;
        let opt = |v: Option<u32>| v.map(|v| v.to_string()).unwrap_or_default();
        for l in &self.lines {
            w.write_record([
                l.student.to_string(),
                l.record_book.clone(),
                opt(l.semester_points),
                opt(l.exam_points),
                l.bonus_points.to_string(),
                l.date.map(|d| d.to_string()).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        Ok(
            String::from_utf8(w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?)
                .expect("utf-8 input"),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SheetMark {
    Excellent,
    Good,
    Satisfactory,
    Fail,
    NoShow,
}

impl SheetMark {
    pub const ALL: [SheetMark; 5] = [
        SheetMark::Excellent,
        SheetMark::Good,
        SheetMark::Satisfactory,
        SheetMark::Fail,
        SheetMark::NoShow,
    ];

    /// Word in the grade column.
    pub fn word_ru(self) -> &'static str {
        match self {
            SheetMark::NoShow => "неявка",
            other => other.grade().expect("graded").word_ru(),
        }
    }

    /// Label in the totals block.
    pub fn summary_label_ru(self) -> &'static str {
        match self {
            SheetMark::Excellent => "Отлично",
            SheetMark::Good => "Хорошо",
            SheetMark::Satisfactory => "Удовлетв",
            SheetMark::Fail => "Неудовлетв",
            SheetMark::NoShow => "Неявка",
        }
    }

    pub fn grade(self) -> Option<Grade> {
        match self {
            SheetMark::Excellent => Some(Grade::Excellent),
            SheetMark::Good => Some(Grade::Good),
            SheetMark::Satisfactory => Some(Grade::Satisfactory),
            SheetMark::Fail => Some(Grade::Fail),
            SheetMark::NoShow => None,
        }
    }
}

impl From<Grade> for SheetMark {
    fn from(g: Grade) -> Self {
        match g {
            Grade::Excellent => SheetMark::Excellent,
            Grade::Good => SheetMark::Good,
            Grade::Satisfactory => SheetMark::Satisfactory,
            Grade::Fail => SheetMark::Fail,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetHeader {
    pub academic_year: String,
    pub institute: String,
    pub specialty_code: String,
    pub semester: u32,
    pub group: String,
    pub department: String,
    pub discipline: String,
    pub control: Option<ControlKind>,
    pub date: Option<NaiveDate>,
    pub teacher: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetRow {
    pub ordinal: u32,
    pub student: StudentId,
    pub short_name: String,
    pub record_book: String,
    pub semester_points: Option<u32>,
    pub final_rating: Option<u32>,
    pub mark: SheetMark,
    pub date: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamSheet {
    pub header: SheetHeader,
    pub rows: Vec<SheetRow>,
    pub summary: BTreeMap<SheetMark, u32>,
}

fn group_member<'r>(r: &'r Registry, group: &GroupId, id: &StudentId) -> Result<&'r StudentRecord> {
    let s = r.student(id)?;
    if &s.group != group {
        return Err(Error::Invalid(format!(
            "student {id} is in group {}, not {group}",
            s.group
        )));
    }
    Ok(s)
}

/// Every line must name a distinct member of the record's group.
fn members<'r>(r: &'r Registry, x: &TeacherExchangeRecord) -> Result<Vec<&'r StudentRecord>> {
    let mut seen = std::collections::BTreeSet::new();
    x.lines
        .iter()
        .map(|l| {
            if !seen.insert(&l.student) {
                return Err(Error::Invalid(format!(
                    "student {} appears twice",
                    l.student
                )));
            }
            group_member(r, &x.group, &l.student)
        })
        .collect()
}

/// Builds the exam sheet. Rows follow alphabetical order of the students,
/// as printed sheets are numbered.
pub fn build_sheet(
    r: &Registry,
    x: &TeacherExchangeRecord,
    scale: &GradeScale,
) -> Result<ExamSheet> {
    let opt = x.option()?;
    let mut lines: Vec<(&StudentRecord, &ExchangeLine)> =
        members(r, x)?.into_iter().zip(&x.lines).collect();
    for (_, l) in &lines {
        opt.check(&l.rating(None))?;
    }
    lines.sort_by(|(a, _), (b, _)| a.sort_key().cmp(&b.sort_key()));

    let mut summary: BTreeMap<SheetMark, u32> =
        SheetMark::ALL.into_iter().map(|m| (m, 0)).collect();
    let mut rows = Vec::with_capacity(lines.len());
    for (i, (s, l)) in lines.into_iter().enumerate() {
        let rec = l.rating(None);
        let admitted = l.semester_points.is_some_and(|p| is_admitted(p, &opt));
        let graded = match final_rating(&rec, &opt) {
            Some(f) if admitted || l.exam_points.is_some() => Some((f, scale.to_grade(f as i64)?)),
            _ => None,
        };
        let row = match graded {
            Some((f, grade)) => SheetRow {
                ordinal: i as u32 + 1,
                student: s.id.clone(),
                short_name: s.name.short(),
                record_book: l.record_book.clone(),
                semester_points: l.semester_points,
                final_rating: Some(f),
                mark: grade.into(),
                date: l.date,
            },
            None => SheetRow {
                ordinal: i as u32 + 1,
                student: s.id.clone(),
                short_name: s.name.short(),
                record_book: l.record_book.clone(),
                semester_points: None,
                final_rating: None,
                mark: SheetMark::NoShow,
                date: None,
            },
        };
        *summary.get_mut(&row.mark).expect("all marks present") += 1;
        rows.push(row);
    }
    Ok(ExamSheet {
        header: SheetHeader {
            semester: x.semester,
            group: x.group.to_string(),
            discipline: x.discipline.clone(),
            control: Some(x.control),
            date: Some(x.sheet_date),
            ..SheetHeader::default()
        },
        rows,
        summary,
    })
}

impl ExamSheet {
    /// Plain-text rendering in the printed sheet's column order.
    pub fn render_text(&self) -> String {
        let h = &self.header;
        let short_date = |d: Option<NaiveDate>| {
            d.map(|d| d.format("%d.%m.%y").to_string())
                .unwrap_or_default()
        };
        let mut out = String::new();
        let year = if h.academic_year.is_empty() {
            String::new()
        } else {
            format!(" {} уч.год", h.academic_year)
        };
        let _ = writeln!(out, "ВЕДОМОСТЬ УЧЕТА ТЕКУЩЕЙ УСПЕВАЕМОСТИ{year}");
        let _ = writeln!(
            out,
            "Институт {} Специальность {} Семестр {} №гр {} Кафедра {}",
            h.institute, h.specialty_code, h.semester, h.group, h.department
        );
        let _ = writeln!(
            out,
            "Дисциплина {} {}",
            h.discipline,
            h.control
                .map(|c| c.label_ru().to_uppercase())
                .unwrap_or_default()
        );
        let _ = writeln!(out, "Дата {}", short_date(h.date));
        let _ = writeln!(out, "Преподаватель {}", h.teacher);
        let mut t = Table::new([
            "№",
            "Фамилия И.О.",
            "№ зач. книжки",
            "Рейтинг семестра",
            "Итог. рейтинг",
            "Оценка",
            "Дата",
            "Подпись",
        ]);
        let num = |v: Option<u32>| v.map(|v| v.to_string()).unwrap_or_default();
        for row in &self.rows {
            t.push(vec![
                row.ordinal.to_string(),
                row.short_name.clone(),
                row.record_book.clone(),
                num(row.semester_points),
                num(row.final_rating),
                row.mark.word_ru().to_string(),
                short_date(row.date),
                String::new(),
            ]);
        }
        out.push_str(&t.to_text());
        out.push('\n');
        for (i, mark) in SheetMark::ALL.into_iter().enumerate() {
            let prefix = if i == 0 { "ИТОГО: " } else { "" };
            let _ = writeln!(
                out,
                "{prefix}{} {}",
                mark.summary_label_ru(),
                self.summary[&mark]
            );
        }
        out
    }
}

fn resolve_entry<'g>(r: &'g Registry, x: &TeacherExchangeRecord) -> Result<&'g CurriculumEntry> {
    let group = r.group(&x.group)?;
    let mut matches = group.curriculum.iter().filter(|e| {
        e.discipline == x.discipline && e.semester == x.semester && e.control == x.control
    });
    let first = matches
        .next()
        .ok_or_else(|| Error::UnknownCurriculumEntry {
            group: x.group.clone(),
            discipline: x.discipline.clone(),
            semester: x.semester,
        })?;
    if matches.next().is_some() {
        return Err(Error::AmbiguousCurriculumEntry {
            group: x.group.clone(),
            discipline: x.discipline.clone(),
            semester: x.semester,
        });
    }
    Ok(first)
}

/// Records a delivery date for every passing line; failing and absent
/// students keep their debt. All lines are validated before any change.
pub fn import_results(
    r: &Registry,
    x: &TeacherExchangeRecord,
    scale: &GradeScale,
) -> Result<Registry> {
    let entry = resolve_entry(r, x)?.id;
    let opt = x.option()?;
    members(r, x)?;
    let mut deliveries = Vec::new();
    for l in &x.lines {
        let rec = l.rating(Some(entry));
        opt.check(&rec)?;
        if passed(&rec, &opt, scale) {
            let date = l
                .date
                .ok_or_else(|| Error::MissingDateOnPass(l.student.clone()))?;
            deliveries.push((&l.student, date));
        }
    }
    let mut next = r.clone();
    for (student, date) in deliveries {
        next.student_mut(student)?.deliveries.insert(entry, date);
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub entry: CurriculumEntryId,
    pub control: ControlKind,
    pub discipline: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterStudent {
    pub student: StudentId,
    pub record_book: String,
    pub surname: String,
    pub given_name: String,
    pub patronymic: String,
}

/// Parsed roster. Group and semester are only known when the roster has rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roster {
    pub group: Option<GroupId>,
    pub semester: Option<u32>,
    pub entries: Vec<RosterEntry>,
    pub students: Vec<RosterStudent>,
}

const ROSTER_FIXED: [&str; 7] = [
    "group",
    "semester",
    "student_id",
    "record_book",
    "surname",
    "given_name",
    "patronymic",
];

/// Roster of the group's active students for one semester: one column per
/// curriculum entry (`ordinal|control code|discipline`), left blank for the
/// teacher. A semester without entries yields a header-only file.
pub fn export_group_for_teacher(r: &Registry, group: &GroupId, semester: u32) -> Result<String> {
    let g = r.group(group)?;
    let codes = r.control_codes();
    let entries: Vec<&CurriculumEntry> = g.entries_in(semester).collect();
    let mut header: Vec<String> = ROSTER_FIXED.iter().map(|s| s.to_string()).collect();
    for e in &entries {
        let code = codes.code(e.control).ok_or_else(|| {
            Error::Invalid(format!("no code for control kind {}", e.control.as_str()))
        })?;
        header.push(format!("{}|{code}|{}", e.id, e.discipline));
    }
    let mut t = Table::new(header);
    if !entries.is_empty() {
        let mut students: Vec<&StudentRecord> = r
            .students()
            .filter(|s| &s.group == group && s.status.is_active())
            .collect();
        students.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        for s in students {
            let mut row = vec![
                group.to_string(),
                semester.to_string(),
                s.id.to_string(),
                s.card_number.clone(),
                s.name.surname.clone(),
                s.name.given_name.clone(),
                s.name.patronymic.clone(),
            ];
            row.extend(entries.iter().map(|_| String::new()));
            t.push(row);
        }
    }
    Ok(t.to_csv())
}

pub fn parse_roster(text: &str, codes: &ControlCodeTable) -> Result<Roster> {
    let path = std::path::Path::new("<roster>");
    let bad = |line: usize, reason: String| Error::malformed(path, line, reason);
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    if header.len() < ROSTER_FIXED.len() || header.iter().zip(ROSTER_FIXED).any(|(a, b)| a != b) {
        return Err(bad(
            1,
            "roster header does not start with the fixed columns".into(),
        ));
    }
    let mut entries = Vec::new();
    for col in header.iter().skip(ROSTER_FIXED.len()) {
        let mut parts = col.splitn(3, '|');
        let (Some(ordinal), Some(code), Some(discipline)) =
            (parts.next(), parts.next(), parts.next())
        else {
            return Err(bad(
                1,
                format!("entry column `{col}` is not `ordinal|code|discipline`"),
            ));
        };
        let ordinal = ordinal
            .parse()
            .map_err(|_| bad(1, format!("bad ordinal in `{col}`")))?;
        let code: u32 = code
            .parse()
            .map_err(|_| bad(1, format!("bad control code in `{col}`")))?;
        entries.push(RosterEntry {
            entry: CurriculumEntryId(ordinal),
            control: codes
                .kind(code)
                .ok_or_else(|| bad(1, format!("unknown control code {code}")))?,
            discipline: discipline.to_string(),
        });
    }
    let mut roster = Roster {
        group: None,
        semester: None,
        entries,
        students: Vec::new(),
    };
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        let group = GroupId::new(&rec[0]).map_err(|e| bad(line, e.to_string()))?;
        let semester: u32 = rec[1]
            .parse()
            .map_err(|_| bad(line, format!("bad semester `{}`", &rec[1])))?;
        if roster.group.get_or_insert_with(|| group.clone()) != &group
            || *roster.semester.get_or_insert(semester) != semester
        {
            return Err(bad(line, "rows disagree on group or semester".into()));
        }
        roster.students.push(RosterStudent {
            student: StudentId::new(&rec[2]).map_err(|e| bad(line, e.to_string()))?,
            record_book: rec[3].to_string(),
            surname: rec[4].to_string(),
            given_name: rec[5].to_string(),
            patronymic: rec[6].to_string(),
        });
    }
    Ok(roster)
}

/// One blank exchange record per roster entry: every student unmarked.
pub fn roster_to_exchange(
    roster: &Roster,
    option: &str,
    sheet_date: NaiveDate,
) -> Vec<TeacherExchangeRecord> {
    let (Some(group), Some(semester)) = (&roster.group, roster.semester) else {
        return Vec::new();
    };
    roster
        .entries
        .iter()
        .map(|e| TeacherExchangeRecord {
            group: group.clone(),
            discipline: e.discipline.clone(),
            semester,
            control: e.control,
            option: option.to_string(),
            sheet_date,
            lines: roster
                .students
                .iter()
                .map(|s| ExchangeLine {
                    student: s.student.clone(),
                    record_book: s.record_book.clone(),
                    semester_points: None,
                    exam_points: None,
                    bonus_points: 0,
                    date: None,
                })
                .collect(),
        })
        .collect()
}
