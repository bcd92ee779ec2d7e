//! On-disk store: one CSV per group for students and for the training plan,
//! a group index, the calendar and the movement log.
//!
//! ```text
//! root/
//!   groups.csv            group,course,direction,cohort_year
//!   calendar.conf         key = value
//!   plans/<GROUP>.csv     ordinal,discipline,semester,control[<code table>]
//!   students/<GROUP>.csv  id,surname,...,status_debts,<ordinal>...
//!   report.log            movement events, tab-separated, append-only
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::calendar::AcademicCalendar;
use crate::contingent::{format_log, read_log_file};
use crate::error::{Error, Result};
use crate::model::{
    ControlCodeTable, CurriculumEntry, CurriculumEntryId, Group, GroupId, MeanScore, PersonName,
    StudentId, StudentRecord, StudentStatus,
};
use crate::registry::Registry;

pub const GROUPS_FILE: &str = "groups.csv";
pub const CALENDAR_FILE: &str = "calendar.conf";
pub const LOG_FILE: &str = "report.log";
pub const PLANS_DIR: &str = "plans";
pub const STUDENTS_DIR: &str = "students";

const GROUP_COLUMNS: [&str; 4] = ["group", "course", "direction", "cohort_year"];
const STUDENT_COLUMNS: [&str; 14] = [
    "id",
    "surname",
    "given_name",
    "patronymic",
    "course",
    "funding",
    "sex",
    "card_number",
    "mean_score",
    "status",
    "status_date",
    "status_until",
    "status_reason",
    "status_debts",
];

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::io(path, "not a file path"))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Reads a CSV file into (header, rows-with-line-numbers).
type CsvRows = Vec<(usize, Vec<String>)>;

fn read_csv(path: &Path) -> Result<(Vec<String>, CsvRows)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::malformed(path, 1, e.to_string()))?
        .iter()
        .map(String::from)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::malformed(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        rows.push((line, rec.iter().map(String::from).collect()));
    }
    Ok((header, rows))
}

fn csv_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string(), path.clone());
            }
        }
    }
    Ok(out)
}

fn plan_header(codes: &ControlCodeTable) -> Vec<String> {
    vec![
        "ordinal".into(),
        "discipline".into(),
        "semester".into(),
        format!("control[{}]", codes.render()),
    ]
}

/// (line, ordinal, discipline, semester, control code)
type PlanRow = (usize, u32, String, u32, u32);

fn parse_plan(path: &Path) -> Result<(ControlCodeTable, Vec<PlanRow>)> {
    let (header, rows) = read_csv(path)?;
    if header.len() != 4 || header[..3] != ["ordinal", "discipline", "semester"] {
        return Err(Error::malformed(
            path,
            1,
            "expected header ordinal,discipline,semester,control",
        ));
    }
    let codes = match header[3].as_str() {
        "control" => ControlCodeTable::default(),
        h => {
            let table = h
                .strip_prefix("control[")
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| Error::malformed(path, 1, format!("bad control column `{h}`")))?;
            ControlCodeTable::parse(table).map_err(|e| Error::malformed(path, 1, e.to_string()))?
        }
    };
    let mut out = Vec::new();
    for (line, row) in rows {
        if row.len() != 4 {
            return Err(Error::malformed(
                path,
                line,
                format!("expected 4 fields, got {}", row.len()),
            ));
        }
        let num = |s: &str, what: &str| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| Error::malformed(path, line, format!("bad {what} `{s}`")))
        };
        out.push((
            line,
            num(&row[0], "ordinal")?,
            row[1].clone(),
            num(&row[2], "semester")?,
            num(&row[3], "control code")?,
        ));
    }
    Ok((codes, out))
}

pub fn load_registry(root: &Path) -> Result<Registry> {
    let plans_dir = root.join(PLANS_DIR);
    let students_dir = root.join(STUDENTS_DIR);
    for dir in [&plans_dir, &students_dir] {
        if !dir.is_dir() {
            return Err(Error::io(dir, "missing store directory"));
        }
    }

    let cal_path = root.join(CALENDAR_FILE);
    let calendar = if cal_path.exists() {
        let text = fs::read_to_string(&cal_path).map_err(|e| Error::io(&cal_path, e))?;
        AcademicCalendar::parse(&text).map_err(|e| Error::malformed(&cal_path, 0, e.to_string()))?
    } else {
        AcademicCalendar::default()
    };

    // Group index.
    let groups_path = root.join(GROUPS_FILE);
    let mut meta: BTreeMap<GroupId, (u32, String, i32)> = BTreeMap::new();
    if groups_path.exists() {
        let (header, rows) = read_csv(&groups_path)?;
        if header != GROUP_COLUMNS {
            return Err(Error::malformed(
                &groups_path,
                1,
                format!("expected header {}", GROUP_COLUMNS.join(",")),
            ));
        }
        for (line, row) in rows {
            let bad = |r: String| Error::malformed(&groups_path, line, r);
            if row.len() != 4 {
                return Err(bad(format!("expected 4 fields, got {}", row.len())));
            }
            let id = GroupId::new(&row[0]).map_err(|e| bad(e.to_string()))?;
            let course = row[1]
                .parse()
                .map_err(|_| bad(format!("bad course `{}`", row[1])))?;
            let cohort = row[3]
                .parse()
                .map_err(|_| bad(format!("bad cohort year `{}`", row[3])))?;
            if meta
                .insert(id.clone(), (course, row[2].clone(), cohort))
                .is_some()
            {
                return Err(bad(format!("group {id} listed twice")));
            }
        }
    }

    // Plans.
    let plan_files = csv_files(&plans_dir)?;
    let mut codes: Option<ControlCodeTable> = None;
    let mut groups = Vec::new();
    for (stem, path) in &plan_files {
        let id =
            GroupId::new(stem.as_str()).map_err(|e| Error::malformed(path, 0, e.to_string()))?;
        let (table, rows) = parse_plan(path)?;
        match &codes {
            Some(c) if *c != table => {
                return Err(Error::malformed(
                    path,
                    1,
                    "control code table differs from other plans",
                ))
            }
            Some(_) => {}
            None => codes = Some(table.clone()),
        }
        let (course, direction, cohort_year) = meta.get(&id).cloned().ok_or_else(|| {
            Error::malformed(path, 0, format!("group {id} is missing from {GROUPS_FILE}"))
        })?;
        let mut curriculum = Vec::new();
        for (line, ordinal, discipline, semester, code) in rows {
            let control = table.kind(code).ok_or_else(|| {
                Error::malformed(
                    path,
                    line,
                    format!("control code {code} is not in the table"),
                )
            })?;
            curriculum.push(CurriculumEntry {
                id: CurriculumEntryId(ordinal),
                discipline,
                semester,
                control,
            });
        }
        groups.push(Group {
            id,
            course,
            direction,
            cohort_year,
            curriculum,
        });
    }
    if let Some(id) = meta.keys().find(|id| !plan_files.contains_key(id.as_str())) {
        return Err(Error::malformed(
            &groups_path,
            0,
            format!("group {id} has no plan file"),
        ));
    }

    let mut r = Registry::new(calendar, codes.unwrap_or_default());
    for g in groups {
        let path = plans_dir.join(format!("{}.csv", g.id));
        r.insert_group(g)
            .map_err(|e| Error::malformed(&path, 0, e.to_string()))?;
    }

    // Students.
    for (stem, path) in csv_files(&students_dir)? {
        let group_id =
            GroupId::new(stem.as_str()).map_err(|e| Error::malformed(&path, 0, e.to_string()))?;
        let group = r
            .group(&group_id)
            .map_err(|_| Error::malformed(&path, 0, format!("no plan for group {group_id}")))?
            .clone();
        let (header, rows) = read_csv(&path)?;
        if header.len() < STUDENT_COLUMNS.len()
            || header[..STUDENT_COLUMNS.len()] != STUDENT_COLUMNS
        {
            return Err(Error::malformed(
                &path,
                1,
                "student header does not start with the fixed columns",
            ));
        }
        let delivery_cols = header[STUDENT_COLUMNS.len()..]
            .iter()
            .map(|h| {
                h.parse::<u32>().map(CurriculumEntryId).map_err(|_| {
                    Error::malformed(&path, 1, format!("delivery column `{h}` is not an ordinal"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        for (line, row) in rows {
            let student = parse_student(&path, line, &row, &group_id, &delivery_cols)?;
            if let Some(entry) = student
                .deliveries
                .keys()
                .find(|e| group.entry(**e).is_none())
            {
                return Err(Error::DanglingReference {
                    student: student.id.clone(),
                    group: group_id.clone(),
                    entry: *entry,
                });
            }
            match r.insert_student(student) {
                Err(e @ (Error::DuplicateStudentId(_) | Error::DanglingReference { .. })) => {
                    return Err(e)
                }
                Err(e) => return Err(Error::malformed(&path, line, e.to_string())),
                Ok(()) => {}
            }
        }
    }

    r.log = read_log_file(&root.join(LOG_FILE))?;
    r.validate()?;
    Ok(r)
}

fn parse_student(
    path: &Path,
    line: usize,
    row: &[String],
    group: &GroupId,
    delivery_cols: &[CurriculumEntryId],
) -> Result<StudentRecord> {
    let bad = |r: String| Error::malformed(path, line, r);
    if row.len() != STUDENT_COLUMNS.len() + delivery_cols.len() {
        return Err(bad(format!(
            "expected {} fields, got {}",
            STUDENT_COLUMNS.len() + delivery_cols.len(),
            row.len()
        )));
    }
    let date = |s: &str| {
        s.parse::<NaiveDate>()
            .map_err(|_| bad(format!("bad date `{s}`")))
    };
    let status = match row[9].as_str() {
        "active" => StudentStatus::Active,
        "academic_leave" => StudentStatus::AcademicLeave {
            since: date(&row[10])?,
            until: date(&row[11])?,
        },
        "expelled" => StudentStatus::Expelled {
            date: date(&row[10])?,
            reason: row[12].clone(),
            debts: row[13]
                .parse()
                .map_err(|_| bad(format!("bad debt count `{}`", row[13])))?,
        },
        other => return Err(bad(format!("unknown status `{other}`"))),
    };
    let mut deliveries = BTreeMap::new();
    for (col, cell) in delivery_cols.iter().zip(&row[STUDENT_COLUMNS.len()..]) {
        if !cell.is_empty() {
            deliveries.insert(*col, date(cell)?);
        }
    }
    Ok(StudentRecord {
        id: StudentId::new(&row[0]).map_err(|e| bad(e.to_string()))?,
        name: PersonName {
            surname: row[1].clone(),
            given_name: row[2].clone(),
            patronymic: row[3].clone(),
        },
        card_number: row[7].clone(),
        group: group.clone(),
        course: row[4]
            .parse()
            .map_err(|_| bad(format!("bad course `{}`", row[4])))?,
        funding: row[5].parse().map_err(|e: Error| bad(e.to_string()))?,
        sex: row[6].parse().map_err(|e: Error| bad(e.to_string()))?,
        mean_score: MeanScore::parse(&row[8]).map_err(|e| bad(e.to_string()))?,
        status,
        deliveries,
    })
}

fn student_row(s: &StudentRecord, group: &Group) -> Vec<String> {
    let (status, date, until, reason, debts) = match &s.status {
        StudentStatus::Active => (
            "active",
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ),
        StudentStatus::AcademicLeave { since, until } => (
            "academic_leave",
            since.to_string(),
            until.to_string(),
            String::new(),
            String::new(),
        ),
        StudentStatus::Expelled {
            date,
            reason,
            debts,
        } => (
            "expelled",
            date.to_string(),
            String::new(),
            reason.clone(),
            debts.to_string(),
        ),
    };
    let mut row = vec![
        s.id.to_string(),
        s.name.surname.clone(),
        s.name.given_name.clone(),
        s.name.patronymic.clone(),
        s.course.to_string(),
        s.funding.as_str().into(),
        s.sex.as_str().into(),
        s.card_number.clone(),
        s.mean_score.to_string(),
        status.into(),
        date,
        until,
        reason,
        debts,
    ];
    row.extend(group.curriculum.iter().map(|e| {
        s.deliveries
            .get(&e.id)
            .map(|d| d.to_string())
            .unwrap_or_default()
    }));
    row
}

/// Canonical rendering of every store file, keyed by path relative to the root.
/// The log is not included.
pub fn render_store(r: &Registry) -> Result<BTreeMap<PathBuf, Vec<u8>>> {
    let mut files = BTreeMap::new();
    files.insert(
        PathBuf::from(CALENDAR_FILE),
        r.calendar().render().into_bytes(),
    );

    let header: Vec<String> = GROUP_COLUMNS.iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = r
        .groups()
        .map(|g| {
            vec![
                g.id.to_string(),
                g.course.to_string(),
                g.direction.clone(),
                g.cohort_year.to_string(),
            ]
        })
        .collect();
    if !rows.is_empty() {
        files.insert(PathBuf::from(GROUPS_FILE), csv_bytes(&header, &rows));
    }

    let codes = r.control_codes();
    let mut by_group: BTreeMap<&GroupId, Vec<&StudentRecord>> = BTreeMap::new();
    for s in r.students() {
        by_group.entry(&s.group).or_default().push(s);
    }
    for g in r.groups() {
        let rows = g
            .curriculum
            .iter()
            .map(|e| {
                let code = codes.code(e.control).ok_or_else(|| {
                    Error::Invalid(format!("no code for control kind {}", e.control.as_str()))
                })?;
                Ok(vec![
                    e.id.to_string(),
                    e.discipline.clone(),
                    e.semester.to_string(),
                    code.to_string(),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        files.insert(
            Path::new(PLANS_DIR).join(format!("{}.csv", g.id)),
            csv_bytes(&plan_header(codes), &rows),
        );

        if let Some(mut students) = by_group.remove(&g.id) {
            students.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
            let mut header: Vec<String> = STUDENT_COLUMNS.iter().map(|s| s.to_string()).collect();
            header.extend(g.curriculum.iter().map(|e| e.id.to_string()));
            let rows: Vec<Vec<String>> = students.iter().map(|s| student_row(s, g)).collect();
            files.insert(
                Path::new(STUDENTS_DIR).join(format!("{}.csv", g.id)),
                csv_bytes(&header, &rows),
            );
        }
    }
    Ok(files)
}

/// Appends the events the file does not have yet; an existing log that is
/// not a prefix of the registry's log is refused.
fn sync_log(r: &Registry, root: &Path) -> Result<()> {
    let path = root.join(LOG_FILE);
    let rendered = format_log(r.log());
    let existing = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(Error::io(&path, e)),
    };
    if existing == rendered {
        return Ok(());
    }
    if existing.is_empty() {
        if rendered.is_empty() {
            return Ok(());
        }
        return write_atomic(&path, rendered.as_bytes());
    }
    let tail = rendered.strip_prefix(existing.as_str()).ok_or_else(|| {
        Error::io(
            &path,
            "log on disk diverges from the registry; refusing to rewrite it",
        )
    })?;
    let mut f = fs::OpenOptions::new()
        .append(true)
        .open(&path)
        .map_err(|e| Error::io(&path, e))?;
    f.write_all(tail.as_bytes())
        .map_err(|e| Error::io(&path, e))?;
    f.sync_all().map_err(|e| Error::io(&path, e))
}

pub fn save_registry(r: &Registry, root: &Path) -> Result<()> {
    let files = render_store(r)?;
    for dir in [PLANS_DIR, STUDENTS_DIR] {
        let dir = root.join(dir);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    for (rel, bytes) in &files {
        let path = root.join(rel);
        if fs::read(&path).is_ok_and(|old| &old == bytes) {
            continue;
        }
        write_atomic(&path, bytes)?;
    }
    // Stale group files.
    for dir in [PLANS_DIR, STUDENTS_DIR] {
        for (stem, path) in csv_files(&root.join(dir))? {
            if !files.contains_key(&Path::new(dir).join(format!("{stem}.csv"))) {
                fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
            }
        }
    }
    let groups_path = root.join(GROUPS_FILE);
    if !files.contains_key(Path::new(GROUPS_FILE)) && groups_path.exists() {
        fs::remove_file(&groups_path).map_err(|e| Error::io(&groups_path, e))?;
    }
    sync_log(r, root)
}
