//! Progress monitoring: per-student academic debts as of any date, the
//! filtered and sorted debt pivot, the debt series over time and the
//! discipline-mastery table.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ControlKind, CurriculumEntryId, Funding, GroupId, MeanScore, PersonName, Sex, StatusKind,
    StudentId, StudentRecord, StudentStatus,
};
use crate::registry::Registry;
use crate::table::{Locale, Table};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DebtSummary {
    /// Debt count for every semester completed as of the query date.
    pub per_semester: BTreeMap<u32, u32>,
    pub total: u32,
    pub last_delivery: Option<NaiveDate>,
}

/// Date at which semester completion is judged. Semesters stop advancing
/// while a student is on leave or after expulsion.
fn completion_cutoff(status: &StudentStatus, as_of: NaiveDate) -> NaiveDate {
    match status {
        StudentStatus::Active => as_of,
        StudentStatus::AcademicLeave { since, .. } => as_of.min(*since),
        StudentStatus::Expelled { date, .. } => as_of.min(*date),
    }
}

pub(crate) fn debts_for(r: &Registry, s: &StudentRecord, as_of: NaiveDate) -> DebtSummary {
    let group = r.group_of(s);
    let cal = r.calendar();
    let cutoff = completion_cutoff(&s.status, as_of);
    let mut out = DebtSummary::default();
    for entry in &group.curriculum {
        if !cal.is_semester_complete(group.cohort_year, entry.semester, cutoff) {
            continue;
        }
        let delivered = s.deliveries.get(&entry.id).is_some_and(|d| *d <= as_of);
        let slot = out.per_semester.entry(entry.semester).or_insert(0);
        if !delivered {
            *slot += 1;
            out.total += 1;
        }
    }
    out.last_delivery = s
        .deliveries
        .values()
        .filter(|d| **d <= as_of)
        .max()
        .copied();
    out
}

pub fn debts_of(r: &Registry, student: &StudentId, as_of: NaiveDate) -> Result<DebtSummary> {
    Ok(debts_for(r, r.student(student)?, as_of))
}

/// Selects students by status plus any conjunction of attribute filters.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StudentFilter {
    pub status: FilterStatus,
    pub course: Option<u32>,
    pub direction: Option<String>,
    pub group: Option<GroupId>,
    pub funding: Option<Funding>,
    pub sex: Option<Sex>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterStatus {
    /// Studying students only; leave and expelled are separate views.
    #[default]
    Active,
    OnAcademicLeave,
    Expelled,
    /// Every student regardless of status (used by exports).
    Any,
}

impl FromStr for FilterStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "active" => Ok(FilterStatus::Active),
            "leave" | "academic_leave" => Ok(FilterStatus::OnAcademicLeave),
            "expelled" => Ok(FilterStatus::Expelled),
            "any" | "all" => Ok(FilterStatus::Any),
            _ => Err(Error::Invalid(format!("unknown status filter `{s}`"))),
        }
    }
}

impl StudentFilter {
    pub fn all_active() -> Self {
        Self::default()
    }

    pub fn on_academic_leave() -> Self {
        Self {
            status: FilterStatus::OnAcademicLeave,
            ..Self::default()
        }
    }

    pub fn expelled() -> Self {
        Self {
            status: FilterStatus::Expelled,
            ..Self::default()
        }
    }

    pub fn by_group(group: GroupId) -> Self {
        Self {
            group: Some(group),
            ..Self::default()
        }
    }

    /// Parses `key=value` pairs: status, course, direction, group, funding, sex.
    pub fn from_pairs<K: AsRef<str>, V: AsRef<str>>(
        pairs: impl IntoIterator<Item = (K, V)>,
    ) -> Result<Self> {
        let mut f = Self::default();
        for (k, v) in pairs {
            let (k, v) = (k.as_ref(), v.as_ref());
            match k {
                "status" => f.status = v.parse()?,
                "course" => {
                    f.course = Some(
                        v.parse()
                            .map_err(|_| Error::Invalid(format!("course `{v}` is not a number")))?,
                    )
                }
                "direction" => f.direction = Some(v.to_string()),
                "group" => f.group = Some(GroupId::new(v)?),
                "funding" => f.funding = Some(v.parse()?),
                "sex" => f.sex = Some(v.parse()?),
                other => return Err(Error::Invalid(format!("unknown filter `{other}`"))),
            }
        }
        Ok(f)
    }

    /// Parses the compact form `group=5210M,funding=budget`.
    pub fn parse(spec: &str) -> Result<Self> {
        let pairs = spec
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| {
                item.split_once('=')
                    .ok_or_else(|| Error::Invalid(format!("filter item `{item}` lacks `=`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_pairs(pairs)
    }

    pub fn matches(&self, r: &Registry, s: &StudentRecord) -> bool {
        let status_ok = match self.status {
            FilterStatus::Active => s.status.kind() == StatusKind::Active,
            FilterStatus::OnAcademicLeave => s.status.kind() == StatusKind::AcademicLeave,
            FilterStatus::Expelled => s.status.kind() == StatusKind::Expelled,
            FilterStatus::Any => true,
        };
        status_ok
            && self.course.is_none_or(|c| s.course == c)
            && self.group.as_ref().is_none_or(|g| &s.group == g)
            && self.funding.is_none_or(|f| s.funding == f)
            && self.sex.is_none_or(|x| s.sex == x)
            && self
                .direction
                .as_ref()
                .is_none_or(|d| &r.group_of(s).direction == d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DebtPivotRow {
    pub student: StudentId,
    pub name: PersonName,
    pub display_name: String,
    pub group: GroupId,
    pub course: u32,
    pub mean_score: MeanScore,
    /// For expelled students: the count frozen at expulsion.
    pub total_debts: u32,
    pub last_delivery: Option<NaiveDate>,
    /// Empty for expelled students.
    pub per_semester: BTreeMap<u32, u32>,
    pub funding: Funding,
    pub sex: Sex,
    pub status: StudentStatus,
}

fn pivot_row(r: &Registry, s: &StudentRecord, as_of: NaiveDate) -> DebtPivotRow {
    let debts = debts_for(r, s, as_of);
    let (total, per_semester) = match &s.status {
        StudentStatus::Expelled { debts: frozen, .. } => (*frozen, BTreeMap::new()),
        _ => (debts.total, debts.per_semester),
    };
    DebtPivotRow {
        student: s.id.clone(),
        name: s.name.clone(),
        display_name: s.name.full(),
        group: s.group.clone(),
        course: s.course,
        mean_score: s.mean_score,
        total_debts: total,
        last_delivery: debts.last_delivery,
        per_semester,
        funding: s.funding,
        sex: s.sex,
        status: s.status.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortColumn {
    Name,
    Group,
    Course,
    MeanScore,
    TotalDebts,
    LastDelivery,
    Semester(u32),
    Funding,
    Sex,
}

impl fmt::Display for SortColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SortColumn::Name => f.write_str("name"),
            SortColumn::Group => f.write_str("group"),
            SortColumn::Course => f.write_str("course"),
            SortColumn::MeanScore => f.write_str("mean_score"),
            SortColumn::TotalDebts => f.write_str("total_debts"),
            SortColumn::LastDelivery => f.write_str("last_delivery"),
            SortColumn::Semester(n) => write!(f, "semester{n}"),
            SortColumn::Funding => f.write_str("funding"),
            SortColumn::Sex => f.write_str("sex"),
        }
    }
}

impl FromStr for SortColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "name" => SortColumn::Name,
            "group" => SortColumn::Group,
            "course" => SortColumn::Course,
            "mean_score" => SortColumn::MeanScore,
            "total_debts" => SortColumn::TotalDebts,
            "last_delivery" => SortColumn::LastDelivery,
            "funding" => SortColumn::Funding,
            "sex" => SortColumn::Sex,
            other => match other.strip_prefix("semester").map(str::parse) {
                Some(Ok(n)) if n >= 1 => SortColumn::Semester(n),
                _ => return Err(Error::Invalid(format!("unknown sort column `{other}`"))),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PivotSort {
    pub column: SortColumn,
    pub descending: bool,
}

impl Default for PivotSort {
    fn default() -> Self {
        Self {
            column: SortColumn::Name,
            descending: false,
        }
    }
}

impl FromStr for PivotSort {
    type Err = Error;

    /// `column` or `column:asc|desc`.
    fn from_str(s: &str) -> Result<Self> {
        let (col, dir) = s.split_once(':').unwrap_or((s, "asc"));
        let descending = match dir {
            "asc" => false,
            "desc" => true,
            other => return Err(Error::Invalid(format!("unknown sort direction `{other}`"))),
        };
        Ok(Self {
            column: col.parse()?,
            descending,
        })
    }
}

fn compare_column(a: &DebtPivotRow, b: &DebtPivotRow, col: SortColumn) -> Ordering {
    match col {
        SortColumn::Name => Ordering::Equal,
        SortColumn::Group => a.group.cmp(&b.group),
        SortColumn::Course => a.course.cmp(&b.course),
        SortColumn::MeanScore => a.mean_score.cmp(&b.mean_score),
        SortColumn::TotalDebts => a.total_debts.cmp(&b.total_debts),
        SortColumn::LastDelivery => a.last_delivery.cmp(&b.last_delivery),
        SortColumn::Semester(n) => a.per_semester.get(&n).cmp(&b.per_semester.get(&n)),
        SortColumn::Funding => a.funding.cmp(&b.funding),
        SortColumn::Sex => a.sex.cmp(&b.sex),
    }
}

fn name_key(row: &DebtPivotRow) -> (&str, &str, &str, &StudentId) {
    (
        &row.name.surname,
        &row.name.given_name,
        &row.name.patronymic,
        &row.student,
    )
}

pub fn pivot(
    r: &Registry,
    filter: &StudentFilter,
    as_of: NaiveDate,
    sort: PivotSort,
) -> Vec<DebtPivotRow> {
    let mut rows: Vec<DebtPivotRow> = r
        .students()
        .filter(|s| filter.matches(r, s))
        .map(|s| pivot_row(r, s, as_of))
        .collect();
    rows.sort_by(|a, b| {
        let primary = compare_column(a, b, sort.column);
        let primary = if sort.descending {
            primary.reverse()
        } else {
            primary
        };
        let names = name_key(a).cmp(&name_key(b));
        // Sorting by name itself honours the direction; other columns tie-break ascending.
        let names = if sort.column == SortColumn::Name && sort.descending {
            names.reverse()
        } else {
            names
        };
        primary.then(names)
    });
    rows
}

pub fn pivot_table(rows: &[DebtPivotRow], expelled_view: bool, locale: Locale) -> Table {
    let funding = |f: Funding| match (locale, f) {
        (Locale::Ru, Funding::Budget) => "б".to_string(),
        (Locale::Ru, Funding::Contract) => "к".to_string(),
        (Locale::En, f) => f.as_str().to_string(),
    };
    let sex = |s: Sex| match (locale, s) {
        (Locale::Ru, Sex::Male) => "м".to_string(),
        (Locale::Ru, Sex::Female) => "ж".to_string(),
        (Locale::En, s) => s.as_str().to_string(),
    };
    let score = |m: MeanScore| match locale {
        Locale::Ru => m.display_ru(),
        Locale::En => m.to_string(),
    };
    let name_cell = |i: usize, row: &DebtPivotRow| format!("{}. {}", i + 1, row.display_name);

    if expelled_view {
        let mut t = Table::new([
            locale.pick("ФИО", "Name"),
            locale.pick("группа", "Group"),
            locale.pick("курс", "Course"),
            locale.pick("Ср. балл", "Mean score"),
            locale.pick("б/к", "Funding"),
            locale.pick("м/ж", "Sex"),
            locale.pick("дата", "Date"),
            locale.pick("причина", "Reason"),
            locale.pick("«долги»", "Debts"),
        ]);
        for (i, row) in rows.iter().enumerate() {
            let (date, reason) = match &row.status {
                StudentStatus::Expelled { date, reason, .. } => {
                    (locale.date(*date), reason.clone())
                }
                _ => (String::new(), String::new()),
            };
            t.push(vec![
                name_cell(i, row),
                row.group.to_string(),
                row.course.to_string(),
                score(row.mean_score),
                funding(row.funding),
                sex(row.sex),
                date,
                reason,
                row.total_debts.to_string(),
            ]);
        }
        return t;
    }

    let semesters = rows
        .iter()
        .filter_map(|r| r.per_semester.keys().max().copied())
        .max()
        .unwrap_or(0);
    let mut header: Vec<String> = [
        locale.pick("ФИО", "Name"),
        locale.pick("группа", "Group"),
        locale.pick("курс", "Course"),
        locale.pick("Ср. балл", "Mean score"),
        locale.pick("Итого", "Total"),
        locale.pick("посл. сдача", "Last delivery"),
    ]
    .into_iter()
    .map(String::from)
    .collect();
    for s in 1..=semesters {
        header.push(match locale {
            Locale::Ru => format!("{s} семестр"),
            Locale::En => format!("Semester {s}"),
        });
    }
    header.push(locale.pick("б/к", "Funding").into());
    header.push(locale.pick("м/ж", "Sex").into());
    let mut t = Table::new(header);
    for (i, row) in rows.iter().enumerate() {
        let mut cells = vec![
            name_cell(i, row),
            row.group.to_string(),
            row.course.to_string(),
            score(row.mean_score),
            row.total_debts.to_string(),
            row.last_delivery
                .map(|d| locale.date(d))
                .unwrap_or_default(),
        ];
        for s in 1..=semesters {
            cells.push(
                row.per_semester
                    .get(&s)
                    .map(u32::to_string)
                    .unwrap_or_default(),
            );
        }
        cells.push(funding(row.funding));
        cells.push(sex(row.sex));
        t.push(cells);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MasteryColor {
    Red,
    Yellow,
    Green,
}

impl MasteryColor {
    pub fn label(self, locale: Locale) -> &'static str {
        match self {
            MasteryColor::Red => locale.pick("красный", "red"),
            MasteryColor::Yellow => locale.pick("жёлтый", "yellow"),
            MasteryColor::Green => locale.pick("зелёный", "green"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MasteryRow {
    pub group: GroupId,
    pub semester: u32,
    pub entry: CurriculumEntryId,
    pub discipline: String,
    pub control: ControlKind,
    pub discipline_label: String,
    pub not_passed: u32,
    pub total: u32,
    /// Share not passed in tenths of a percent, rounded half up.
    pub percent_tenths: u32,
    pub color: MasteryColor,
}

impl MasteryRow {
    pub fn percent(&self) -> f64 {
        self.percent_tenths as f64 / 10.0
    }

    /// `40%`, `6,7%` (one decimal only when it is not zero).
    pub fn percent_display(&self, locale: Locale) -> String {
        format_percent_tenths(self.percent_tenths, locale)
    }
}

pub fn format_percent_tenths(tenths: u32, locale: Locale) -> String {
    let sep = locale.pick(",", ".");
    match tenths % 10 {
        0 => format!("{}%", tenths / 10),
        frac => format!("{}{sep}{frac}%", tenths / 10),
    }
}

/// Share in tenths of a percent, half-up.
pub fn percent_tenths(not_passed: u32, total: u32) -> u32 {
    assert!(total > 0, "share of an empty group");
    let (n, t) = (not_passed as u64, total as u64);
    ((2000 * n + t) / (2 * t)) as u32
}

/// Red above 30% not passed, green when everyone passed, yellow otherwise.
pub fn mastery_color(not_passed: u32, total: u32) -> MasteryColor {
    if not_passed as u64 * 10 > total as u64 * 3 {
        MasteryColor::Red
    } else if not_passed == 0 {
        MasteryColor::Green
    } else {
        MasteryColor::Yellow
    }
}

pub fn mastery_table(r: &Registry, as_of: NaiveDate) -> Vec<MasteryRow> {
    let cal = r.calendar();
    let mut active_by_group: BTreeMap<&GroupId, Vec<&StudentRecord>> = BTreeMap::new();
    for s in r.students().filter(|s| s.status.is_active()) {
        active_by_group.entry(&s.group).or_default().push(s);
    }
    let mut rows = Vec::new();
    for (group_id, students) in active_by_group {
        let group = r.group(group_id).expect("students reference known groups");
        for entry in &group.curriculum {
            if !cal.is_semester_complete(group.cohort_year, entry.semester, as_of) {
                continue;
            }
            let total = students.len() as u32;
            let not_passed = students
                .iter()
                .filter(|s| !s.deliveries.get(&entry.id).is_some_and(|d| *d <= as_of))
                .count() as u32;
            rows.push(MasteryRow {
                group: group.id.clone(),
                semester: entry.semester,
                entry: entry.id,
                discipline: entry.discipline.clone(),
                control: entry.control,
                discipline_label: entry.label(),
                not_passed,
                total,
                percent_tenths: percent_tenths(not_passed, total),
                color: mastery_color(not_passed, total),
            });
        }
    }
    rows.sort_by(|a, b| {
        // Exact share comparison, descending.
        let share =
            (b.not_passed as u64 * a.total as u64).cmp(&(a.not_passed as u64 * b.total as u64));
        share
            .then_with(|| a.discipline_label.cmp(&b.discipline_label))
            .then_with(|| a.group.cmp(&b.group))
            .then_with(|| a.semester.cmp(&b.semester))
            .then_with(|| a.entry.cmp(&b.entry))
    });
    rows
}

pub fn mastery_csv_table(rows: &[MasteryRow], locale: Locale) -> Table {
    let mut t = Table::new([
        locale.pick("Группа", "Group"),
        locale.pick("Семестр", "Semester"),
        locale.pick("Дисциплина", "Discipline"),
        "%",
        locale.pick("Не сдано", "Not passed"),
        locale.pick("Всего", "Total"),
        locale.pick("Цвет", "Colour"),
    ]);
    for row in rows {
        t.push(vec![
            row.group.to_string(),
            row.semester.to_string(),
            row.discipline_label.clone(),
            row.percent_display(locale),
            row.not_passed.to_string(),
            row.total.to_string(),
            row.color.label(locale).to_string(),
        ]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DebtSeriesPoint {
    pub date: NaiveDate,
    pub total_debts: u32,
}

pub fn debt_series(
    r: &Registry,
    filter: &StudentFilter,
    from: NaiveDate,
    to: NaiveDate,
    step_days: u32,
) -> Result<Vec<DebtSeriesPoint>> {
    if from > to {
        return Err(Error::Invalid(format!(
            "series start {from} is after its end {to}"
        )));
    }
    if step_days == 0 {
        return Err(Error::Invalid(
            "series step must be at least one day".into(),
        ));
    }
    let students: Vec<&StudentRecord> = r.students().filter(|s| filter.matches(r, s)).collect();
    let mut points = Vec::new();
    let mut date = from;
    while date <= to {
        let total = students.iter().map(|s| debts_for(r, s, date).total).sum();
        points.push(DebtSeriesPoint {
            date,
            total_debts: total,
        });
        date = match date.checked_add_days(Days::new(step_days as u64)) {
            Some(d) => d,
            None => break,
        };
    }
    Ok(points)
}

pub fn series_table(points: &[DebtSeriesPoint], locale: Locale) -> Table {
    let mut t = Table::new([
        locale.pick("Дата", "Date"),
        locale.pick("Долги", "Total debts"),
    ]);
    for p in points {
        t.push(vec![locale.date(p.date), p.total_debts.to_string()]);
    }
    t
}
