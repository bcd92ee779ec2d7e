//! Domain types: students, groups, curricula and delivery dates.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Identifiers end up in file names and in the tab-separated movement log,
/// so they are restricted to visible characters without separators.
fn check_token(kind: &str, value: &str) -> Result<()> {
    if value.is_empty() {
        return Err(Error::Invalid(format!("{kind} must not be empty")));
    }
    if value == "." || value == ".." {
        return Err(Error::Invalid(format!("{kind} `{value}` is reserved")));
    }
    if let Some(c) = value
        .chars()
        .find(|c| c.is_whitespace() || c.is_control() || matches!(c, '/' | '\\' | ',' | '"'))
    {
        return Err(Error::Invalid(format!("{kind} `{value}` contains {c:?}")));
    }
    Ok(())
}

macro_rules! token_newtype {
    ($name:ident, $kind:literal) => {
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Result<Self> {
                let value = value.into();
                check_token($kind, &value)?;
                Ok(Self(value))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                Self::new(s)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                Self::new(s).map_err(serde::de::Error::custom)
            }
        }
    };
}

token_newtype!(StudentId, "student id");
token_newtype!(GroupId, "group id");

/// Ordinal of a row in a group's training plan. Unique within the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CurriculumEntryId(pub u32);

impl fmt::Display for CurriculumEntryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PersonName {
    pub surname: String,
    pub given_name: String,
    #[serde(default)]
    pub patronymic: String,
}

impl PersonName {
    pub fn new(
        surname: impl Into<String>,
        given_name: impl Into<String>,
        patronymic: impl Into<String>,
    ) -> Result<Self> {
        let name = Self {
            surname: surname.into(),
            given_name: given_name.into(),
            patronymic: patronymic.into(),
        };
        name.validate()?;
        Ok(name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.surname.trim().is_empty() || self.given_name.trim().is_empty() {
            return Err(Error::Invalid("surname and given name are required".into()));
        }
        for part in [&self.surname, &self.given_name, &self.patronymic] {
            if part.chars().any(|c| c.is_control()) {
                return Err(Error::Invalid(format!(
                    "name part {part:?} has control characters"
                )));
            }
        }
        Ok(())
    }

    /// "Surname Given Patronymic".
    pub fn full(&self) -> String {
        if self.patronymic.is_empty() {
            format!("{} {}", self.surname, self.given_name)
        } else {
            format!("{} {} {}", self.surname, self.given_name, self.patronymic)
        }
    }

    /// "Surname G.P." as printed on exam sheets.
    pub fn short(&self) -> String {
        let mut out = format!("{} ", self.surname);
        for part in [&self.given_name, &self.patronymic] {
            if let Some(c) = part.chars().next() {
                out.push(c);
                out.push('.');
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Funding {
    Budget,
    Contract,
}

impl Funding {
    pub const ALL: [Funding; 2] = [Funding::Budget, Funding::Contract];

    pub fn as_str(self) -> &'static str {
        match self {
            Funding::Budget => "budget",
            Funding::Contract => "contract",
        }
    }
}

impl FromStr for Funding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "budget" => Ok(Funding::Budget),
            "contract" => Ok(Funding::Contract),
            _ => Err(Error::Invalid(format!("unknown funding `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
}

impl Sex {
    pub const ALL: [Sex; 2] = [Sex::Male, Sex::Female];

    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Male => "male",
            Sex::Female => "female",
        }
    }
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "male" => Ok(Sex::Male),
            "female" => Ok(Sex::Female),
            _ => Err(Error::Invalid(format!("unknown sex `{s}`"))),
        }
    }
}

/// Grade point average kept in hundredths, 0.00..=5.00.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MeanScore(u16);

impl MeanScore {
    pub const MAX: u16 = 500;

    pub fn from_hundredths(value: u32) -> Result<Self> {
        if value > Self::MAX as u32 {
            return Err(Error::RangeViolation {
                field: "mean_score".into(),
                value: format!("{}.{:02}", value / 100, value % 100),
            });
        }
        Ok(Self(value as u16))
    }

    /// Rounds to hundredths before the range check.
    pub fn from_f64(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::RangeViolation {
                field: "mean_score".into(),
                value: value.to_string(),
            });
        }
        let hundredths = (value * 100.0).round();
        if hundredths > Self::MAX as f64 {
            return Err(Error::RangeViolation {
                field: "mean_score".into(),
                value: value.to_string(),
            });
        }
        Ok(Self(hundredths as u16))
    }

    /// Accepts `4`, `4.5`, `4.56` and the comma forms `4,56`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || {
            Error::Invalid(format!(
                "mean score `{s}` is not a decimal with at most two fractional digits"
            ))
        };
        let s = s.trim();
        let (int, frac) = match s.find(['.', ',']) {
            Some(i) => (&s[..i], &s[i + 1..]),
            None => (s, ""),
        };
        if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if frac.len() > 2 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u32 = int.parse().map_err(|_| bad())?;
        let mut frac_val: u32 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        if frac.len() == 1 {
            frac_val *= 10;
        }
        Self::from_hundredths(int.saturating_mul(100).saturating_add(frac_val))
    }

    pub fn hundredths(self) -> u16 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    /// Russian decimal comma, trailing zeros dropped: `5`, `4,86`, `3,01`.
    pub fn display_ru(self) -> String {
        let (int, frac) = (self.0 / 100, self.0 % 100);
        match frac {
            0 => int.to_string(),
            f if f % 10 == 0 => format!("{int},{}", f / 10),
            f => format!("{int},{f:02}"),
        }
    }
}

impl fmt::Display for MeanScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl Serialize for MeanScore {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for MeanScore {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        MeanScore::from_f64(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum StudentStatus {
    Active,
    AcademicLeave {
        since: NaiveDate,
        until: NaiveDate,
    },
    Expelled {
        date: NaiveDate,
        reason: String,
        /// Debt count frozen at the expulsion date.
        debts: u32,
    },
}

impl StudentStatus {
    pub fn kind(&self) -> StatusKind {
        match self {
            StudentStatus::Active => StatusKind::Active,
            StudentStatus::AcademicLeave { .. } => StatusKind::AcademicLeave,
            StudentStatus::Expelled { .. } => StatusKind::Expelled,
        }
    }

    pub fn is_active(&self) -> bool {
        matches!(self, StudentStatus::Active)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusKind {
    Active,
    AcademicLeave,
    Expelled,
}

impl StatusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StatusKind::Active => "active",
            StatusKind::AcademicLeave => "academic_leave",
            StatusKind::Expelled => "expelled",
        }
    }
}

impl FromStr for StatusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "active" => Ok(StatusKind::Active),
            "academic_leave" | "leave" => Ok(StatusKind::AcademicLeave),
            "expelled" => Ok(StatusKind::Expelled),
            _ => Err(Error::Invalid(format!("unknown status `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    Exam,
    Credit,
    DifferentiatedCredit,
    Coursework,
    Practice,
}

impl ControlKind {
    pub const ALL: [ControlKind; 5] = [
        ControlKind::Exam,
        ControlKind::Credit,
        ControlKind::DifferentiatedCredit,
        ControlKind::Coursework,
        ControlKind::Practice,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ControlKind::Exam => "exam",
            ControlKind::Credit => "credit",
            ControlKind::DifferentiatedCredit => "differentiated_credit",
            ControlKind::Coursework => "coursework",
            ControlKind::Practice => "practice",
        }
    }

    pub fn label_ru(self) -> &'static str {
        match self {
            ControlKind::Exam => "экзамен",
            ControlKind::Credit => "зачет",
            ControlKind::DifferentiatedCredit => "дифференцированный зачет",
            ControlKind::Coursework => "курсовая работа",
            ControlKind::Practice => "практика",
        }
    }
}

impl FromStr for ControlKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ControlKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown control kind `{s}`")))
    }
}

/// Numeric control codes used in plan and exchange files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlCodeTable {
    by_code: BTreeMap<u32, ControlKind>,
}

impl Default for ControlCodeTable {
    fn default() -> Self {
        Self::new([
            (1, ControlKind::Exam),
            (2, ControlKind::Credit),
            (3, ControlKind::DifferentiatedCredit),
            (4, ControlKind::Practice),
            (6, ControlKind::Coursework),
        ])
        .expect("default table is a bijection")
    }
}

impl ControlCodeTable {
    pub fn new(pairs: impl IntoIterator<Item = (u32, ControlKind)>) -> Result<Self> {
        let mut by_code = BTreeMap::new();
        for (code, kind) in pairs {
            if by_code.values().any(|k| *k == kind) {
                return Err(Error::Invalid(format!(
                    "control kind {} mapped twice",
                    kind.as_str()
                )));
            }
            if by_code.insert(code, kind).is_some() {
                return Err(Error::Invalid(format!("control code {code} mapped twice")));
            }
        }
        Ok(Self { by_code })
    }

    pub fn kind(&self, code: u32) -> Option<ControlKind> {
        self.by_code.get(&code).copied()
    }

    pub fn code(&self, kind: ControlKind) -> Option<u32> {
        self.by_code
            .iter()
            .find(|(_, k)| **k == kind)
            .map(|(c, _)| *c)
    }

    /// `1=exam;2=credit;...`
    pub fn parse(spec: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (code, kind) = item
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("control code item `{item}` lacks `=`")))?;
            let code = code
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("control code `{code}` is not a number")))?;
            pairs.push((code, kind.trim().parse()?));
        }
        Self::new(pairs)
    }

    pub fn render(&self) -> String {
        self.by_code
            .iter()
            .map(|(c, k)| format!("{c}={}", k.as_str()))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurriculumEntry {
    pub id: CurriculumEntryId,
    pub discipline: String,
    pub semester: u32,
    pub control: ControlKind,
}

impl CurriculumEntry {
    /// "Discipline (control)" as in the mastery table.
    pub fn label(&self) -> String {
        format!("{} ({})", self.discipline, self.control.label_ru())
    }

    /// Identity used when carrying deliveries between groups.
    pub fn same_requirement(&self, other: &CurriculumEntry) -> bool {
        self.discipline == other.discipline
            && self.semester == other.semester
            && self.control == other.control
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub id: GroupId,
    pub course: u32,
    pub direction: String,
    /// Calendar year in which the group's first semester started.
    pub cohort_year: i32,
    pub curriculum: Vec<CurriculumEntry>,
}

impl Group {
    pub fn entry(&self, id: CurriculumEntryId) -> Option<&CurriculumEntry> {
        self.curriculum.iter().find(|e| e.id == id)
    }

    pub fn entries_in(&self, semester: u32) -> impl Iterator<Item = &CurriculumEntry> {
        self.curriculum
            .iter()
            .filter(move |e| e.semester == semester)
    }

    pub fn final_semester(&self) -> Option<u32> {
        self.curriculum.iter().map(|e| e.semester).max()
    }

    pub fn validate(&self, max_semesters: u32) -> Result<()> {
        if self.course == 0 {
            return Err(Error::Invalid(format!("group {} has course 0", self.id)));
        }
        if self.direction.chars().any(|c| c.is_control()) {
            return Err(Error::Invalid(format!(
                "group {} direction has control characters",
                self.id
            )));
        }
        let mut prev: Option<(u32, u32)> = None;
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.curriculum {
            if e.discipline.trim().is_empty() || e.discipline.chars().any(|c| c.is_control()) {
                return Err(Error::Invalid(format!(
                    "group {} entry {} has a bad discipline name",
                    self.id, e.id
                )));
            }
            if e.semester == 0 || e.semester > max_semesters {
                return Err(Error::Invalid(format!(
                    "group {} entry {} has semester {} outside 1..={max_semesters}",
                    self.id, e.id, e.semester
                )));
            }
            if !seen.insert(e.id) {
                return Err(Error::Invalid(format!(
                    "group {} repeats entry {}",
                    self.id, e.id
                )));
            }
            let key = (e.semester, e.id.0);
            if prev.is_some_and(|p| p >= key) {
                return Err(Error::Invalid(format!(
                    "group {} curriculum is not ordered by (semester, ordinal) at entry {}",
                    self.id, e.id
                )));
            }
            prev = Some(key);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentRecord {
    pub id: StudentId,
    pub name: PersonName,
    pub card_number: String,
    pub group: GroupId,
    pub course: u32,
    pub funding: Funding,
    pub sex: Sex,
    pub mean_score: MeanScore,
    pub status: StudentStatus,
    pub deliveries: BTreeMap<CurriculumEntryId, NaiveDate>,
}

impl StudentRecord {
    /// Canonical ordering key: name parts, then id.
    pub fn sort_key(&self) -> (&str, &str, &str, &StudentId) {
        (
            &self.name.surname,
            &self.name.given_name,
            &self.name.patronymic,
            &self.id,
        )
    }
}
