//! Academic calendar: semester start dates and the theory/exam durations
//! from which every semester's end-of-exams boundary is derived.

use std::fmt::Write as _;

use chrono::{Datelike, Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MonthDay {
    pub month: u32,
    pub day: u32,
}

impl MonthDay {
    pub fn new(month: u32, day: u32) -> Result<Self> {
        // 2001 is not a leap year, so Feb 29 is rejected.
        NaiveDate::from_ymd_opt(2001, month, day).ok_or_else(|| {
            Error::Invalid(format!("{month:02}-{day:02} is not a valid month-day"))
        })?;
        Ok(Self { month, day })
    }

    pub fn in_year(self, year: i32) -> NaiveDate {
        NaiveDate::from_ymd_opt(year, self.month, self.day).expect("validated month-day")
    }

    fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("`{s}` is not MM-DD"));
        let (m, d) = s.trim().split_once('-').ok_or_else(bad)?;
        Self::new(m.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcademicCalendar {
    pub semesters_per_course: u32,
    pub weeks_theory: u32,
    pub weeks_exams: f64,
    /// Start of each semester within a course, in teaching order.
    pub semester_starts: Vec<MonthDay>,
    pub max_courses: u32,
}

impl Default for AcademicCalendar {
    fn default() -> Self {
        Self {
            semesters_per_course: 2,
            weeks_theory: 17,
            weeks_exams: 3.5,
            semester_starts: vec![MonthDay { month: 9, day: 1 }, MonthDay { month: 2, day: 9 }],
            max_courses: 6,
        }
    }
}

impl AcademicCalendar {
    pub fn validate(&self) -> Result<()> {
        if self.weeks_theory == 0 {
            return Err(Error::Invalid("weeks_theory must be positive".into()));
        }
        if !(self.weeks_exams.is_finite() && self.weeks_exams >= 0.0) {
            return Err(Error::Invalid(
                "weeks_exams must be a non-negative number".into(),
            ));
        }
        if self.semesters_per_course == 0 || self.max_courses == 0 {
            return Err(Error::Invalid(
                "semesters_per_course and max_courses must be positive".into(),
            ));
        }
        if self.semester_starts.len() != self.semesters_per_course as usize {
            return Err(Error::Invalid(format!(
                "{} semester starts given for {} semesters per course",
                self.semester_starts.len(),
                self.semesters_per_course
            )));
        }
        // Unrolled from the first start, the boundaries must increase and fit in one year.
        let first = self.semester_starts[0].in_year(2001);
        let mut prev = first;
        for md in &self.semester_starts[1..] {
            let mut d = md.in_year(2001);
            if d <= first {
                d = md.in_year(2002);
            }
            if d <= prev || d >= self.semester_starts[0].in_year(2002) {
                return Err(Error::Invalid(
                    "semester starts are not ordered within a year".into(),
                ));
            }
            prev = d;
        }
        Ok(())
    }

    pub fn max_semesters(&self) -> u32 {
        self.max_courses * self.semesters_per_course
    }

    /// Theory weeks plus the exam session, in whole days (partial days round up).
    pub fn semester_days(&self) -> u64 {
        self.weeks_theory as u64 * 7 + (self.weeks_exams * 7.0).ceil() as u64
    }

    /// First day of `semester` (1-based) for a cohort that started in `cohort_year`.
    pub fn semester_start(&self, cohort_year: i32, semester: u32) -> NaiveDate {
        assert!(semester >= 1, "semesters are numbered from 1");
        let spc = self.semesters_per_course;
        let pos = ((semester - 1) % spc) as usize;
        let mut year = cohort_year + ((semester - 1) / spc) as i32;
        for i in 1..=pos {
            if self.semester_starts[i] <= self.semester_starts[0] {
                year += 1;
                break;
            }
        }
        self.semester_starts[pos].in_year(year)
    }

    /// End-of-exams date: the semester counts as completed from this day on.
    pub fn semester_end(&self, cohort_year: i32, semester: u32) -> NaiveDate {
        self.semester_start(cohort_year, semester) + Days::new(self.semester_days())
    }

    pub fn is_semester_complete(&self, cohort_year: i32, semester: u32, as_of: NaiveDate) -> bool {
        as_of >= self.semester_end(cohort_year, semester)
    }

    pub fn course_start(&self, cohort_year: i32, course: u32) -> NaiveDate {
        self.semester_start(cohort_year, (course - 1) * self.semesters_per_course + 1)
    }

    /// Course the cohort is in on `date`; 0 before the first semester starts.
    pub fn expected_course(&self, cohort_year: i32, date: NaiveDate) -> u32 {
        let first = self.course_start(cohort_year, 1);
        if date < first {
            return 0;
        }
        // Courses start once a year on the same month-day.
        let mut course = (date.year() - first.year()) as u32 + 1;
        while course > 1 && self.course_start(cohort_year, course) > date {
            course -= 1;
        }
        course
    }

    /// Parses `key = value` lines; `#` starts a comment. Missing keys keep defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cal = Self::default();
        let mut starts_given = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad =
                |reason: String| Error::Invalid(format!("calendar line {}: {reason}", idx + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| {
                v.parse::<u32>()
                    .map_err(|_| bad(format!("`{v}` is not a whole number")))
            };
            match key {
                "semesters_per_course" => cal.semesters_per_course = num(value)?,
                "weeks_theory" => cal.weeks_theory = num(value)?,
                "weeks_exams" => {
                    cal.weeks_exams = value
                        .replace(',', ".")
                        .parse()
                        .map_err(|_| bad(format!("`{value}` is not a number")))?
                }
                "max_courses" => cal.max_courses = num(value)?,
                "semester_starts" => {
                    cal.semester_starts = value
                        .split(',')
                        .map(MonthDay::parse)
                        .collect::<Result<_>>()
                        .map_err(|e| bad(e.to_string()))?;
                    starts_given = true;
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        if !starts_given && cal.semesters_per_course != 2 {
            return Err(Error::Invalid(
                "semester_starts is required when semesters_per_course is not 2".into(),
            ));
        }
        cal.validate()?;
        Ok(cal)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let starts = self
            .semester_starts
            .iter()
            .map(|md| format!("{:02}-{:02}", md.month, md.day))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "semesters_per_course = {}", self.semesters_per_course);
        let _ = writeln!(out, "weeks_theory = {}", self.weeks_theory);
        let _ = writeln!(out, "weeks_exams = {}", self.weeks_exams);
        let _ = writeln!(out, "semester_starts = {starts}");
        let _ = writeln!(out, "max_courses = {}", self.max_courses);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn default_semester_boundaries() {
        let cal = AcademicCalendar::default();
        assert_eq!(cal.semester_days(), 17 * 7 + 25);
        assert_eq!(cal.semester_start(2012, 1), d(2012, 9, 1));
        assert_eq!(cal.semester_start(2012, 2), d(2013, 2, 9));
        assert_eq!(cal.semester_start(2012, 3), d(2013, 9, 1));
        assert_eq!(cal.semester_start(2012, 4), d(2014, 2, 9));
        assert_eq!(cal.semester_end(2012, 1), d(2013, 1, 23));
        assert_eq!(cal.semester_end(2012, 2), d(2013, 7, 3));
        assert!(!cal.is_semester_complete(2012, 1, d(2013, 1, 22)));
        assert!(cal.is_semester_complete(2012, 1, d(2013, 1, 23)));
    }

    #[test]
    fn expected_course_steps_on_september_first() {
        let cal = AcademicCalendar::default();
        assert_eq!(cal.expected_course(2012, d(2012, 8, 31)), 0);
        assert_eq!(cal.expected_course(2012, d(2012, 9, 1)), 1);
        assert_eq!(cal.expected_course(2012, d(2013, 8, 31)), 1);
        assert_eq!(cal.expected_course(2012, d(2013, 9, 1)), 2);
        assert_eq!(cal.expected_course(2012, d(2016, 1, 1)), 4);
    }

    #[test]
    fn three_terms_per_year() {
        let cal = AcademicCalendar::parse(
            "semesters_per_course = 3\nsemester_starts = 09-01, 12-01, 03-01\nweeks_theory = 10\nweeks_exams = 1\n",
        )
        .unwrap();
        assert_eq!(cal.semester_start(2020, 1), d(2020, 9, 1));
        assert_eq!(cal.semester_start(2020, 2), d(2020, 12, 1));
        assert_eq!(cal.semester_start(2020, 3), d(2021, 3, 1));
        assert_eq!(cal.semester_start(2020, 4), d(2021, 9, 1));
    }

    #[test]
    fn parse_render_round_trip() {
        let cal = AcademicCalendar::default();
        assert_eq!(AcademicCalendar::parse(&cal.render()).unwrap(), cal);
        let cal = AcademicCalendar::parse("weeks_exams = 3,5 # comma form\n\n").unwrap();
        assert_eq!(cal.weeks_exams, 3.5);
    }

    #[test]
    fn parse_errors() {
        assert!(AcademicCalendar::parse("weeks_theory = 0").is_err());
        assert!(AcademicCalendar::parse("nonsense").is_err());
        assert!(AcademicCalendar::parse("colour = red").is_err());
        assert!(AcademicCalendar::parse("semester_starts = 09-01, 09-01").is_err());
        assert!(AcademicCalendar::parse("semester_starts = 02-30, 09-01").is_err());
        assert!(AcademicCalendar::parse("semesters_per_course = 3").is_err());
    }
}
