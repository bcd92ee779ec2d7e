//! Modular-rating grading: the two point-distribution options, the
//! 100-point scale and its conversion to four-point grades.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CurriculumEntryId, StudentId};

/// Highest possible final rating for one discipline in one semester.
pub const MAX_RATING: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RatingOption {
    pub max_semester_points: u32,
    pub max_exam_points: u32,
    pub bonus_threshold: u32,
    pub max_bonus_points: u32,
    pub admission_points: u32,
}

impl RatingOption {
    pub const OPTION_1: RatingOption = RatingOption {
        max_semester_points: 60,
        max_exam_points: 40,
        bonus_threshold: 50,
        max_bonus_points: 30,
        admission_points: 35,
    };

    pub const OPTION_2: RatingOption = RatingOption {
        max_semester_points: 80,
        max_exam_points: 20,
        bonus_threshold: 70,
        max_bonus_points: 20,
        admission_points: 45,
    };

    pub const PRESETS: [(&'static str, RatingOption); 2] =
        [("option1", Self::OPTION_1), ("option2", Self::OPTION_2)];

    pub fn preset(name: &str) -> Result<RatingOption> {
        Self::PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, o)| *o)
            .ok_or_else(|| Error::UnknownOption(name.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_semester_points + self.max_exam_points != MAX_RATING {
            return Err(Error::Invalid(format!(
                "semester ({}) and exam ({}) maxima must add up to {MAX_RATING}",
                self.max_semester_points, self.max_exam_points
            )));
        }
        if !(self.admission_points <= self.bonus_threshold
            && self.bonus_threshold <= self.max_semester_points)
        {
            return Err(Error::Invalid(
                "expected admission points <= bonus threshold <= semester maximum".into(),
            ));
        }
        Ok(())
    }

    /// Checks a record's points against this option's maxima.
    pub fn check(&self, rec: &RatingRecord) -> Result<()> {
        let over = |field: &str, v: u32| Error::RangeViolation {
            field: field.into(),
            value: v.to_string(),
        };
        if let Some(p) = rec
            .semester_points
            .filter(|p| *p > self.max_semester_points)
        {
            return Err(over("semester_points", p));
        }
        if let Some(p) = rec.exam_points.filter(|p| *p > self.max_exam_points) {
            return Err(over("exam_points", p));
        }
        if rec.bonus_points > self.max_bonus_points {
            return Err(over("bonus_points", rec.bonus_points));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Fail,
    Satisfactory,
    Good,
    Excellent,
}

impl Grade {
    pub const ALL: [Grade; 4] = [
        Grade::Fail,
        Grade::Satisfactory,
        Grade::Good,
        Grade::Excellent,
    ];

    /// Traditional four-point numeral, «2» to «5».
    pub fn numeral(self) -> u8 {
        match self {
            Grade::Fail => 2,
            Grade::Satisfactory => 3,
            Grade::Good => 4,
            Grade::Excellent => 5,
        }
    }

    /// Word printed in the grade column of an exam sheet.
    pub fn word_ru(self) -> &'static str {
        match self {
            Grade::Fail => "неуд",
            Grade::Satisfactory => "удовл",
            Grade::Good => "хорошо",
            Grade::Excellent => "отлично",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Grade::Fail => "fail",
            Grade::Satisfactory => "satisfactory",
            Grade::Good => "good",
            Grade::Excellent => "excellent",
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Grade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Grade::ALL
            .into_iter()
            .find(|g| g.as_str() == s || g.word_ru() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown grade `{s}`")))
    }
}

/// Lower-inclusive band bounds over 0..=100.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeScale {
    thresholds: Vec<(u32, Grade)>,
}

impl Default for GradeScale {
    fn default() -> Self {
        Self {
            thresholds: vec![
                (0, Grade::Fail),
                (55, Grade::Satisfactory),
                (70, Grade::Good),
                (85, Grade::Excellent),
            ],
        }
    }
}

impl GradeScale {
    pub fn new(thresholds: Vec<(u32, Grade)>) -> Result<Self> {
        match thresholds.first() {
            Some((0, _)) => {}
            _ => return Err(Error::Invalid("the first band must start at 0".into())),
        }
        if thresholds.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Invalid("band bounds must increase strictly".into()));
        }
        if thresholds.iter().any(|(b, _)| *b > MAX_RATING) {
            return Err(Error::Invalid(format!(
                "band bounds must not exceed {MAX_RATING}"
            )));
        }
        Ok(Self { thresholds })
    }

    pub fn thresholds(&self) -> &[(u32, Grade)] {
        &self.thresholds
    }

    pub fn to_grade(&self, final_rating: i64) -> Result<Grade> {
        if !(0..=MAX_RATING as i64).contains(&final_rating) {
            return Err(Error::OutOfRange(final_rating));
        }
        let value = final_rating as u32;
        Ok(self
            .thresholds
            .iter()
            .rev()
            .find(|(lower, _)| value >= *lower)
            .map(|(_, g)| *g)
            .expect("first band starts at 0"))
    }
}

/// One student's points for one curriculum entry. `None` points mean no-show.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub student: StudentId,
    pub entry: Option<CurriculumEntryId>,
    pub semester_points: Option<u32>,
    pub exam_points: Option<u32>,
    #[serde(default)]
    pub bonus_points: u32,
    pub date: Option<NaiveDate>,
}

/// Semester + exam points plus the bonus, which only counts once the
/// semester points reach the option's threshold; capped at 100.
pub fn final_rating(rec: &RatingRecord, opt: &RatingOption) -> Option<u32> {
    let semester = rec.semester_points?;
    let exam = rec.exam_points?;
    let bonus = if semester >= opt.bonus_threshold {
        rec.bonus_points.min(opt.max_bonus_points)
    } else {
        0
    };
    Some((semester + exam + bonus).min(MAX_RATING))
}

pub fn to_grade(final_rating: i64, scale: &GradeScale) -> Result<Grade> {
    scale.to_grade(final_rating)
}

pub fn is_admitted(semester_points: u32, opt: &RatingOption) -> bool {
    semester_points >= opt.admission_points
}

pub fn passed(rec: &RatingRecord, opt: &RatingOption, scale: &GradeScale) -> bool {
    final_rating(rec, opt)
        .and_then(|f| scale.to_grade(f as i64).ok())
        .is_some_and(|g| g != Grade::Fail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(semester: Option<u32>, exam: Option<u32>, bonus: u32) -> RatingRecord {
        RatingRecord {
            student: StudentId::new("s").unwrap(),
            entry: None,
            semester_points: semester,
            exam_points: exam,
            bonus_points: bonus,
            date: None,
        }
    }

    #[test]
    fn final_rating_examples() {
        let o1 = RatingOption::OPTION_1;
        assert_eq!(final_rating(&rec(Some(45), Some(20), 0), &o1), Some(65));
        assert_eq!(final_rating(&rec(Some(60), Some(40), 30), &o1), Some(100));
        // 49 is below the bonus threshold of 50.
        assert_eq!(final_rating(&rec(Some(49), Some(20), 30), &o1), Some(69));
        assert_eq!(final_rating(&rec(Some(50), Some(20), 10), &o1), Some(80));
        assert_eq!(final_rating(&rec(None, Some(20), 0), &o1), None);
        assert_eq!(final_rating(&rec(Some(45), None, 0), &o1), None);
    }

    #[test]
    fn grade_examples() {
        let scale = GradeScale::default();
        for (f, g) in [
            (65, Grade::Satisfactory),
            (89, Grade::Excellent),
            (70, Grade::Good),
            (54, Grade::Fail),
            (55, Grade::Satisfactory),
            (84, Grade::Good),
            (85, Grade::Excellent),
            (0, Grade::Fail),
            (100, Grade::Excellent),
        ] {
            assert_eq!(to_grade(f, &scale).unwrap(), g, "rating {f}");
        }
        assert_eq!(to_grade(101, &scale).unwrap_err().name(), "OutOfRange");
        assert_eq!(to_grade(-1, &scale).unwrap_err().name(), "OutOfRange");
    }

    #[test]
    fn admission() {
        assert!(is_admitted(35, &RatingOption::OPTION_1));
        assert!(!is_admitted(34, &RatingOption::OPTION_1));
        assert!(is_admitted(45, &RatingOption::OPTION_2));
        assert!(!is_admitted(44, &RatingOption::OPTION_2));
    }

    #[test]
    fn passed_examples() {
        let (o1, scale) = (RatingOption::OPTION_1, GradeScale::default());
        assert!(passed(&rec(Some(45), Some(20), 0), &o1, &scale));
        assert!(!passed(&rec(None, None, 0), &o1, &scale));
        assert!(!passed(&rec(Some(30), Some(20), 0), &o1, &scale));
    }

    #[test]
    fn presets() {
        assert_eq!(
            RatingOption::preset("option1").unwrap(),
            RatingOption::OPTION_1
        );
        assert_eq!(
            RatingOption::preset("option2").unwrap(),
            RatingOption::OPTION_2
        );
        assert_eq!(
            RatingOption::preset("option3").unwrap_err().name(),
            "UnknownOption"
        );
        for (_, o) in RatingOption::PRESETS {
            o.validate().unwrap();
        }
    }

    #[test]
    fn record_bounds() {
        let o1 = RatingOption::OPTION_1;
        assert!(o1.check(&rec(Some(60), Some(40), 30)).is_ok());
        assert!(o1.check(&rec(Some(61), Some(40), 30)).is_err());
        assert!(o1.check(&rec(Some(60), Some(41), 30)).is_err());
        assert!(o1.check(&rec(Some(60), Some(40), 31)).is_err());
    }

    #[test]
    fn scale_validation() {
        assert!(GradeScale::new(vec![(1, Grade::Fail)]).is_err());
        assert!(GradeScale::new(vec![(0, Grade::Fail), (0, Grade::Good)]).is_err());
        assert!(GradeScale::new(vec![(0, Grade::Fail), (101, Grade::Good)]).is_err());
    }

    #[test]
    fn exhaustive_pass_equivalence() {
        let scale = GradeScale::default();
        for opt in [RatingOption::OPTION_1, RatingOption::OPTION_2] {
            for s in 0..=opt.max_semester_points {
                for e in 0..=opt.max_exam_points {
                    for b in 0..=opt.max_bonus_points {
                        let r = rec(Some(s), Some(e), b);
                        let f = final_rating(&r, &opt).unwrap();
                        assert!(f <= MAX_RATING);
                        let g = to_grade(f as i64, &scale).unwrap();
                        assert_eq!(passed(&r, &opt, &scale), g != Grade::Fail);
                    }
                }
            }
        }
    }
}
