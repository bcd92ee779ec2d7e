//! wasm-bindgen bindings for the rating calculator, the mastery classifier
//! and the rating curve shown by `www/index.html`.
//!
//! Every export returns a JSON string; errors become JS exceptions.

use deanery_core::monitor::{format_percent_tenths, mastery_color, percent_tenths};
use deanery_core::rating::{final_rating, is_admitted, GradeScale, RatingOption, RatingRecord};
use deanery_core::{Locale, StudentId};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Rating {
    pub admitted: bool,
    pub bonus_counted: u32,
    pub final_rating: u32,
    pub grade: &'static str,
    pub numeral: u8,
    pub word: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Mastery {
    pub color: String,
    pub percent: String,
}

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub exam_points: u32,
    pub final_rating: u32,
    pub numeral: u8,
}

fn option(name: &str) -> Result<RatingOption, String> {
    RatingOption::preset(name).map_err(|e| e.to_string())
}

pub fn rate(option_name: &str, semester: u32, exam: u32, bonus: u32) -> Result<Rating, String> {
    let opt = option(option_name)?;
    let rec = RatingRecord {
        student: StudentId::new("demo").map_err(|e| e.to_string())?,
        entry: None,
        semester_points: Some(semester),
        exam_points: Some(exam),
        bonus_points: bonus,
        date: None,
    };
    opt.check(&rec).map_err(|e| e.to_string())?;
    let f = final_rating(&rec, &opt).expect("both point values are present");
    let grade = GradeScale::default()
        .to_grade(f as i64)
        .map_err(|e| e.to_string())?;
    Ok(Rating {
        admitted: is_admitted(semester, &opt),
        bonus_counted: if semester >= opt.bonus_threshold {
            bonus
        } else {
            0
        },
        final_rating: f,
        grade: grade.as_str(),
        numeral: grade.numeral(),
        word: grade.word_ru(),
    })
}

pub fn classify(not_passed: u32, total: u32) -> Result<Mastery, String> {
    if total == 0 {
        return Err("the group has no students".into());
    }
    if not_passed > total {
        return Err(format!("{not_passed} not passed out of {total}"));
    }
    let color =
        serde_json::to_value(mastery_color(not_passed, total)).map_err(|e| e.to_string())?;
    Ok(Mastery {
        color: color.as_str().unwrap_or_default().to_string(),
        percent: format_percent_tenths(percent_tenths(not_passed, total), Locale::Ru),
    })
}

/// Final rating for every exam score from zero to the option's maximum.
pub fn curve(option_name: &str, semester: u32, bonus: u32) -> Result<Vec<CurvePoint>, String> {
    let opt = option(option_name)?;
    (0..=opt.max_exam_points)
        .map(|exam| {
            let r = rate(option_name, semester, exam, bonus)?;
            Ok(CurvePoint {
                exam_points: exam,
                final_rating: r.final_rating,
                numeral: r.numeral,
            })
        })
        .collect()
}

fn to_js<T: Serialize>(v: Result<T, String>) -> Result<String, JsError> {
    let v = v.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn rating(
    option: &str,
    semester_points: u32,
    exam_points: u32,
    bonus_points: u32,
) -> Result<String, JsError> {
    to_js(rate(option, semester_points, exam_points, bonus_points))
}

#[wasm_bindgen]
pub fn mastery(not_passed: u32, total: u32) -> Result<String, JsError> {
    to_js(classify(not_passed, total))
}

#[wasm_bindgen]
pub fn rating_curve(
    option: &str,
    semester_points: u32,
    bonus_points: u32,
) -> Result<String, JsError> {
    to_js(curve(option, semester_points, bonus_points))
}

/// Option names with their five values, for the page's selector.
#[wasm_bindgen]
pub fn options() -> String {
    let all: Vec<_> = RatingOption::PRESETS.iter().map(|(n, o)| (n, o)).collect();
    serde_json::to_string(&all).expect("options serialize")
}
