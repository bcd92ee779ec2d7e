//! Parsing of the small values shared by query strings and CLI flags.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use deanery_core::monitor::StudentFilter;
use deanery_core::{Error, Result};

/// Keys of the student filter; any other query key is handled by the endpoint.
pub const FILTER_KEYS: [&str; 6] = ["status", "course", "direction", "group", "funding", "sex"];

pub fn date(key: &str, value: &str) -> Result<NaiveDate> {
    value
        .parse()
        .map_err(|_| Error::Invalid(format!("{key} `{value}` is not a YYYY-MM-DD date")))
}

/// `YYYY-MM`.
pub fn month(value: &str) -> Result<(i32, u32)> {
    let bad = || Error::Invalid(format!("month `{value}` is not YYYY-MM"));
    let (y, m) = value.split_once('-').ok_or_else(bad)?;
    if y.len() != 4 || m.len() != 2 {
        return Err(bad());
    }
    let (y, m) = (y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?);
    NaiveDate::from_ymd_opt(y, m, 1).ok_or_else(bad)?;
    Ok((y, m))
}

/// Builds the filter from the filter keys present in `params`. Keys outside
/// `allowed` and the filter keys are rejected.
pub fn filter(params: &BTreeMap<String, String>, allowed: &[&str]) -> Result<StudentFilter> {
    if let Some(k) = params
        .keys()
        .find(|k| !FILTER_KEYS.contains(&k.as_str()) && !allowed.contains(&k.as_str()))
    {
        return Err(Error::Invalid(format!("unknown query parameter `{k}`")));
    }
    StudentFilter::from_pairs(
        params
            .iter()
            .filter(|(k, _)| FILTER_KEYS.contains(&k.as_str())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn months() {
        assert_eq!(month("2014-01").unwrap(), (2014, 1));
        for bad in ["2014-13", "2014-1", "14-01", "2014", "2014-00", "abcd-ef"] {
            assert!(month(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn filters() {
        let mut p = BTreeMap::new();
        p.insert("group".to_string(), "5210M".to_string());
        p.insert("as_of".to_string(), "2014-01-01".to_string());
        assert!(filter(&p, &[]).is_err());
        let f = filter(&p, &["as_of"]).unwrap();
        assert_eq!(f.group.unwrap().as_str(), "5210M");
    }
}
