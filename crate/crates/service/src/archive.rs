//! Imported exchange files, kept under `exchange/<group>/<semester>-<entry>.csv`
//! in the data root so exam sheets can be printed again later. A re-import
//! of the same discipline replaces the earlier file.

use std::fs;
use std::path::{Path, PathBuf};

use deanery_core::rating::GradeScale;
use deanery_core::store::write_atomic;
use deanery_core::sync::{build_sheet, import_results, ExamSheet, TeacherExchangeRecord};
use deanery_core::{CurriculumEntryId, Error, Registry, Result};

pub const EXCHANGE_DIR: &str = "exchange";

fn entry_of(r: &Registry, x: &TeacherExchangeRecord) -> Result<CurriculumEntryId> {
    r.group(&x.group)?
        .curriculum
        .iter()
        .find(|e| {
            e.discipline == x.discipline && e.semester == x.semester && e.control == x.control
        })
        .map(|e| e.id)
        .ok_or_else(|| Error::UnknownCurriculumEntry {
            group: x.group.clone(),
            discipline: x.discipline.clone(),
            semester: x.semester,
        })
}

pub fn path_for(root: &Path, r: &Registry, x: &TeacherExchangeRecord) -> Result<PathBuf> {
    let entry = entry_of(r, x)?;
    Ok(root
        .join(EXCHANGE_DIR)
        .join(x.group.as_str())
        .join(format!("{}-{}.csv", x.semester, entry)))
}

/// Imports the record, stores it in the archive and returns the new registry
/// with the exam sheet built from it.
pub fn import_and_archive(
    r: &Registry,
    root: &Path,
    x: &TeacherExchangeRecord,
) -> Result<(Registry, ExamSheet)> {
    let scale = GradeScale::default();
    let next = import_results(r, x, &scale)?;
    let sheet = build_sheet(r, x, &scale)?;
    write_atomic(
        &path_for(root, r, x)?,
        x.render(r.control_codes())?.as_bytes(),
    )?;
    Ok((next, sheet))
}

/// Every archived record, ordered by group, then semester and entry.
pub fn archived(root: &Path, r: &Registry) -> Result<Vec<TeacherExchangeRecord>> {
    let dir = root.join(EXCHANGE_DIR);
    let io = |p: &Path, e: std::io::Error| Error::IoFailure {
        path: p.into(),
        reason: e.to_string(),
    };
    let mut files = Vec::new();
    let groups = match fs::read_dir(&dir) {
        Ok(it) => it,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io(&dir, e)),
    };
    for g in groups {
        let g = g.map_err(|e| io(&dir, e))?.path();
        if !g.is_dir() {
            continue;
        }
        for f in fs::read_dir(&g).map_err(|e| io(&g, e))? {
            let f = f.map_err(|e| io(&g, e))?.path();
            if f.extension().is_some_and(|x| x == "csv") {
                files.push(f);
            }
        }
    }
    let mut out = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f).map_err(|e| io(&f, e))?;
        let x = TeacherExchangeRecord::parse(&text, r.control_codes()).map_err(|e| match e {
            Error::MalformedFile { line, reason, .. } => Error::MalformedFile {
                path: f.clone(),
                line,
                reason,
            },
            other => other,
        })?;
        let key = (x.group.clone(), x.semester, entry_of(r, &x).ok());
        out.push((key, x));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out.into_iter().map(|(_, x)| x).collect())
}
