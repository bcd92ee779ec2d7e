//! One self-contained check per acceptance criterion. Each returns a short
//! summary on success and the first discrepancy on failure.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{Datelike, Days, NaiveDate};
use deanery_core::audit::{run_audit, AuditRule};
use deanery_core::contingent::{movement_report, replay, Flow, MovementKind, GRADUATED};
use deanery_core::monitor::{
    debts_of, format_percent_tenths, mastery_color, mastery_table, percent_tenths, pivot,
    MasteryColor, PivotSort, StudentFilter,
};
use deanery_core::rating::{Grade, GradeScale, RatingOption};
use deanery_core::store::{load_registry, save_registry};
use deanery_core::sync::{build_sheet, SheetMark};
use deanery_core::{Locale, Registry, StudentId};
use rand::Rng;

use crate::d;
use crate::fixtures::{
    exam_sheet_fixture, mastery_expected, mastery_registry, sheet_rows, MASTERY_AS_OF,
};
use crate::gen::{random_events, random_groups, random_registry, rng};
use crate::oracle::{brute_audit, brute_debts, next_month, semester_start};

pub type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(started: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let took = started.elapsed();
    ensure!(took <= limit, "{what} took {took:?}, limit {limit:?}");
    Ok(took)
}

pub fn exam_sheet_reproduction() -> Outcome {
    let started = Instant::now();
    let (r, x) = exam_sheet_fixture();
    let sheet = build_sheet(&r, &x, &GradeScale::default()).map_err(|e| e.to_string())?;
    let expected = sheet_rows();
    ensure!(
        sheet.rows.len() == expected.len(),
        "{} rows, expected {}",
        sheet.rows.len(),
        expected.len()
    );
    for (row, (surname, given, patronymic, book, sem, fin, word)) in
        sheet.rows.iter().zip(&expected)
    {
        let short = format!(
            "{surname} {}.{}.",
            given.chars().next().unwrap(),
            patronymic.chars().next().unwrap()
        );
        ensure!(
            row.short_name == short,
            "row {}: name {} != {short}",
            row.ordinal,
            row.short_name
        );
        ensure!(
            row.record_book == *book,
            "row {}: record book {}",
            row.ordinal,
            row.record_book
        );
        ensure!(
            row.mark.word_ru() == *word,
            "row {}: mark {} != {word}",
            row.ordinal,
            row.mark.word_ru()
        );
        ensure!(
            row.final_rating == *fin,
            "row {}: final {:?} != {fin:?}",
            row.ordinal,
            row.final_rating
        );
        ensure!(
            row.semester_points == *sem,
            "row {}: semester {:?} != {sem:?}",
            row.ordinal,
            row.semester_points
        );
    }
    let want: BTreeMap<SheetMark, u32> = [
        (SheetMark::Excellent, 7),
        (SheetMark::Good, 5),
        (SheetMark::Satisfactory, 5),
        (SheetMark::Fail, 0),
        (SheetMark::NoShow, 5),
    ]
    .into();
    ensure!(sheet.summary == want, "summary {:?}", sheet.summary);
    let took = within(started, Duration::from_secs(1), "sheet")?;
    Ok(format!("22 rows, summary 7/5/5/0/5 in {took:?}"))
}

pub fn grade_scale_exactness() -> Outcome {
    let started = Instant::now();
    let scale = GradeScale::default();
    for p in 0..=100i64 {
        let want = match p {
            85.. => Grade::Excellent,
            70.. => Grade::Good,
            55.. => Grade::Satisfactory,
            _ => Grade::Fail,
        };
        let got = scale.to_grade(p).map_err(|e| e.to_string())?;
        ensure!(got == want, "to_grade({p}) = {got:?}, expected {want:?}");
    }
    for (p, g) in [
        (54, Grade::Fail),
        (55, Grade::Satisfactory),
        (69, Grade::Satisfactory),
        (70, Grade::Good),
        (84, Grade::Good),
        (85, Grade::Excellent),
    ] {
        ensure!(scale.to_grade(p).ok() == Some(g), "boundary {p}");
    }
    for p in [-1, 101] {
        ensure!(scale.to_grade(p).is_err(), "{p} accepted");
    }
    let took = within(started, Duration::from_secs(1), "grade scan")?;
    Ok(format!(
        "101 points agree, 54/55 69/70 84/85 exact, in {took:?}"
    ))
}

pub fn rating_option_presets() -> Outcome {
    let expect = [
        ("option1", [60, 40, 50, 30, 35]),
        ("option2", [80, 20, 70, 20, 45]),
    ];
    for (name, v) in expect {
        let o = RatingOption::preset(name).map_err(|e| e.to_string())?;
        let got = [
            o.max_semester_points,
            o.max_exam_points,
            o.bonus_threshold,
            o.max_bonus_points,
            o.admission_points,
        ];
        ensure!(got == v, "{name}: {got:?} != {v:?}");
        ensure!(
            o.max_semester_points + o.max_exam_points == 100,
            "{name} maxima do not add to 100"
        );
        o.validate().map_err(|e| e.to_string())?;
    }
    Ok("60/40/50/30/35 and 80/20/70/20/45, both sum to 100".into())
}

pub fn mastery_thresholds() -> Outcome {
    let cases = [
        (4, 10, MasteryColor::Red, "40%"),
        (3, 10, MasteryColor::Yellow, "30%"),
        (1, 10, MasteryColor::Yellow, "10%"),
        (1, 15, MasteryColor::Yellow, "6,7%"),
        (0, 15, MasteryColor::Green, "0%"),
    ];
    for (np, total, color, text) in cases {
        ensure!(
            mastery_color(np, total) == color,
            "{np}/{total} classified {:?}",
            mastery_color(np, total)
        );
        let shown = format_percent_tenths(percent_tenths(np, total), Locale::Ru);
        ensure!(shown == text, "{np}/{total} shown as {shown}");
    }
    let rows = mastery_table(&mastery_registry(), d(MASTERY_AS_OF));
    let expected = mastery_expected();
    ensure!(
        rows.len() == expected.len(),
        "{} mastery rows, expected {}",
        rows.len(),
        expected.len()
    );
    for (row, (label, sem, group, np, total, text, color)) in rows.iter().zip(expected) {
        let got = (
            row.discipline_label.as_str(),
            row.semester,
            row.group.as_str(),
            row.not_passed,
            row.total,
        );
        ensure!(
            got == (label, sem, group, np, total),
            "row {got:?} != {:?}",
            (label, sem, group, np, total)
        );
        ensure!(
            row.percent_display(Locale::Ru) == text,
            "{label}: {}",
            row.percent_display(Locale::Ru)
        );
        let c = format!("{:?}", row.color).to_lowercase();
        ensure!(c == color, "{label}: colour {c}");
    }
    Ok("40% red, 30% yellow, 10% yellow, 6,7% yellow, 0% green; table order matches".into())
}

pub fn debt_oracle_equivalence(registries: u64) -> Outcome {
    let started = Instant::now();
    let mut checks = 0u64;
    for seed in 0..registries {
        let mut g = rng(seed);
        let r = random_registry(&mut g, 20, 30);
        let ids: Vec<StudentId> = r.students().map(|s| s.id.clone()).collect();
        for _ in 0..10 {
            let as_of = d("2008-06-01") + Days::new(g.gen_range(0..=14 * 365));
            for id in &ids {
                let got = debts_of(&r, id, as_of).map_err(|e| e.to_string())?;
                let want = brute_debts(&r, id, as_of);
                ensure!(
                    got.per_semester == want.per_semester
                        && got.total == want.total
                        && got.last_delivery == want.last_delivery,
                    "seed {seed}, student {id}, as of {as_of}: {got:?} vs {want:?}"
                );
                checks += 1;
            }
            for row in pivot(
                &r,
                &StudentFilter::all_active(),
                as_of,
                PivotSort::default(),
            ) {
                ensure!(
                    row.total_debts == row.per_semester.values().sum::<u32>(),
                    "pivot total of {} is not the sum",
                    row.student
                );
            }
        }
    }
    let took = within(started, Duration::from_secs(60), "debt oracle")?;
    Ok(format!(
        "{registries} registries, {checks} student-dates, 0 mismatches in {took:?}"
    ))
}

/// Every file under `root`, keyed by relative path.
pub fn collect_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&path).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Canonical store bytes of a registry.
pub fn saved_bytes(r: &Registry) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    save_registry(r, dir.path()).map_err(|e| e.to_string())?;
    Ok(collect_files(dir.path()))
}

fn months(from: NaiveDate, to: NaiveDate) -> Vec<(i32, u32)> {
    let mut out = Vec::new();
    let mut m = NaiveDate::from_ymd_opt(from.year(), from.month(), 1).unwrap();
    while m <= to {
        out.push((m.year(), m.month()));
        m = next_month(m);
    }
    out
}

pub fn replay_and_conservation(sequences: u64, events: usize) -> Outcome {
    let started = Instant::now();
    let mut months_checked = 0;
    for seed in 0..sequences {
        let mut g = rng(1_000 + seed);
        let base = random_groups(&mut g, 6);
        let live = random_events(&mut g, &base, d("2012-09-01"), events);
        let log = live.log();
        ensure!(
            log.len() == events,
            "generator stopped at {} events",
            log.len()
        );
        let rebuilt = replay(log, &base).map_err(|e| e.to_string())?;
        ensure!(rebuilt == live, "seed {seed}: replayed registry differs");
        ensure!(
            saved_bytes(&rebuilt)? == saved_bytes(&live)?,
            "seed {seed}: saved stores differ"
        );

        let (first, last) = (log[0].date, log[log.len() - 1].date);
        let mut prev_closing = None;
        for (y, m) in months(first, last) {
            let rep = movement_report(log, &base, y, m).map_err(|e| e.to_string())?;
            ensure!(
                rep.conserves(),
                "seed {seed}: {y}-{m:02} violates closing = opening + arrived - left"
            );
            if let Some(prev) = prev_closing.replace(rep.closing.clone()) {
                ensure!(
                    prev == rep.opening,
                    "seed {seed}: {y}-{m:02} opening differs from previous closing"
                );
            }
            let in_month = log
                .iter()
                .filter(|e| (e.date.year(), e.date.month()) == (y, m));
            let mut counts = [0u32; 3];
            for e in in_month {
                match e.kind {
                    MovementKind::Enroll(_) => counts[0] += 1,
                    MovementKind::Expel { .. } => counts[1] += 1,
                    MovementKind::Transfer { .. } => counts[2] += 1,
                    _ => {}
                }
            }
            let got = [
                rep.flow_total(Flow::Arrived),
                rep.flow_total(Flow::Left),
                rep.flow_total(Flow::Transferred),
            ];
            ensure!(
                got == counts,
                "seed {seed}: {y}-{m:02} flows {got:?}, log has {counts:?}"
            );
            months_checked += 1;
        }
    }
    let took = started.elapsed();
    Ok(format!(
        "{sequences} x {events} events replay byte-identically; {months_checked} monthly reports conserve ({took:?})"
    ))
}

fn finding_keys(r: &Registry, as_of: NaiveDate) -> Vec<(AuditRule, StudentId, NaiveDate)> {
    run_audit(r, as_of, r.calendar())
        .into_iter()
        .map(|f| (f.rule, f.student, f.due_date))
        .collect()
}

/// Events that clear a finding: leave end, graduation, or course advances
/// up to the course the calendar expects.
fn correct(r: &Registry, rule: AuditRule, id: &StudentId, as_of: NaiveDate) -> Registry {
    let kinds = match rule {
        AuditRule::OverdueLeaveExit => vec![MovementKind::LeaveEnd],
        AuditRule::OverdueGraduation => vec![MovementKind::Expel {
            reason: GRADUATED.into(),
            debts_at_expulsion: 0,
        }],
        AuditRule::OverdueCourseAdvance => {
            let s = r.student(id).unwrap();
            let g = r.group(&s.group).unwrap();
            let cal = r.calendar();
            let courses = g
                .final_semester()
                .map_or(cal.max_courses, |f| f.div_ceil(cal.semesters_per_course));
            let mut course = s.course;
            let mut steps = Vec::new();
            while course < courses
                && semester_start(cal, g.cohort_year, course * cal.semesters_per_course + 1) < as_of
            {
                course += 1;
                steps.push(MovementKind::CourseAdvance);
            }
            steps
        }
    };
    let mut next = r.clone();
    for kind in kinds {
        next = next
            .record_event(as_of, id.clone(), kind, "audit")
            .unwrap()
            .0;
    }
    next
}

pub fn audit_oracle_equivalence(registries: u64) -> Outcome {
    let started = Instant::now();
    let mut per_rule: BTreeMap<AuditRule, usize> = BTreeMap::new();
    let mut repairs = 0;
    for seed in 0..registries {
        let mut g = rng(50_000 + seed);
        let mut r = random_registry(&mut g, 6, 20);
        let as_of = d("2010-01-01") + Days::new(g.gen_range(0..=8 * 365));
        // Inject overdue leaves through the movement log.
        let active: Vec<StudentId> = r
            .students()
            .filter(|s| s.status.is_active())
            .map(|s| s.id.clone())
            .collect();
        for id in active.iter().take(2) {
            let since = as_of - Days::new(g.gen_range(60..=400));
            let until = as_of - Days::new(g.gen_range(1..=30));
            if r.log().last().is_none_or(|e| e.date <= since) {
                r = r
                    .record_event(
                        since,
                        id.clone(),
                        MovementKind::LeaveStart { until },
                        "inject",
                    )
                    .unwrap()
                    .0;
            }
        }

        let got = finding_keys(&r, as_of);
        let mut want = brute_audit(&r, as_of);
        let key = |id: &StudentId| {
            let s = r.student(id).unwrap();
            (
                s.name.surname.clone(),
                s.name.given_name.clone(),
                s.name.patronymic.clone(),
                id.clone(),
            )
        };
        want.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| key(&a.1).cmp(&key(&b.1))));
        ensure!(
            got == want,
            "seed {seed} as of {as_of}: run_audit {got:?}\noracle {want:?}"
        );
        for (rule, _, due) in &got {
            *per_rule.entry(*rule).or_default() += 1;
            ensure!(*due < as_of, "finding due {due} is not before {as_of}");
        }

        // Repairs: the targeted finding goes, nothing new for that (rule, student),
        // and other students' findings stay put.
        for (rule, id, _) in got.iter().take(8) {
            let fixed = correct(&r, *rule, id, as_of);
            let after = finding_keys(&fixed, as_of);
            ensure!(
                !after.iter().any(|(r2, s2, _)| r2 == rule && s2 == id),
                "seed {seed}: {rule:?} for {id} survives its correction"
            );
            let before_others: BTreeSet<_> = got.iter().filter(|f| &f.1 != id).collect();
            let after_others: BTreeSet<_> = after.iter().filter(|f| &f.1 != id).collect();
            ensure!(
                before_others == after_others,
                "seed {seed}: correcting {id} changed other findings"
            );
            repairs += 1;
        }
    }
    for rule in [
        AuditRule::OverdueLeaveExit,
        AuditRule::OverdueGraduation,
        AuditRule::OverdueCourseAdvance,
    ] {
        let n = per_rule.get(&rule).copied().unwrap_or(0);
        ensure!(n >= 50, "{rule:?} triggered only {n} times");
    }
    let took = started.elapsed();
    Ok(format!(
        "{registries} registries agree with the oracle; per rule {:?}; {repairs} repairs clean ({took:?})",
        per_rule.values().collect::<Vec<_>>()
    ))
}

pub fn persistence_round_trip(registries: u64) -> Outcome {
    let started = Instant::now();
    for seed in 0..registries {
        let mut g = rng(90_000 + seed);
        let mut r = random_registry(&mut g, 6, 15);
        if seed % 2 == 0 {
            let n = g.gen_range(1..=40);
            r = random_events(&mut g, &r, d("2016-09-01"), n);
        }
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        save_registry(&r, dir.path()).map_err(|e| e.to_string())?;
        let first = collect_files(dir.path());
        let loaded = load_registry(dir.path()).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(loaded == r, "seed {seed}: load(save(r)) != r");
        save_registry(&loaded, dir.path()).map_err(|e| e.to_string())?;
        ensure!(
            collect_files(dir.path()) == first,
            "seed {seed}: second save changed the store"
        );
        ensure!(
            saved_bytes(&r)? == first,
            "seed {seed}: save is not deterministic across directories"
        );
    }
    let took = started.elapsed();
    Ok(format!(
        "{registries} registries: load(save(r)) = r and saves are byte-stable ({took:?})"
    ))
}
