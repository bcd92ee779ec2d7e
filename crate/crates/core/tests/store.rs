use std::fs;
use std::path::Path;

use deanery_core::store::{
    load_registry, save_registry, CALENDAR_FILE, GROUPS_FILE, LOG_FILE, PLANS_DIR, STUDENTS_DIR,
};
use deanery_core::{ControlCodeTable, ControlKind, Error, Registry};
use deanery_testkit::fixtures::{demo_registry, DEBT_GROUP};

fn saved(r: &Registry) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    save_registry(r, dir.path()).unwrap();
    dir
}

fn students_file(root: &Path) -> std::path::PathBuf {
    root.join(STUDENTS_DIR).join(format!("{DEBT_GROUP}.csv"))
}

fn edit(path: &Path, f: impl FnOnce(String) -> String) {
    let text = fs::read_to_string(path).unwrap();
    fs::write(path, f(text)).unwrap();
}

#[test]
fn demo_store_round_trips() {
    let r = demo_registry();
    let dir = saved(&r);
    for f in [CALENDAR_FILE, GROUPS_FILE, LOG_FILE] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    assert_eq!(fs::read_dir(dir.path().join(PLANS_DIR)).unwrap().count(), 3);
    let back = load_registry(dir.path()).unwrap();
    assert_eq!(back, r);
    // Saving again without changes leaves every file as it was.
    let before = fs::read(students_file(dir.path())).unwrap();
    save_registry(&back, dir.path()).unwrap();
    assert_eq!(fs::read(students_file(dir.path())).unwrap(), before);
}

#[test]
fn empty_registry_round_trips() {
    let r = Registry::default();
    let dir = saved(&r);
    assert!(dir.path().join(PLANS_DIR).is_dir());
    assert!(dir.path().join(STUDENTS_DIR).is_dir());
    assert_eq!(load_registry(dir.path()).unwrap(), r);
}

#[test]
fn missing_directories_are_an_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(load_registry(dir.path()).unwrap_err().name(), "IoFailure");
    assert_eq!(
        load_registry(&dir.path().join("nope")).unwrap_err().name(),
        "IoFailure"
    );
}

#[test]
fn bad_date_reports_file_and_line() {
    let dir = saved(&demo_registry());
    let path = students_file(dir.path());
    edit(&path, |t| t.replacen("2013-06-20", "2013-13-20", 1));
    match load_registry(dir.path()).unwrap_err() {
        Error::MalformedFile { path: p, line, .. } => {
            assert_eq!(p, path);
            assert!(line >= 2);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn delivery_for_an_unknown_entry_is_dangling() {
    let dir = saved(&demo_registry());
    let path = students_file(dir.path());
    edit(&path, |t| {
        let mut lines: Vec<String> = t.lines().map(String::from).collect();
        lines[0].push_str(",99");
        lines[1].push_str(",2014-01-01");
        for l in &mut lines[2..] {
            l.push(',');
        }
        lines.join("\n") + "\n"
    });
    assert_eq!(
        load_registry(dir.path()).unwrap_err().name(),
        "DanglingReference"
    );
}

#[test]
fn duplicate_student_ids_are_rejected() {
    let dir = saved(&demo_registry());
    let path = students_file(dir.path());
    edit(&path, |t| {
        let second = t.lines().nth(1).unwrap().to_string();
        format!("{t}{second}\n")
    });
    assert_eq!(
        load_registry(dir.path()).unwrap_err().name(),
        "DuplicateStudentId"
    );
}

#[test]
fn broken_headers_and_indexes() {
    let dir = saved(&demo_registry());
    let plan = dir.path().join(PLANS_DIR).join(format!("{DEBT_GROUP}.csv"));
    let original = fs::read_to_string(&plan).unwrap();
    fs::write(&plan, original.replacen("ordinal", "number", 1)).unwrap();
    assert_eq!(
        load_registry(dir.path()).unwrap_err().name(),
        "MalformedFile"
    );
    fs::write(&plan, &original).unwrap();

    let groups = dir.path().join(GROUPS_FILE);
    let index = fs::read_to_string(&groups).unwrap();
    let without: String = index
        .lines()
        .filter(|l| !l.starts_with(DEBT_GROUP))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&groups, without).unwrap();
    assert_eq!(
        load_registry(dir.path()).unwrap_err().name(),
        "MalformedFile"
    );
    fs::write(&groups, &index).unwrap();

    fs::write(
        dir.path().join(CALENDAR_FILE),
        "semesters_per_course = zero\n",
    )
    .unwrap();
    assert_eq!(
        load_registry(dir.path()).unwrap_err().name(),
        "MalformedFile"
    );
}

#[test]
fn corrupt_log_is_rejected() {
    let dir = saved(&demo_registry());
    edit(&dir.path().join(LOG_FILE), |t| t.replacen("1\t", "7\t", 1));
    assert_eq!(
        load_registry(dir.path()).unwrap_err().name(),
        "MalformedFile"
    );
}

#[test]
fn custom_control_codes_survive() {
    let codes = ControlCodeTable::new([
        (10, ControlKind::Exam),
        (20, ControlKind::Credit),
        (30, ControlKind::DifferentiatedCredit),
        (40, ControlKind::Practice),
        (50, ControlKind::Coursework),
    ])
    .unwrap();
    let base = demo_registry();
    let mut r = Registry::new(base.calendar().clone(), codes.clone());
    for g in base.groups() {
        r.insert_group(g.clone()).unwrap();
    }
    let dir = saved(&r);
    let plan =
        fs::read_to_string(dir.path().join(PLANS_DIR).join(format!("{DEBT_GROUP}.csv"))).unwrap();
    assert!(plan.lines().next().unwrap().contains("10=exam"), "{plan}");
    assert_eq!(load_registry(dir.path()).unwrap().control_codes(), &codes);
}

#[test]
fn removed_groups_lose_their_files() {
    let base = demo_registry();
    let dir = saved(&Registry::new(
        base.calendar().clone(),
        base.control_codes().clone(),
    ));
    let mut r = Registry::new(base.calendar().clone(), base.control_codes().clone());
    r.insert_group(
        base.group(&deanery_testkit::fixtures::gid("5200М"))
            .unwrap()
            .clone(),
    )
    .unwrap();
    save_registry(&r, dir.path()).unwrap();
    assert!(dir.path().join(PLANS_DIR).join("5200М.csv").is_file());
    save_registry(
        &Registry::new(base.calendar().clone(), base.control_codes().clone()),
        dir.path(),
    )
    .unwrap();
    assert!(!dir.path().join(PLANS_DIR).join("5200М.csv").exists());
    assert!(!dir.path().join(GROUPS_FILE).exists());
}
