use deanery_core::monitor::debts_of;
use deanery_core::rating::GradeScale;
use deanery_core::sync::{
    build_sheet, export_group_for_teacher, import_results, parse_roster, roster_to_exchange,
    SheetMark, TeacherExchangeRecord,
};
use deanery_core::{ControlCodeTable, ControlKind, CurriculumEntryId};
use deanery_testkit::d;
use deanery_testkit::fixtures::{exam_sheet_fixture, gid, sid, SHEET_DISCIPLINE, SHEET_GROUP};

#[test]
fn sheet_text_has_the_printed_columns_and_summary() {
    let (r, x) = exam_sheet_fixture();
    let sheet = build_sheet(&r, &x, &GradeScale::default()).unwrap();
    let text = sheet.render_text();
    assert!(text.contains(&format!("Дисциплина {SHEET_DISCIPLINE} ЭКЗАМЕН")));
    assert!(text.contains("Дата 13.01.14"));
    let first = text.lines().find(|l| l.contains("Абрамов А.В.")).unwrap();
    let cells: Vec<&str> = first.split_whitespace().collect();
    assert_eq!(
        cells,
        [
            "1",
            "Абрамов",
            "А.В.",
            "2011/0856",
            "45",
            "65",
            "удовл",
            "13.01.14"
        ]
    );
    let absent = text.lines().find(|l| l.contains("Бердина")).unwrap();
    assert!(absent.contains("2011/0373") && absent.contains("неявка"));
    assert!(!absent.contains("13.01.14"));
    for wanted in [
        "ИТОГО: Отлично 7",
        "Хорошо 5",
        "Удовлетв 5",
        "Неудовлетв 0",
        "Неявка 5",
    ] {
        assert!(
            text.lines().any(|l| l.starts_with(wanted)),
            "missing `{wanted}` in\n{text}"
        );
    }
    assert_eq!(sheet.summary[&SheetMark::NoShow], 5);
}

#[test]
fn import_closes_debts_for_passing_students_only() {
    let (r, x) = exam_sheet_fixture();
    let entry = CurriculumEntryId(2);
    let after = import_results(&r, &x, &GradeScale::default()).unwrap();
    let delivered: Vec<_> = after
        .students()
        .filter(|s| s.deliveries.get(&entry) == Some(&d("2014-01-13")))
        .collect();
    assert_eq!(delivered.len(), 17);
    let as_of = d("2014-02-01");
    let before: u32 = r
        .students()
        .map(|s| debts_of(&r, &s.id, as_of).unwrap().total)
        .sum();
    let now: u32 = after
        .students()
        .map(|s| debts_of(&after, &s.id, as_of).unwrap().total)
        .sum();
    assert_eq!(before - now, 17);
    // Importing the same record again changes nothing.
    assert_eq!(
        import_results(&after, &x, &GradeScale::default()).unwrap(),
        after
    );
}

#[test]
fn import_validates_everything_first() {
    let (r, x) = exam_sheet_fixture();
    let scale = GradeScale::default();

    let mut bad = x.clone();
    bad.discipline = "Астрология".into();
    assert_eq!(
        import_results(&r, &bad, &scale).unwrap_err().name(),
        "UnknownCurriculumEntry"
    );

    let mut bad = x.clone();
    let last = bad.lines.len() - 1;
    bad.lines[last].exam_points = Some(41);
    assert_eq!(
        import_results(&r, &bad, &scale).unwrap_err().name(),
        "RangeViolation"
    );

    let mut bad = x.clone();
    let i = bad.lines.iter().position(|l| l.date.is_some()).unwrap();
    bad.lines[i].date = None;
    assert_eq!(
        import_results(&r, &bad, &scale).unwrap_err().name(),
        "MissingDateOnPass"
    );

    let mut bad = x.clone();
    bad.lines[0].student = sid("nobody");
    assert_eq!(
        import_results(&r, &bad, &scale).unwrap_err().name(),
        "UnknownStudent"
    );

    let mut bad = x.clone();
    let dup = bad.lines[0].clone();
    bad.lines.push(dup);
    assert!(import_results(&r, &bad, &scale).is_err());

    let mut bad = x.clone();
    bad.option = "option9".into();
    assert_eq!(
        import_results(&r, &bad, &scale).unwrap_err().name(),
        "UnknownOption"
    );
}

#[test]
fn exchange_text_round_trips() {
    let (_, x) = exam_sheet_fixture();
    let codes = ControlCodeTable::default();
    let text = x.render(&codes).unwrap();
    assert!(text.starts_with(&format!(
        "{SHEET_GROUP},{SHEET_DISCIPLINE},5,1,option1,2014-01-13\n"
    )));
    assert_eq!(TeacherExchangeRecord::parse(&text, &codes).unwrap(), x);
}

#[test]
fn exchange_parse_errors_carry_line_numbers() {
    let codes = ControlCodeTable::default();
    let head = "5131,Физика,5,1,option1,2014-01-13\n";
    for (text, line) in [
        ("", 1),
        ("5131,Физика,5,99,option1,2014-01-13\n", 1),
        ("5131,Физика,5,1,option1,13.01.2014\n", 1),
        (&*format!("{head}5131-01,2011/0856,45,x,0,2014-01-13\n"), 2),
        (
            &*format!("{head}5131-01,2011/0856,45,20,0,2014-01-13\n5131-02,1,2\n"),
            3,
        ),
    ] {
        match TeacherExchangeRecord::parse(text, &codes) {
            Err(deanery_core::Error::MalformedFile { line: l, .. }) => {
                assert_eq!(l, line, "{text:?}")
            }
            other => panic!("expected MalformedFile for {text:?}, got {other:?}"),
        }
    }
}

#[test]
fn roster_export_and_blank_exchange() {
    let (r, _) = exam_sheet_fixture();
    let codes = r.control_codes().clone();
    let text = export_group_for_teacher(&r, &gid(SHEET_GROUP), 5).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        format!("group,semester,student_id,record_book,surname,given_name,patronymic,2|1|{SHEET_DISCIPLINE},3|2|Компьютерная графика")
    );
    assert_eq!(
        lines.next().unwrap(),
        "5131,5,5131-01,2011/0856,Абрамов,Алексей,Викторович,,"
    );
    assert_eq!(text.lines().count(), 23);

    let roster = parse_roster(&text, &codes).unwrap();
    assert_eq!(roster.group, Some(gid(SHEET_GROUP)));
    assert_eq!(roster.students.len(), 22);
    let blanks = roster_to_exchange(&roster, "option1", d("2014-01-13"));
    assert_eq!(blanks.len(), 2);
    assert_eq!(blanks[1].control, ControlKind::Credit);
    // A blank record imports cleanly and closes nothing.
    for x in &blanks {
        assert_eq!(import_results(&r, x, &GradeScale::default()).unwrap(), r);
    }
}

#[test]
fn roster_for_an_empty_semester_is_header_only() {
    let (r, _) = exam_sheet_fixture();
    let text = export_group_for_teacher(&r, &gid(SHEET_GROUP), 7).unwrap();
    assert_eq!(
        text,
        "group,semester,student_id,record_book,surname,given_name,patronymic\n"
    );
    let roster = parse_roster(&text, r.control_codes()).unwrap();
    assert_eq!(roster.group, None);
    assert!(roster_to_exchange(&roster, "option1", d("2014-01-13")).is_empty());
    assert!(export_group_for_teacher(&r, &gid("0000"), 5).is_err());
}
