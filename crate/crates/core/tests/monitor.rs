use chrono::Days;
use deanery_core::monitor::{
    debt_series, debts_of, mastery_table, pivot, pivot_table, FilterStatus, PivotSort, SortColumn,
    StudentFilter,
};
use deanery_core::{CurriculumEntryId, Funding, Locale, StudentStatus};
use deanery_testkit::fixtures::{
    debt_group_as_of, debt_group_expected, debt_group_registry, demo_as_of, demo_registry, gid,
    sid, DEBT_GROUP,
};
use deanery_testkit::gen::{random_registry, rng};
use deanery_testkit::{d, oracle};

#[test]
fn group_pivot_matches_the_printed_rows() {
    let r = debt_group_registry();
    let rows = pivot(
        &r,
        &StudentFilter::by_group(gid(DEBT_GROUP)),
        debt_group_as_of(),
        PivotSort::default(),
    );
    assert_eq!(rows.len(), 10);
    for (row, (surname, per_sem, total, last)) in rows.iter().zip(debt_group_expected()) {
        assert_eq!(row.name.surname, surname);
        assert_eq!(row.per_semester.get(&1), Some(&per_sem[0]), "{surname}");
        assert_eq!(row.per_semester.get(&2), Some(&per_sem[1]), "{surname}");
        assert_eq!(row.per_semester.get(&3), None, "semester 3 is not over yet");
        assert_eq!(row.total_debts, total, "{surname}");
        assert_eq!(row.last_delivery, Some(d(last)), "{surname}");
    }
}

#[test]
fn pivot_table_cells_for_one_row() {
    let r = debt_group_registry();
    let rows = pivot(
        &r,
        &StudentFilter::all_active(),
        debt_group_as_of(),
        PivotSort::default(),
    );
    let t = pivot_table(&rows, false, Locale::Ru);
    let text = t.to_csv();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "ФИО,группа,курс,Ср. балл,Итого,посл. сдача,1 семестр,2 семестр,б/к,м/ж"
    );
    let mishurin = text.lines().find(|l| l.contains("Мишурин")).unwrap();
    assert_eq!(
        mishurin,
        "7. Мишурин Олег Владимирович,5210М,2,\"3,01\",4,01.01.2013,2,2,б,м"
    );
}

#[test]
fn debts_of_single_student() {
    let r = debt_group_registry();
    let s = debts_of(&r, &sid("12-000"), debt_group_as_of()).unwrap();
    assert_eq!(s.total, 4);
    assert_eq!(
        s.per_semester.values().copied().collect::<Vec<_>>(),
        vec![2, 2]
    );
    assert!(debts_of(&r, &sid("99-999"), debt_group_as_of()).is_err());
}

#[test]
fn nothing_is_owed_before_the_first_semester_ends() {
    let r = debt_group_registry();
    for s in r.students() {
        let debts = debts_of(&r, &s.id, d("2012-12-31")).unwrap();
        assert_eq!(debts.total, 0);
        assert!(debts.per_semester.is_empty());
    }
}

#[test]
fn a_fully_delivered_student_owes_nothing() {
    let mut r = debt_group_registry();
    let id = sid("12-000");
    let entries: Vec<CurriculumEntryId> = r
        .group(&gid(DEBT_GROUP))
        .unwrap()
        .curriculum
        .iter()
        .map(|e| e.id)
        .collect();
    for e in entries {
        r = r.set_delivery(&id, e, Some(d("2013-01-10"))).unwrap();
    }
    for as_of in ["2013-07-10", "2014-09-01", "2020-01-01"] {
        assert_eq!(debts_of(&r, &id, d(as_of)).unwrap().total, 0);
    }
}

#[test]
fn a_delivery_dated_after_the_query_still_counts_as_owed() {
    let r = debt_group_registry();
    let id = sid("12-000");
    let before = debts_of(&r, &id, debt_group_as_of()).unwrap().total;
    let r = r
        .set_delivery(&id, CurriculumEntryId(2), Some(d("2013-08-01")))
        .unwrap();
    assert_eq!(debts_of(&r, &id, debt_group_as_of()).unwrap().total, before);
    assert_eq!(
        debts_of(&r, &id, d("2013-08-01")).unwrap().total,
        before - 1
    );
}

#[test]
fn sorting_by_total_reverses_cleanly() {
    let r = debt_group_registry();
    let f = StudentFilter::all_active();
    let asc = pivot(
        &r,
        &f,
        debt_group_as_of(),
        "total_debts:asc".parse().unwrap(),
    );
    let desc = pivot(
        &r,
        &f,
        debt_group_as_of(),
        "total_debts:desc".parse().unwrap(),
    );
    let totals = |rows: &[deanery_core::monitor::DebtPivotRow]| {
        rows.iter().map(|r| r.total_debts).collect::<Vec<_>>()
    };
    assert_eq!(totals(&asc), vec![0, 0, 0, 0, 0, 0, 1, 1, 3, 4]);
    assert_eq!(totals(&desc), vec![4, 3, 1, 1, 0, 0, 0, 0, 0, 0]);
    // Ties stay in name order in both directions.
    assert_eq!(desc[2].name.surname, "Котов");
    assert_eq!(desc[3].name.surname, "Фильм");

    let by_name = pivot(&r, &f, debt_group_as_of(), PivotSort::default());
    let mut by_name_desc = pivot(
        &r,
        &f,
        debt_group_as_of(),
        PivotSort {
            column: SortColumn::Name,
            descending: true,
        },
    );
    by_name_desc.reverse();
    assert_eq!(by_name, by_name_desc);
}

#[test]
fn expelled_view_shows_frozen_debts() {
    let r = demo_registry();
    let rows = pivot(
        &r,
        &StudentFilter::expelled(),
        demo_as_of(),
        PivotSort::default(),
    );
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row.name.surname, "Коломойцев");
    assert_eq!(row.total_debts, 2);
    assert!(row.per_semester.is_empty());

    // Later deliveries do not change the frozen count.
    let r = r
        .set_delivery(&row.student, CurriculumEntryId(9), Some(d("2014-02-01")))
        .unwrap();
    let again = pivot(
        &r,
        &StudentFilter::expelled(),
        d("2016-01-01"),
        PivotSort::default(),
    );
    assert_eq!(again[0].total_debts, 2);

    let csv = pivot_table(&again, true, Locale::Ru).to_csv();
    assert_eq!(
        csv,
        "ФИО,группа,курс,Ср. балл,б/к,м/ж,дата,причина,«долги»\n\
         1. Коломойцев Владимир Сергеевич,5210М,2,0,к,м,24.01.2014,болезнь,2\n"
    );
}

#[test]
fn status_views_partition_the_registry() {
    for seed in 0..20 {
        let r = random_registry(&mut rng(seed), 4, 12);
        let as_of = d("2013-03-01");
        let sizes: Vec<usize> = [
            FilterStatus::Active,
            FilterStatus::OnAcademicLeave,
            FilterStatus::Expelled,
        ]
        .into_iter()
        .map(|status| {
            let f = StudentFilter {
                status,
                ..StudentFilter::default()
            };
            pivot(&r, &f, as_of, PivotSort::default()).len()
        })
        .collect();
        assert_eq!(sizes.iter().sum::<usize>(), r.students().count());
        let any = StudentFilter {
            status: FilterStatus::Any,
            ..StudentFilter::default()
        };
        assert_eq!(
            pivot(&r, &any, as_of, PivotSort::default()).len(),
            r.students().count()
        );
    }
}

#[test]
fn attribute_filters_are_a_conjunction() {
    let r = demo_registry();
    let f = StudentFilter::parse("status=any,funding=contract").unwrap();
    let rows = pivot(&r, &f, demo_as_of(), PivotSort::default());
    let mut names: Vec<&str> = rows.iter().map(|r| r.name.surname.as_str()).collect();
    names.sort();
    assert_eq!(names, ["Коломойцев", "Ланская", "Петров"]);

    let f = StudentFilter::parse("status=any,funding=contract,sex=female").unwrap();
    let rows = pivot(&r, &f, demo_as_of(), PivotSort::default());
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].funding, Funding::Contract);

    let f = StudentFilter::parse("group=5201М,course=1").unwrap();
    assert_eq!(pivot(&r, &f, demo_as_of(), PivotSort::default()).len(), 2);
    assert!(StudentFilter::parse("colour=red").is_err());
    assert!(StudentFilter::parse("course=two").is_err());
}

#[test]
fn debt_series_basics() {
    let r = debt_group_registry();
    let f = StudentFilter::all_active();
    let points = debt_series(&r, &f, d("2012-12-01"), d("2013-08-01"), 30).unwrap();
    assert!(points.windows(2).all(|w| w[0].date < w[1].date));
    assert_eq!(points[0].total_debts, 0);
    assert_eq!(points.last().unwrap().total_debts, 9);

    let one = debt_series(&r, &f, debt_group_as_of(), debt_group_as_of(), 1).unwrap();
    let pivot_sum: u32 = pivot(&r, &f, debt_group_as_of(), PivotSort::default())
        .iter()
        .map(|r| r.total_debts)
        .sum();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].total_debts, pivot_sum);

    assert!(debt_series(&r, &f, d("2014-01-01"), d("2013-01-01"), 1).is_err());
    assert!(debt_series(&r, &f, d("2013-01-01"), d("2014-01-01"), 0).is_err());
    let empty = deanery_core::Registry::default();
    let zeros = debt_series(&empty, &f, d("2013-01-01"), d("2013-01-10"), 3).unwrap();
    assert_eq!(zeros.len(), 4);
    assert!(zeros.iter().all(|p| p.total_debts == 0));
}

#[test]
fn closing_a_debt_lowers_the_series_by_one() {
    let r = debt_group_registry();
    let f = StudentFilter::all_active();
    let before = debt_series(&r, &f, d("2013-07-01"), d("2013-07-31"), 1).unwrap();
    let r = r
        .set_delivery(&sid("12-301"), CurriculumEntryId(5), Some(d("2013-07-15")))
        .unwrap();
    let after = debt_series(&r, &f, d("2013-07-01"), d("2013-07-31"), 1).unwrap();
    for (b, a) in before.iter().zip(&after) {
        let expected = if a.date >= d("2013-07-15") {
            b.total_debts - 1
        } else {
            b.total_debts
        };
        assert_eq!(a.total_debts, expected, "{}", a.date);
    }
}

#[test]
fn debts_change_only_at_semester_ends_and_deliveries() {
    for seed in 0..10 {
        let r = random_registry(&mut rng(100 + seed), 3, 10);
        let cal = r.calendar();
        for s in r.students() {
            let g = r.group_of(s);
            let ends: Vec<_> = g
                .curriculum
                .iter()
                .map(|e| cal.semester_end(g.cohort_year, e.semester))
                .collect();
            let deliveries: Vec<_> = s.deliveries.values().copied().collect();
            let mut dates = oracle::interesting_dates(&r);
            dates.retain(|x| *x > d("2007-01-01"));
            for pair in dates.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                let ta = debts_of(&r, &s.id, a).unwrap().total;
                let tb = debts_of(&r, &s.id, b).unwrap().total;
                let any_between = |xs: &[chrono::NaiveDate]| xs.iter().any(|x| *x > a && *x <= b);
                if !any_between(&deliveries) {
                    assert!(tb >= ta, "debts fell without a delivery: {} {a}..{b}", s.id);
                }
                if !any_between(&ends) {
                    assert!(
                        tb <= ta,
                        "debts rose without a semester end: {} {a}..{b}",
                        s.id
                    );
                }
            }
        }
    }
}

#[test]
fn leave_freezes_semester_completion() {
    let r = debt_group_registry();
    let id = sid("12-000");
    let (r, _) = r
        .record_event(
            d("2013-07-01"),
            id.clone(),
            deanery_core::contingent::MovementKind::LeaveStart {
                until: d("2014-07-01"),
            },
            "dean",
        )
        .unwrap();
    assert!(matches!(
        r.student(&id).unwrap().status,
        StudentStatus::AcademicLeave { .. }
    ));
    let now = debts_of(&r, &id, d("2013-07-10")).unwrap().total;
    let later = debts_of(&r, &id, d("2014-06-01")).unwrap().total;
    assert_eq!(
        now, later,
        "semester 3 ended while on leave and must not count"
    );
}

#[test]
fn mastery_counts_add_up() {
    for seed in 0..20 {
        let r = random_registry(&mut rng(200 + seed), 4, 15);
        let as_of = d("2014-02-01");
        for row in mastery_table(&r, as_of) {
            let active = r
                .students()
                .filter(|s| s.group == row.group && s.status.is_active())
                .count() as u32;
            assert_eq!(row.total, active);
            assert!(row.not_passed <= row.total);
            assert!(row.percent_tenths <= 1000);
        }
    }
}

#[test]
fn mastery_excludes_unfinished_semesters() {
    let r = debt_group_registry();
    let rows = mastery_table(&r, debt_group_as_of());
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|row| row.semester <= 2));
    let later = mastery_table(&r, debt_group_as_of() + Days::new(365));
    assert_eq!(later.len(), 11);
}
