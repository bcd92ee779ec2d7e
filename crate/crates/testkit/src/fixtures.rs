//! Hand-built registries transcribing the department's printed tables.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use deanery_core::contingent::{EnrollDetails, MovementKind};
use deanery_core::sync::{ExchangeLine, TeacherExchangeRecord};
use deanery_core::{
    ControlKind, CurriculumEntry, CurriculumEntryId, Funding, Group, GroupId, MeanScore,
    PersonName, Registry, Sex, StudentId, StudentRecord, StudentStatus,
};

use crate::d;

pub fn sid(s: &str) -> StudentId {
    StudentId::new(s).expect("fixture id")
}

pub fn gid(s: &str) -> GroupId {
    GroupId::new(s).expect("fixture group")
}

/// Group with ordinals assigned in (semester, listing) order.
pub fn group(
    id: &str,
    course: u32,
    direction: &str,
    cohort_year: i32,
    plan: &[(u32, &str, ControlKind)],
) -> Group {
    let mut plan = plan.to_vec();
    plan.sort_by_key(|(sem, _, _)| *sem);
    Group {
        id: gid(id),
        course,
        direction: direction.into(),
        cohort_year,
        curriculum: plan
            .iter()
            .enumerate()
            .map(|(i, (semester, discipline, control))| CurriculumEntry {
                id: CurriculumEntryId(i as u32 + 1),
                discipline: discipline.to_string(),
                semester: *semester,
                control: *control,
            })
            .collect(),
    }
}

pub struct Person<'a> {
    pub id: &'a str,
    pub name: [&'a str; 3],
    pub sex: Sex,
    pub funding: Funding,
    pub card: &'a str,
    pub mean: &'a str,
}

pub fn student(p: &Person, group: &str, course: u32, deliveries: &[(u32, &str)]) -> StudentRecord {
    StudentRecord {
        id: sid(p.id),
        name: PersonName::new(p.name[0], p.name[1], p.name[2]).expect("fixture name"),
        card_number: p.card.into(),
        group: gid(group),
        course,
        funding: p.funding,
        sex: p.sex,
        mean_score: MeanScore::parse(p.mean).expect("fixture mean score"),
        status: StudentStatus::Active,
        deliveries: deliveries
            .iter()
            .map(|(e, date)| (CurriculumEntryId(*e), d(date)))
            .collect::<BTreeMap<_, _>>(),
    }
}

const DIRECTION: &str = "Информационные системы";

pub const DEBT_GROUP: &str = "5210М";

pub fn debt_group_as_of() -> NaiveDate {
    d("2013-07-10")
}

fn group_5210() -> Group {
    use ControlKind::*;
    group(
        DEBT_GROUP,
        2,
        DIRECTION,
        2012,
        &[
            (1, "Вычислительные системы", Exam),
            (
                1,
                "Компьютерные технологии в науке и телекоммуникации",
                Credit,
            ),
            (1, "Методы оптимизации", Exam),
            (2, "Исторический язык", Exam),
            (2, "Интерфейсы и протоколы информационных систем", Credit),
            (2, "Научно-исследовательская работа", Practice),
            (3, "Научно-технический семинар", Credit),
            (3, "Оптимизация информационных систем", Exam),
            (3, "Философия", Exam),
            (3, "Криптология", Coursework),
            (4, "Научно-исследовательская работа", DifferentiatedCredit),
        ],
    )
}

const SEM1: [(u32, &str); 3] = [(1, "2013-01-12"), (2, "2013-01-15"), (3, "2013-01-18")];
const SEM2: [(u32, &str); 3] = [(4, "2013-06-05"), (5, "2013-06-14"), (6, "2013-06-20")];

fn all_but(skip: &[u32]) -> Vec<(u32, &'static str)> {
    SEM1.iter()
        .chain(SEM2.iter())
        .copied()
        .filter(|(e, _)| !skip.contains(e))
        .collect()
}

/// Group 5210М on 2013-07-10: ten active students, two semesters completed.
pub fn debt_group_registry() -> Registry {
    use Funding::Budget;
    use Sex::{Female, Male};
    let mut r = Registry::default();
    r.insert_group(group_5210()).unwrap();
    let rows: [(Person, Vec<(u32, &str)>); 10] = [
        (
            Person {
                id: "12-390",
                name: ["Абрамов", "Александр", "Петрович"],
                sex: Male,
                funding: Budget,
                card: "12/390",
                mean: "5",
            },
            all_but(&[]),
        ),
        (
            Person {
                id: "12-598",
                name: ["Борода", "Мария", "Юрьевна"],
                sex: Female,
                funding: Budget,
                card: "12/598",
                mean: "4,86",
            },
            all_but(&[]),
        ),
        (
            Person {
                id: "12-798",
                name: ["Васильев", "Игорь", "Анатольевич"],
                sex: Male,
                funding: Budget,
                card: "12/798",
                mean: "4,23",
            },
            all_but(&[]),
        ),
        (
            Person {
                id: "12-898",
                name: ["Ежова", "Елена", "Геннадьевна"],
                sex: Female,
                funding: Budget,
                card: "12/898",
                mean: "4,92",
            },
            all_but(&[]),
        ),
        (
            Person {
                id: "12-000",
                name: ["Мишурин", "Олег", "Владимирович"],
                sex: Male,
                funding: Budget,
                card: "12/000",
                mean: "3,01",
            },
            vec![(1, "2013-01-01"), (4, "2012-12-28")],
        ),
        (
            Person {
                id: "12-301",
                name: ["Котов", "Вадим", "Петрович"],
                sex: Male,
                funding: Budget,
                card: "12/301",
                mean: "3,72",
            },
            all_but(&[5]),
        ),
        (
            Person {
                id: "12-302",
                name: ["Маржолова", "Наталья", "Викторовна"],
                sex: Female,
                funding: Budget,
                card: "12/302",
                mean: "4,01",
            },
            all_but(&[]),
        ),
        (
            Person {
                id: "12-303",
                name: ["Оленев", "Валентин", "Леонидович"],
                sex: Male,
                funding: Budget,
                card: "12/303",
                mean: "5",
            },
            all_but(&[]),
        ),
        (
            Person {
                id: "11-978",
                name: ["Свиноглова", "Людмила", "Борисовна"],
                sex: Female,
                funding: Budget,
                card: "11/978",
                mean: "4,91",
            },
            vec![(1, "2013-01-01"), (4, "2012-12-20"), (5, "2012-12-27")],
        ),
        (
            Person {
                id: "12-501",
                name: ["Фильм", "Юрий", "Юрьевич"],
                sex: Male,
                funding: Budget,
                card: "12/501",
                mean: "3,47",
            },
            all_but(&[5]),
        ),
    ];
    for (p, deliveries) in &rows {
        r.insert_student(student(p, DEBT_GROUP, 2, deliveries))
            .unwrap();
    }
    r
}

/// Expected (surname, per-semester debts, total, last delivery) on [`debt_group_as_of`],
/// in name order.
pub fn debt_group_expected() -> Vec<(&'static str, [u32; 2], u32, &'static str)> {
    vec![
        ("Абрамов", [0, 0], 0, "2013-06-20"),
        ("Борода", [0, 0], 0, "2013-06-20"),
        ("Васильев", [0, 0], 0, "2013-06-20"),
        ("Ежова", [0, 0], 0, "2013-06-20"),
        ("Котов", [0, 1], 1, "2013-06-20"),
        ("Маржолова", [0, 0], 0, "2013-06-20"),
        ("Мишурин", [2, 2], 4, "2013-01-01"),
        ("Оленев", [0, 0], 0, "2013-06-20"),
        ("Свиноглова", [2, 1], 3, "2013-01-01"),
        ("Фильм", [0, 1], 1, "2013-06-20"),
    ]
}

pub fn demo_as_of() -> NaiveDate {
    d("2014-02-15")
}

/// The debt group plus a first-year intake, leaves, one expulsion and one
/// transfer, all recorded as movement events.
pub fn demo_registry() -> Registry {
    use ControlKind::*;
    use Funding::{Budget, Contract};
    use Sex::{Female, Male};
    let mut r = debt_group_registry();
    let first_year = [
        (1, "Иностранный язык", Credit),
        (1, "Математический анализ", Exam),
        (1, "Программирование", Exam),
        (2, "Базы данных", Exam),
        (2, "Программирование", Coursework),
    ];
    r.insert_group(group("5200М", 1, DIRECTION, 2013, &first_year))
        .unwrap();
    r.insert_group(group("5201М", 1, DIRECTION, 2013, &first_year))
        .unwrap();

    let extra = [
        (
            Person {
                id: "12-777",
                name: ["Мухоменов", "Николай", "Николаевич"],
                sex: Male,
                funding: Budget,
                card: "12/777",
                mean: "3,27",
            },
            vec![(1, "2013-01-12"), (2, "2013-01-26")],
        ),
        (
            Person {
                id: "12-640",
                name: ["Коломойцев", "Владимир", "Сергеевич"],
                sex: Male,
                funding: Contract,
                card: "12/640",
                mean: "0",
            },
            vec![
                (1, "2013-01-12"),
                (2, "2013-01-15"),
                (3, "2013-01-18"),
                (4, "2013-06-05"),
                (5, "2013-06-14"),
                (6, "2013-06-20"),
                (7, "2013-12-25"),
                (8, "2014-01-10"),
            ],
        ),
    ];
    for (p, deliveries) in &extra {
        r.insert_student(student(p, DEBT_GROUP, 2, deliveries))
            .unwrap();
    }

    let enroll = |id: &str, group: &str, name: [&str; 3], funding, sex, card: &str| {
        (
            sid(id),
            MovementKind::Enroll(EnrollDetails {
                group: gid(group),
                course: 1,
                funding,
                sex,
                card_number: card.into(),
                name: PersonName::new(name[0], name[1], name[2]).unwrap(),
                mean_score: MeanScore::default(),
            }),
        )
    };
    let events: Vec<(&str, (StudentId, MovementKind))> = vec![
        (
            "2013-07-05",
            (
                sid("12-777"),
                MovementKind::LeaveStart {
                    until: d("2014-07-01"),
                },
            ),
        ),
        (
            "2013-09-01",
            enroll(
                "13-101",
                "5200М",
                ["Сидорова", "Мария", "Михайловна"],
                Budget,
                Female,
                "13/101",
            ),
        ),
        (
            "2013-09-01",
            enroll(
                "13-102",
                "5200М",
                ["Рязанцева", "Людмила", "Михайловна"],
                Budget,
                Female,
                "13/102",
            ),
        ),
        (
            "2013-09-01",
            enroll(
                "13-103",
                "5200М",
                ["Петров", "Иван", "Сергеевич"],
                Contract,
                Male,
                "13/103",
            ),
        ),
        (
            "2013-09-02",
            enroll(
                "13-104",
                "5201М",
                ["Ланская", "Ольга", "Игоревна"],
                Contract,
                Female,
                "13/104",
            ),
        ),
        (
            "2014-01-24",
            (
                sid("12-640"),
                MovementKind::Expel {
                    reason: "болезнь".into(),
                    debts_at_expulsion: 0,
                },
            ),
        ),
        (
            "2014-02-03",
            (
                sid("13-101"),
                MovementKind::LeaveStart {
                    until: d("2015-02-01"),
                },
            ),
        ),
        (
            "2014-02-03",
            (
                sid("13-102"),
                MovementKind::LeaveStart {
                    until: d("2015-02-01"),
                },
            ),
        ),
        (
            "2014-02-10",
            (
                sid("13-103"),
                MovementKind::Transfer {
                    from: gid("5200М"),
                    to: gid("5201М"),
                },
            ),
        ),
    ];
    for (date, (student, kind)) in events {
        r = r.record_event(d(date), student, kind, "dean").unwrap().0;
    }
    r
}

pub const MASTERY_AS_OF: &str = "2014-02-01";

/// Two groups whose completed disciplines show the not-passed shares
/// 4/10, 3/10, 1/10, 1/10, 1/15, 0/10 and 0/15.
pub fn mastery_registry() -> Registry {
    use ControlKind::*;
    let mut r = Registry::default();
    r.insert_group(group(
        "5210M",
        2,
        DIRECTION,
        2012,
        &[
            (1, "Вычислительные системы", Exam),
            (2, "Научно-технический семинар", Credit),
            (3, "Научно-технический семинар", Credit),
            (3, "Оптимизация информационных систем", Exam),
            (3, "Философия", Exam),
        ],
    ))
    .unwrap();
    r.insert_group(group(
        "5230M",
        2,
        DIRECTION,
        2012,
        &[
            (2, "Администрирование информационных систем", Exam),
            (3, "Защита информации", Credit),
        ],
    ))
    .unwrap();
    // Entry -> how many of the group's active students lack it.
    let plan = [
        ("5210M", 10, &[(1, 0), (2, 1), (3, 4), (4, 3), (5, 1)][..]),
        ("5230M", 15, &[(1, 0), (2, 1)][..]),
    ];
    for (g, size, missing) in plan {
        for i in 0..size {
            let id = format!("{g}-{i:02}");
            let surname = format!("Студент{i:02}");
            let deliveries: Vec<(u32, &str)> = missing
                .iter()
                .filter(|(_, k)| i >= *k)
                .map(|(e, _)| (*e, "2014-01-20"))
                .collect();
            let p = Person {
                id: &id,
                name: [&surname, "Иван", ""],
                sex: Sex::Male,
                funding: Funding::Budget,
                card: "",
                mean: "4",
            };
            r.insert_student(student(&p, g, 2, &deliveries)).unwrap();
        }
    }
    // Someone on leave with nothing delivered must not count.
    let mut away = student(
        &Person {
            id: "5210M-leave",
            name: ["Отпускник", "Пётр", ""],
            sex: Sex::Male,
            funding: Funding::Contract,
            card: "",
            mean: "3",
        },
        "5210M",
        2,
        &[],
    );
    away.status = StudentStatus::AcademicLeave {
        since: d("2013-10-01"),
        until: d("2014-10-01"),
    };
    r.insert_student(away).unwrap();
    r
}

/// (label, semester, group, not passed, total, percent text, colour name) in
/// table order on [`MASTERY_AS_OF`].
pub fn mastery_expected() -> Vec<(
    &'static str,
    u32,
    &'static str,
    u32,
    u32,
    &'static str,
    &'static str,
)> {
    vec![
        (
            "Научно-технический семинар (зачет)",
            3,
            "5210M",
            4,
            10,
            "40%",
            "red",
        ),
        (
            "Оптимизация информационных систем (экзамен)",
            3,
            "5210M",
            3,
            10,
            "30%",
            "yellow",
        ),
        (
            "Научно-технический семинар (зачет)",
            2,
            "5210M",
            1,
            10,
            "10%",
            "yellow",
        ),
        ("Философия (экзамен)", 3, "5210M", 1, 10, "10%", "yellow"),
        (
            "Защита информации (зачет)",
            3,
            "5230M",
            1,
            15,
            "6,7%",
            "yellow",
        ),
        (
            "Администрирование информационных систем (экзамен)",
            2,
            "5230M",
            0,
            15,
            "0%",
            "green",
        ),
        (
            "Вычислительные системы (экзамен)",
            1,
            "5210M",
            0,
            10,
            "0%",
            "green",
        ),
    ]
}

pub const SHEET_GROUP: &str = "5131";
pub const SHEET_DISCIPLINE: &str = "Кроссплатформенное программирование";

/// (surname, given, patronymic, record book, semester points, final rating, printed mark)
pub type SheetRowFixture = (
    &'static str,
    &'static str,
    &'static str,
    &'static str,
    Option<u32>,
    Option<u32>,
    &'static str,
);

pub fn sheet_rows() -> Vec<SheetRowFixture> {
    vec![
        (
            "Абрамов",
            "Алексей",
            "Викторович",
            "2011/0856",
            Some(45),
            Some(65),
            "удовл",
        ),
        (
            "Бердина",
            "Дарья",
            "Владимировна",
            "2011/0373",
            None,
            None,
            "неявка",
        ),
        (
            "Васильев",
            "Артём",
            "Михайлович",
            "2011/0376",
            None,
            None,
            "неявка",
        ),
        (
            "Вересов",
            "Илья",
            "Устинович",
            "2011/0378",
            Some(60),
            Some(89),
            "отлично",
        ),
        (
            "Грабарь",
            "Сергей",
            "Андреевич",
            "2011/0381",
            None,
            None,
            "неявка",
        ),
        (
            "Ежова",
            "Ирина",
            "Олеговна",
            "2011/0385",
            Some(48),
            Some(70),
            "хорошо",
        ),
        (
            "Ершов",
            "Кирилл",
            "Витальевич",
            "2011/0387",
            Some(45),
            Some(70),
            "хорошо",
        ),
        (
            "Изотов",
            "Антон",
            "Евгеньевич",
            "2011/0388",
            Some(60),
            Some(100),
            "отлично",
        ),
        (
            "Коробков",
            "Никита",
            "Алексеевич",
            "2011/0389",
            Some(45),
            Some(65),
            "удовл",
        ),
        (
            "Кулин",
            "Константин",
            "Викторович",
            "2010/0317",
            Some(55),
            Some(85),
            "отлично",
        ),
        (
            "Мамаев",
            "Иван",
            "Сергеевич",
            "2011/0289",
            None,
            None,
            "неявка",
        ),
        (
            "Михалев",
            "Владимир",
            "Александрович",
            "2011/0411",
            Some(49),
            Some(70),
            "хорошо",
        ),
        (
            "Мишура",
            "Евгения",
            "Андреевна",
            "2011/0412",
            None,
            None,
            "неявка",
        ),
        (
            "Оленев",
            "Игорь",
            "Валентинович",
            "2011/0421",
            Some(55),
            Some(70),
            "хорошо",
        ),
        (
            "Пашков",
            "Алексей",
            "Игоревич",
            "2011/1235",
            Some(41),
            Some(70),
            "хорошо",
        ),
        (
            "Поляков",
            "Виктор",
            "Викторович",
            "2011/1237",
            Some(52),
            Some(91),
            "отлично",
        ),
        (
            "Свинолобова",
            "Римма",
            "Олеговна",
            "2011/0428",
            Some(40),
            Some(60),
            "удовл",
        ),
        (
            "Семенов",
            "Денис",
            "Игоревич",
            "2011/0429",
            Some(45),
            Some(65),
            "удовл",
        ),
        (
            "Сыщиков",
            "Василий",
            "Михайлович",
            "2011/0431",
            Some(60),
            Some(100),
            "отлично",
        ),
        (
            "Усикова",
            "Вера",
            "Андреевна",
            "2011/1267",
            Some(60),
            Some(100),
            "отлично",
        ),
        (
            "Филь",
            "Андрей",
            "Дмитриевич",
            "2011/0437",
            Some(58),
            Some(85),
            "отлично",
        ),
        (
            "Хохлов",
            "Кирилл",
            "Сергеевич",
            "2011/0443",
            Some(35),
            Some(60),
            "удовл",
        ),
    ]
}

/// Group 5131 and the exchange record behind the printed exam sheet. Lines
/// arrive ordered by record book, not by name. Two absentees carry semester
/// points below admission.
pub fn exam_sheet_fixture() -> (Registry, TeacherExchangeRecord) {
    use ControlKind::*;
    let mut r = Registry::default();
    r.insert_group(group(
        SHEET_GROUP,
        3,
        "Программная инженерия",
        2011,
        &[
            (4, "Базы данных", Exam),
            (5, SHEET_DISCIPLINE, Exam),
            (5, "Компьютерная графика", Credit),
            (6, "Компьютерные сети", Exam),
            (8, "Преддипломная практика", Practice),
        ],
    ))
    .unwrap();
    let sheet_date = d("2014-01-13");
    let mut lines = Vec::new();
    for (i, (surname, given, patronymic, book, sem, fin, _)) in sheet_rows().into_iter().enumerate()
    {
        let id = format!("5131-{:02}", i + 1);
        let p = Person {
            id: &id,
            name: [surname, given, patronymic],
            sex: if surname.ends_with('а') {
                Sex::Female
            } else {
                Sex::Male
            },
            funding: Funding::Budget,
            card: book,
            mean: "4",
        };
        r.insert_student(student(&p, SHEET_GROUP, 3, &[])).unwrap();
        let (semester_points, exam_points, date) = match (sem, fin) {
            (Some(s), Some(f)) => (Some(s), Some(f - s), Some(sheet_date)),
            _ => (
                match i {
                    1 => Some(20),
                    10 => Some(31),
                    _ => None,
                },
                None,
                None,
            ),
        };
        lines.push(ExchangeLine {
            student: sid(&id),
            record_book: book.into(),
            semester_points,
            exam_points,
            bonus_points: 0,
            date,
        });
    }
    lines.sort_by(|a, b| a.record_book.cmp(&b.record_book));
    let x = TeacherExchangeRecord {
        group: gid(SHEET_GROUP),
        discipline: SHEET_DISCIPLINE.into(),
        semester: 5,
        control: Exam,
        option: "option1".into(),
        sheet_date,
        lines,
    };
    (r, x)
}
