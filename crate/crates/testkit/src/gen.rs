//! Random registries and random valid movement sequences.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};
use deanery_core::contingent::{EnrollDetails, MovementKind, GRADUATED};
use deanery_core::{
    ControlKind, CurriculumEntry, CurriculumEntryId, Funding, Group, GroupId, MeanScore,
    PersonName, Registry, Sex, StudentId, StudentRecord, StudentStatus,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const SURNAMES: &[&str] = &[
    "Иванов",
    "Петрова",
    "Сидоров",
    "Кузнецова",
    "Смирнов",
    "Попова",
    "Лебедев",
    "Ким, мл.",
    "Д'Артаньян",
    "Orlov",
    "Ершов",
    "Ежова",
    "Ёлкин",
    "Ivanov \"Jr\"",
];
const GIVEN: &[&str] = &[
    "Анна",
    "Борис",
    "Вера",
    "Глеб",
    "Дарья",
    "Олег",
    "Mark",
    "Яна",
];
const PATRONYMICS: &[&str] = &["", "Петрович", "Ивановна", "Сергеевич", "Олеговна"];
const DISCIPLINES: &[&str] = &[
    "Математический анализ",
    "Физика",
    "Программирование",
    "Базы данных",
    "Философия",
    "Иностранный язык",
    "Сети, протоколы",
    "Операционные системы",
];
const DIRECTIONS: &[&str] = &[
    "Информационные системы",
    "Прикладная математика",
    "Физика; оптика",
    "",
];
const REASONS: &[&str] = &[
    "болезнь",
    "по собственному желанию",
    "академическая задолженность",
    GRADUATED,
];
const ACTORS: &[&str] = &["dean", "clerk-01", "методист"];

fn pick<'a, T>(rng: &mut impl Rng, xs: &'a [T]) -> &'a T {
    xs.choose(rng).expect("non-empty list")
}

pub fn random_date(rng: &mut impl Rng, from: NaiveDate, span_days: u64) -> NaiveDate {
    from + Days::new(rng.gen_range(0..=span_days))
}

fn random_name(rng: &mut impl Rng) -> PersonName {
    PersonName::new(
        *pick(rng, SURNAMES),
        *pick(rng, GIVEN),
        *pick(rng, PATRONYMICS),
    )
    .expect("valid name")
}

fn random_curriculum(rng: &mut impl Rng, final_semester: u32) -> Vec<CurriculumEntry> {
    let mut out = Vec::new();
    for semester in 1..=final_semester {
        let mut seen = BTreeSet::new();
        for _ in 0..rng.gen_range(0..=3) {
            let discipline = *pick(rng, DISCIPLINES);
            let control = *pick(rng, &ControlKind::ALL);
            if seen.insert((discipline, control)) {
                out.push(CurriculumEntry {
                    id: CurriculumEntryId(out.len() as u32 + 1),
                    discipline: discipline.into(),
                    semester,
                    control,
                });
            }
        }
    }
    out
}

pub fn random_group(rng: &mut impl Rng, id: GroupId, spc: u32) -> Group {
    let final_semester: u32 = rng.gen_range(1..=8);
    let courses = final_semester.div_ceil(spc);
    Group {
        id,
        course: rng.gen_range(1..=courses),
        direction: pick(rng, DIRECTIONS).to_string(),
        cohort_year: rng.gen_range(2008..=2015),
        curriculum: random_curriculum(rng, final_semester),
    }
}

/// Registry with `1..=max_groups` groups and no students.
pub fn random_groups(rng: &mut impl Rng, max_groups: usize) -> Registry {
    let mut r = Registry::default();
    let spc = r.calendar().semesters_per_course;
    for i in 0..rng.gen_range(1..=max_groups) {
        let id =
            GroupId::new(format!("{}{:02}", pick(rng, &["G", "Гр", "M-"]), i)).expect("valid id");
        r.insert_group(random_group(rng, id, spc))
            .expect("valid group");
    }
    r
}

/// Registry with up to `max_groups` groups of up to `max_students` students,
/// in every status, with deliveries scattered around semester ends.
pub fn random_registry(rng: &mut impl Rng, max_groups: usize, max_students: usize) -> Registry {
    let mut r = random_groups(rng, max_groups);
    let groups: Vec<Group> = r.groups().cloned().collect();
    let cal = r.calendar().clone();
    let mut n = 0;
    for g in &groups {
        for _ in 0..rng.gen_range(0..=max_students) {
            n += 1;
            let first = cal.semester_start(g.cohort_year, 1);
            let mut deliveries = BTreeMap::new();
            for e in &g.curriculum {
                if rng.gen_bool(0.7) {
                    let end = cal.semester_end(g.cohort_year, e.semester);
                    deliveries.insert(e.id, random_date(rng, end - Days::new(60), 460));
                }
            }
            let status = match rng.gen_range(0..100) {
                0..=74 => StudentStatus::Active,
                75..=86 => {
                    let since = random_date(rng, first, 6 * 365);
                    StudentStatus::AcademicLeave {
                        since,
                        until: random_date(rng, since + Days::new(30), 370),
                    }
                }
                _ => StudentStatus::Expelled {
                    date: random_date(rng, first, 6 * 365),
                    reason: pick(rng, REASONS).to_string(),
                    debts: rng.gen_range(0..=12),
                },
            };
            let course =
                (g.course as i64 + rng.gen_range(-1..=1)).clamp(1, cal.max_courses as i64) as u32;
            r.insert_student(StudentRecord {
                id: StudentId::new(format!("S{n:04}")).expect("valid id"),
                name: random_name(rng),
                card_number: format!("{:02}/{:04}", rng.gen_range(8..16), rng.gen_range(0..10000)),
                group: g.id.clone(),
                course,
                funding: *pick(rng, &Funding::ALL),
                sex: *pick(rng, &Sex::ALL),
                mean_score: MeanScore::from_hundredths(rng.gen_range(0..=500)).expect("in range"),
                status,
                deliveries,
            })
            .expect("valid student");
        }
    }
    r
}

/// Applies `count` random valid movement events on top of `base`, starting
/// at `start` and never going back in time.
pub fn random_events(
    rng: &mut impl Rng,
    base: &Registry,
    start: NaiveDate,
    count: usize,
) -> Registry {
    let mut r = base.clone();
    let groups: Vec<GroupId> = r.groups().map(|g| g.id.clone()).collect();
    let mut date = start;
    let mut enrolled = 0;
    while r.log().len() < base.log().len() + count {
        date = date + Days::new(rng.gen_range(0..=3));
        let students: Vec<&StudentRecord> = r.students().collect();
        let choice = if students.is_empty() {
            0
        } else {
            rng.gen_range(0..6)
        };
        let (student, kind) = match choice {
            0 => {
                enrolled += 1;
                let group = pick(rng, &groups).clone();
                let course = r.group(&group).expect("known group").course;
                let id = loop {
                    let id = StudentId::new(format!("E{enrolled:05}")).expect("valid id");
                    if r.student(&id).is_err() {
                        break id;
                    }
                    enrolled += 1;
                };
                (
                    id,
                    MovementKind::Enroll(EnrollDetails {
                        group,
                        course,
                        funding: *pick(rng, &Funding::ALL),
                        sex: *pick(rng, &Sex::ALL),
                        card_number: format!(
                            "{:02}/{:04}",
                            rng.gen_range(8..16),
                            rng.gen_range(0..10000)
                        ),
                        name: random_name(rng),
                        mean_score: MeanScore::from_hundredths(rng.gen_range(0..=500))
                            .expect("in range"),
                    }),
                )
            }
            _ => {
                let s = *pick(rng, &students);
                let kind = match (&s.status, choice) {
                    (StudentStatus::Expelled { .. }, _) => continue,
                    (_, 1) => MovementKind::Expel {
                        reason: pick(rng, REASONS).to_string(),
                        debts_at_expulsion: 0,
                    },
                    (_, 2) if groups.len() > 1 => {
                        let to = pick(rng, &groups).clone();
                        if to == s.group {
                            continue;
                        }
                        MovementKind::Transfer {
                            from: s.group.clone(),
                            to,
                        }
                    }
                    (StudentStatus::Active, 3) => MovementKind::LeaveStart {
                        until: date + Days::new(rng.gen_range(1..=400)),
                    },
                    (StudentStatus::AcademicLeave { .. }, 3 | 4) => MovementKind::LeaveEnd,
                    (StudentStatus::Active, 4 | 5) if s.course < r.calendar().max_courses => {
                        MovementKind::CourseAdvance
                    }
                    _ => continue,
                };
                (s.id.clone(), kind)
            }
        };
        let actor = *pick(rng, ACTORS);
        r = match r.record_event(date, student, kind, actor) {
            Ok((next, _)) => next,
            // A transfer can be refused when the target lacks a delivered entry.
            Err(e) if e.name() == "PreconditionViolated" => continue,
            Err(e) => panic!("generator produced an invalid event: {e}"),
        };
    }
    r
}
