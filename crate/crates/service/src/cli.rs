//! Command-line front end. Exit status: 0 on success, 1 when the registry
//! rejects the operation, 2 on bad usage.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use deanery_core::audit::{audit_table, run_audit};
use deanery_core::contingent::{
    export_report, format_log_line, movement_report_current, render_report_csv, report_table,
    EnrollDetails, MovementKind,
};
use deanery_core::monitor::{
    debt_series, mastery_csv_table, mastery_table, pivot, pivot_table, series_table, FilterStatus,
    PivotSort, StudentFilter,
};
use deanery_core::store::save_registry;
use deanery_core::sync::{export_group_for_teacher, TeacherExchangeRecord};
use deanery_core::{
    CurriculumEntryId, Error, Funding, GroupId, Locale, MeanScore, PersonName, PersonalPatch,
    Registry, Sex, StudentId, Table,
};

use crate::api::{serve, AppState};
use crate::state::Shared;
use crate::{archive, open_registry, query};

pub const TOKEN_ENV: &str = "DEANERY_API_TOKEN";

#[derive(Debug, Parser)]
#[command(
    name = "deanery",
    version,
    about = "Student records of a teaching department"
)]
pub struct Cli {
    /// Data directory (calendar.conf, groups.csv, plans/, students/, report.log).
    #[arg(
        long,
        short = 'd',
        global = true,
        env = "DEANERY_DATA",
        default_value = "."
    )]
    data: PathBuf,

    /// Calendar file to use instead of the one in the data directory.
    #[arg(long, global = true)]
    calendar: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Column headers and dates: ru or en.
    #[arg(long, global = true, default_value = "ru")]
    locale: Locale,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Table,
}

fn parse_filter(s: &str) -> Result<StudentFilter, Error> {
    StudentFilter::parse(s)
}

fn parse_month(s: &str) -> Result<(i32, u32), Error> {
    query::month(s)
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.to_string()))
        .ok_or_else(|| format!("`{s}` is not field=value"))
}

#[derive(Debug, Args)]
struct AsOf {
    /// Date the figures are computed for (default: today).
    #[arg(long)]
    as_of: Option<NaiveDate>,
}

impl AsOf {
    fn date(&self) -> NaiveDate {
        self.as_of
            .unwrap_or_else(|| chrono::Local::now().date_naive())
    }
}

#[derive(Debug, Args)]
struct Filter {
    /// Comma-separated key=value: status, course, direction, group, funding, sex.
    #[arg(long, value_parser = parse_filter)]
    filter: Option<StudentFilter>,

    /// Shorthand for `--filter group=<GROUP>`.
    #[arg(long)]
    group: Option<GroupId>,
}

impl Filter {
    fn build(&self) -> StudentFilter {
        let mut f = self.filter.clone().unwrap_or_default();
        if let Some(g) = &self.group {
            f.group = Some(g.clone());
        }
        f
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Debt pivot: one row per student.
    Pivot {
        #[command(flatten)]
        as_of: AsOf,
        #[command(flatten)]
        filter: Filter,
        /// Column, optionally with `:asc` or `:desc`.
        #[arg(long, default_value = "name")]
        sort: PivotSort,
    },
    /// Share of students who have not passed each discipline.
    Mastery {
        #[command(flatten)]
        as_of: AsOf,
    },
    /// Total debts sampled between two dates.
    Series {
        #[arg(long)]
        from: NaiveDate,
        #[arg(long)]
        to: NaiveDate,
        /// Days between samples.
        #[arg(long, default_value_t = 30)]
        step: u32,
        #[command(flatten)]
        filter: Filter,
    },
    /// Students whose leave, studies or course should already have changed.
    Audit {
        #[command(flatten)]
        as_of: AsOf,
    },
    /// Monthly movement report.
    Report {
        /// YYYY-MM.
        #[arg(long, value_parser = parse_month)]
        month: (i32, u32),
        /// Write the CSV report to this file instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Record a movement event.
    Move {
        #[command(subcommand)]
        kind: MoveKind,
    },
    /// Set or clear the date a student passed a curriculum entry.
    SetDate {
        #[arg(long)]
        student: StudentId,
        /// Curriculum entry ordinal.
        #[arg(long)]
        entry: u32,
        #[arg(long, required_unless_present = "clear")]
        date: Option<NaiveDate>,
        #[arg(long, conflicts_with = "date")]
        clear: bool,
    },
    /// Edit personal fields: surname, given_name, patronymic, card_number, mean_score, sex.
    Edit {
        #[arg(long)]
        student: StudentId,
        #[arg(required = true, value_parser = parse_pair)]
        fields: Vec<(String, String)>,
    },
    /// Import a teacher's exchange file and print the exam sheet.
    Import { file: PathBuf },
    /// Write the blank roster a teacher fills in for one semester.
    Export {
        #[arg(long)]
        group: GroupId,
        #[arg(long)]
        semester: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "DEANERY_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Bearer token required on every change.
        #[arg(long, env = TOKEN_ENV, hide_env_values = true)]
        token: String,
    },
}

#[derive(Debug, Args)]
struct MoveCommon {
    #[arg(long)]
    student: StudentId,
    #[arg(long)]
    date: NaiveDate,
    #[arg(long, default_value = "cli")]
    actor: String,
}

#[derive(Debug, Subcommand)]
enum MoveKind {
    /// Enroll a new student
    Enroll {
        #[command(flatten)]
        common: MoveCommon,
        #[arg(long)]
        group: GroupId,
        /// Defaults to the group's course.
        #[arg(long)]
        course: Option<u32>,
        #[arg(long)]
        funding: Funding,
        #[arg(long)]
        sex: Sex,
        #[arg(long, default_value = "")]
        card: String,
        #[arg(long)]
        surname: String,
        #[arg(long)]
        given_name: String,
        #[arg(long, default_value = "")]
        patronymic: String,
        #[arg(long, default_value = "0")]
        mean_score: String,
    },
    /// Expel; pass `--reason graduated` for graduation
    Expel {
        #[command(flatten)]
        common: MoveCommon,
        #[arg(long)]
        reason: String,
    },
    /// Move to another group of a compatible plan
    Transfer {
        #[command(flatten)]
        common: MoveCommon,
        #[arg(long)]
        to: GroupId,
    },
    /// Start academic leave
    LeaveStart {
        #[command(flatten)]
        common: MoveCommon,
        #[arg(long)]
        until: NaiveDate,
    },
    /// Return from academic leave
    LeaveEnd {
        #[command(flatten)]
        common: MoveCommon,
    },
    /// Move on to the next course
    CourseAdvance {
        #[command(flatten)]
        common: MoveCommon,
    },
}

impl MoveKind {
    fn into_event(self, r: &Registry) -> Result<(MoveCommon, MovementKind), Error> {
        Ok(match self {
            MoveKind::Enroll {
                common,
                group,
                course,
                funding,
                sex,
                card,
                surname,
                given_name,
                patronymic,
                mean_score,
            } => {
                let course = match course {
                    Some(c) => c,
                    None => r.group(&group)?.course,
                };
                let details = EnrollDetails {
                    group,
                    course,
                    funding,
                    sex,
                    card_number: card,
                    name: PersonName::new(surname, given_name, patronymic)?,
                    mean_score: MeanScore::parse(&mean_score)?,
                };
                (common, MovementKind::Enroll(details))
            }
            MoveKind::Expel { common, reason } => (
                common,
                MovementKind::Expel {
                    reason,
                    debts_at_expulsion: 0,
                },
            ),
            MoveKind::Transfer { common, to } => {
                let from = r.student(&common.student)?.group.clone();
                (common, MovementKind::Transfer { from, to })
            }
            MoveKind::LeaveStart { common, until } => (common, MovementKind::LeaveStart { until }),
            MoveKind::LeaveEnd { common } => (common, MovementKind::LeaveEnd),
            MoveKind::CourseAdvance { common } => (common, MovementKind::CourseAdvance),
        })
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn emit(out: &mut dyn Write, format: Format, t: &Table) -> Result<(), Error> {
    let s = match format {
        Format::Csv => t.to_csv(),
        Format::Table => t.to_text(),
    };
    write_out(out, &s)
}

fn write_out(out: &mut dyn Write, s: &str) -> Result<(), Error> {
    out.write_all(s.as_bytes()).map_err(|e| Error::IoFailure {
        path: "<stdout>".into(),
        reason: e.to_string(),
    })
}

fn write_file(path: &Path, s: &str) -> Result<(), Error> {
    fs::write(path, s).map_err(|e| Error::IoFailure {
        path: path.into(),
        reason: e.to_string(),
    })
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Error> {
    let root = cli.data.as_path();
    let r = open_registry(root, cli.calendar.as_deref())?;
    let (format, locale) = (cli.format, cli.locale);
    match cli.command {
        Command::Pivot {
            as_of,
            filter,
            sort,
        } => {
            let f = filter.build();
            let rows = pivot(&r, &f, as_of.date(), sort);
            emit(
                out,
                format,
                &pivot_table(&rows, f.status == FilterStatus::Expelled, locale),
            )
        }
        Command::Mastery { as_of } => emit(
            out,
            format,
            &mastery_csv_table(&mastery_table(&r, as_of.date()), locale),
        ),
        Command::Series {
            from,
            to,
            step,
            filter,
        } => {
            let points = debt_series(&r, &filter.build(), from, to, step)?;
            emit(out, format, &series_table(&points, locale))
        }
        Command::Audit { as_of } => emit(
            out,
            format,
            &audit_table(&run_audit(&r, as_of.date(), r.calendar()), locale),
        ),
        Command::Report {
            month: (y, m),
            out: file,
        } => {
            let rep = movement_report_current(&r, y, m)?;
            match (file, format) {
                (Some(path), _) => export_report(&rep, &path),
                (None, Format::Csv) => write_out(out, &render_report_csv(&rep)),
                (None, Format::Table) => write_out(out, &report_table(&rep).to_text()),
            }
        }
        Command::Move { kind } => {
            let (common, kind) = kind.into_event(&r)?;
            let (next, event) = r.record_event(common.date, common.student, kind, common.actor)?;
            save_registry(&next, root)?;
            write_out(out, &format!("{}\n", format_log_line(&event)))
        }
        Command::SetDate {
            student,
            entry,
            date,
            clear: _,
        } => {
            let next = r.set_delivery(&student, CurriculumEntryId(entry), date)?;
            save_registry(&next, root)?;
            let shown = date.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
            write_out(out, &format!("{student}\t{entry}\t{shown}\n"))
        }
        Command::Edit { student, fields } => {
            let patch = PersonalPatch::from_pairs(fields)?;
            let next = r.edit_personal(&student, &patch)?;
            save_registry(&next, root)?;
            let s = next.student(&student)?;
            write_out(
                out,
                &format!("{}\t{}\t{}\n", s.id, s.name.full(), s.mean_score),
            )
        }
        Command::Import { file } => {
            let text = fs::read_to_string(&file).map_err(|e| Error::IoFailure {
                path: file.clone(),
                reason: e.to_string(),
            })?;
            let x =
                TeacherExchangeRecord::parse(&text, r.control_codes()).map_err(|e| match e {
                    Error::MalformedFile { line, reason, .. } => Error::MalformedFile {
                        path: file.clone(),
                        line,
                        reason,
                    },
                    other => other,
                })?;
            let (next, sheet) = archive::import_and_archive(&r, root, &x)?;
            save_registry(&next, root)?;
            write_out(out, &sheet.render_text())
        }
        Command::Export {
            group,
            semester,
            out: file,
        } => {
            let csv = export_group_for_teacher(&r, &group, semester)?;
            match file {
                Some(path) => write_file(&path, &csv),
                None => write_out(out, &csv),
            }
        }
        Command::Serve { listen, token } => {
            if token.is_empty() {
                return Err(Error::Invalid(format!("{TOKEN_ENV} must not be empty")));
            }
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Invalid(e.to_string()))?;
            rt.block_on(async move {
                let state = AppState::new(Shared::start(root.to_path_buf(), r), token);
                serve(listen, state).await
            })
            .map_err(|e| Error::IoFailure {
                path: listen.to_string().into(),
                reason: e.to_string(),
            })
        }
    }
}
