//! HTTP API. Reads answer from the latest snapshot; every mutation goes
//! through the writer and needs `Authorization: Bearer <token>`.
//!
//! Errors are JSON `{"error": <name>, "detail": <message>}` with status 400
//! for invalid input, 401 without a valid token, 404 for unknown students,
//! groups or entries and 409 when a movement is not allowed in the
//! student's current state.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use chrono::NaiveDate;
use deanery_core::audit::run_audit;
use deanery_core::contingent::{
    movement_report_current, period_of, render_report_csv, MovementKind,
};
use deanery_core::monitor::{debt_series, mastery_table, pivot, PivotSort};
use deanery_core::rating::GradeScale;
use deanery_core::sync::{build_sheet, export_group_for_teacher, TeacherExchangeRecord};
use deanery_core::{CurriculumEntryId, Error, GroupId, PersonalPatch, StudentId, StudentRecord};
use serde::{Deserialize, Serialize};

use crate::state::Shared;
use crate::{archive, query, to_json};

#[derive(Clone)]
pub struct AppState {
    pub shared: Shared,
    token: Arc<str>,
}

impl AppState {
    pub fn new(shared: Shared, token: impl Into<Arc<str>>) -> Self {
        Self {
            shared,
            token: token.into(),
        }
    }
}

#[derive(Debug)]
pub enum ApiError {
    Domain(Error),
    Unauthorized,
    NotFound,
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Domain(e)
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    detail: String,
}

pub fn status_of(e: &Error) -> StatusCode {
    match e {
        Error::UnknownStudent(_) | Error::UnknownGroup(_) | Error::EntryNotInCurriculum { .. } => {
            StatusCode::NOT_FOUND
        }
        Error::PreconditionViolated { .. } => StatusCode::CONFLICT,
        Error::IoFailure { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match &self {
            ApiError::Domain(e) => (
                status_of(e),
                ErrorBody {
                    error: e.name(),
                    detail: e.to_string(),
                },
            ),
            ApiError::Unauthorized => (
                StatusCode::UNAUTHORIZED,
                ErrorBody {
                    error: "Unauthorized",
                    detail: "missing or wrong bearer token".into(),
                },
            ),
            ApiError::NotFound => (
                StatusCode::NOT_FOUND,
                ErrorBody {
                    error: "NotFound",
                    detail: "no such endpoint".into(),
                },
            ),
        };
        let mut resp = (
            status,
            [(header::CONTENT_TYPE, "application/json")],
            to_json(&body),
        )
            .into_response();
        if matches!(self, ApiError::Unauthorized) {
            resp.headers_mut().insert(
                header::WWW_AUTHENTICATE,
                header::HeaderValue::from_static("Bearer"),
            );
        }
        resp
    }
}

type ApiResult = Result<Response, ApiError>;

/// Marker extractor for handlers that change the registry.
pub struct Authorized;

impl FromRequestParts<AppState> for Authorized {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, ApiError> {
        let given = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        match given {
            Some(t) if !state.token.is_empty() && t.as_bytes() == state.token.as_bytes() => {
                Ok(Authorized)
            }
            _ => Err(ApiError::Unauthorized),
        }
    }
}

fn json<T: Serialize + ?Sized>(status: StatusCode, value: &T) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "application/json")],
        to_json(value),
    )
        .into_response()
}

fn ok<T: Serialize + ?Sized>(value: &T) -> ApiResult {
    Ok(json(StatusCode::OK, value))
}

fn text(content_type: &'static str, body: String) -> ApiResult {
    Ok((StatusCode::OK, [(header::CONTENT_TYPE, content_type)], body).into_response())
}

const CSV: &str = "text/csv; charset=utf-8";
const PLAIN: &str = "text/plain; charset=utf-8";

type Params = BTreeMap<String, String>;

fn params(q: Result<Query<Params>, QueryRejection>) -> Result<Params, ApiError> {
    q.map(|Query(p)| p)
        .map_err(|e| Error::Invalid(format!("bad query string: {e}")).into())
}

fn as_of(p: &Params) -> Result<NaiveDate, Error> {
    match p.get("as_of") {
        Some(v) => query::date("as_of", v),
        None => Ok(chrono::Local::now().date_naive()),
    }
}

fn sort(p: &Params) -> Result<PivotSort, Error> {
    p.get("sort")
        .map_or(Ok(PivotSort::default()), |s| s.parse())
}

fn body_json<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, Error> {
    serde_json::from_slice(body).map_err(|e| Error::Invalid(format!("bad request body: {e}")))
}

fn student_id(raw: &str) -> Result<StudentId, Error> {
    StudentId::new(raw)
}

async fn list_students(
    State(s): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let filter = query::filter(&p, &["as_of", "sort"])?;
    let r = s.shared.snapshot();
    let rows = pivot(&r, &filter, as_of(&p)?, sort(&p)?);
    let students: Vec<&StudentRecord> = rows
        .iter()
        .map(|row| r.student(&row.student))
        .collect::<Result<_, _>>()?;
    ok(&students)
}

async fn get_student(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let r = s.shared.snapshot();
    ok(r.student(&student_id(&id)?)?)
}

fn patch_from_json(body: &Bytes) -> Result<PersonalPatch, Error> {
    let map: serde_json::Map<String, serde_json::Value> = body_json(body)?;
    let mut pairs = Vec::new();
    for (k, v) in map {
        let v = match v {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(Error::Invalid(format!(
                    "field `{k}` has unsupported value {other}"
                )))
            }
        };
        pairs.push((k, v));
    }
    let patch = PersonalPatch::from_pairs(pairs)?;
    if patch.is_empty() {
        return Err(Error::Invalid("patch is empty".into()));
    }
    Ok(patch)
}

async fn patch_student(
    _: Authorized,
    State(s): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult {
    let id = student_id(&id)?;
    let patch = patch_from_json(&body)?;
    let record = s
        .shared
        .mutate(move |r, _| {
            let next = r.edit_personal(&id, &patch)?;
            let record = next.student(&id)?.clone();
            Ok((next, record))
        })
        .await?;
    ok(&record)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeliveryBody {
    date: NaiveDate,
}

fn delivery_path(id: &str, entry: &str) -> Result<(StudentId, CurriculumEntryId), Error> {
    let entry = entry
        .parse()
        .map(CurriculumEntryId)
        .map_err(|_| Error::Invalid(format!("entry `{entry}` is not an ordinal")))?;
    Ok((student_id(id)?, entry))
}

async fn set_delivery(
    s: AppState,
    id: String,
    entry: String,
    date: Option<NaiveDate>,
) -> ApiResult {
    let (id, entry) = delivery_path(&id, &entry)?;
    let record = s
        .shared
        .mutate(move |r, _| {
            let next = r.set_delivery(&id, entry, date)?;
            let record = next.student(&id)?.clone();
            Ok((next, record))
        })
        .await?;
    ok(&record)
}

async fn put_delivery(
    _: Authorized,
    State(s): State<AppState>,
    Path((id, entry)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult {
    let DeliveryBody { date } = body_json(&body)?;
    set_delivery(s, id, entry, Some(date)).await
}

async fn delete_delivery(
    _: Authorized,
    State(s): State<AppState>,
    Path((id, entry)): Path<(String, String)>,
) -> ApiResult {
    set_delivery(s, id, entry, None).await
}

async fn get_pivot(
    State(s): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let filter = query::filter(&p, &["as_of", "sort"])?;
    ok(&pivot(&s.shared.snapshot(), &filter, as_of(&p)?, sort(&p)?))
}

async fn get_mastery(
    State(s): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    query::filter(&p, &["as_of"])?;
    ok(&mastery_table(&s.shared.snapshot(), as_of(&p)?))
}

async fn get_series(
    State(s): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let filter = query::filter(&p, &["from", "to", "step"])?;
    let need = |k: &str| {
        p.get(k)
            .ok_or_else(|| Error::Invalid(format!("missing `{k}`")))
            .and_then(|v| query::date(k, v))
    };
    let step = match p.get("step") {
        Some(v) => v
            .parse()
            .map_err(|_| Error::Invalid(format!("step `{v}` is not a number")))?,
        None => 30,
    };
    ok(&debt_series(
        &s.shared.snapshot(),
        &filter,
        need("from")?,
        need("to")?,
        step,
    )?)
}

#[derive(Deserialize)]
struct MovementRequest {
    date: NaiveDate,
    student: StudentId,
    #[serde(flatten)]
    kind: MovementKind,
    #[serde(default = "default_actor")]
    actor: String,
}

fn default_actor() -> String {
    "api".into()
}

async fn post_movement(_: Authorized, State(s): State<AppState>, body: Bytes) -> ApiResult {
    let req: MovementRequest = body_json(&body)?;
    let event = s
        .shared
        .mutate(move |r, _| r.record_event(req.date, req.student, req.kind, req.actor))
        .await?;
    Ok(json(StatusCode::CREATED, &event))
}

fn month_param(p: &Params) -> Result<Option<(i32, u32)>, Error> {
    p.get("month").map(|m| query::month(m)).transpose()
}

async fn list_movements(
    State(s): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    only(&p, &["month"])?;
    let month = month_param(&p)?;
    let r = s.shared.snapshot();
    let events: Vec<_> = r
        .log()
        .iter()
        .filter(|e| month.is_none_or(|m| period_of(e.date) == m))
        .collect();
    ok(&events)
}

fn only(p: &Params, allowed: &[&str]) -> Result<(), Error> {
    match p.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::Invalid(format!("unknown query parameter `{k}`"))),
        None => Ok(()),
    }
}

fn wants(p: &Params, formats: &[&str]) -> Result<Option<String>, Error> {
    match p.get("format").map(String::as_str) {
        None | Some("json") => Ok(None),
        Some(f) if formats.contains(&f) => Ok(Some(f.to_string())),
        Some(f) => Err(Error::Invalid(format!("unknown format `{f}`"))),
    }
}

async fn movement_report(
    State(s): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    only(&p, &["month", "format"])?;
    let (y, m) = month_param(&p)?.ok_or_else(|| Error::Invalid("missing `month`".into()))?;
    let rep = movement_report_current(&s.shared.snapshot(), y, m)?;
    match wants(&p, &["csv"])? {
        Some(_) => text(CSV, render_report_csv(&rep)),
        None => ok(&rep),
    }
}

async fn get_audit(
    State(s): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    only(&p, &["as_of"])?;
    let r = s.shared.snapshot();
    ok(&run_audit(&r, as_of(&p)?, r.calendar()))
}

async fn import_exchange(_: Authorized, State(s): State<AppState>, body: Bytes) -> ApiResult {
    let text = std::str::from_utf8(&body)
        .map_err(|_| Error::Invalid("exchange file is not UTF-8".into()))?;
    let x = TeacherExchangeRecord::parse(text, s.shared.snapshot().control_codes())?;
    let sheet = s
        .shared
        .mutate(move |r, root| archive::import_and_archive(r, root, &x))
        .await?;
    ok(&sheet)
}

async fn export_roster(
    State(s): State<AppState>,
    Path((group, semester)): Path<(String, String)>,
) -> ApiResult {
    let group = GroupId::new(group)?;
    let semester = semester
        .parse()
        .map_err(|_| Error::Invalid(format!("semester `{semester}` is not a number")))?;
    text(
        CSV,
        export_group_for_teacher(&s.shared.snapshot(), &group, semester)?,
    )
}

async fn list_sheets(
    State(s): State<AppState>,
    q: Result<Query<Params>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    only(&p, &["group", "semester", "discipline", "format"])?;
    let r = s.shared.snapshot();
    let scale = GradeScale::default();
    let mut sheets = Vec::new();
    for x in archive::archived(s.shared.root(), &r)? {
        let keep = p.get("group").is_none_or(|g| x.group.as_str() == g)
            && p.get("semester")
                .is_none_or(|v| x.semester.to_string() == *v)
            && p.get("discipline").is_none_or(|d| x.discipline == *d);
        if keep {
            sheets.push(build_sheet(&r, &x, &scale)?);
        }
    }
    match wants(&p, &["text"])? {
        Some(_) => text(
            PLAIN,
            sheets
                .iter()
                .map(|s| s.render_text())
                .collect::<Vec<_>>()
                .join("\n"),
        ),
        None => ok(&sheets),
    }
}

async fn fallback() -> ApiError {
    ApiError::NotFound
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/students", get(list_students))
        .route("/students/{id}", get(get_student).patch(patch_student))
        .route(
            "/students/{id}/deliveries/{entry}",
            put(put_delivery).delete(delete_delivery),
        )
        .route("/pivot", get(get_pivot))
        .route("/mastery", get(get_mastery))
        .route("/debt-series", get(get_series))
        .route("/movements", post(post_movement).get(list_movements))
        .route("/reports/movement", get(movement_report))
        .route("/audit", get(get_audit))
        .route("/exchange/import", post(import_exchange))
        .route("/exchange/export/{group}/{semester}", get(export_roster))
        .route("/sheets", get(list_sheets))
        .fallback(fallback)
        .with_state(state)
}

/// Serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
