mod common;

use axum::http::StatusCode;
use common::{app, call, fixture_dir, get, TOKEN};
use deanery_core::store::load_registry;
use deanery_testkit::criteria::collect_files;
use deanery_testkit::fixtures::sid;
use serde_json::json;

#[tokio::test]
async fn mutations_require_the_token() {
    let dir = fixture_dir();
    let app = app(dir.path());
    let before = collect_files(dir.path());
    let body = json!({"date": "2014-03-01", "student": "12-000", "kind": "expel", "reason": "x"})
        .to_string();
    for token in [None, Some("wrong")] {
        for (method, path, body) in [
            ("POST", "/movements", body.as_str()),
            ("PATCH", "/students/12-000", r#"{"surname":"Иванов"}"#),
            (
                "PUT",
                "/students/12-000/deliveries/2",
                r#"{"date":"2014-01-10"}"#,
            ),
            ("DELETE", "/students/12-000/deliveries/1", ""),
            ("POST", "/exchange/import", "x"),
        ] {
            let reply = call(&app, method, path, token, body).await;
            assert_eq!(reply.status, StatusCode::UNAUTHORIZED, "{method} {path}");
            assert_eq!(reply.error(), "Unauthorized");
        }
    }
    assert_eq!(collect_files(dir.path()), before);
}

#[tokio::test]
async fn pivot_by_group() {
    let dir = fixture_dir();
    let app = app(dir.path());
    let reply = get(
        &app,
        "/pivot?group=5210М&as_of=2014-02-15&sort=total_debts:desc",
    )
    .await;
    assert_eq!(reply.status, StatusCode::OK);
    assert!(reply.content_type.starts_with("application/json"));
    let rows = reply.json();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0]["student"], "12-000");
    let debts: Vec<u64> = rows
        .iter()
        .map(|r| r["total_debts"].as_u64().unwrap())
        .collect();
    assert!(debts.windows(2).all(|w| w[0] >= w[1]));
}

#[tokio::test]
async fn patch_validates_fields() {
    let dir = fixture_dir();
    let app = app(dir.path());
    let before = collect_files(dir.path());
    let bad = [
        (
            "/students/12-000",
            r#"{"mean_score":"6"}"#,
            StatusCode::BAD_REQUEST,
            "RangeViolation",
        ),
        (
            "/students/12-000",
            r#"{"group":"5131"}"#,
            StatusCode::BAD_REQUEST,
            "ImmutableField",
        ),
        ("/students/12-000", "{}", StatusCode::BAD_REQUEST, "Invalid"),
        (
            "/students/99-999",
            r#"{"surname":"Иванов"}"#,
            StatusCode::NOT_FOUND,
            "UnknownStudent",
        ),
    ];
    for (path, body, status, error) in bad {
        let reply = call(&app, "PATCH", path, Some(TOKEN), body).await;
        assert_eq!(reply.status, status, "{body}");
        assert_eq!(reply.error(), error, "{body}");
    }
    assert_eq!(collect_files(dir.path()), before);

    let reply = call(
        &app,
        "PATCH",
        "/students/12-000",
        Some(TOKEN),
        r#"{"mean_score":"3,5"}"#,
    )
    .await;
    assert_eq!(reply.status, StatusCode::OK, "{}", reply.body);
    assert_eq!(reply.json()["mean_score"], 3.5);
    let stored = load_registry(dir.path()).unwrap();
    assert_eq!(
        stored
            .student(&sid("12-000"))
            .unwrap()
            .mean_score
            .to_string(),
        "3.50"
    );
}

#[tokio::test]
async fn second_expulsion_conflicts() {
    let dir = fixture_dir();
    let app = app(dir.path());
    let body = json!({"date": "2014-03-20", "student": "12-000", "kind": "expel", "reason": "неуспеваемость"}).to_string();
    let first = call(&app, "POST", "/movements", Some(TOKEN), &body).await;
    assert_eq!(first.status, StatusCode::CREATED, "{}", first.body);
    let event = first.json();
    assert_eq!(event["kind"], "expel");
    assert_eq!(event["debts_at_expulsion"], 8);
    assert_eq!(event["actor"], "api");

    let second = call(&app, "POST", "/movements", Some(TOKEN), &body).await;
    assert_eq!(second.status, StatusCode::CONFLICT);
    assert_eq!(second.error(), "PreconditionViolated");

    let stored = load_registry(dir.path()).unwrap();
    assert_eq!(
        stored.log().last().unwrap().seq,
        event["seq"].as_u64().unwrap()
    );
    let expelled = get(&app, "/pivot?status=expelled").await.json();
    assert!(expelled
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["student"] == "12-000"));
}

#[tokio::test]
async fn deliveries_are_set_and_cleared() {
    let dir = fixture_dir();
    let app = app(dir.path());
    let path = "/students/12-000/deliveries/2";
    let reply = call(&app, "PUT", path, Some(TOKEN), r#"{"date":"2014-02-20"}"#).await;
    assert_eq!(reply.status, StatusCode::OK, "{}", reply.body);
    assert_eq!(reply.json()["deliveries"]["2"], "2014-02-20");
    let stored = load_registry(dir.path()).unwrap();
    assert_eq!(stored.student(&sid("12-000")).unwrap().deliveries.len(), 3);

    let reply = call(&app, "DELETE", path, Some(TOKEN), "").await;
    assert_eq!(reply.status, StatusCode::OK);
    assert!(reply.json()["deliveries"].get("2").is_none());
    let stored = load_registry(dir.path()).unwrap();
    assert_eq!(stored.student(&sid("12-000")).unwrap().deliveries.len(), 2);

    let missing = call(
        &app,
        "PUT",
        "/students/12-000/deliveries/99",
        Some(TOKEN),
        r#"{"date":"2014-02-20"}"#,
    )
    .await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
    assert_eq!(missing.error(), "EntryNotInCurriculum");
    let bad = call(&app, "PUT", path, Some(TOKEN), r#"{"date":"20.02.2014"}"#).await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
    let bad = call(
        &app,
        "PUT",
        "/students/12-000/deliveries/x",
        Some(TOKEN),
        r#"{"date":"2014-02-20"}"#,
    )
    .await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn reads_leave_the_store_untouched() {
    let dir = fixture_dir();
    let app = app(dir.path());
    let before = collect_files(dir.path());
    for g in common::goldens() {
        assert_eq!(get(&app, g.path).await.status, StatusCode::OK, "{}", g.path);
    }
    assert_eq!(collect_files(dir.path()), before);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_movements_get_contiguous_numbers() {
    let dir = fixture_dir();
    let app = app(dir.path());
    let start = load_registry(dir.path()).unwrap().log().len() as u64;
    let mut tasks = Vec::new();
    for i in 0..24 {
        let app = app.clone();
        tasks.push(tokio::spawn(async move {
            let body = json!({
                "date": "2014-03-01",
                "student": format!("14-{i:03}"),
                "kind": "enroll",
                "group": "5200М",
                "course": 1,
                "funding": if i % 2 == 0 { "budget" } else { "contract" },
                "sex": if i % 3 == 0 { "female" } else { "male" },
                "card_number": format!("14/{i:03}"),
                "name": {"surname": "Тестов", "given_name": "Иван", "patronymic": format!("N{i}")},
            })
            .to_string();
            call(&app, "POST", "/movements", Some(TOKEN), &body).await
        }));
    }
    let mut seqs = Vec::new();
    for t in tasks {
        let reply = t.await.unwrap();
        assert_eq!(reply.status, StatusCode::CREATED, "{}", reply.body);
        seqs.push(reply.json()["seq"].as_u64().unwrap());
    }
    seqs.sort();
    assert_eq!(seqs, (start + 1..=start + 24).collect::<Vec<_>>());

    let stored = load_registry(dir.path()).unwrap();
    assert_eq!(stored.log().len() as u64, start + 24);
    let listed = get(&app, "/students?status=any").await.json();
    assert_eq!(listed.as_array().unwrap().len(), stored.students().count());
    let march = get(&app, "/reports/movement?month=2014-03").await.json();
    assert!(march.to_string().contains("arrived"));
}

#[tokio::test]
async fn bad_requests_and_unknown_routes() {
    let dir = fixture_dir();
    let app = app(dir.path());
    let nowhere = get(&app, "/nowhere").await;
    assert_eq!(nowhere.status, StatusCode::NOT_FOUND);
    assert_eq!(nowhere.error(), "NotFound");
    assert_eq!(
        get(&app, "/students/99-999").await.status,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        get(&app, "/exchange/export/0000/1").await.status,
        StatusCode::NOT_FOUND
    );
    for path in [
        "/pivot?as_of=yesterday",
        "/pivot?sort=shoe_size",
        "/pivot?colour=red",
        "/pivot?status=asleep",
        "/debt-series?from=2014-01-01",
        "/debt-series?from=2014-02-01&to=2014-01-01",
        "/movements?month=2014-13",
        "/reports/movement",
        "/reports/movement?month=2014-02&format=xml",
        "/exchange/export/5131/x",
        "/sheets?format=pdf",
    ] {
        let reply = get(&app, path).await;
        assert_eq!(
            reply.status,
            StatusCode::BAD_REQUEST,
            "{path}: {}",
            reply.body
        );
        assert!(reply.json()["detail"].is_string());
    }
    let reply = call(&app, "POST", "/movements", Some(TOKEN), "{not json").await;
    assert_eq!(reply.status, StatusCode::BAD_REQUEST);
    let reply = call(&app, "POST", "/exchange/import", Some(TOKEN), "garbage\n").await;
    assert_eq!(reply.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn import_archives_the_exchange_file() {
    let dir = fixture_dir();
    let app = app(dir.path());
    let (r, x) = deanery_testkit::fixtures::exam_sheet_fixture();
    let text = x.render(r.control_codes()).unwrap();
    let reply = call(&app, "POST", "/exchange/import", Some(TOKEN), &text).await;
    assert_eq!(reply.status, StatusCode::OK, "{}", reply.body);
    assert_eq!(reply.json()["rows"].as_array().unwrap().len(), 22);
    let sheets = get(&app, "/sheets?group=5131").await.json();
    assert_eq!(sheets.as_array().unwrap().len(), 1);
}
