#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use deanery_core::audit::run_audit;
use deanery_core::contingent::{movement_report_current, period_of, render_report_csv};
use deanery_core::monitor::{debt_series, mastery_table, pivot, StudentFilter};
use deanery_core::rating::GradeScale;
use deanery_core::store::{load_registry, save_registry};
use deanery_core::sync::{build_sheet, export_group_for_teacher, ExamSheet};
use deanery_core::{Registry, StudentRecord};
use deanery_service::api::{router, AppState};
use deanery_service::state::Shared;
use deanery_service::{archive, to_json};
use deanery_testkit::d;
use deanery_testkit::fixtures::{demo_registry, exam_sheet_fixture, gid, sid};
use http_body_util::BodyExt;
use tower::ServiceExt;

pub const TOKEN: &str = "s3cret";

/// Demo registry plus group 5131 with its exam results imported.
pub fn fixture_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut r = demo_registry();
    let (r17, x) = exam_sheet_fixture();
    for g in r17.groups() {
        r.insert_group(g.clone()).unwrap();
    }
    for s in r17.students() {
        r.insert_student(s.clone()).unwrap();
    }
    save_registry(&r, dir.path()).unwrap();
    let (next, _) = archive::import_and_archive(&r, dir.path(), &x).unwrap();
    save_registry(&next, dir.path()).unwrap();
    dir
}

pub fn app(root: &Path) -> Router {
    let r = load_registry(root).unwrap();
    router(AppState::new(Shared::start(root.to_path_buf(), r), TOKEN))
}

/// Percent-encodes everything outside printable ASCII.
pub fn uri(path: &str) -> String {
    let mut out = String::new();
    for b in path.bytes() {
        if b.is_ascii_graphic() {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: String,
    pub body: String,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("not JSON ({e}): {}", self.body))
    }

    pub fn error(&self) -> String {
        self.json()["error"].as_str().unwrap().to_string()
    }
}

pub async fn call(
    app: &Router,
    method: &str,
    path: &str,
    token: Option<&str>,
    body: &str,
) -> Reply {
    let mut req = Request::builder().method(method).uri(uri(path));
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let resp = app
        .clone()
        .oneshot(req.body(Body::from(body.to_string())).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let content_type = resp
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        content_type,
        body: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

pub async fn get(app: &Router, path: &str) -> Reply {
    call(app, "GET", path, None, "").await
}

/// A read endpoint and the core computation its payload must equal.
pub struct Golden {
    pub name: &'static str,
    pub path: &'static str,
    pub expected: fn(&Registry, &Path) -> String,
}

fn sheets(r: &Registry, root: &Path) -> Vec<ExamSheet> {
    archive::archived(root, r)
        .unwrap()
        .iter()
        .map(|x| build_sheet(r, x, &GradeScale::default()).unwrap())
        .collect()
}

pub fn goldens() -> Vec<Golden> {
    vec![
        Golden {
            name: "students.json",
            path: "/students?status=any&as_of=2014-02-15",
            expected: |r, _| {
                let f = StudentFilter::parse("status=any").unwrap();
                let rows = pivot(r, &f, d("2014-02-15"), Default::default());
                let v: Vec<&StudentRecord> = rows
                    .iter()
                    .map(|row| r.student(&row.student).unwrap())
                    .collect();
                to_json(&v)
            },
        },
        Golden {
            name: "student.json",
            path: "/students/12-000",
            expected: |r, _| to_json(r.student(&sid("12-000")).unwrap()),
        },
        Golden {
            name: "pivot-group.json",
            path: "/pivot?group=5210М&as_of=2014-02-15&sort=total_debts:desc",
            expected: |r, _| {
                to_json(&pivot(
                    r,
                    &StudentFilter::by_group(gid("5210М")),
                    d("2014-02-15"),
                    "total_debts:desc".parse().unwrap(),
                ))
            },
        },
        Golden {
            name: "pivot-expelled.json",
            path: "/pivot?status=expelled&as_of=2014-02-15",
            expected: |r, _| {
                to_json(&pivot(
                    r,
                    &StudentFilter::expelled(),
                    d("2014-02-15"),
                    Default::default(),
                ))
            },
        },
        Golden {
            name: "mastery.json",
            path: "/mastery?as_of=2014-02-15",
            expected: |r, _| to_json(&mastery_table(r, d("2014-02-15"))),
        },
        Golden {
            name: "debt-series.json",
            path: "/debt-series?from=2013-01-01&to=2014-02-15&step=30&funding=budget",
            expected: |r, _| {
                let f = StudentFilter::parse("funding=budget").unwrap();
                to_json(&debt_series(r, &f, d("2013-01-01"), d("2014-02-15"), 30).unwrap())
            },
        },
        Golden {
            name: "movements.json",
            path: "/movements",
            expected: |r, _| to_json(r.log()),
        },
        Golden {
            name: "movements-2014-02.json",
            path: "/movements?month=2014-02",
            expected: |r, _| {
                let v: Vec<_> = r
                    .log()
                    .iter()
                    .filter(|e| period_of(e.date) == (2014, 2))
                    .collect();
                to_json(&v)
            },
        },
        Golden {
            name: "report-2014-02.json",
            path: "/reports/movement?month=2014-02",
            expected: |r, _| to_json(&movement_report_current(r, 2014, 2).unwrap()),
        },
        Golden {
            name: "report-2014-01.csv",
            path: "/reports/movement?month=2014-01&format=csv",
            expected: |r, _| render_report_csv(&movement_report_current(r, 2014, 1).unwrap()),
        },
        Golden {
            name: "audit.json",
            path: "/audit?as_of=2014-09-02",
            expected: |r, _| to_json(&run_audit(r, d("2014-09-02"), r.calendar())),
        },
        Golden {
            name: "roster-5131-5.csv",
            path: "/exchange/export/5131/5",
            expected: |r, _| export_group_for_teacher(r, &gid("5131"), 5).unwrap(),
        },
        Golden {
            name: "sheets.json",
            path: "/sheets",
            expected: |r, root| to_json(&sheets(r, root)),
        },
        Golden {
            name: "sheets.txt",
            path: "/sheets?group=5131&format=text",
            expected: |r, root| {
                sheets(r, root)
                    .iter()
                    .map(|s| s.render_text())
                    .collect::<Vec<_>>()
                    .join("\n")
            },
        },
    ]
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

/// Checks every read endpoint against the core result and the checked-in
/// golden file. With `update`, golden files are rewritten from the core.
pub fn check_goldens(update: bool) -> Result<String, String> {
    let rt = tokio::runtime::Runtime::new().unwrap();
    rt.block_on(async {
        let dir = fixture_dir();
        let app = app(dir.path());
        let r = load_registry(dir.path()).unwrap();
        let goldens = goldens();
        for g in &goldens {
            let reply = get(&app, g.path).await;
            if reply.status != StatusCode::OK {
                return Err(format!(
                    "{} answered {}: {}",
                    g.path, reply.status, reply.body
                ));
            }
            let core = (g.expected)(&r, dir.path());
            if reply.body != core {
                return Err(format!("{}: payload differs from the core result", g.path));
            }
            let file = golden_dir().join(g.name);
            if update {
                fs::create_dir_all(golden_dir()).unwrap();
                fs::write(&file, &core).unwrap();
            }
            let stored = fs::read_to_string(&file)
                .map_err(|e| format!("{}: {e} (run with UPDATE_GOLDEN=1)", file.display()))?;
            if stored != core {
                return Err(format!("{}: golden file is stale", g.name));
            }
        }
        Ok(format!(
            "{} read endpoints equal core output and golden files",
            goldens.len()
        ))
    })
}
