//! Writes a small sample data directory: three groups with movement
//! history, group 5131 and one filled-in exchange file under `inbox/`.
//!
//!     cargo run -p deanery-testkit --example demo_store -- /tmp/deanery-demo

use std::path::PathBuf;

use deanery_core::store::{save_registry, write_atomic};
use deanery_testkit::fixtures::{demo_registry, exam_sheet_fixture};

fn main() {
    let dir: PathBuf = std::env::args_os()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| "deanery-demo".into());
    let mut r = demo_registry();
    let (r17, x) = exam_sheet_fixture();
    for g in r17.groups() {
        r.insert_group(g.clone()).expect("distinct groups");
    }
    for s in r17.students() {
        r.insert_student(s.clone()).expect("distinct students");
    }
    save_registry(&r, &dir).expect("save store");
    let exchange = x.render(r.control_codes()).expect("render exchange");
    write_atomic(
        &dir.join("inbox").join("5131-exam.csv"),
        exchange.as_bytes(),
    )
    .expect("write exchange");
    println!("{}", dir.display());
}
