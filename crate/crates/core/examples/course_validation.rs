//! Validates the bundled courses, then a deliberately broken copy.
//!
//! cargo run -p tutor-core --example course_validation

use tutor_core::config::TutorConfig;
use tutor_core::kb::{parse_course_file, validate_course, CourseGraph};

fn report(name: &str, bytes: &[u8]) {
    let file = parse_course_file(bytes).expect("course json parses");
    let violations = validate_course(&CourseGraph::from_file(file), TutorConfig::default().validation_rules());
    println!("{name}: {} violations", violations.len());
    for v in violations {
        println!("  {v}");
    }
}

fn main() {
    report("minimal", include_bytes!("../fixtures/minimal_course.json"));
    report("sample", include_bytes!("../fixtures/sample_course.json"));

    // Out-of-range weight and a prerequisite that points at itself.
    let mut v: serde_json::Value = serde_json::from_slice(include_bytes!("../fixtures/sample_course.json")).unwrap();
    v["concepts"][0]["sections"][0]["importance_weight"] = 0.into();
    v["concepts"][1]["prerequisites"] = serde_json::json!([v["concepts"][1]["id"].clone()]);
    report("broken", &serde_json::to_vec(&v).unwrap());
}
