#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use tutor_core::learner::Questionnaire;
use tutor_core::session::Tutor;
use tutor_core::store::EventStore;
use tutor_core::{load_course, CourseGraph, TutorConfig};
use tutor_gateway::{Gateway, GatewayConfig};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

pub fn course() -> Arc<CourseGraph> {
    Arc::new(load_course(&std::fs::read(fixture("sample_course.json")).unwrap()).unwrap())
}

pub fn profiler() -> Questionnaire {
    Questionnaire::from_json(&std::fs::read(fixture("profiler.json")).unwrap()).unwrap()
}

pub fn config(dir: &std::path::Path) -> GatewayConfig {
    GatewayConfig {
        course: fixture("sample_course.json"),
        profiler: fixture("profiler.json"),
        data_dir: dir.to_path_buf(),
        fsync: false,
        ..GatewayConfig::default()
    }
}

pub fn gateway(dir: &std::path::Path) -> Gateway {
    Gateway::new(
        Tutor::new(course(), TutorConfig::default()),
        profiler(),
        EventStore::open(dir).unwrap().with_fsync(false),
        0,
    )
    .unwrap()
}
