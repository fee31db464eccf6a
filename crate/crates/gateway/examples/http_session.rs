//! Drives the HTTP API in-process: create a learner, submit the profiler,
//! run a session by answer letters, then read progress.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use tutor_gateway::http::router;
use tutor_gateway::{Gateway, GatewayConfig};

async fn call(app: &axum::Router, method: &str, uri: &str, body: Value) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(if body.is_null() { Body::empty() } else { Body::from(body.to_string()) })
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    println!("{method} {uri} -> {status}");
    v
}

#[tokio::main]
async fn main() {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
    let dir = tempfile::tempdir().unwrap();
    let cfg = GatewayConfig {
        course: fixtures.join("sample_course.json"),
        profiler: fixtures.join("profiler.json"),
        data_dir: dir.path().to_path_buf(),
        fsync: false,
        ..GatewayConfig::default()
    };
    let app = router(Arc::new(Gateway::from_config(&cfg).unwrap()));

    let lid = call(&app, "POST", "/learners", json!({"name": "Ada"})).await["learner_id"].as_str().unwrap().to_owned();
    let answers: Vec<Value> = (1..=10).map(|i| json!({"item": format!("q{i}"), "option": "c"})).collect();
    let profile = call(&app, "POST", &format!("/learners/{lid}/profiler"), json!({"answers": answers})).await;
    println!("  dominant style {}", profile["dominant"]);

    let started = call(&app, "POST", "/sessions", json!({"learner_id": lid})).await;
    let sid = started["session_id"].as_str().unwrap().to_owned();
    let mut prompt = started["prompt"].clone();
    // Always answer A; read through any content.
    loop {
        println!("  prompt {prompt}");
        let input = match prompt["type"].as_str().unwrap() {
            "question" => json!({"answer": "A"}),
            _ => json!({"next": true}),
        };
        let step = call(&app, "POST", &format!("/sessions/{sid}/input"), input).await;
        let state = step["state"].as_str().unwrap();
        prompt = step["prompt"].clone();
        if matches!(state, "Completed" | "Skipped" | "Deferred") {
            println!("  {prompt} ({state})");
            break;
        }
    }

    let wrong = call(&app, "POST", &format!("/sessions/{sid}/input"), json!({"answer": "A"})).await;
    println!("  {wrong}");
    let progress = call(&app, "GET", &format!("/learners/{lid}/progress"), Value::Null).await;
    println!("{}", serde_json::to_string_pretty(&progress).unwrap());
}
