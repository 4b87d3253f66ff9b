use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use iwisdm::dataset::{write_dataset, Dataset};
use iwisdm::harness::{read_responses, score, MatchMode};
use iwisdm::presets::{generate_benchmark, ComplexityLevel};
use iwisdm::render::CanvasConfig;
use iwisdm::stimulus::builtin_catalog;
use iwisdm_cli::server::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

struct Fixture {
    _dir: tempfile::TempDir,
    root: std::path::PathBuf,
    data: Dataset,
    app: Router,
}

fn fixture(level: ComplexityLevel, n: usize, render: bool) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let catalog = builtin_catalog();
    let data = generate_benchmark(level, n, 12, &catalog, 0).unwrap();
    let canvas = CanvasConfig::default();
    write_dataset(&data, &root.join("datasets/set"), &catalog, render.then_some(&canvas)).unwrap();
    let app = app(&root);
    Fixture {
        _dir: dir,
        root,
        data,
        app,
    }
}

fn app(root: &Path) -> Router {
    router(Arc::new(
        AppState::open(&root.join("datasets"), &root.join("run")).unwrap(),
    ))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let request = Request::builder().method(method).uri(uri);
    let request = match body {
        Some(b) => request
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => request.body(Body::empty()),
    }
    .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    (
        status,
        response.into_body().collect().await.unwrap().to_bytes().to_vec(),
    )
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn start(app: &Router, subject: &str) -> String {
    let (status, body) = call_json(
        app,
        "POST",
        "/api/session",
        Some(json!({"subject_id": subject, "dataset": "set"})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["session_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn scripted_session_exports_scoreable_csv() {
    let f = fixture(ComplexityLevel::High, 10, true);
    let id = start(&f.app, "p01").await;
    let mut expected_correct = 0;
    for i in 0..10 {
        let (status, view) = call_json(&f.app, "GET", &format!("/api/session/{id}/next"), None).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(view["done"], false);
        assert_eq!(view["position"], i);
        let trial = f.data.trial(view["trial_id"].as_str().unwrap()).unwrap();
        assert_eq!(view["instruction"], trial.instruction.as_str());
        assert_eq!(view["answer_options"].as_array().unwrap().len(), 14);
        assert!(view.get("answer").is_none() && view.get("actions").is_none());
        let frames = view["frames"].as_array().unwrap();
        assert_eq!(frames.len(), 9);
        let url = frames[0]["url"].as_str().unwrap();
        let (status, png) = call(&f.app, "GET", url, None).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(&png[1..4], b"PNG");

        // Right on even trials, a wrong token of the same class on odd ones.
        let right = trial.answer().to_string();
        let class = trial.answer().class();
        let wrong = trial
            .answer_pool
            .iter()
            .find(|t| t.class() == class && **t != *trial.answer())
            .unwrap()
            .to_string();
        let answer = if i % 2 == 0 { right } else { wrong };
        expected_correct += usize::from(i % 2 == 0);
        let (status, ack) = call_json(
            &f.app,
            "POST",
            &format!("/api/session/{id}/answer"),
            Some(json!({"answer": answer, "client_elapsed_ms": 1200.5})),
        )
        .await;
        assert_eq!(status, StatusCode::OK, "{ack}");
        assert!(ack.get("correct").is_none());
        assert_eq!(ack["answered"], i + 1);

        let (status, _) = call_json(
            &f.app,
            "POST",
            &format!("/api/session/{id}/answer"),
            Some(json!({"answer": answer})),
        )
        .await;
        assert_eq!(status, StatusCode::CONFLICT);
    }
    let (_, done) = call_json(&f.app, "GET", &format!("/api/session/{id}/next"), None).await;
    assert_eq!(done["done"], true);

    let (status, csv) = call(&f.app, "GET", &format!("/api/session/{id}/export.csv"), None).await;
    assert_eq!(status, StatusCode::OK);
    let csv = String::from_utf8(csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial_id,subject_id,raw,normalized,correct,response_time_ms,complexity,client_elapsed_ms"
    );
    assert_eq!(lines.count(), 10);

    let path = f.root.join("export.csv");
    std::fs::write(&path, &csv).unwrap();
    let responses = read_responses(&path).unwrap();
    assert!(responses.iter().all(|r| r.response_time_ms.is_some_and(|t| t >= 0.0)));
    assert!(responses.iter().all(|r| r.subject_id == "p01"));
    let report = score(&f.data, &responses, MatchMode::Strict).unwrap();
    assert_eq!(report.correct, expected_correct);
    assert_eq!(report.accuracy, 0.5);
}

#[tokio::test]
async fn sessions_are_isolated_and_persist() {
    let f = fixture(ComplexityLevel::Low, 3, false);
    let a = start(&f.app, "a").await;
    let b = start(&f.app, "b").await;
    let (_, view) = call_json(&f.app, "GET", &format!("/api/session/{a}/next"), None).await;
    assert!(view["frames"][0]["url"].is_null());
    let (status, _) = call_json(
        &f.app,
        "POST",
        &format!("/api/session/{a}/answer"),
        Some(json!({"answer": "true", "trial_id": view["trial_id"]})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let (_, view_b) = call_json(&f.app, "GET", &format!("/api/session/{b}/next"), None).await;
    assert_eq!(view_b["position"], 0);

    // A fresh server over the same run directory resumes both sessions.
    let restarted = app(&f.root);
    let (_, view_a) = call_json(&restarted, "GET", &format!("/api/session/{a}/next"), None).await;
    assert_eq!(view_a["position"], 1);
    let (status, csv) = call(&restarted, "GET", &format!("/api/session/{b}/export.csv"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1);
}

#[tokio::test]
async fn bad_requests_are_rejected() {
    let f = fixture(ComplexityLevel::Low, 2, false);
    let (status, _) = call_json(&f.app, "GET", "/api/session/nope/next", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call_json(
        &f.app,
        "POST",
        "/api/session",
        Some(json!({"subject_id": "x", "dataset": "missing"})),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call_json(
        &f.app,
        "POST",
        "/api/session",
        Some(json!({"subject_id": "x", "dataset": ".."})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&f.app, "GET", "/frames/set/low/trial_0/trial.json", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let id = start(&f.app, "x").await;
    let (status, _) = call_json(
        &f.app,
        "POST",
        &format!("/api/session/{id}/answer"),
        Some(json!({"answer": "true"})),
    )
    .await;
    assert_eq!(
        status,
        StatusCode::CONFLICT,
        "answers before the trial is served are rejected"
    );
    let (_, view) = call_json(&f.app, "GET", &format!("/api/session/{id}/next"), None).await;
    let (status, _) = call_json(
        &f.app,
        "POST",
        &format!("/api/session/{id}/answer"),
        Some(json!({"answer": "true", "trial_id": "other"})),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call_json(
        &f.app,
        "POST",
        &format!("/api/session/{id}/answer"),
        Some(json!({"answer": "true", "trial_id": view["trial_id"]})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);

    let (status, names) = call_json(&f.app, "GET", "/api/datasets", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(names, json!(["set"]));
}
