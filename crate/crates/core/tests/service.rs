use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use seqdiag::{fixtures, service};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .header("origin", "http://localhost:5173")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = axum::body::to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn create(app: &Router, body: Value) -> (StatusCode, Value) {
    call(app, "POST", "/sessions", Some(body)).await
}

async fn exk_session(app: &Router) -> String {
    let (status, v) = create(app, json!({ "dpi": fixtures::EXK_DPI })).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn circuit_session_over_http() {
    let app = service::router();
    let (status, v) = create(&app, json!({ "netlist": fixtures::CIRCUIT_NET, "config": { "enhance": true } })).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["status"], "running");
    assert_eq!(v["pending"]["query"][0]["text"], "!outX1");
    assert!((v["pending"]["p_true"].as_f64().unwrap() - 0.93).abs() < 0.005);
    let id = v["id"].as_str().unwrap();

    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/answer"), Some(json!({ "answer": "true", "iteration": 1 }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["status"], "done");
    assert_eq!(v["diagnosis"], json!([1]));

    let (status, v) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["pending"], Value::Null);

    let (status, t) = call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(t.as_array().unwrap().len(), 1);
    assert_eq!(t[0]["answer"], "true");
}

#[tokio::test]
async fn bad_requests() {
    let app = service::router();
    let (status, v) = create(&app, json!({ "dpi": "[K]\n1: A &\n" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{v}");

    let invalid = "[K]\n1: A\n[B]\n2: B\n[N]\nn1: B\n";
    let (status, v) = create(&app, json!({ "dpi": invalid })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().contains("no diagnosis exists"));

    let (status, _) = create(&app, json!({ "dpi": fixtures::EXK_DPI, "config": { "goal": "threshold:1.5" } })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = create(&app, json!({ "dpi": fixtures::EXK_DPI, "config": { "qsm": "gini" } })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = create(&app, json!({})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _) = call(&app, "GET", "/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/sessions/nope/answer", Some(json!({ "answer": "true" }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let id = exk_session(&app).await;
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/answer"), Some(json!({ "answer": "maybe" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn stale_and_finished_answers_conflict() {
    let app = service::router();
    let id = exk_session(&app).await;
    let uri = format!("/sessions/{id}/answer");
    let (status, _) = call(&app, "POST", &uri, Some(json!({ "answer": "false", "iteration": 2 }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, v) = call(&app, "POST", &uri, Some(json!({ "answer": "false", "iteration": 1 }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["pending"]["iteration"], 2);
    let (status, _) = call(&app, "POST", &uri, Some(json!({ "answer": "false", "iteration": 1 }))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    // answer until done, then once more
    let mut state = v;
    while state["status"] == "running" {
        let it = state["pending"]["iteration"].clone();
        let (status, v) = call(&app, "POST", &uri, Some(json!({ "answer": "true", "iteration": it }))).await;
        assert_eq!(status, StatusCode::OK);
        state = v;
    }
    let (status, _) = call(&app, "POST", &uri, Some(json!({ "answer": "true" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn concurrent_answers_apply_once() {
    let app = service::router();
    let id = exk_session(&app).await;
    let uri = format!("/sessions/{id}/answer");
    let body = json!({ "answer": "true", "iteration": 1 });
    let (a, b) = tokio::join!(call(&app, "POST", &uri, Some(body.clone())), call(&app, "POST", &uri, Some(body)));
    let mut codes = [a.0, b.0];
    codes.sort();
    assert_eq!(codes, [StatusCode::OK, StatusCode::CONFLICT]);
    let (_, t) = call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    assert_eq!(t.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn contradicting_extras_leave_the_session_unchanged() {
    let app = service::router();
    let id = exk_session(&app).await;
    let uri = format!("/sessions/{id}/answer");
    let (status, _) = call(&app, "POST", &uri, Some(json!({ "answer": "true", "extra": ["!M"] }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (_, v) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(v["pending"]["iteration"], 1);
    assert_eq!(v["history"].as_array().unwrap().len(), 0);

    let (status, v) = call(&app, "POST", &uri, Some(json!({ "answer": "skip" }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["pending"]["iteration"], 2);
    assert_eq!(v["history"][0]["answer"], "skip");
}

#[tokio::test]
async fn cors_headers_are_sent() {
    let app = service::router();
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/sessions")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .body(Body::empty())
        .unwrap();
    let res = app.oneshot(req).await.unwrap();
    assert!(res.headers().contains_key("access-control-allow-origin"));
}
