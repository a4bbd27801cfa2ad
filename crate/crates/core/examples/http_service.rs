//! Drive the HTTP session API in-process: create a session, answer until done, read the transcript.

use axum::body::Body;
use axum::http::{Request, StatusCode};
use seqdiag::{fixtures, service};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = axum::body::to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::main]
async fn main() {
    let app = service::router();
    let create = json!({ "netlist": fixtures::CIRCUIT_NET, "config": { "enhance": true } });
    let (status, state) = call(&app, "POST", "/sessions", Some(create)).await;
    println!("POST /sessions -> {status}");
    let id = state["id"].as_str().unwrap().to_string();
    println!("pending query: {}", state["pending"]["query"]);

    let it = state["pending"]["iteration"].clone();
    let (status, state) = call(&app, "POST", &format!("/sessions/{id}/answer"), Some(json!({ "answer": "true", "iteration": it }))).await;
    println!("answer -> {status}, status {}, diagnosis {}", state["status"], state["diagnosis"]);

    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/answer"), Some(json!({ "answer": "true" }))).await;
    println!("answering a finished session -> {status}");

    let (_, t) = call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    println!("{}", serde_json::to_string_pretty(&t).unwrap());
    println!("run `seqdiag serve --port 8080` to expose the same API over TCP");
}
