// Copyright 2026 The divsample Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! The session API driven in-process through the router.

use std::path::Path;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use divsample::server::{router, AppState};

fn dataset_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    // every non-empty subset of items 0..6 is closed (item 6 everywhere)
    let mut text = String::new();
    for t in 0..6 {
        let row: Vec<String> = (0..7).filter(|&i| i != t).map(|i| i.to_string()).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    text.push_str("0 1 2 3 4 5 6\n");
    std::fs::write(dir.path().join("toy.txt"), text).unwrap();
    dir
}

fn app(dir: &Path) -> Router {
    router(AppState::new(dir))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes)
            .unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

fn create_body(iterations: usize) -> Value {
    json!({
        "dataset": "toy", "theta": 1, "jmax": 1.0, "k": 4, "ell": 1, "eta": 0.13,
        "agg": "exponential", "features": "ILFT", "seed": 5, "iterations": iterations,
    })
}

fn ids(query: &Value) -> Vec<usize> {
    query
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["id"].as_u64().unwrap() as usize)
        .collect()
}

#[tokio::test]
async fn create_rank_next_round_trip() {
    let dir = dataset_dir();
    let app = app(dir.path());
    let (status, created) = call(&app, "POST", "/sessions", Some(create_body(3))).await;
    assert_eq!(status, StatusCode::OK, "{created}");
    let id = created["session_id"].as_str().unwrap().to_string();
    assert_eq!(created["iteration"], 1);
    let query = created["query"].as_array().unwrap();
    assert_eq!(query.len(), 4);
    for p in query {
        let items = p["items"].as_array().unwrap();
        assert_eq!(p["length"].as_u64().unwrap() as usize, items.len());
        assert!(p["support"].as_u64().unwrap() >= 1);
        let q = p["quality"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&q));
    }

    // rank in reverse presentation order; the best one is retained
    let mut order = ids(&created["query"]);
    order.reverse();
    let best = created["query"][order[0]]["items"].clone();
    let (status, next) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/ranking"),
        Some(json!({ "order": order })),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{next}");
    assert_eq!(next["iteration"], 2);
    assert_eq!(next["query"][0]["items"], best);

    let (status, view) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["iteration"], 2);
    assert_eq!(view["done"], false);
    assert_eq!(view["query"], next["query"]);
    let history = view["history"].as_array().unwrap();
    assert_eq!(history.len(), 1);
    assert_eq!(history[0]["iteration"], 1);
    assert_eq!(history[0]["query"], created["query"]);
    assert_eq!(history[0]["ranking"], json!(order));
    let top = view["weights_summary"]["top_items"].as_array().unwrap();
    assert!(!top.is_empty() && top.len() <= 10);
    let weights: Vec<f64> = top.iter().map(|e| e[1].as_f64().unwrap()).collect();
    assert!(weights.windows(2).all(|w| w[0] >= w[1]));
}

#[tokio::test]
async fn last_ranking_finishes_the_session() {
    let dir = dataset_dir();
    let app = app(dir.path());
    let (_, mut current) = call(&app, "POST", "/sessions", Some(create_body(2))).await;
    let id = current["session_id"].as_str().unwrap().to_string();
    let uri = format!("/sessions/{id}/ranking");
    for t in 1..=2 {
        let order = ids(&current["query"]);
        let (status, resp) = call(&app, "POST", &uri, Some(json!({ "order": order }))).await;
        assert_eq!(status, StatusCode::OK);
        if t == 2 {
            assert_eq!(resp, json!({ "done": true, "iterations": 2 }));
        }
        current = resp;
    }
    let (status, _) = call(&app, "POST", &uri, Some(json!({ "order": [0, 1, 2, 3] }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (_, view) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(view["done"], true);
    assert_eq!(view["history"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn bad_rankings_conflict_and_leave_state_alone() {
    let dir = dataset_dir();
    let app = app(dir.path());
    let (_, created) = call(&app, "POST", "/sessions", Some(create_body(3))).await;
    let id = created["session_id"].as_str().unwrap().to_string();
    let uri = format!("/sessions/{id}/ranking");
    for order in [
        json!([0, 1, 2]),
        json!([0, 1, 2, 2]),
        json!([0, 1, 2, 4]),
        json!([0, 1, 2, 3, 0]),
    ] {
        let (status, resp) = call(&app, "POST", &uri, Some(json!({ "order": order }))).await;
        assert_eq!(status, StatusCode::CONFLICT, "{order}");
        assert!(resp["error"].is_string());
    }
    let (_, view) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(view["iteration"], 1);
    assert_eq!(view["query"], created["query"]);
    assert!(view["history"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn unknown_sessions_and_bad_requests() {
    let dir = dataset_dir();
    let app = app(dir.path());
    let (status, _) = call(&app, "GET", "/sessions/999", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "GET", "/sessions/abc", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(
        &app,
        "POST",
        "/sessions/999/ranking",
        Some(json!({ "order": [0] })),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let mut body = create_body(2);
    body["dataset"] = json!("missing");
    assert_eq!(
        call(&app, "POST", "/sessions", Some(body)).await.0,
        StatusCode::NOT_FOUND
    );
    for (key, value) in [
        ("dataset", json!("../toy")),
        ("agg", json!("quadratic")),
        ("eta", json!(0.7)),
        ("features", json!("Q")),
        ("theta", json!(0)),
        ("ell", json!(4)),
    ] {
        let mut body = create_body(2);
        body[key] = value;
        let (status, resp) = call(&app, "POST", "/sessions", Some(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{key}: {resp}");
    }
}

#[tokio::test]
async fn sessions_are_independent_and_replayable() {
    let dir = dataset_dir();
    let app = app(dir.path());
    let (_, a) = call(&app, "POST", "/sessions", Some(create_body(3))).await;
    let (_, b) = call(&app, "POST", "/sessions", Some(create_body(3))).await;
    assert_ne!(a["session_id"], b["session_id"]);
    assert_eq!(a["query"], b["query"]);
    let ua = format!("/sessions/{}/ranking", a["session_id"].as_str().unwrap());
    let ub = format!("/sessions/{}/ranking", b["session_id"].as_str().unwrap());
    let order = ids(&a["query"]);
    let (_, na) = call(&app, "POST", &ua, Some(json!({ "order": order }))).await;
    let (_, nb) = call(&app, "POST", &ub, Some(json!({ "order": order }))).await;
    assert_eq!(na, nb);
}
