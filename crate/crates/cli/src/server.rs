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

//! JSON session service for interactive ranking.
//!
//! ```text
//! POST /sessions               create, returns the first query
//! POST /sessions/{id}/ranking  rank the live query, returns the next one
//! GET  /sessions/{id}          weights summary and ranking history
//! ```

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use divsample_core::preference::{AggregationConfig, AggregationKind, FeatureSets};
use divsample_core::session::{Session, SessionConfig, SessionError};
use divsample_core::TransactionDatabase;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::experiment::Variant;
use crate::io::{load_database, Theta};

/// Number of item weights reported by `GET /sessions/{id}`.
pub const TOP_ITEMS: usize = 10;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::BadOrder(_)
            | SessionError::Finished(_)
            | SessionError::NoPendingQuery => StatusCode::CONFLICT,
            SessionError::Sample { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternView {
    pub id: usize,
    pub items: Vec<usize>,
    pub support: usize,
    pub length: usize,
    pub quality: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub query: Vec<PatternView>,
    pub ranking: Vec<usize>,
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub dataset: String,
    pub theta: f64,
    pub jmax: f64,
    pub k: usize,
    pub ell: usize,
    pub eta: f64,
    pub agg: String,
    pub features: String,
    pub seed: u64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub variant: Option<String>,
}

fn default_iterations() -> usize {
    10
}

#[derive(Debug, Deserialize)]
pub struct RankingBody {
    pub order: Vec<usize>,
}

struct Live {
    session: Session,
    presented: Vec<PatternView>,
    history: Vec<HistoryEntry>,
}

impl Live {
    fn present(&mut self) -> Result<(), SessionError> {
        let query = self.session.next_query()?.to_vec();
        self.presented = query
            .iter()
            .enumerate()
            .map(|(id, p)| PatternView {
                id,
                items: p.itemset.items().to_vec(),
                support: p.support,
                length: p.len(),
                quality: self.session.quality(p),
            })
            .collect();
        Ok(())
    }

    fn query_json(&self) -> Value {
        json!({ "iteration": self.session.iteration(), "query": self.presented })
    }
}

pub struct AppState {
    dataset_dir: PathBuf,
    databases: Mutex<HashMap<PathBuf, Arc<TransactionDatabase>>>,
    sessions: Mutex<HashMap<u64, Arc<Mutex<Live>>>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(dataset_dir: impl Into<PathBuf>) -> Arc<Self> {
        Arc::new(AppState {
            dataset_dir: dataset_dir.into(),
            databases: Mutex::new(HashMap::new()),
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        })
    }

    fn database(&self, name: &str) -> Result<Arc<TransactionDatabase>, ApiError> {
        if name.is_empty() || name.contains(['/', '\\']) || name.contains("..") {
            return Err(ApiError::bad_request(format!(
                "invalid dataset name {name:?}"
            )));
        }
        let plain = self.dataset_dir.join(name);
        let path = [plain.clone(), plain.with_extension("txt")]
            .into_iter()
            .find(|p| p.is_file())
            .ok_or_else(|| {
                ApiError::new(StatusCode::NOT_FOUND, format!("unknown dataset {name:?}"))
            })?;
        let mut cache = self.databases.lock().unwrap();
        if let Some(db) = cache.get(&path) {
            return Ok(db.clone());
        }
        let db = Arc::new(load_database(&path).map_err(|e| ApiError::bad_request(e.to_string()))?);
        cache.insert(path, db.clone());
        Ok(db)
    }

    fn live(&self, id: &str) -> Result<Arc<Mutex<Live>>, ApiError> {
        let not_found = || ApiError::new(StatusCode::NOT_FOUND, format!("unknown session {id:?}"));
        let id: u64 = id.parse().map_err(|_| not_found())?;
        self.sessions
            .lock()
            .unwrap()
            .get(&id)
            .cloned()
            .ok_or_else(not_found)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/ranking", post(submit_ranking))
        .with_state(state)
}

fn session_config(
    body: &CreateSession,
    db: &TransactionDatabase,
) -> Result<SessionConfig, ApiError> {
    let theta = Theta::from_f64(body.theta)
        .and_then(|t| t.resolve(db.n_transactions()))
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let kind = match body.agg.as_str() {
        "linear" => AggregationKind::Linear,
        "exponential" | "exp" => AggregationKind::Exponential,
        other => {
            return Err(ApiError::bad_request(format!(
                "unknown aggregation {other:?}"
            )))
        }
    };
    let mut cfg = SessionConfig::new(
        theta,
        body.jmax,
        body.k,
        body.ell,
        body.iterations,
        body.seed,
    );
    cfg.aggregation =
        AggregationConfig::new(kind, body.eta).map_err(|e| ApiError::bad_request(e.to_string()))?;
    cfg.features =
        FeatureSets::parse(&body.features).map_err(|e| ApiError::bad_request(e.to_string()))?;
    if let Some(v) = &body.variant {
        v.parse::<Variant>()
            .map_err(ApiError::bad_request)?
            .apply(&mut cfg);
    }
    Ok(cfg)
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    Json(body): Json<CreateSession>,
) -> Result<Json<Value>, ApiError> {
    let st = state.clone();
    let (id, value) = blocking(move || {
        let db = st.database(&body.dataset)?;
        let cfg = session_config(&body, &db)?;
        let mut live = Live {
            session: Session::new(db, cfg)?,
            presented: Vec::new(),
            history: Vec::new(),
        };
        live.present()?;
        let id = st.next_id.fetch_add(1, Ordering::Relaxed);
        let value = live.query_json();
        st.sessions
            .lock()
            .unwrap()
            .insert(id, Arc::new(Mutex::new(live)));
        Ok((id, value))
    })
    .await?;
    let mut value = value;
    value["session_id"] = json!(id.to_string());
    Ok(Json(value))
}

async fn submit_ranking(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<RankingBody>,
) -> Result<Json<Value>, ApiError> {
    let live = state.live(&id)?;
    blocking(move || {
        let mut live = live.lock().unwrap();
        if live.session.is_finished() {
            return Err(SessionError::Finished(live.session.config().iterations).into());
        }
        let iteration = live.session.iteration();
        live.session.submit_order(&body.order)?;
        let entry = HistoryEntry {
            iteration,
            query: live.presented.clone(),
            ranking: body.order,
        };
        live.history.push(entry);
        if live.session.is_finished() {
            live.presented.clear();
            return Ok(Json(json!({
                "done": true,
                "iterations": live.session.config().iterations,
            })));
        }
        live.present()?;
        Ok(Json(live.query_json()))
    })
    .await
}

async fn get_session(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<Value>, ApiError> {
    let live = state.live(&id)?;
    let live = live.lock().unwrap();
    let s = &live.session;
    let mut top: Vec<(usize, f64)> = match s.layout().items_offset() {
        Some(o) => (0..s.db().n_items())
            .map(|i| (i, s.weights()[o + i]))
            .collect(),
        None => Vec::new(),
    };
    top.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    top.truncate(TOP_ITEMS);
    Ok(Json(json!({
        "iteration": s.iteration(),
        "done": s.is_finished(),
        "query": live.presented,
        "weights_summary": { "top_items": top },
        "history": live.history,
    })))
}

/// Serves the API until the process is stopped.
pub async fn serve(addr: std::net::SocketAddr, dataset_dir: PathBuf) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(dataset_dir))).await
}
