//! HTTP suggestion service.
//!
//! Read-only over an immutable [`CompatibilityIndex`] snapshot: every
//! suggestion response is a function of the loaded index generation and the
//! request. The snapshot can be replaced atomically with
//! [`ServiceState::swap_index`]; in-flight requests finish on the snapshot
//! they started with. Saved scenes go through a single-writer store.
//!
//! Errors are JSON bodies `{"error": {"kind", "message"}}` with status 404
//! for unknown items, classes and scenes, 422 for unrankable items, 409 when
//! a request pins a `generation` other than the loaded one, and 400 for
//! malformed requests.

mod scenes;

pub use scenes::SceneStore;

use std::future::Future;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::compat::{CompatibilityIndex, Placement, Scene, Suggestion, DEFAULT_K};
use crate::error::Error;

pub const DEFAULT_PAGE_SIZE: usize = 50;
pub const MAX_PAGE_SIZE: usize = 500;

pub struct ServiceState {
    index: RwLock<Arc<CompatibilityIndex>>,
    scenes: Mutex<SceneStore>,
}

impl ServiceState {
    pub fn new(index: CompatibilityIndex, scenes: SceneStore) -> Self {
        ServiceState {
            index: RwLock::new(Arc::new(index)),
            scenes: Mutex::new(scenes),
        }
    }

    /// Current index snapshot.
    pub fn index(&self) -> Arc<CompatibilityIndex> {
        self.index.read().expect("index lock poisoned").clone()
    }

    /// Replaces the served index, returning the previous snapshot.
    pub fn swap_index(&self, index: CompatibilityIndex) -> Arc<CompatibilityIndex> {
        let mut guard = self.index.write().expect("index lock poisoned");
        std::mem::replace(&mut *guard, Arc::new(index))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(kind: &'static str, message: impl ToString) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            kind,
            message: message.to_string(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownItem(_) | Error::UnknownClass(_) | Error::UnknownScene(_) => StatusCode::NOT_FOUND,
            Error::Unrankable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::GenerationMismatch { .. } => StatusCode::CONFLICT,
            Error::InvalidConfig(_) | Error::EmptyScene => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            status,
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request("bad_query", e.body_text())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request("bad_body", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": { "kind": self.kind, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn check_generation(index: &CompatibilityIndex, requested: Option<&str>) -> Result<(), Error> {
    match requested {
        Some(g) if g != index.generation_hex() => Err(Error::GenerationMismatch {
            requested: g.to_string(),
            current: index.generation_hex(),
        }),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub furniture_id: String,
    pub class: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thumbnail: Option<String>,
    /// False for items with no validated image; they cannot seed or receive
    /// suggestions.
    pub rankable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogPage {
    pub generation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    /// Zero-based.
    pub page: usize,
    pub page_size: usize,
    pub total: usize,
    pub items: Vec<CatalogEntry>,
}

#[derive(Debug, Deserialize)]
struct CatalogQuery {
    class: Option<String>,
    #[serde(default)]
    page: usize,
    page_size: Option<usize>,
    generation: Option<String>,
}

async fn furniture(
    State(state): State<Arc<ServiceState>>,
    query: Result<Query<CatalogQuery>, QueryRejection>,
) -> ApiResult<CatalogPage> {
    let Query(q) = query?;
    let index = state.index();
    check_generation(&index, q.generation.as_deref())?;
    let page_size = q.page_size.unwrap_or(DEFAULT_PAGE_SIZE);
    if page_size == 0 || page_size > MAX_PAGE_SIZE {
        return Err(ApiError::bad_request(
            "bad_query",
            format!("page_size must be in 1..={MAX_PAGE_SIZE}"),
        ));
    }
    let mut all = index.catalog();
    if let Some(class) = &q.class {
        all.retain(|(item, _)| &item.class_name == class);
        if all.is_empty() {
            return Err(Error::UnknownClass(class.clone()).into());
        }
    }
    let items = all
        .iter()
        .skip(q.page.saturating_mul(page_size))
        .take(page_size)
        .map(|(item, rankable)| CatalogEntry {
            furniture_id: item.id.clone(),
            class: item.class_name.clone(),
            thumbnail: item.thumbnail.clone(),
            rankable: *rankable,
        })
        .collect();
    Ok(Json(CatalogPage {
        generation: index.generation_hex(),
        class: q.class,
        page: q.page,
        page_size,
        total: all.len(),
        items,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionEntry {
    /// One-based.
    pub rank: usize,
    pub furniture_id: String,
    pub class: String,
    pub distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thumbnail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestResponse {
    pub generation: String,
    pub class: String,
    pub k: usize,
    pub suggestions: Vec<SuggestionEntry>,
}

fn suggest_response(index: &CompatibilityIndex, class: String, k: usize, ranked: Vec<Suggestion>) -> SuggestResponse {
    let suggestions = ranked
        .into_iter()
        .enumerate()
        .map(|(r, s)| SuggestionEntry {
            rank: r + 1,
            thumbnail: index.item(&s.furniture_id).and_then(|i| i.thumbnail.clone()),
            furniture_id: s.furniture_id,
            class: s.class_name,
            distance: s.distance,
        })
        .collect();
    SuggestResponse {
        generation: index.generation_hex(),
        class,
        k,
        suggestions,
    }
}

#[derive(Debug, Deserialize)]
struct SingleQuery {
    seed: String,
    class: String,
    k: Option<usize>,
    generation: Option<String>,
}

async fn suggest_single(
    State(state): State<Arc<ServiceState>>,
    query: Result<Query<SingleQuery>, QueryRejection>,
) -> ApiResult<SuggestResponse> {
    let Query(q) = query?;
    let index = state.index();
    check_generation(&index, q.generation.as_deref())?;
    let k = q.k.unwrap_or(DEFAULT_K);
    let ranked = index.rank_single_seed(&q.seed, &q.class, k)?;
    Ok(Json(suggest_response(&index, q.class, k, ranked)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiRequest {
    pub scene: Vec<String>,
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<String>,
}

async fn suggest_multi(
    State(state): State<Arc<ServiceState>>,
    body: Result<Json<MultiRequest>, JsonRejection>,
) -> ApiResult<SuggestResponse> {
    let Json(req) = body?;
    let index = state.index();
    check_generation(&index, req.generation.as_deref())?;
    let k = req.k.unwrap_or(DEFAULT_K);
    let ranked = index.rank_multi_seed(&req.scene, &req.class, k)?;
    Ok(Json(suggest_response(&index, req.class, k, ranked)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyRequest {
    pub scene: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyResponse {
    pub generation: String,
    pub energy: f64,
}

async fn scene_energy(
    State(state): State<Arc<ServiceState>>,
    body: Result<Json<EnergyRequest>, JsonRejection>,
) -> ApiResult<EnergyResponse> {
    let Json(req) = body?;
    let index = state.index();
    check_generation(&index, req.generation.as_deref())?;
    Ok(Json(EnergyResponse {
        generation: index.generation_hex(),
        energy: index.scene_energy(&req.scene)?,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaveSceneRequest {
    pub name: String,
    #[serde(default)]
    pub placements: Vec<Placement>,
}

async fn save_scene(
    State(state): State<Arc<ServiceState>>,
    body: Result<Json<SaveSceneRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<Scene>), ApiError> {
    let Json(req) = body?;
    let index = state.index();
    for p in &req.placements {
        if index.item(&p.furniture_id).is_none() {
            return Err(Error::UnknownItem(p.furniture_id.clone()).into());
        }
    }
    let scene = state
        .scenes
        .lock()
        .expect("scene store poisoned")
        .save(&req.name, req.placements)?;
    Ok((StatusCode::CREATED, Json(scene)))
}

async fn load_scene(State(state): State<Arc<ServiceState>>, Path(id): Path<String>) -> ApiResult<Scene> {
    let scenes = state.scenes.lock().expect("scene store poisoned");
    scenes
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| Error::UnknownScene(id).into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub generation: String,
    pub items: usize,
    pub unrankable: usize,
}

async fn health(State(state): State<Arc<ServiceState>>) -> Json<Health> {
    let index = state.index();
    Json(Health {
        generation: index.generation_hex(),
        items: index.len(),
        unrankable: index.unrankable().len(),
    })
}

async fn not_found() -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        kind: "no_route",
        message: "no such endpoint".into(),
    }
}

pub fn router(state: Arc<ServiceState>) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/furniture", get(furniture))
        .route("/v1/suggest/single", get(suggest_single))
        .route("/v1/suggest/multi", post(suggest_multi))
        .route("/v1/scene/energy", post(scene_energy))
        .route("/v1/scenes", post(save_scene))
        .route("/v1/scenes/{id}", get(load_scene))
        .fallback(not_found)
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: Arc<ServiceState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
