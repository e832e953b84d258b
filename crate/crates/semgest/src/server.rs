//! Local curation service over a concept store file.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post, put};
use axum::{Json, Router};
use log::info;
use semgest_core::conceptspace::{
    Concept, ConceptError, ConceptId, ConceptStore, CurationAction, LogEntry, MatchKind, OverrideRule, RuleId,
};
use semgest_core::{Pipeline, RawPhrase, Trace};
use serde::{Deserialize, Serialize};

use crate::config::{verify_store, Config};
use crate::error::{Error, Result};
use crate::formats::{self, UnassignedRow};

/// Phrase id used for previews.
pub const PREVIEW_ID: &str = "preview";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status: status.as_u16(),
            code: code.to_string(),
            message: message.into(),
        }
    }

    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl From<ConceptError> for ApiError {
    fn from(e: ConceptError) -> Self {
        let (status, code) = match &e {
            ConceptError::UnknownId(_) => (StatusCode::NOT_FOUND, "unknown_concept"),
            ConceptError::UnknownRule(_) => (StatusCode::NOT_FOUND, "unknown_rule"),
            ConceptError::UnknownSeed(_) => (StatusCode::BAD_REQUEST, "unknown_seed"),
            ConceptError::UnknownPhrase(_) => (StatusCode::BAD_REQUEST, "unknown_phrase"),
            ConceptError::InvalidSplit(_) => (StatusCode::BAD_REQUEST, "invalid_split"),
            ConceptError::EmptyNameplate => (StatusCode::BAD_REQUEST, "empty_nameplate"),
            ConceptError::EmptySurface => (StatusCode::BAD_REQUEST, "empty_surface"),
            ConceptError::SelfMerge => (StatusCode::BAD_REQUEST, "self_merge"),
            ConceptError::MissingLabel(_) => (StatusCode::BAD_REQUEST, "missing_label"),
            ConceptError::DuplicatePriority(_) => (StatusCode::CONFLICT, "duplicate_priority"),
            ConceptError::SeedOverlap(_) => (StatusCode::CONFLICT, "seed_overlap"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_request("bad_body", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::bad_request("bad_query", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = std::result::Result<Json<T>, ApiError>;

/// Seconds since the Unix epoch.
pub fn system_clock() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Pipeline, store and the file the store lives in.
pub struct Service {
    pipeline: Pipeline,
    store: ConceptStore,
    path: PathBuf,
    corpus: Vec<RawPhrase>,
    clock: fn() -> u64,
}

impl Service {
    /// Opens `path`, or creates it from the configured concepts when it
    /// does not exist yet. An existing store that fails verification is
    /// refused.
    pub fn open(config: &Config, path: &Path) -> Result<Self> {
        let mut pipeline = config.bare_pipeline()?;
        let store = if path.exists() {
            let store = formats::load_store(path)?;
            verify_store(&store, &pipeline).map_err(|m| Error::invalid(path, format!("store is corrupt: {m}")))?;
            crate::config::check_gestures(&store.set, pipeline.catalog()).map_err(|m| Error::invalid(path, m))?;
            store
        } else {
            let store = config
                .concept_store(&pipeline)?
                .ok_or_else(|| Error::Config(format!("{} does not exist and paths.concepts is unset", path.display())))?;
            formats::save_store(path, &store)?;
            store
        };
        pipeline.set_concepts(store.set.clone());
        let corpus = match &config.paths.corpus {
            Some(p) => formats::load_corpus(p)?,
            None => Vec::new(),
        };
        Ok(Self {
            pipeline,
            store,
            path: path.to_path_buf(),
            corpus,
            clock: system_clock,
        })
    }

    pub fn with_clock(mut self, clock: fn() -> u64) -> Self {
        self.clock = clock;
        self
    }

    pub fn store(&self) -> &ConceptStore {
        &self.store
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Applies an action, persists the new store and only then makes it
    /// current. On any failure the service keeps the previous state.
    pub fn apply(&mut self, action: CurationAction) -> std::result::Result<LogEntry, ApiError> {
        if let CurationAction::AttachGesture { gesture, .. } = &action {
            if !self.pipeline.catalog().contains(gesture) {
                return Err(ApiError::bad_request(
                    "unknown_gesture",
                    format!("gesture {gesture:?} is not in the catalog"),
                ));
            }
        }
        let mut next = self.store.clone();
        let entry = next.apply(action, (self.clock)(), &self.pipeline)?.clone();
        formats::save_store(&self.path, &next).map_err(|e| {
            ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "store_write_failed", e.to_string())
        })?;
        self.pipeline.set_concepts(next.set.clone());
        self.store = next;
        info!("applied #{} to {}", entry.seq, self.path.display());
        Ok(entry)
    }

    pub fn snapshot(&self) -> ClustersView {
        ClustersView {
            version: self.store.version,
            concepts: self.store.set.concepts.clone(),
            rules: self.store.set.rules.clone(),
            curation_log: self.store.curation_log.clone(),
        }
    }

    /// Corpus phrases without a concept, most similar first.
    pub fn unassigned(&self) -> std::result::Result<Vec<UnassignedRow>, ApiError> {
        let mut rows = Vec::new();
        for p in &self.corpus {
            let a = self.pipeline.assign(p).map_err(internal)?;
            if !a.is_assigned() {
                rows.push(UnassignedRow::new(p, &a, self.pipeline.concepts()));
            }
        }
        rows.sort_by(|a, b| b.best_similarity.total_cmp(&a.best_similarity).then_with(|| a.phrase_id.cmp(&b.phrase_id)));
        Ok(rows)
    }

    pub fn preview(&self, text: &str) -> std::result::Result<PreviewView, ApiError> {
        let trace = self.pipeline.trace(&RawPhrase::new(PREVIEW_ID, text)).map_err(internal)?;
        let nameplate = trace
            .assignment
            .concept
            .and_then(|id| self.pipeline.concepts().get(id))
            .map(|c| c.nameplate.clone());
        Ok(PreviewView { trace, nameplate })
    }

    fn concept(&self, id: ConceptId) -> std::result::Result<Concept, ApiError> {
        self.store
            .set
            .get(id)
            .cloned()
            .ok_or_else(|| ConceptError::UnknownId(id).into())
    }
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClustersView {
    pub version: u32,
    pub concepts: Vec<Concept>,
    pub rules: Vec<OverrideRule>,
    pub curation_log: Vec<LogEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnassignedView {
    pub phrases: Vec<UnassignedRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewView {
    #[serde(flatten)]
    pub trace: Trace,
    pub nameplate: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptChange {
    pub concept: Concept,
    pub log_entry: LogEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitChange {
    pub source: Concept,
    pub created: Concept,
    pub log_entry: LogEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleChange {
    pub rule: OverrideRule,
    pub log_entry: LogEntry,
}

#[derive(Debug, Deserialize)]
pub struct MergeBody {
    pub a: ConceptId,
    pub b: ConceptId,
}

#[derive(Debug, Deserialize)]
pub struct SplitBody {
    pub members: Vec<String>,
    #[serde(default)]
    pub nameplate: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct NameplateBody {
    pub nameplate: String,
}

#[derive(Debug, Deserialize)]
pub struct GestureBody {
    pub gesture: String,
}

#[derive(Debug, Deserialize)]
pub struct RuleBody {
    pub kind: MatchKind,
    pub surface: String,
    pub target: ConceptId,
    pub priority: i32,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Deserialize)]
pub struct PreviewQuery {
    pub phrase: String,
}

pub type Shared = Arc<RwLock<Service>>;

fn read(state: &Shared) -> std::sync::RwLockReadGuard<'_, Service> {
    state.read().unwrap_or_else(|p| p.into_inner())
}

fn write(state: &Shared) -> std::sync::RwLockWriteGuard<'_, Service> {
    state.write().unwrap_or_else(|p| p.into_inner())
}

fn parse_id(raw: &str) -> std::result::Result<u32, ApiError> {
    raw.parse()
        .map_err(|_| ApiError::bad_request("bad_id", format!("{raw:?} is not a numeric id")))
}

async fn get_clusters(State(s): State<Shared>) -> Json<ClustersView> {
    Json(read(&s).snapshot())
}

async fn get_unassigned(State(s): State<Shared>) -> ApiResult<UnassignedView> {
    Ok(Json(UnassignedView {
        phrases: read(&s).unassigned()?,
    }))
}

async fn get_preview(
    State(s): State<Shared>,
    q: std::result::Result<Query<PreviewQuery>, QueryRejection>,
) -> ApiResult<PreviewView> {
    let Query(q) = q?;
    Ok(Json(read(&s).preview(&q.phrase)?))
}

async fn merge(
    State(s): State<Shared>,
    body: std::result::Result<Json<MergeBody>, JsonRejection>,
) -> ApiResult<ConceptChange> {
    let Json(b) = body?;
    let mut svc = write(&s);
    let log_entry = svc.apply(CurationAction::Merge { a: b.a, b: b.b })?;
    Ok(Json(ConceptChange {
        concept: svc.concept(b.a)?,
        log_entry,
    }))
}

async fn split(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: std::result::Result<Json<SplitBody>, JsonRejection>,
) -> ApiResult<SplitChange> {
    let id = ConceptId(parse_id(&id)?);
    let Json(b) = body?;
    let mut svc = write(&s);
    let log_entry = svc.apply(CurationAction::Split {
        id,
        members: b.members,
        nameplate: b.nameplate,
    })?;
    let created = ConceptId(svc.store.set.next_concept_id - 1);
    Ok(Json(SplitChange {
        source: svc.concept(id)?,
        created: svc.concept(created)?,
        log_entry,
    }))
}

async fn rename(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: std::result::Result<Json<NameplateBody>, JsonRejection>,
) -> ApiResult<ConceptChange> {
    let id = ConceptId(parse_id(&id)?);
    let Json(b) = body?;
    let mut svc = write(&s);
    let log_entry = svc.apply(CurationAction::Rename {
        id,
        nameplate: b.nameplate,
    })?;
    Ok(Json(ConceptChange {
        concept: svc.concept(id)?,
        log_entry,
    }))
}

async fn attach_gesture(
    State(s): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: std::result::Result<Json<GestureBody>, JsonRejection>,
) -> ApiResult<ConceptChange> {
    let id = ConceptId(parse_id(&id)?);
    let Json(b) = body?;
    let mut svc = write(&s);
    let log_entry = svc.apply(CurationAction::AttachGesture { id, gesture: b.gesture })?;
    Ok(Json(ConceptChange {
        concept: svc.concept(id)?,
        log_entry,
    }))
}

async fn add_rule(
    State(s): State<Shared>,
    body: std::result::Result<Json<RuleBody>, JsonRejection>,
) -> std::result::Result<(StatusCode, Json<RuleChange>), ApiError> {
    let Json(b) = body?;
    let mut svc = write(&s);
    let log_entry = svc.apply(CurationAction::AddRule {
        kind: b.kind,
        surface: b.surface,
        target: b.target,
        priority: b.priority,
        note: b.note,
    })?;
    let rule = svc.store.set.rules.last().cloned().expect("rule just added");
    Ok((StatusCode::CREATED, Json(RuleChange { rule, log_entry })))
}

async fn remove_rule(State(s): State<Shared>, UrlPath(id): UrlPath<String>) -> ApiResult<RuleChange> {
    let id = RuleId(parse_id(&id)?);
    let mut svc = write(&s);
    let rule = svc
        .store
        .set
        .rule(id)
        .cloned()
        .ok_or(ConceptError::UnknownRule(id))?;
    let log_entry = svc.apply(CurationAction::RemoveRule { id })?;
    Ok(Json(RuleChange { rule, log_entry }))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/clusters", get(get_clusters))
        .route("/unassigned", get(get_unassigned))
        .route("/preview", get(get_preview))
        .route("/concepts/merge", post(merge))
        .route("/concepts/{id}/split", post(split))
        .route("/concepts/{id}/nameplate", put(rename))
        .route("/concepts/{id}/gestures", post(attach_gesture))
        .route("/rules", post(add_rule))
        .route("/rules/{id}", delete(remove_rule))
        .fallback(not_found)
        .with_state(state)
}

/// Binds and serves until interrupted.
pub async fn serve(service: Service, addr: SocketAddr) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(Path::new(&addr.to_string()), e))?;
    info!("listening on http://{addr}");
    let app = router(Arc::new(RwLock::new(service)));
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io(Path::new(&addr.to_string()), e))
}
