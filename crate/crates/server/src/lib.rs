//! HTTP/JSON service over `missq-core`.
//!
//! Datasets are registered by upload or server-side path. Each registration
//! (and each reload) starts one background analysis; analysis endpoints
//! answer `202 {"status": "pending"}` until it finishes, or wait for it when
//! called with `?wait=true`.
//!
//! | method | path | body / query | result |
//! |---|---|---|---|
//! | GET | `/api/health` | | `{"status": "ok"}` |
//! | GET | `/api/datasets` | | dataset infos |
//! | POST | `/api/datasets` | [`LoadRequest`] | dataset info, 201 |
//! | GET | `/api/datasets/{id}` | | dataset info |
//! | PUT | `/api/datasets/{id}` | [`LoadRequest`] | dataset info, next version |
//! | DELETE | `/api/datasets/{id}` | | 204 |
//! | GET | `/api/datasets/{id}/items` | | cell values with missing flags |
//! | GET | `/api/datasets/{id}/profile` | `wait` | missingness profile |
//! | GET | `/api/datasets/{id}/jm` | `wait` | joint matrices |
//! | GET | `/api/datasets/{id}/cm` | `wait`, `aggregate` | conditional matrices |
//! | GET | `/api/datasets/{id}/ordering` | `metric`, `ascending`, `wait` | variable ordering |
//! | GET | `/api/datasets/{id}/select` | `predicate` or `filter`, `top`, `wait` | selected variables |
//! | GET | `/api/datasets/{id}/edges` | `filter`, `aggregate`, `wait` | node/edge tables |
//! | GET | `/api/datasets/{id}/conditional/{variable}` | `wait` | glyph payload per variable |
//! | POST | `/api/datasets/{id}/generate` | [`GenerateRequest`] | new dataset info with manifest, 201 |
//! | GET | `/api/datasets/{id}/manifest` | | generator manifest |
//!
//! Errors are `{"error": {"kind", "message"}}` with a 4xx status.

mod error;
pub mod missig;
mod state;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use missq_core::dataset::Cell;
use missq_core::{
    csv_io, export_network, generate, order_by_pairwise, order_by_univariate, select_by_edges, threshold_select,
    Aggregation, Analysis, DatasetSummary, EdgeFilter, GenerationMode, GroundTruthManifest, IncompleteDataset,
    IngestConfig, Metric, MissingnessSpec, Predicate, SelectionSource, VariableKind,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

pub use error::ApiError;
pub use state::{AppState, ComputeStatus, DatasetEntry, StatusLabel};

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind: SocketAddr,
    /// Directory with the built UI bundle, served at `/`.
    pub ui_dir: Option<PathBuf>,
}

pub fn router(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/api/datasets", get(list_datasets).post(load_dataset))
        .route(
            "/api/datasets/{id}",
            get(dataset_info).put(reload_dataset).delete(delete_dataset),
        )
        .route("/api/datasets/{id}/items", get(items))
        .route("/api/datasets/{id}/profile", get(profile))
        .route("/api/datasets/{id}/jm", get(jm))
        .route("/api/datasets/{id}/cm", get(cm))
        .route("/api/datasets/{id}/ordering", get(ordering))
        .route("/api/datasets/{id}/select", get(select))
        .route("/api/datasets/{id}/edges", get(edges))
        .route("/api/datasets/{id}/conditional/{variable}", get(conditional))
        .route("/api/datasets/{id}/generate", axum::routing::post(run_generator))
        .route("/api/datasets/{id}/manifest", get(manifest))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds and serves until the process is stopped. `preload` datasets are
/// registered before the listener opens.
pub async fn serve(config: ServerConfig, preload: Vec<IncompleteDataset>) -> std::io::Result<()> {
    let state = Arc::new(AppState::new());
    for d in preload {
        state
            .insert(None, d, None)
            .map_err(|e| std::io::Error::other(e.to_string()))?;
    }
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    axum::serve(listener, router(state, config.ui_dir)).await
}

/// Dataset source for registration and reload: inline CSV text or a path on
/// the server.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LoadRequest {
    /// Requested id; a fresh one is assigned when absent.
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub config: IngestConfig,
}

impl LoadRequest {
    fn read(&self) -> ApiResult<IncompleteDataset> {
        match (&self.csv, &self.path) {
            (Some(text), None) => {
                let name = self.name.clone().unwrap_or_else(|| "upload".to_string());
                Ok(csv_io::read_csv(text.as_bytes(), name, &self.config)?)
            }
            (None, Some(path)) => {
                let d = csv_io::load_csv(path, &self.config)?;
                Ok(match &self.name {
                    Some(n) => d.with_name(n.clone()),
                    None => d,
                })
            }
            _ => Err(ApiError::BadRequest("give exactly one of `csv` or `path`".into())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetInfo {
    pub id: String,
    pub version: u64,
    pub status: StatusLabel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub summary: DatasetSummary,
    pub has_manifest: bool,
}

impl From<&DatasetEntry> for DatasetInfo {
    fn from(e: &DatasetEntry) -> Self {
        let status = e.status();
        DatasetInfo {
            id: e.id.clone(),
            version: e.version,
            status: status.label(),
            error: match status {
                ComputeStatus::Failed(msg) => Some(msg),
                _ => None,
            },
            summary: e.dataset.summary(),
            has_manifest: e.manifest.is_some(),
        }
    }
}

async fn list_datasets(State(state): State<Arc<AppState>>) -> Json<Vec<DatasetInfo>> {
    Json(state.list().iter().map(|e| DatasetInfo::from(e.as_ref())).collect())
}

async fn load_dataset(
    State(state): State<Arc<AppState>>,
    Json(req): Json<LoadRequest>,
) -> ApiResult<(StatusCode, Json<DatasetInfo>)> {
    let d = req.read()?;
    let entry = state.insert(req.id.clone(), d, None)?;
    Ok((StatusCode::CREATED, Json(DatasetInfo::from(entry.as_ref()))))
}

async fn dataset_info(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<DatasetInfo>> {
    Ok(Json(DatasetInfo::from(state.get(&id)?.as_ref())))
}

async fn reload_dataset(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<LoadRequest>,
) -> ApiResult<Json<DatasetInfo>> {
    state.get(&id)?;
    let d = req.read()?;
    let entry = state.reload(&id, d)?;
    Ok(Json(DatasetInfo::from(entry.as_ref())))
}

async fn delete_dataset(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    state.remove(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Serialize)]
struct ItemColumn {
    name: String,
    kind: VariableKind,
    /// Recorded value, `null` where missing.
    values: Vec<serde_json::Value>,
    missing: Vec<bool>,
}

async fn items(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let entry = state.get(&id)?;
    let d = &entry.dataset;
    let columns: Vec<ItemColumn> = d
        .variables()
        .iter()
        .map(|v| {
            let (values, missing) = (0..d.item_count())
                .map(|i| match v.cell(i) {
                    Cell::Number(x) => (json!(x), false),
                    Cell::Label(s) => (json!(s), false),
                    Cell::Missing => (serde_json::Value::Null, true),
                })
                .unzip();
            ItemColumn {
                name: v.name().to_string(),
                kind: v.kind(),
                values,
                missing,
            }
        })
        .collect();
    Ok(Json(json!({
        "id": entry.id,
        "version": entry.version,
        "item_count": d.item_count(),
        "columns": columns,
    }))
    .into_response())
}

#[derive(Debug, Default, Deserialize)]
struct WaitQuery {
    #[serde(default)]
    wait: bool,
}

/// The finished analysis, or the response to send instead.
async fn analysis(entry: &DatasetEntry, wait: bool) -> Result<Arc<Analysis>, Response> {
    let status = if wait { entry.wait().await } else { entry.status() };
    match status {
        ComputeStatus::Ready(a) => Ok(a),
        ComputeStatus::Pending => Err((
            StatusCode::ACCEPTED,
            Json(json!({ "status": "pending", "id": entry.id, "version": entry.version })),
        )
            .into_response()),
        ComputeStatus::Failed(msg) => Err(ApiError::AnalysisFailed(msg).into_response()),
    }
}

macro_rules! ready {
    ($entry:expr, $wait:expr) => {
        match analysis(&$entry, $wait).await {
            Ok(a) => a,
            Err(resp) => return Ok(resp),
        }
    };
}

async fn profile(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<WaitQuery>,
) -> ApiResult<Response> {
    let entry = state.get(&id)?;
    let a = ready!(entry, q.wait);
    Ok(Json(&a.profile).into_response())
}

async fn jm(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<WaitQuery>,
) -> ApiResult<Response> {
    let entry = state.get(&id)?;
    let a = ready!(entry, q.wait);
    Ok(Json(&a.joint).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct CmQuery {
    #[serde(default)]
    wait: bool,
    aggregate: Option<String>,
}

fn parse<T: std::str::FromStr<Err = missq_core::Error>>(s: Option<&str>) -> ApiResult<Option<T>> {
    s.map(str::parse).transpose().map_err(ApiError::from)
}

async fn cm(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<CmQuery>,
) -> ApiResult<Response> {
    let entry = state.get(&id)?;
    let aggregate: Option<Aggregation> = parse(q.aggregate.as_deref())?;
    let a = ready!(entry, q.wait);
    Ok(match aggregate {
        None => Json(&a.conditional).into_response(),
        Some(agg) => Json(json!({
            "density_difference": a.conditional.density_difference.symmetrized(agg),
            "entropy": a.conditional.entropy.symmetrized(agg),
        }))
        .into_response(),
    })
}

#[derive(Debug, Default, Deserialize)]
struct OrderingQuery {
    #[serde(default)]
    wait: bool,
    metric: Option<String>,
    /// Univariate ordering only; descending by default.
    #[serde(default)]
    ascending: bool,
}

async fn ordering(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<OrderingQuery>,
) -> ApiResult<Response> {
    let entry = state.get(&id)?;
    let metric: Metric = parse(q.metric.as_deref())?.unwrap_or(Metric::QAm);
    let a = ready!(entry, q.wait);
    let order = if metric == Metric::QAm {
        order_by_univariate(&a.profile, !q.ascending)
    } else {
        let m = a.matrices();
        order_by_pairwise(m.require(metric)?)?
    };
    Ok(Json(order).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct SelectQuery {
    #[serde(default)]
    wait: bool,
    predicate: Option<String>,
    filter: Option<String>,
    aggregate: Option<String>,
    top: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Selection {
    indices: Vec<usize>,
    variables: Vec<String>,
}

async fn select(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<SelectQuery>,
) -> ApiResult<Response> {
    let entry = state.get(&id)?;
    let predicate: Option<Predicate> = parse(q.predicate.as_deref())?;
    let filter: Option<EdgeFilter> = parse(q.filter.as_deref())?;
    let aggregate: Option<Aggregation> = parse(q.aggregate.as_deref())?;
    let a = ready!(entry, q.wait);
    let indices = match (predicate, filter) {
        (Some(_), Some(_)) => return Err(ApiError::BadRequest("give `predicate` or `filter`, not both".into())),
        (None, Some(f)) => select_by_edges(&a.matrices(), &f.with_aggregation(aggregate.unwrap_or_default()), q.top)?,
        (p, None) => {
            let p = match p {
                Some(p) => p,
                None => "q_am>=0".parse()?,
            };
            let matrices = a.matrices();
            let source = if p.metric == Metric::QAm {
                SelectionSource::Profile(&a.profile)
            } else {
                SelectionSource::Matrix(matrices.require(p.metric)?)
            };
            threshold_select(source, &p, q.top)?
        }
    };
    let names = entry.dataset.variable_names();
    let variables = indices.iter().map(|&i| names[i].clone()).collect();
    Ok(Json(Selection { indices, variables }).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct EdgesQuery {
    #[serde(default)]
    wait: bool,
    filter: Option<String>,
    aggregate: Option<String>,
}

async fn edges(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<EdgesQuery>,
) -> ApiResult<Response> {
    let entry = state.get(&id)?;
    let filter: EdgeFilter = parse(q.filter.as_deref())?.unwrap_or_default();
    let aggregate: Option<Aggregation> = parse(q.aggregate.as_deref())?;
    let filter = filter.with_aggregation(aggregate.unwrap_or_default());
    let a = ready!(entry, q.wait);
    Ok(Json(export_network(&entry.dataset, &a.matrices(), &filter)?).into_response())
}

fn resolve_variable(d: &IncompleteDataset, v: &str) -> ApiResult<usize> {
    if let Some(j) = d.index_of(v) {
        return Ok(j);
    }
    match v.parse::<usize>() {
        Ok(j) => Ok(d.variable(j).map(|_| j)?),
        Err(_) => Err(missq_core::Error::UnknownVariable(v.to_string()).into()),
    }
}

async fn conditional(
    State(state): State<Arc<AppState>>,
    Path((id, variable)): Path<(String, String)>,
    Query(q): Query<WaitQuery>,
) -> ApiResult<Response> {
    let entry = state.get(&id)?;
    let j = resolve_variable(&entry.dataset, &variable)?;
    let a = ready!(entry, q.wait);
    Ok(Json(missig::payload(&entry.dataset, &a, j)?).into_response())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub spec: MissingnessSpec,
    /// Overrides `spec.mode`.
    #[serde(default)]
    pub mode: Option<GenerationMode>,
    /// Overrides `spec.seed`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Id for the generated dataset.
    #[serde(default)]
    pub id: Option<String>,
}

#[derive(Debug, Serialize)]
struct Generated {
    #[serde(flatten)]
    info: DatasetInfo,
    manifest: GroundTruthManifest,
}

async fn run_generator(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<GenerateRequest>,
) -> ApiResult<(StatusCode, Json<Generated>)> {
    let source = state.get(&id)?;
    let mut spec = req.spec;
    if let Some(mode) = req.mode {
        spec.mode = Some(mode);
    }
    if let Some(seed) = req.seed {
        spec.seed = seed;
    }
    let d = source.dataset.clone();
    let (out, manifest) = tokio::task::spawn_blocking(move || generate(&d, &spec))
        .await
        .map_err(|e| ApiError::AnalysisFailed(e.to_string()))??;
    let entry = state.insert(req.id, out, Some(manifest.clone()))?;
    Ok((
        StatusCode::CREATED,
        Json(Generated {
            info: DatasetInfo::from(entry.as_ref()),
            manifest,
        }),
    ))
}

async fn manifest(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<GroundTruthManifest>> {
    let entry = state.get(&id)?;
    entry.manifest.clone().map(Json).ok_or(ApiError::NoManifest { id })
}
