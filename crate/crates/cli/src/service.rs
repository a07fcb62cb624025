//! HTTP service for the planner front end.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | GET | `/api/health` | | `{"status":"ok"}` |
//! | POST | `/api/scenario` | multipart: `scenario` JSON part plus one part per grid | `{"scenario_id"}` |
//! | POST | `/api/route` | `{scenario_id, overrides?, kernel?}` | FeatureCollection with report |
//! | POST | `/api/ksp` | `{scenario_id, k, theta, metric?, method?, penalty?, overrides?, kernel?}` | FeatureCollection |
//! | GET | `/api/raster/{id}.png` | `?layer=pylon\|cable` | grayscale PNG |
//!
//! Errors are `{code, message, field?}`. Scenarios live in memory only and
//! are lost on restart. Grid parts are matched to `grid_path` by file name,
//! then by part name, then by the last path component.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use pylon_core::{KernelChoice, ResistanceRaster, RouteGraph, Weight};
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};

use crate::commands::{ksp_document, route_document, KspArgs};
use crate::error::CliError;
use crate::output::{feature_collection, render};
use crate::scenario_file::{LayerGrids, LoadedScenario, Overrides, ScenarioFile};

/// Graphs kept per scenario before the cache is flushed.
const GRAPH_CACHE_CAPACITY: usize = 16;
const BODY_LIMIT: usize = 64 << 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>, field: Option<String>) -> Self {
        Self { status, code, message: message.into(), field }
    }

    fn unknown_scenario(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_scenario", format!("unknown scenario id `{id}`"), Some("scenario_id".into()))
    }

    /// Upload errors: every problem is the client's input.
    fn upload(e: CliError) -> Self {
        match e {
            CliError::GridNotFound { ref field, .. } => {
                Self::new(StatusCode::BAD_REQUEST, "layer_grid_not_found", e.to_string(), Some(field.clone()))
            }
            CliError::Internal(_) | CliError::Write { .. } => Self::internal(e),
            e => Self::new(StatusCode::BAD_REQUEST, "invalid_scenario", e.to_string(), e.field()),
        }
    }

    /// Compute errors: forbidden endpoints and infeasible problems are 422.
    fn compute(e: CliError) -> Self {
        match &e {
            CliError::Core(c) if c.is_infeasible() || matches!(c, pylon_core::Error::Forbidden { .. }) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "infeasible", e.to_string(), e.field())
            }
            _ if e.exit_code() == 2 => Self::new(StatusCode::BAD_REQUEST, "invalid_request", e.to_string(), e.field()),
            _ => Self::internal(e),
        }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string(), None)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::to_string(&self).expect("error bodies serialize");
        (self.status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Everything that determines a graph: raster weights, span and cone
/// parameters and the endpoints.
#[derive(Debug, Clone, PartialEq)]
struct GraphKey {
    weights: Vec<(Weight, Weight)>,
    w_c: f64,
    d_min: f64,
    d_max: f64,
    theta: f64,
    source: [usize; 2],
    target: [usize; 2],
}

impl GraphKey {
    fn new(l: &LoadedScenario) -> Self {
        let p = l.scenario.params;
        Self {
            weights: l.file.layers.iter().map(|s| (s.pylon_weight.0, s.cable_weight.0)).collect(),
            w_c: p.w_c,
            d_min: p.d_min,
            d_max: p.d_max,
            theta: p.theta_alpha_deg,
            source: l.file.source,
            target: l.file.target,
        }
    }
}

impl Eq for GraphKey {}

impl Hash for GraphKey {
    fn hash<H: Hasher>(&self, h: &mut H) {
        let w = |w: Weight| match w {
            Weight::Finite(v) => v.to_bits(),
            Weight::Infinite => u64::MAX,
        };
        for (p, c) in &self.weights {
            (w(*p), w(*c)).hash(h);
        }
        for v in [self.w_c, self.d_min, self.d_max, self.theta] {
            v.to_bits().hash(h);
        }
        (self.source, self.target).hash(h);
    }
}

/// An uploaded scenario with its graph cache.
pub struct ScenarioHandle {
    pub id: String,
    grids: LayerGrids,
    base: LoadedScenario,
    graphs: RwLock<HashMap<GraphKey, Arc<RouteGraph>>>,
}

impl ScenarioHandle {
    fn loaded(&self, overrides: Option<&Overrides>) -> Result<LoadedScenario, CliError> {
        match overrides {
            None => Ok(self.base.clone()),
            Some(o) => LoadedScenario::new(self.base.file.with_overrides(o)?, &self.grids),
        }
    }

    fn graph(&self, l: &LoadedScenario) -> Result<Arc<RouteGraph>, CliError> {
        let key = GraphKey::new(l);
        if let Some(g) = self.graphs.read().expect("graph cache lock").get(&key) {
            return Ok(g.clone());
        }
        let g = Arc::new(RouteGraph::build(&l.raster, &l.scenario)?);
        let mut cache = self.graphs.write().expect("graph cache lock");
        if cache.len() >= GRAPH_CACHE_CAPACITY {
            cache.clear();
        }
        cache.insert(key, g.clone());
        Ok(g)
    }

    /// Number of cached graphs.
    pub fn cached_graphs(&self) -> usize {
        self.graphs.read().expect("graph cache lock").len()
    }
}

#[derive(Clone, Default)]
pub struct AppState {
    next_id: Arc<AtomicU64>,
    handles: Arc<RwLock<HashMap<String, Arc<ScenarioHandle>>>>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores a scenario under a fresh id.
    pub fn insert(&self, base: LoadedScenario, grids: LayerGrids) -> String {
        let n = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
        let id = format!("sc{n:06}");
        let handle = ScenarioHandle { id: id.clone(), grids, base, graphs: RwLock::new(HashMap::new()) };
        self.handles.write().expect("scenario store lock").insert(id.clone(), Arc::new(handle));
        id
    }

    pub fn get(&self, id: &str) -> Option<Arc<ScenarioHandle>> {
        self.handles.read().expect("scenario store lock").get(id).cloned()
    }
}

pub fn router(state: AppState) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers(Any);
    Router::new()
        .route("/api/health", get(health))
        .route("/api/scenario", post(upload))
        .route("/api/route", post(route))
        .route("/api/ksp", post(ksp))
        .route("/api/raster/{file}", get(raster_png))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint", None) })
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .layer(cors)
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

async fn health() -> Response {
    ([(header::CONTENT_TYPE, "application/json")], "{\"status\":\"ok\"}").into_response()
}

fn json_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e.to_string(), None))
}

async fn upload(State(state): State<AppState>, mut parts: Multipart) -> ApiResult<Response> {
    let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, "invalid_upload", m, None);
    let mut scenario_text = None;
    let mut files: HashMap<String, String> = HashMap::new();
    while let Some(field) = parts.next_field().await.map_err(|e| bad(e.to_string()))? {
        let name = field.name().unwrap_or_default().to_string();
        let file_name = field.file_name().map(str::to_string);
        let text = field.text().await.map_err(|e| bad(e.to_string()))?;
        if name == "scenario" {
            scenario_text = Some(text);
            continue;
        }
        if let Some(f) = file_name {
            files.insert(f, text.clone());
        }
        files.entry(name).or_insert(text);
    }
    let text = scenario_text.ok_or_else(|| {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_upload", "missing `scenario` part", Some("scenario".into()))
    })?;
    let file = ScenarioFile::parse(&text).map_err(ApiError::upload)?;
    let grids = LayerGrids::load(&file, |p| {
        let last = std::path::Path::new(p).file_name().and_then(|s| s.to_str()).unwrap_or(p);
        Ok(files.get(p).or_else(|| files.get(last)).cloned())
    })
    .map_err(ApiError::upload)?;
    let loaded = LoadedScenario::new(file, &grids).map_err(ApiError::upload)?;
    let id = state.insert(loaded, grids);
    Ok(([(header::CONTENT_TYPE, "application/json")], serde_json::json!({ "scenario_id": id }).to_string()).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteRequest {
    scenario_id: String,
    #[serde(default)]
    overrides: Option<Overrides>,
    #[serde(default)]
    kernel: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KspRequest {
    scenario_id: String,
    k: usize,
    theta: f64,
    #[serde(default)]
    metric: Option<String>,
    #[serde(default)]
    method: Option<String>,
    #[serde(default)]
    penalty: Option<f64>,
    #[serde(default)]
    overrides: Option<Overrides>,
    #[serde(default)]
    kernel: Option<String>,
}

fn kernel(name: Option<&str>) -> ApiResult<KernelChoice> {
    match name {
        None => Ok(KernelChoice::Auto),
        Some(n) => KernelChoice::parse(n).ok_or_else(|| {
            ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", format!("unknown kernel `{n}`"), Some("kernel".into()))
        }),
    }
}

fn geojson(text: String, started: Instant) -> Response {
    let mut r = ([(header::CONTENT_TYPE, "application/geo+json")], text).into_response();
    let ms = format!("{:.3}", started.elapsed().as_secs_f64() * 1e3);
    if let Ok(v) = HeaderValue::from_str(&ms) {
        r.headers_mut().insert("x-compute-time-ms", v);
    }
    r
}

/// Runs `f` off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)?
}

async fn route(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: RouteRequest = json_body(&body)?;
    let handle = state.get(&req.scenario_id).ok_or_else(|| ApiError::unknown_scenario(&req.scenario_id))?;
    let kernel = kernel(req.kernel.as_deref())?;
    let started = Instant::now();
    let text = blocking(move || {
        let l = handle.loaded(req.overrides.as_ref()).and_then(|l| l.with_kernel(kernel)).map_err(ApiError::compute)?;
        let g = handle.graph(&l).map_err(ApiError::compute)?;
        let (paths, report) = route_document(&l, &g).map_err(ApiError::compute)?;
        Ok(render(&feature_collection(&paths, &report).map_err(ApiError::compute)?))
    })
    .await?;
    Ok(geojson(text, started))
}

async fn ksp(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: KspRequest = json_body(&body)?;
    let handle = state.get(&req.scenario_id).ok_or_else(|| ApiError::unknown_scenario(&req.scenario_id))?;
    let kernel = kernel(req.kernel.as_deref())?;
    let args = KspArgs { k: Some(req.k), metric: req.metric, theta: Some(req.theta), method: req.method, penalty: req.penalty };
    let spec = args.resolve(None).map_err(ApiError::compute)?;
    let started = Instant::now();
    let text = blocking(move || {
        let l = handle.loaded(req.overrides.as_ref()).and_then(|l| l.with_kernel(kernel)).map_err(ApiError::compute)?;
        let g = handle.graph(&l).map_err(ApiError::compute)?;
        let (paths, report) = ksp_document(&l, &g, &spec).map_err(ApiError::compute)?;
        Ok(render(&feature_collection(&paths, &report).map_err(ApiError::compute)?))
    })
    .await?;
    Ok(geojson(text, started))
}

#[derive(Debug, Default, Deserialize)]
struct RasterQuery {
    #[serde(default)]
    layer: Option<String>,
}

/// Which resistance grid a heatmap shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapLayer {
    Pylon,
    Cable,
}

/// Grayscale plus alpha PNG: the finite cost range maps to 0..255, a flat
/// raster renders as mid gray and forbidden cells are fully transparent.
pub fn heatmap_png(raster: &ResistanceRaster, layer: HeatmapLayer) -> Result<Vec<u8>, png::EncodingError> {
    let (costs, mask) = match layer {
        HeatmapLayer::Pylon => (raster.pylon_costs(), raster.pylon_mask()),
        HeatmapLayer::Cable => (raster.cable_costs(), raster.cable_mask()),
    };
    let allowed = || costs.iter().zip(mask).filter(|(_, f)| !**f).map(|(c, _)| *c);
    let lo = allowed().fold(f64::INFINITY, f64::min);
    let hi = allowed().fold(f64::NEG_INFINITY, f64::max);
    let mut data = Vec::with_capacity(costs.len() * 2);
    for (&c, &forbidden) in costs.iter().zip(mask) {
        if forbidden {
            data.extend([0, 0]);
        } else if hi > lo {
            data.extend([(255.0 * (c - lo) / (hi - lo)).round() as u8, 255]);
        } else {
            data.extend([128, 255]);
        }
    }
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, raster.cols() as u32, raster.rows() as u32);
    enc.set_color(png::ColorType::GrayscaleAlpha);
    enc.set_depth(png::BitDepth::Eight);
    let mut w = enc.write_header()?;
    w.write_image_data(&data)?;
    w.finish()?;
    Ok(out)
}

async fn raster_png(State(state): State<AppState>, Path(file): Path<String>, Query(q): Query<RasterQuery>) -> ApiResult<Response> {
    let id = file.strip_suffix(".png").ok_or_else(|| ApiError::unknown_scenario(&file))?;
    let handle = state.get(id).ok_or_else(|| ApiError::unknown_scenario(id))?;
    let layer = match q.layer.as_deref() {
        None | Some("pylon") => HeatmapLayer::Pylon,
        Some("cable") => HeatmapLayer::Cable,
        Some(other) => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "invalid_request",
                format!("unknown layer `{other}`, expected pylon or cable"),
                Some("layer".into()),
            ))
        }
    };
    let bytes = blocking(move || heatmap_png(&handle.base.raster, layer).map_err(ApiError::internal)).await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}
