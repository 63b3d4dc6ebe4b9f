//! Read-only JSON API over one loaded dataset.
//!
//! All state is an immutable [`Analysis`] shared behind an `Arc`; handlers
//! only parse the query, call the matching payload builder and serialize.

use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use motion_insight_core::analysis::SeriesRequest;
use motion_insight_core::config::ConfigError;
use motion_insight_core::{Action, Analysis, Config, QueryError, Scope, Variable};
use serde::Serialize;
use serde_json::json;

/// Names the threshold-config file read at startup.
pub const CONFIG_ENV: &str = "MOTION_INSIGHT_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// Loads the config named by `MOTION_INSIGHT_CONFIG`, or `None` when unset.
pub fn config_from_env() -> Result<Option<Config>, ConfigError> {
    match std::env::var_os(CONFIG_ENV) {
        Some(p) if !p.is_empty() => Config::load(&PathBuf::from(p)).map(Some),
        _ => Ok(None),
    }
}

pub struct ApiError(QueryError);

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        ApiError(e)
    }
}

fn bad(msg: impl Into<String>) -> ApiError {
    ApiError(QueryError::BadRequest(msg.into()))
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0 {
            QueryError::NotFound(_) => StatusCode::NOT_FOUND,
            QueryError::BadRequest(_) => StatusCode::BAD_REQUEST,
        };
        let body = json!({ "error": { "code": self.0.code(), "message": self.0.to_string() } });
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Shared = State<Arc<Analysis>>;
type Params = Query<Vec<(String, String)>>;

/// Raw query pairs with per-endpoint key checking. Repeated keys are kept
/// in order.
struct QueryArgs(Vec<(String, String)>);

impl QueryArgs {
    fn new(pairs: Vec<(String, String)>, allowed: &[&str]) -> Result<Self, ApiError> {
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(bad(format!("unknown query parameter `{k}`")));
        }
        Ok(QueryArgs(pairs))
    }

    fn all(&self, key: &str) -> Vec<&str> {
        self.0
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    fn one(&self, key: &str) -> Result<Option<&str>, ApiError> {
        match self.all(key).as_slice() {
            [] => Ok(None),
            [v] => Ok(Some(v)),
            _ => Err(bad(format!("`{key}` given more than once"))),
        }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ApiError> {
        self.one(key)?
            .map(|v| {
                v.parse()
                    .map_err(|_| bad(format!("invalid value `{v}` for `{key}`")))
            })
            .transpose()
    }

    fn action(&self) -> Result<Option<Action>, ApiError> {
        self.one("action")?
            .map(|v| v.parse().map_err(|e: motion_insight_core::IngestError| bad(e.to_string())))
            .transpose()
    }

    fn vars(&self) -> Result<Vec<Variable>, ApiError> {
        let mut out = Vec::new();
        for v in self.all("vars") {
            for name in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                out.push(name.parse().map_err(|e: motion_insight_core::kinematics::UnknownVariable| bad(e.to_string()))?);
            }
        }
        Ok(out)
    }

    fn flag(&self, key: &str) -> Result<Option<bool>, ApiError> {
        match self.one(key)? {
            None => Ok(None),
            Some("true" | "1") => Ok(Some(true)),
            Some("false" | "0") => Ok(Some(false)),
            Some(v) => Err(bad(format!("invalid value `{v}` for `{key}`"))),
        }
    }
}

pub fn router(analysis: Arc<Analysis>) -> Router {
    Router::new()
        .route("/api/v1/meta", get(meta))
        .route("/api/v1/actions/summary", get(summary))
        .route("/api/v1/actions/timeline", get(timeline))
        .route("/api/v1/events", get(events))
        .route("/api/v1/events/{id}/series", get(series))
        .route("/api/v1/events/{id}/stats", get(stats))
        .route("/api/v1/events/{id}/frames", get(frames))
        .route("/api/v1/stats/global", get(global))
        .route("/api/v1/distributions", get(distributions))
        .route("/api/v1/freezes", get(freezes))
        .fallback(|| async { ApiError(QueryError::NotFound("no such endpoint".into())) })
        .with_state(analysis)
}

fn no_args(q: Vec<(String, String)>) -> Result<(), ApiError> {
    QueryArgs::new(q, &[]).map(|_| ())
}

fn ok<T: Serialize>(t: T) -> ApiResult<T> {
    Ok(Json(t))
}

async fn meta(State(a): Shared, Query(q): Params) -> ApiResult<impl Serialize> {
    no_args(q)?;
    ok(a.meta())
}

async fn summary(State(a): Shared, Query(q): Params) -> ApiResult<impl Serialize> {
    no_args(q)?;
    ok(a.action_summary())
}

async fn timeline(State(a): Shared, Query(q): Params) -> ApiResult<impl Serialize> {
    no_args(q)?;
    ok(a.timeline())
}

async fn global(State(a): Shared, Query(q): Params) -> ApiResult<impl Serialize> {
    no_args(q)?;
    ok(a.global_stats())
}

async fn events(State(a): Shared, Query(q): Params) -> ApiResult<impl Serialize> {
    let q = QueryArgs::new(q, &["action", "filter"])?;
    let filters = a.parse_filters(&q.all("filter"))?;
    ok(a.event_list(q.action()?, &filters))
}

async fn series(
    State(a): Shared,
    Path(id): Path<String>,
    Query(q): Params,
) -> ApiResult<impl Serialize> {
    let q = QueryArgs::new(q, &["vars", "simplify", "max_points", "scope", "filter"])?;
    let req = SeriesRequest {
        variables: q.vars()?,
        simplify: q.flag("simplify")?.unwrap_or(false),
        max_points: q.parsed("max_points")?,
        scope: q.parsed::<Scope>("scope")?,
        filters: a.parse_filters(&q.all("filter"))?,
    };
    ok(a.event_series(&id, &req)?)
}

async fn stats(State(a): Shared, Path(id): Path<String>, Query(q): Params) -> ApiResult<impl Serialize> {
    no_args(q)?;
    ok(a.event_stats(&id)?)
}

async fn frames(State(a): Shared, Path(id): Path<String>, Query(q): Params) -> ApiResult<impl Serialize> {
    let q = QueryArgs::new(q, &["from", "to", "stride"])?;
    ok(a.frames(&id, q.parsed("from")?, q.parsed("to")?, q.parsed("stride")?)?)
}

async fn distributions(State(a): Shared, Query(q): Params) -> ApiResult<impl Serialize> {
    let q = QueryArgs::new(q, &["vars", "action"])?;
    let mut vars = q.vars()?;
    if vars.is_empty() {
        vars = Variable::ALL.to_vec();
    }
    ok(a.distributions(&vars, q.action()?)?)
}

async fn freezes(State(a): Shared, Query(q): Params) -> ApiResult<impl Serialize> {
    let q = QueryArgs::new(q, &["event"])?;
    ok(a.freezes(q.one("event")?)?)
}

/// Binds `addr` and serves until `shutdown` resolves. Returns the bound
/// address through `on_bound` before accepting connections.
pub async fn serve(
    analysis: Arc<Analysis>,
    addr: SocketAddr,
    on_bound: impl FnOnce(SocketAddr),
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind { addr, source })?;
    let local = listener.local_addr()?;
    tracing::info!(%local, "listening");
    on_bound(local);
    axum::serve(listener, router(analysis))
        .with_graceful_shutdown(shutdown)
        .await?;
    tracing::info!("shut down");
    Ok(())
}
