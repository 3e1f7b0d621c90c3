//! HTTP/JSON surface under `/v1`.

use std::collections::HashMap;

use axum::extract::{Query, State};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use crate::error::ServiceError;
use crate::session::{SelectionRequest, SharedSession};

/// Parsed form of a query: threshold, segment selection and axis order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueryEnvelope {
    pub request_id: Option<String>,
    pub t: Option<f64>,
    pub segments: Option<Vec<usize>>,
    pub order: Vec<String>,
    pub x: Option<String>,
    pub y: Option<String>,
}

impl QueryEnvelope {
    pub fn parse(params: &HashMap<String, String>) -> Result<Self, ServiceError> {
        let list = |key: &str| -> Vec<String> {
            params
                .get(key)
                .map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
                .unwrap_or_default()
        };
        let t = match params.get("t") {
            Some(raw) => Some(
                raw.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|t| t.is_finite())
                    .ok_or_else(|| ServiceError::Argument(format!("t is not a number: `{raw}`")))?,
            ),
            None => None,
        };
        let segments = match params.get("segments") {
            Some(_) => Some(
                list("segments")
                    .iter()
                    .map(|s| {
                        s.parse::<usize>()
                            .map_err(|_| ServiceError::Argument(format!("segment id is not an integer: `{s}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        Ok(QueryEnvelope {
            request_id: params.get("request_id").cloned(),
            t,
            segments: segments.filter(|s| !s.is_empty()),
            order: list("order"),
            x: params.get("x").cloned(),
            y: params.get("y").cloned(),
        })
    }

    fn threshold(&self, state: &SharedSession) -> f64 {
        self.t.unwrap_or(state.cubes.t_base)
    }
}

pub struct ApiError(pub ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

#[derive(Serialize)]
struct ErrorEnvelope {
    error: crate::error::ErrorBody,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            ServiceError::Argument(_) | ServiceError::Input(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Rebuild(_) => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(ErrorEnvelope { error: self.0.body() })).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

fn reply<T: Serialize>(envelope: &QueryEnvelope, body: T) -> Response {
    let mut resp = Json(body).into_response();
    if let Some(id) = envelope.request_id.as_deref().and_then(|id| HeaderValue::from_str(id).ok()) {
        resp.headers_mut().insert("x-request-id", id);
    }
    resp
}

async fn meta(State(s): State<SharedSession>) -> Json<crate::session::Meta> {
    Json(s.meta())
}

async fn persistence_curve(State(s): State<SharedSession>) -> Json<crate::session::PersistencePayload> {
    Json(s.persistence())
}

async fn segments(State(s): State<SharedSession>, Query(params): Query<HashMap<String, String>>) -> ApiResult {
    let q = QueryEnvelope::parse(&params)?;
    Ok(reply(&q, s.segments(q.threshold(&s))?))
}

async fn spine(State(s): State<SharedSession>, Query(params): Query<HashMap<String, String>>) -> ApiResult {
    let q = QueryEnvelope::parse(&params)?;
    Ok(reply(&q, s.spine(q.threshold(&s))?))
}

async fn hist2d(State(s): State<SharedSession>, Query(params): Query<HashMap<String, String>>) -> ApiResult {
    let q = QueryEnvelope::parse(&params)?;
    let (x, y) = match (&q.x, &q.y) {
        (Some(x), Some(y)) => (x.clone(), y.clone()),
        _ => return Err(ServiceError::Argument("hist2d needs x and y".into()).into()),
    };
    Ok(reply(&q, s.hist2d(q.threshold(&s), q.segments.as_deref(), &x, &y)?))
}

async fn pcp(State(s): State<SharedSession>, Query(params): Query<HashMap<String, String>>) -> ApiResult {
    let q = QueryEnvelope::parse(&params)?;
    Ok(reply(&q, s.pcp(q.threshold(&s), q.segments.as_deref(), &q.order)?))
}

async fn selection(State(s): State<SharedSession>, headers: HeaderMap, body: axum::body::Bytes) -> ApiResult {
    let request: SelectionRequest = serde_json::from_slice(&body)
        .map_err(|e| ServiceError::Argument(format!("invalid selection body: {e}")))?;
    let session = s.clone();
    let (payload, info) = tokio::task::spawn_blocking(move || session.selection(&request))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
    let mut resp = Json(payload).into_response();
    let h = resp.headers_mut();
    h.insert("x-scan-ms", HeaderValue::from_str(&format!("{:.3}", info.millis)).unwrap());
    h.insert("x-cache", HeaderValue::from_static(if info.cached { "hit" } else { "miss" }));
    if let Some(id) = headers.get("x-request-id") {
        h.insert("x-request-id", id.clone());
    }
    Ok(resp)
}

pub fn router(session: SharedSession) -> Router {
    Router::new()
        .route("/v1/meta", get(meta))
        .route("/v1/persistence-curve", get(persistence_curve))
        .route("/v1/segments", get(segments))
        .route("/v1/spine", get(spine))
        .route("/v1/hist2d", get(hist2d))
        .route("/v1/pcp", get(pcp))
        .route("/v1/selection", post(selection))
        .with_state(session)
}

/// Serves until the process is stopped.
pub async fn serve(session: SharedSession, addr: std::net::SocketAddr) -> Result<(), ServiceError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| ServiceError::Argument(format!("cannot bind {addr}: {e}")))?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(session))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))
}
