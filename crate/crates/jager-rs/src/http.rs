//! HTTP surface of the record store.
//!
//! ```text
//! GET  /params      -> {vk_rs}
//! POST /contribute  {idx, ct1, ct2, gsig}          -> {status}
//! POST /retrieve    {carrier_id, idx, sigma_r}     -> {idx, records, sigma_env}
//! ```

use std::sync::Arc;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};

use jager_core::record::{Index, Submission};
use jager_core::wire::{self, ErrorResponse};
use jager_crypto::groupsig::GroupSignature;
use jager_crypto::pairing::BlsSignature;
use jager_crypto::wes::WesCiphertext;

use crate::{ContributionStatus, RecordStore, RsError};

pub fn router(rs: Arc<RecordStore>) -> Router {
    Router::new()
        .route("/params", get(params))
        .route("/contribute", post(contribute))
        .route("/retrieve", post(retrieve))
        .with_state(rs)
}

pub async fn serve(rs: Arc<RecordStore>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(rs)).await
}

struct ApiError(StatusCode, &'static str, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(ErrorResponse { error: self.2, code: self.1.to_string() })).into_response()
    }
}

impl From<RsError> for ApiError {
    fn from(e: RsError) -> Self {
        let (status, code) = match &e {
            RsError::BadAuthorization => (StatusCode::UNAUTHORIZED, "bad_authorization"),
            RsError::RateLimited { .. } => (StatusCode::TOO_MANY_REQUESTS, "rate_limited"),
            RsError::Storage(_) => (StatusCode::INTERNAL_SERVER_ERROR, "storage"),
        };
        ApiError(status, code, e.to_string())
    }
}

fn malformed(e: impl std::fmt::Display) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, "malformed", e.to_string())
}

async fn params(State(rs): State<Arc<RecordStore>>) -> Json<wire::RsParams> {
    Json(wire::RsParams { vk_rs: wire::to_b64(&rs.vk_rs().to_bytes()) })
}

async fn contribute(
    State(rs): State<Arc<RecordStore>>,
    Json(req): Json<wire::ContributeRequest>,
) -> Result<Json<wire::ContributeResponse>, ApiError> {
    let idx = Index::from_bytes(&wire::from_hex("idx", &req.idx).map_err(malformed)?)
        .map_err(malformed)?;
    let ct1 = WesCiphertext::from_bytes(&wire::from_b64("ct1", &req.ct1).map_err(malformed)?)
        .map_err(malformed)?;
    let ct2: [u8; 24] = wire::from_hex("ct2", &req.ct2)
        .map_err(malformed)?
        .try_into()
        .map_err(|_| malformed("ct2 must be 24 bytes"))?;
    let gsig = GroupSignature::from_bytes(&wire::from_b64("gsig", &req.gsig).map_err(malformed)?)
        .map_err(malformed)?;

    let status = rs.contribute(Submission { idx, ct1, ct2, gsig })?;
    let status = match status {
        ContributionStatus::Accepted => "accepted",
        ContributionStatus::Rejected => "rejected",
    };
    Ok(Json(wire::ContributeResponse { status: status.to_string() }))
}

async fn retrieve(
    State(rs): State<Arc<RecordStore>>,
    Json(req): Json<wire::RetrieveRequest>,
) -> Result<Json<wire::RetrieveResponse>, ApiError> {
    let idx = Index::from_bytes(&wire::from_hex("idx", &req.idx).map_err(malformed)?)
        .map_err(malformed)?;
    let sigma_r =
        BlsSignature::from_bytes(&wire::from_b64("sigma_r", &req.sigma_r).map_err(malformed)?)
            .map_err(malformed)?;

    let set = rs.retrieve(req.carrier_id, &idx, &sigma_r)?;
    Ok(Json(wire::RetrieveResponse {
        idx: wire::to_hex(set.idx.as_bytes()),
        records: set
            .records
            .iter()
            .map(|sr| wire::RetrievedRecordDto {
                idx: wire::to_hex(sr.record.idx.as_bytes()),
                ct1: wire::to_b64(&sr.record.ct1.to_bytes()),
                ct2: wire::to_hex(&sr.record.ct2),
                gsig: wire::to_b64(&sr.record.gsig.to_bytes()),
                sigma_rs: wire::to_b64(&sr.sigma_rs.to_bytes()),
            })
            .collect(),
        sigma_env: wire::to_b64(&set.envelope.to_bytes()),
    }))
}
