//! HTTP surface of the traceback authority.
//!
//! ```text
//! GET  /params        -> announced public constants
//! POST /join          {carrier_id, vk}            -> {member_key}
//! POST /label         {carrier_id, blinded}       -> {evaluated}
//! POST /authorize     {carrier_id, idx, sig}      -> {sigma_r}
//! POST /decrypt-auth  {carrier_id, label, sig}    -> {sigma_t}
//! POST /open          {entries: [...]}            -> accountability report
//! ```
//!
//! Statuses: 401 unenrolled or bad request signature, 403 missing prior
//! authorization, 429 rate-limited, 400 malformed.

use std::sync::Arc;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};

use jager_core::call::Epoch;
use jager_core::record::Index;
use jager_core::wire::{self, ErrorResponse};
use jager_crypto::groupsig::GroupSignature;
use jager_crypto::oprf::CallLabel;
use jager_crypto::pairing::{BlsSignature, G1Element};
use jager_crypto::wes::WesCiphertext;

use crate::{OpenEntry, Ta, TaError};

pub fn router(ta: Arc<Ta>) -> Router {
    Router::new()
        .route("/params", get(params))
        .route("/join", post(join))
        .route("/label", post(label))
        .route("/authorize", post(authorize))
        .route("/decrypt-auth", post(decrypt_auth))
        .route("/open", post(open))
        .with_state(ta)
}

/// Serve until the listener closes. Binds are the caller's responsibility so
/// tests can use an ephemeral port.
pub async fn serve(ta: Arc<Ta>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(ta)).await
}

struct ApiError(StatusCode, &'static str, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(ErrorResponse { error: self.2, code: self.1.to_string() });
        (self.0, body).into_response()
    }
}

impl From<TaError> for ApiError {
    fn from(e: TaError) -> Self {
        let (status, code) = match &e {
            TaError::NotEnrolled(_) => (StatusCode::UNAUTHORIZED, "unenrolled"),
            TaError::BadRequestSignature(_) => (StatusCode::UNAUTHORIZED, "bad_signature"),
            TaError::RateLimited { .. } => (StatusCode::TOO_MANY_REQUESTS, "rate_limited"),
            TaError::NotAuthorized => (StatusCode::FORBIDDEN, "not_authorized"),
            TaError::Crypto(jager_crypto::CryptoError::DuplicateMember(_)) => {
                (StatusCode::BAD_REQUEST, "duplicate_member")
            }
            TaError::Crypto(_) => (StatusCode::BAD_REQUEST, "malformed"),
        };
        ApiError(status, code, e.to_string())
    }
}

fn malformed(e: impl std::fmt::Display) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, "malformed", e.to_string())
}

async fn params(State(ta): State<Arc<Ta>>) -> Json<wire::TaParams> {
    let p = ta.params();
    Json(wire::TaParams {
        vk_t: wire::to_b64(&p.vk_t.to_bytes()),
        vk_r: wire::to_b64(&p.vk_r.to_bytes()),
        pk_oprf: wire::to_b64(&p.pk_oprf.to_bytes()),
        gpk: wire::to_b64(&p.gpk.to_bytes()),
    })
}

async fn join(
    State(ta): State<Arc<Ta>>,
    Json(req): Json<wire::JoinRequest>,
) -> Result<Json<wire::JoinResponse>, ApiError> {
    let vk = G1Element::from_bytes(&wire::from_b64("vk", &req.vk).map_err(malformed)?)
        .map_err(malformed)?;
    let mk = ta.handle_join(req.carrier_id, vk, &mut rand::thread_rng())?;
    Ok(Json(wire::JoinResponse { member_key: wire::to_b64(&mk.to_bytes()) }))
}

async fn label(
    State(ta): State<Arc<Ta>>,
    Json(req): Json<wire::LabelRequest>,
) -> Result<Json<wire::LabelResponse>, ApiError> {
    let blinded =
        G1Element::from_bytes(&wire::from_b64("blinded", &req.blinded).map_err(malformed)?)
            .map_err(malformed)?;
    let evaluated = ta.handle_label_request(req.carrier_id, &blinded)?;
    Ok(Json(wire::LabelResponse { evaluated: wire::to_b64(&evaluated.to_bytes()) }))
}

async fn authorize(
    State(ta): State<Arc<Ta>>,
    Json(req): Json<wire::AuthorizeRequest>,
) -> Result<Json<wire::AuthorizeResponse>, ApiError> {
    let idx = Index::from_bytes(&wire::from_hex("idx", &req.idx).map_err(malformed)?)
        .map_err(malformed)?;
    let sig = BlsSignature::from_bytes(&wire::from_b64("sig", &req.sig).map_err(malformed)?)
        .map_err(malformed)?;
    let sigma_r = ta.handle_trace_authorization(req.carrier_id, &idx, &sig)?;
    Ok(Json(wire::AuthorizeResponse { sigma_r: wire::to_b64(&sigma_r.to_bytes()) }))
}

async fn decrypt_auth(
    State(ta): State<Arc<Ta>>,
    Json(req): Json<wire::DecryptAuthRequest>,
) -> Result<Json<wire::DecryptAuthResponse>, ApiError> {
    let label = CallLabel::from_bytes(&wire::from_hex("label", &req.label).map_err(malformed)?)
        .map_err(malformed)?;
    let sig = BlsSignature::from_bytes(&wire::from_b64("sig", &req.sig).map_err(malformed)?)
        .map_err(malformed)?;
    let sigma_t = ta.handle_decrypt_authorization(req.carrier_id, &label, &sig)?;
    Ok(Json(wire::DecryptAuthResponse { sigma_t: wire::to_b64(&sigma_t.to_bytes()) }))
}

async fn open(
    State(ta): State<Arc<Ta>>,
    Json(req): Json<wire::OpenRequest>,
) -> Result<Json<wire::AccountabilityReport>, ApiError> {
    let mut entries = Vec::with_capacity(req.entries.len());
    for e in &req.entries {
        let ct2_bytes = wire::from_hex("ct2", &e.ct2).map_err(malformed)?;
        let ct2: [u8; 24] = ct2_bytes
            .try_into()
            .map_err(|_| malformed("ct2 must be 24 bytes"))?;
        entries.push(OpenEntry {
            src: e.src,
            dst: e.dst,
            epoch: Epoch(e.epoch),
            label: CallLabel::from_bytes(&wire::from_hex("label", &e.label).map_err(malformed)?)
                .map_err(malformed)?,
            ct1: WesCiphertext::from_bytes(&wire::from_b64("ct1", &e.ct1).map_err(malformed)?)
                .map_err(malformed)?,
            ct2,
            gsig: GroupSignature::from_bytes(&wire::from_b64("gsig", &e.gsig).map_err(malformed)?)
                .map_err(malformed)?,
            claimed_hop: (e.hop.prev, e.hop.cur, e.hop.next),
        });
    }
    Ok(Json(ta.handle_open_request(&entries)))
}
