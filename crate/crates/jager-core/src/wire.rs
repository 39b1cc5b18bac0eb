//! JSON bodies for the two HTTP services, plus the accountability report.
//!
//! Binary fields travel as base64 (group elements, ciphertexts, signatures)
//! or lowercase hex (indices, labels, hop masks). Error responses carry an
//! HTTP status plus `{error, code}`; the codes mirror the statuses: 401
//! unenrolled or bad request signature, 403 missing prior authorization,
//! 429 rate-limited, 400 malformed.

use serde::{Deserialize, Serialize};

use crate::call::PhoneNumber;
use crate::validate::ValidationReport;
use crate::CoreError;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;

pub fn to_b64(bytes: &[u8]) -> String {
    B64.encode(bytes)
}

pub fn from_b64(field: &'static str, s: &str) -> Result<Vec<u8>, CoreError> {
    B64.decode(s).map_err(|e| CoreError::Malformed { field, reason: e.to_string() })
}

pub fn to_hex(bytes: &[u8]) -> String {
    hex::encode(bytes)
}

pub fn from_hex(field: &'static str, s: &str) -> Result<Vec<u8>, CoreError> {
    hex::decode(s).map_err(|e| CoreError::Malformed { field, reason: e.to_string() })
}

// ---- Traceback authority endpoints ----

/// `POST /join`
#[derive(Debug, Serialize, Deserialize)]
pub struct JoinRequest {
    pub carrier_id: u64,
    /// The carrier's announced request-signing key (base64 G1 point).
    pub vk: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JoinResponse {
    /// Issued group credential (base64).
    pub member_key: String,
}

/// `GET /params` — the constants the authority announces at setup.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaParams {
    pub vk_t: String,
    pub vk_r: String,
    pub pk_oprf: String,
    pub gpk: String,
}

/// `POST /label`
#[derive(Debug, Serialize, Deserialize)]
pub struct LabelRequest {
    pub carrier_id: u64,
    /// Blinded OPRF input (base64, 48-byte G1 point).
    pub blinded: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LabelResponse {
    pub evaluated: String,
}

/// `POST /authorize`
#[derive(Debug, Serialize, Deserialize)]
pub struct AuthorizeRequest {
    pub carrier_id: u64,
    /// Lookup index (hex, 32 bytes).
    pub idx: String,
    /// Carrier signature over the request (base64); verified against the vk
    /// announced at join.
    pub sig: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AuthorizeResponse {
    pub sigma_r: String,
}

/// `POST /decrypt-auth`
#[derive(Debug, Serialize, Deserialize)]
pub struct DecryptAuthRequest {
    pub carrier_id: u64,
    /// Call label (hex, 32 bytes).
    pub label: String,
    pub sig: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DecryptAuthResponse {
    pub sigma_t: String,
}

/// One record under review in `POST /open`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpenRequestEntry {
    pub src: PhoneNumber,
    pub dst: PhoneNumber,
    pub epoch: u64,
    /// Claimed call label (hex).
    pub label: String,
    /// Witness-encryption ciphertext (base64).
    pub ct1: String,
    /// Masked hop (hex, 24 bytes).
    pub ct2: String,
    /// Contributor's group signature (base64).
    pub gsig: String,
    /// The hop the tracer decrypted from this record.
    pub hop: HopClaim,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HopClaim {
    pub prev: u64,
    pub cur: u64,
    pub next: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OpenRequest {
    pub entries: Vec<OpenRequestEntry>,
}

/// Per-entry outcome of accountability review.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    /// Label, ciphertexts, and claimed hop all check out.
    Ok,
    /// The claimed label is not the PRF of the claimed call details.
    LabelMismatch,
    /// The ciphertexts do not decrypt to the claimed hop.
    HopMismatch,
    /// The group signature does not verify over the record.
    SignatureInvalid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryFinding {
    pub index: usize,
    pub status: EntryStatus,
    /// The deanonymized contributor, when the entry was implicated and its
    /// signature could be opened.
    pub signer: Option<u64>,
}

/// Response of `POST /open`: per-entry findings, the validation report over
/// the verified hops, and the deanonymized faulty contributors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccountabilityReport {
    pub entries: Vec<EntryFinding>,
    pub validation: ValidationReport,
    pub faulty_carriers: Vec<u64>,
}

// ---- Record store endpoints ----

/// `GET /params`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RsParams {
    pub vk_rs: String,
}

/// `POST /contribute`
#[derive(Debug, Serialize, Deserialize)]
pub struct ContributeRequest {
    pub idx: String,
    pub ct1: String,
    pub ct2: String,
    pub gsig: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ContributeResponse {
    /// `accepted` or `rejected`.
    pub status: String,
}

/// `POST /retrieve`
#[derive(Debug, Serialize, Deserialize)]
pub struct RetrieveRequest {
    pub carrier_id: u64,
    pub idx: String,
    pub sigma_r: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetrievedRecordDto {
    pub idx: String,
    pub ct1: String,
    pub ct2: String,
    /// The contributor's anonymous group signature (base64), returned so a
    /// malformed record can later be opened by the authority.
    pub gsig: String,
    /// Store signature over `ct1 || ct2 || idx` (base64).
    pub sigma_rs: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RetrieveResponse {
    pub idx: String,
    pub records: Vec<RetrievedRecordDto>,
    /// Store signature over `idx || record-count`, so empty result sets are
    /// authenticated too.
    pub sigma_env: String,
}

/// Error body used by both services.
#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
    pub code: String,
}

/// Message bytes covered by the envelope signature on a retrieve response.
pub fn envelope_message(idx: &[u8], count: u64) -> Vec<u8> {
    let mut msg = Vec::with_capacity(idx.len() + 8);
    msg.extend_from_slice(idx);
    msg.extend_from_slice(&count.to_be_bytes());
    msg
}

/// Message bytes a carrier signs to authenticate a trace-path request.
pub fn request_auth_message(kind: &str, carrier_id: u64, payload: &[u8]) -> Vec<u8> {
    let mut msg = Vec::with_capacity(kind.len() + 8 + payload.len());
    msg.extend_from_slice(kind.as_bytes());
    msg.extend_from_slice(&carrier_id.to_be_bytes());
    msg.extend_from_slice(payload);
    msg
}
