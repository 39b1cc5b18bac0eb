//! Domain types and shared machinery for the Jager traceback system.
//!
//! * [`call`] — phone numbers, call details, epochs, and their canonical
//!   byte encodings.
//! * [`hop`] — the `(prev, cur, next)` carrier attestation and its 24-byte
//!   encoding.
//! * [`record`] — lookup indices, hop masking, and the record-store
//!   submission tuple.
//! * [`validate`] — the traceback validation algorithm: degree invariants,
//!   faulty sets, and call-path recovery.
//! * [`ratelimit`] — the rolling-window request limiter used by both
//!   services.
//! * [`wire`] — JSON request/response bodies for the HTTP interfaces.

pub mod call;
pub mod hop;
pub mod ratelimit;
pub mod record;
pub mod validate;
pub mod wire;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A carrier identifier. `0` and `u64::MAX` are reserved sentinels marking
/// the ends of a call path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CarrierId(pub u64);

impl CarrierId {
    /// Sentinel preceding the originating carrier.
    pub const ORIGIN: CarrierId = CarrierId(0);
    /// Sentinel following the terminating carrier.
    pub const TERM: CarrierId = CarrierId(u64::MAX);

    pub fn is_sentinel(&self) -> bool {
        *self == Self::ORIGIN || *self == Self::TERM
    }
}

impl std::fmt::Display for CarrierId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Self::ORIGIN => write!(f, "ORIGIN"),
            Self::TERM => write!(f, "TERM"),
            CarrierId(n) => write!(f, "P{n}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("phone number must be 10 digits (NPA-NXX-XXXX): {0:?}")]
    InvalidPhoneNumber(String),
    #[error("call details invalid: {0}")]
    InvalidCallDetails(&'static str),
    #[error("hop invalid: {0}")]
    InvalidHop(&'static str),
    #[error("invalid length: expected {expected} bytes, got {got}")]
    InvalidLength { expected: usize, got: usize },
    #[error("malformed field {field}: {reason}")]
    Malformed { field: &'static str, reason: String },
}
