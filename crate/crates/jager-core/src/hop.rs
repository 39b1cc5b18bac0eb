//! The hop attestation `(P_{i-1}, P_i, P_{i+1})`.

use serde::{Deserialize, Serialize};

use crate::{CarrierId, CoreError};

/// Encoded hop width: three 8-byte big-endian carrier ids.
pub const HOP_LEN: usize = 24;

/// One carrier's claim about its position on a call path. Endpoint carriers
/// use the `ORIGIN`/`TERM` sentinels for the missing neighbor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hop {
    pub prev: CarrierId,
    pub cur: CarrierId,
    pub next: CarrierId,
}

impl Hop {
    pub fn new(prev: CarrierId, cur: CarrierId, next: CarrierId) -> Result<Self, CoreError> {
        if cur.is_sentinel() {
            return Err(CoreError::InvalidHop("current carrier cannot be a sentinel"));
        }
        Ok(Hop { prev, cur, next })
    }

    pub fn encode(&self) -> [u8; HOP_LEN] {
        let mut out = [0u8; HOP_LEN];
        out[..8].copy_from_slice(&self.prev.0.to_be_bytes());
        out[8..16].copy_from_slice(&self.cur.0.to_be_bytes());
        out[16..].copy_from_slice(&self.next.0.to_be_bytes());
        out
    }

    /// Decode and re-check the invariant; garbage produced by a wrong
    /// decryption key usually fails here.
    pub fn decode(bytes: &[u8]) -> Result<Self, CoreError> {
        if bytes.len() != HOP_LEN {
            return Err(CoreError::InvalidLength { expected: HOP_LEN, got: bytes.len() });
        }
        let id = |range: std::ops::Range<usize>| {
            CarrierId(u64::from_be_bytes(bytes[range].try_into().unwrap()))
        };
        Hop::new(id(0..8), id(8..16), id(16..24))
    }
}

impl std::fmt::Display for Hop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({} -> {} -> {})", self.prev, self.cur, self.next)
    }
}
