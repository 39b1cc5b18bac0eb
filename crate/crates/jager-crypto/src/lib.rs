//! Cryptographic building blocks for the Jager call-traceback system.
//!
//! Everything here is instantiated over BLS12-381:
//!
//! * [`pairing`] — group arithmetic, domain-separated hashing, and plain BLS
//!   signatures (verification keys in G1, signatures in G2).
//! * [`wes`] — witness encryption on BLS signatures: a ciphertext bound to a
//!   `(vk, label)` pair that any valid signature on `label` decrypts.
//! * [`oprf`] — the verifiable 2HashDH OPRF used to derive call labels.
//! * [`groupsig`] — BBS-style short group signatures for anonymous but
//!   accountable record contribution.

pub mod groupsig;
pub mod oprf;
pub mod pairing;
pub mod wes;

use thiserror::Error;

/// Errors shared by the primitive implementations.
#[derive(Debug, Error)]
pub enum CryptoError {
    /// Bytes did not decode to a valid, subgroup-checked element.
    #[error("invalid point or scalar encoding")]
    InvalidEncoding,
    /// A fixed-width input had the wrong length.
    #[error("invalid length: expected {expected} bytes, got {got}")]
    InvalidLength { expected: usize, got: usize },
    /// The OPRF pairing check failed: the server did not use its announced key.
    #[error("oprf response failed the pairing check")]
    OprfVerification,
    /// A blinding or key scalar that must be invertible was zero.
    #[error("scalar must be non-zero")]
    ZeroScalar,
    /// Group-membership bookkeeping.
    #[error("member {0} is already enrolled")]
    DuplicateMember(u64),
    #[error("member {0} is not enrolled")]
    UnknownMember(u64),
    /// A group signature that does not verify cannot be opened.
    #[error("signature does not verify; cannot open")]
    CannotOpen,
}
