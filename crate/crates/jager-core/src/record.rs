//! Record-store submission tuples, lookup indices, and hop masking.

use jager_crypto::groupsig::GroupSignature;
use jager_crypto::oprf::CallLabel;
use jager_crypto::pairing::{hash_bytes, DOMAIN_H3, DOMAIN_IDX};
use jager_crypto::wes::WesCiphertext;

use crate::hop::HOP_LEN;
use crate::CoreError;

/// Width of a lookup index in bytes.
pub const INDEX_LEN: usize = 32;

/// The public lookup key: a hash of the call label, so a leaked database
/// never exposes labels directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Index(pub [u8; INDEX_LEN]);

impl Index {
    pub fn from_label(label: &CallLabel) -> Index {
        Index(hash_bytes(DOMAIN_IDX, &[label.as_bytes()]))
    }

    pub fn as_bytes(&self) -> &[u8; INDEX_LEN] {
        &self.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Index, CoreError> {
        if bytes.len() != INDEX_LEN {
            return Err(CoreError::InvalidLength { expected: INDEX_LEN, got: bytes.len() });
        }
        let mut out = [0u8; INDEX_LEN];
        out.copy_from_slice(bytes);
        Ok(Index(out))
    }
}

impl std::fmt::Display for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", hex::encode(self.0))
    }
}

/// `H_3(call-details || key)` truncated to the hop width. XORing the same
/// mask twice round-trips, so this one function both masks and unmasks.
pub fn hop_mask(call_details_enc: &[u8], key: &[u8; 32]) -> [u8; HOP_LEN] {
    let digest = hash_bytes(DOMAIN_H3, &[call_details_enc, key]);
    let mut out = [0u8; HOP_LEN];
    out.copy_from_slice(&digest[..HOP_LEN]);
    out
}

/// XOR a 24-byte hop encoding with the mask for `(call-details, key)`.
pub fn apply_hop_mask(
    hop_bytes: &[u8; HOP_LEN],
    call_details_enc: &[u8],
    key: &[u8; 32],
) -> [u8; HOP_LEN] {
    let mask = hop_mask(call_details_enc, key);
    let mut out = [0u8; HOP_LEN];
    for i in 0..HOP_LEN {
        out[i] = hop_bytes[i] ^ mask[i];
    }
    out
}

/// What a carrier submits to the record store: the index, the two
/// ciphertexts, and an anonymous group signature over all three.
#[derive(Clone, Debug)]
pub struct Submission {
    pub idx: Index,
    pub ct1: WesCiphertext,
    pub ct2: [u8; HOP_LEN],
    pub gsig: GroupSignature,
}

/// The byte string covered by both the contributor's group signature and the
/// record store's response signature: `ct1 || ct2 || idx`.
pub fn record_message(ct1: &WesCiphertext, ct2: &[u8; HOP_LEN], idx: &Index) -> Vec<u8> {
    let mut msg = Vec::with_capacity(jager_crypto::wes::CIPHERTEXT_LEN + HOP_LEN + INDEX_LEN);
    msg.extend_from_slice(&ct1.to_bytes());
    msg.extend_from_slice(ct2);
    msg.extend_from_slice(idx.as_bytes());
    msg
}

impl Submission {
    pub fn signed_message(&self) -> Vec<u8> {
        record_message(&self.ct1, &self.ct2, &self.idx)
    }
}
