//! Verifiable 2HashDH OPRF.
//!
//! The server holds `k` and announces `pk = g2^k`. A client blinds its input
//! `x` as `a = H_1(x)^r`, the server responds `b = a^k`, and the client
//! unblinds `c = b^(1/r)` and checks `e(H_1(x), pk) == e(c, g2)` before
//! deriving the output `H_2(pk || x || c)`. The server never sees `x`; the
//! client never sees `k`; a server that evaluates with any key other than the
//! announced one is caught by the pairing check.
//!
//! Blinded elements live in G1 (48-byte compressed points on the wire) and the
//! public key in G2, which keeps the server-side evaluation a single G1
//! multiplication.

use rand::Rng;

use crate::pairing::{
    hash_bytes, hash_to_g1, pairing_product, G1Element, G2Element, Scalar, DOMAIN_H1, DOMAIN_H2,
};
use crate::CryptoError;

/// Width of an OPRF output in bytes.
pub const LABEL_LEN: usize = 32;

/// The server-side PRF key and its announced public counterpart.
#[derive(Clone, Debug)]
pub struct OprfServerKey {
    k: Scalar,
    pk: G2Element,
}

impl OprfServerKey {
    pub fn generate<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::from_secret(Scalar::random(rng))
    }

    pub fn from_secret(k: Scalar) -> Self {
        let pk = G2Element::generator().mul(&k);
        OprfServerKey { k, pk }
    }

    pub fn secret(&self) -> &Scalar {
        &self.k
    }

    pub fn public_key(&self) -> &G2Element {
        &self.pk
    }
}

/// Client-side blinding state. Single use: `finalize` consumes it.
#[derive(Clone, Debug)]
pub struct BlindingState {
    r: Scalar,
    input: Vec<u8>,
}

impl BlindingState {
    pub fn input(&self) -> &[u8] {
        &self.input
    }
}

/// A 32-byte pseudorandom call label, `H_2(pk, x, H_1(x)^k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CallLabel(pub [u8; LABEL_LEN]);

impl CallLabel {
    pub fn as_bytes(&self) -> &[u8; LABEL_LEN] {
        &self.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != LABEL_LEN {
            return Err(CryptoError::InvalidLength { expected: LABEL_LEN, got: bytes.len() });
        }
        let mut out = [0u8; LABEL_LEN];
        out.copy_from_slice(bytes);
        Ok(CallLabel(out))
    }
}

/// Blind an input with a fresh non-zero `r`: returns `H_1(input)^r`.
pub fn blind<R: Rng + ?Sized>(input: &[u8], rng: &mut R) -> (G1Element, BlindingState) {
    let r = Scalar::random(rng);
    blind_with(input, r).expect("random blinding scalar is non-zero")
}

/// Blind with a caller-chosen scalar. Errors on `r = 0`, which would make the
/// blinding non-invertible.
pub fn blind_with(input: &[u8], r: Scalar) -> Result<(G1Element, BlindingState), CryptoError> {
    if r.is_zero() {
        return Err(CryptoError::ZeroScalar);
    }
    let blinded = hash_to_g1(DOMAIN_H1, input).mul(&r);
    Ok((blinded, BlindingState { r, input: input.to_vec() }))
}

/// Server evaluation: `b = a^k`. Deterministic and stateless with respect to
/// the (blinded, invisible) input.
pub fn evaluate(key: &OprfServerKey, blinded: &G1Element) -> G1Element {
    blinded.mul(&key.k)
}

/// Unblind, verify, and derive the label.
///
/// Fails with [`CryptoError::OprfVerification`] when the response was not
/// produced with the key matching `pk` — a tampered or substituted evaluation
/// never yields a label.
pub fn finalize(
    pk: &G2Element,
    state: BlindingState,
    evaluated: &G1Element,
) -> Result<CallLabel, CryptoError> {
    let r_inv = state.r.inverse().ok_or(CryptoError::ZeroScalar)?;
    let c = evaluated.mul(&r_inv);
    let h = hash_to_g1(DOMAIN_H1, &state.input);
    // e(H_1(x), pk) == e(c, g2)  <=>  e(H_1(x), pk) * e(-c, g2) == 1
    let check = pairing_product(&[(&h, pk), (&c.neg(), &G2Element::generator())]);
    if !check.is_identity() {
        return Err(CryptoError::OprfVerification);
    }
    Ok(derive_label(pk, &state.input, &c))
}

/// The unblinded PRF: `H_2(pk, x, H_1(x)^k)` computed directly with the key.
///
/// This is the other algebraic route to the same function; the blinded
/// protocol must agree with it, and the traceback authority uses it to check
/// claimed labels during accountability review.
pub fn direct_evaluate(key: &OprfServerKey, input: &[u8]) -> CallLabel {
    let c = hash_to_g1(DOMAIN_H1, input).mul(&key.k);
    derive_label(&key.pk, input, &c)
}

fn derive_label(pk: &G2Element, input: &[u8], c: &G1Element) -> CallLabel {
    CallLabel(hash_bytes(DOMAIN_H2, &[&pk.to_bytes(), input, &c.to_bytes()]))
}
