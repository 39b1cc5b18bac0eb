//! BLS12-381 group arithmetic, domain-separated hashing, and BLS signatures.
//!
//! Group assignment: BLS verification keys live in G1 (48-byte compressed),
//! signatures and the label hash live in G2 (96-byte). All deserialization
//! performs the prime-order subgroup check; a value of one of these types is
//! always a valid element.
//!
//! Byte encodings are fixed: compressed points (48 B G1, 96 B G2), canonical
//! 576-byte GT field encoding, and 32-byte big-endian scalars.

use ark_bls12_381::{g1, g2, Bls12_381, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{CurveGroup, Group};
use ark_ff::field_hashers::DefaultFieldHasher;
use ark_ff::{BigInteger, Field, PrimeField, UniformRand};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize, Compress, Validate};
use ark_std::Zero;
use once_cell::sync::Lazy;
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::CryptoError;

/// Domain tag for the OPRF input hash (hash-to-G1).
pub const DOMAIN_H1: &[u8] = b"JAGER-H1";
/// Domain tag for the label-derivation hash (bytes).
pub const DOMAIN_H2: &[u8] = b"JAGER-H2";
/// Domain tag for the hop-mask hash (bytes).
pub const DOMAIN_H3: &[u8] = b"JAGER-H3";
/// Domain tag for the GT-to-key hash used by witness encryption (bytes).
pub const DOMAIN_HA: &[u8] = b"JAGER-HA";
/// Domain tag for the signature message hash (hash-to-G2). BLS signing and
/// the witness-encryption label hash share this tag: a ciphertext is only
/// decryptable by a signature produced with the same message hash.
pub const DOMAIN_HB: &[u8] = b"JAGER-HB";
/// Domain tag for deriving a record-store index from a call label (bytes).
pub const DOMAIN_IDX: &[u8] = b"JAGER-IDX";

/// Compressed G1 point width in bytes.
pub const G1_BYTES: usize = 48;
/// Compressed G2 point width in bytes.
pub const G2_BYTES: usize = 96;
/// Canonical GT encoding width in bytes.
pub const GT_BYTES: usize = 576;
/// Big-endian scalar width in bytes.
pub const SCALAR_BYTES: usize = 32;

type G1Hasher = MapToCurveBasedHasher<G1Projective, DefaultFieldHasher<Sha256, 128>, WBMap<g1::Config>>;
type G2Hasher = MapToCurveBasedHasher<G2Projective, DefaultFieldHasher<Sha256, 128>, WBMap<g2::Config>>;

/// A scalar in the prime field of order `q` (the group order).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scalar(pub(crate) Fr);

impl Scalar {
    /// Uniformly random non-zero scalar.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let s = Fr::rand(rng);
            if !s.is_zero() {
                return Scalar(s);
            }
        }
    }

    pub fn from_u64(v: u64) -> Self {
        Scalar(Fr::from(v))
    }

    pub fn zero() -> Self {
        Scalar(Fr::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Scalar> {
        self.0.inverse().map(Scalar)
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        Scalar(self.0 + other.0)
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        Scalar(self.0 - other.0)
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        Scalar(self.0 * other.0)
    }

    pub fn neg(&self) -> Scalar {
        Scalar(-self.0)
    }

    /// 32-byte big-endian encoding.
    pub fn to_bytes(&self) -> [u8; SCALAR_BYTES] {
        let mut out = [0u8; SCALAR_BYTES];
        out.copy_from_slice(&self.0.into_bigint().to_bytes_be());
        out
    }

    /// Strict decode: rejects lengths other than 32 and non-canonical values.
    pub fn from_bytes(bytes: &[u8]) -> Result<Scalar, CryptoError> {
        if bytes.len() != SCALAR_BYTES {
            return Err(CryptoError::InvalidLength { expected: SCALAR_BYTES, got: bytes.len() });
        }
        let s = Fr::from_be_bytes_mod_order(bytes);
        if s.into_bigint().to_bytes_be() != bytes {
            return Err(CryptoError::InvalidEncoding);
        }
        Ok(Scalar(s))
    }

    /// Hash arbitrary bytes onto the scalar field (used for Fiat-Shamir
    /// challenges). Not one of the six protocol hashes; `tag` is an internal
    /// scheme constant.
    pub fn from_hash(tag: &[u8], parts: &[&[u8]]) -> Scalar {
        let mut hasher = Sha256::new();
        hasher.update(tag);
        for p in parts {
            hasher.update(p);
        }
        Scalar(Fr::from_be_bytes_mod_order(&hasher.finalize()))
    }
}

macro_rules! group_element {
    ($name:ident, $proj:ty, $affine:ty, $len:expr) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq)]
        pub struct $name(pub(crate) $proj);

        impl $name {
            pub fn generator() -> Self {
                $name(<$proj>::generator())
            }

            pub fn identity() -> Self {
                $name(<$proj>::zero())
            }

            pub fn is_identity(&self) -> bool {
                self.0.is_zero()
            }

            pub fn mul(&self, s: &Scalar) -> Self {
                $name(self.0 * s.0)
            }

            pub fn add(&self, other: &Self) -> Self {
                $name(self.0 + other.0)
            }

            pub fn sub(&self, other: &Self) -> Self {
                $name(self.0 - other.0)
            }

            pub fn neg(&self) -> Self {
                $name(-self.0)
            }

            /// Compressed point encoding.
            pub fn to_bytes(&self) -> [u8; $len] {
                let mut out = [0u8; $len];
                self.0
                    .into_affine()
                    .serialize_compressed(&mut out[..])
                    .expect("fixed-size buffer");
                out
            }

            /// Decode with curve and prime-order subgroup checks.
            pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
                if bytes.len() != $len {
                    return Err(CryptoError::InvalidLength { expected: $len, got: bytes.len() });
                }
                let affine = <$affine>::deserialize_with_mode(bytes, Compress::Yes, Validate::Yes)
                    .map_err(|_| CryptoError::InvalidEncoding)?;
                Ok($name(affine.into()))
            }
        }
    };
}

group_element!(G1Element, G1Projective, G1Affine, G1_BYTES);
group_element!(G2Element, G2Projective, G2Affine, G2_BYTES);

/// An element of the pairing target group GT.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GtElement(pub(crate) PairingOutput<Bls12_381>);

static GT_GENERATOR: Lazy<PairingOutput<Bls12_381>> =
    Lazy::new(|| Bls12_381::pairing(G1Projective::generator(), G2Projective::generator()));

impl GtElement {
    /// The canonical generator `e(g1, g2)`.
    pub fn generator() -> Self {
        GtElement(*GT_GENERATOR)
    }

    pub fn identity() -> Self {
        GtElement(PairingOutput::zero())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_zero()
    }

    /// Group operation (written multiplicatively in the protocol).
    pub fn mul(&self, other: &Self) -> Self {
        GtElement(self.0 + other.0)
    }

    /// Exponentiation by a scalar.
    pub fn pow(&self, s: &Scalar) -> Self {
        GtElement(self.0 * s.0)
    }

    pub fn inverse(&self) -> Self {
        GtElement(-self.0)
    }

    /// Canonical 576-byte encoding of the underlying field element.
    pub fn to_bytes(&self) -> [u8; GT_BYTES] {
        let mut out = [0u8; GT_BYTES];
        self.0.serialize_compressed(&mut out[..]).expect("fixed-size buffer");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != GT_BYTES {
            return Err(CryptoError::InvalidLength { expected: GT_BYTES, got: bytes.len() });
        }
        let inner =
            PairingOutput::<Bls12_381>::deserialize_with_mode(bytes, Compress::Yes, Validate::Yes)
                .map_err(|_| CryptoError::InvalidEncoding)?;
        Ok(GtElement(inner))
    }
}

/// The bilinear map `e: G1 x G2 -> GT`.
pub fn pairing(a: &G1Element, b: &G2Element) -> GtElement {
    GtElement(Bls12_381::pairing(a.0, b.0))
}

/// Product of pairings `prod e(a_i, b_i)` in one Miller loop.
pub fn pairing_product(pairs: &[(&G1Element, &G2Element)]) -> GtElement {
    let lhs: Vec<_> = pairs.iter().map(|(a, _)| a.0).collect();
    let rhs: Vec<_> = pairs.iter().map(|(_, b)| b.0).collect();
    GtElement(Bls12_381::multi_pairing(lhs, rhs))
}

/// Deterministic hash onto G1 under the given domain tag.
pub fn hash_to_g1(tag: &[u8], msg: &[u8]) -> G1Element {
    let hasher = G1Hasher::new(tag).expect("valid hash-to-curve parameters");
    G1Element(hasher.hash(msg).expect("hash-to-curve is total").into())
}

/// Deterministic hash onto G2 under the given domain tag.
pub fn hash_to_g2(tag: &[u8], msg: &[u8]) -> G2Element {
    let hasher = G2Hasher::new(tag).expect("valid hash-to-curve parameters");
    G2Element(hasher.hash(msg).expect("hash-to-curve is total").into())
}

/// Domain-tagged SHA-256 over the concatenation of `parts`.
///
/// Callers are responsible for unambiguous layouts; every protocol use feeds
/// fixed-width components.
pub fn hash_bytes(tag: &[u8], parts: &[&[u8]]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(tag);
    for p in parts {
        hasher.update(p);
    }
    hasher.finalize().into()
}

/// A BLS signing key pair: `vk = g1^sk`.
#[derive(Clone, Debug)]
pub struct BlsKeyPair {
    sk: Scalar,
    vk: G1Element,
}

impl BlsKeyPair {
    pub fn generate<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::from_secret(Scalar::random(rng))
    }

    pub fn from_secret(sk: Scalar) -> Self {
        let vk = G1Element::generator().mul(&sk);
        BlsKeyPair { sk, vk }
    }

    pub fn secret(&self) -> &Scalar {
        &self.sk
    }

    pub fn verifying_key(&self) -> &G1Element {
        &self.vk
    }
}

/// A BLS signature: `H_b(msg)^sk` in G2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlsSignature(pub(crate) G2Element);

impl BlsSignature {
    pub fn to_bytes(&self) -> [u8; G2_BYTES] {
        self.0.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        G2Element::from_bytes(bytes).map(BlsSignature)
    }

    pub fn element(&self) -> &G2Element {
        &self.0
    }
}

/// Sign a message: `sigma = H_b(msg)^sk`.
pub fn bls_sign(sk: &Scalar, msg: &[u8]) -> BlsSignature {
    BlsSignature(hash_to_g2(DOMAIN_HB, msg).mul(sk))
}

/// Verify `e(vk, H_b(msg)) == e(g1, sigma)`.
///
/// Inputs are typed, already subgroup-checked elements; degenerate values
/// (identity signature, mismatched key) simply fail the check.
pub fn bls_verify(vk: &G1Element, msg: &[u8], sig: &BlsSignature) -> bool {
    let h = hash_to_g2(DOMAIN_HB, msg);
    // e(vk, H(m)) * e(-g1, sigma) == 1
    pairing_product(&[(vk, &h), (&G1Element::generator().neg(), &sig.0)]).is_identity()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng() -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(0x4a61676572)
    }

    #[test]
    fn hash_to_group_is_deterministic_and_tag_separated() {
        let mut r = rng();
        for _ in 0..100 {
            let msg: [u8; 16] = r.gen();
            assert_eq!(hash_to_g1(DOMAIN_H1, &msg), hash_to_g1(DOMAIN_H1, &msg));
            assert_eq!(hash_to_g2(DOMAIN_HB, &msg), hash_to_g2(DOMAIN_HB, &msg));
            // Distinct tags must give distinct points.
            assert_ne!(hash_to_g2(DOMAIN_HB, &msg), hash_to_g2(b"JAGER-HB2", &msg));
            assert_ne!(hash_to_g1(DOMAIN_H1, &msg), hash_to_g1(b"JAGER-H1X", &msg));
        }
    }

    #[test]
    fn hash_to_group_output_roundtrips_subgroup_check() {
        let mut r = rng();
        for _ in 0..100 {
            let msg: [u8; 8] = r.gen();
            let p = hash_to_g1(DOMAIN_H1, &msg);
            let q = hash_to_g2(DOMAIN_HB, &msg);
            // from_bytes validates subgroup membership, so a successful
            // round-trip is the membership check.
            assert_eq!(G1Element::from_bytes(&p.to_bytes()).unwrap(), p);
            assert_eq!(G2Element::from_bytes(&q.to_bytes()).unwrap(), q);
        }
    }

    #[test]
    fn pairing_is_bilinear() {
        let g = G1Element::generator();
        let h = G2Element::generator();
        let two = Scalar::from_u64(2);
        assert_eq!(pairing(&g.mul(&two), &h), pairing(&g, &h.mul(&two)));
        assert_eq!(pairing(&g, &h).pow(&Scalar::zero()), GtElement::identity());

        let mut r = rng();
        for _ in 0..20 {
            let x = Scalar::random(&mut r);
            let y = Scalar::random(&mut r);
            // Oracle: direct exponentiation of e(g, h).
            let expected = pairing(&g, &h).pow(&x.mul(&y));
            assert_eq!(pairing(&g.mul(&x), &h.mul(&y)), expected);
        }
    }

    #[test]
    fn bls_keygen_shapes() {
        let mut r = rng();
        let kp = BlsKeyPair::from_secret(Scalar::from_u64(1));
        assert_eq!(*kp.verifying_key(), G1Element::generator());

        let a = BlsKeyPair::generate(&mut r);
        let b = BlsKeyPair::generate(&mut r);
        assert_ne!(a.secret().to_bytes(), b.secret().to_bytes());

        let back = Scalar::from_bytes(&a.secret().to_bytes()).unwrap();
        assert_eq!(*a.secret(), back);
        let vk = G1Element::from_bytes(&a.verifying_key().to_bytes()).unwrap();
        assert_eq!(vk, *a.verifying_key());
    }

    #[test]
    fn bls_sign_verify_and_tamper() {
        let mut r = rng();
        let kp = BlsKeyPair::generate(&mut r);
        for i in 0..100u32 {
            let msg = hash_bytes(b"t", &[&i.to_be_bytes()]);
            let sig = bls_sign(kp.secret(), &msg);
            assert!(bls_verify(kp.verifying_key(), &msg, &sig));

            let mut flipped = msg;
            flipped[0] ^= 1;
            assert!(!bls_verify(kp.verifying_key(), &flipped, &sig));
        }
        let other = BlsKeyPair::generate(&mut r);
        let sig = bls_sign(kp.secret(), b"m");
        assert!(!bls_verify(other.verifying_key(), b"m", &sig));
    }

    #[test]
    fn bls_signature_matches_exponentiation_oracle() {
        let mut r = rng();
        let kp = BlsKeyPair::generate(&mut r);
        let msg = b"oracle-check";
        let direct = hash_to_g2(DOMAIN_HB, msg).mul(kp.secret());
        assert_eq!(bls_sign(kp.secret(), msg).0, direct);
    }

    #[test]
    fn identity_signature_is_rejected() {
        let mut r = rng();
        let kp = BlsKeyPair::generate(&mut r);
        let sig = BlsSignature(G2Element::identity());
        assert!(!bls_verify(kp.verifying_key(), b"any message", &sig));
    }

    #[test]
    fn serialization_roundtrip_all_kinds() {
        let mut r = rng();
        for _ in 0..10 {
            let s = Scalar::random(&mut r);
            assert_eq!(Scalar::from_bytes(&s.to_bytes()).unwrap(), s);

            let p = G1Element::generator().mul(&s);
            assert_eq!(G1Element::from_bytes(&p.to_bytes()).unwrap(), p);

            let q = G2Element::generator().mul(&s);
            assert_eq!(G2Element::from_bytes(&q.to_bytes()).unwrap(), q);

            let t = GtElement::generator().pow(&s);
            assert_eq!(GtElement::from_bytes(&t.to_bytes()).unwrap(), t);
        }
    }

    #[test]
    fn decode_rejects_garbage() {
        assert!(G1Element::from_bytes(&[0u8; G1_BYTES]).is_err());
        assert!(G1Element::from_bytes(&[7u8; 12]).is_err());
        let mut bytes = G2Element::generator().to_bytes();
        bytes[10] ^= 0xff;
        assert!(G2Element::from_bytes(&bytes).is_err());

        // Non-canonical scalar: q encodes as itself modulo q = 0, mismatch.
        let too_big = [0xffu8; SCALAR_BYTES];
        assert!(Scalar::from_bytes(&too_big).is_err());
    }

    #[test]
    fn decode_rejects_curve_point_outside_subgroup() {
        use ark_ec::AffineRepr;
        use ark_ff::UniformRand;
        // Find a point on the G1 curve equation that is not in the prime-order
        // subgroup (the cofactor is > 1), serialize it without validation, and
        // check that our decoder refuses it.
        let mut r = rng();
        loop {
            let x = ark_bls12_381::Fq::rand(&mut r);
            if let Some(p) = G1Affine::get_point_from_x_unchecked(x, false) {
                if p.is_on_curve() && !p.is_in_correct_subgroup_assuming_on_curve() {
                    let mut buf = [0u8; G1_BYTES];
                    p.serialize_with_mode(&mut buf[..], Compress::Yes).unwrap();
                    assert!(G1Element::from_bytes(&buf).is_err());
                    return;
                }
            }
        }
    }
}
