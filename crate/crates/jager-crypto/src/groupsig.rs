//! Short group signatures with manager-side opening.
//!
//! The scheme follows the classic BBS construction: the manager's issuing
//! secret `gamma` publishes `w = g2^gamma`; member `i` holds an SDH credential
//! `(A_i, x_i)` with `A_i = g1^(1/(gamma + x_i))`. A signature is a linear
//! encryption `(T1, T2, T3)` of `A_i` under the manager's opening secrets
//! together with a Fiat-Shamir proof of knowledge of a valid credential.
//!
//! Properties relied on by the rest of the system:
//! * any enrolled member's signature verifies under the group public key;
//! * the encoding is fixed-width and carries no member identifier;
//! * the manager (and only the manager) can open a signature to its signer.
//!
//! Joining is manager-issued in a single round: the manager samples `x_i` and
//! hands the member its credential. Revocation removes a member from the
//! active registry (the authority stops serving them); their credential stays
//! indexed so that previously stored records still open to them.

use std::collections::HashMap;

use rand::Rng;

use crate::pairing::{
    pairing_product, G1Element, G2Element, GtElement, Scalar, G1_BYTES, G2_BYTES, SCALAR_BYTES,
};
use crate::CryptoError;

/// Tag for the Fiat-Shamir challenge hash (scheme-internal).
const CHALLENGE_TAG: &[u8] = b"JAGER-GS-CHAL";

/// Serialized signature width: T1 || T2 || T3 || c || 5 responses.
pub const SIGNATURE_LEN: usize = 3 * G1_BYTES + 6 * SCALAR_BYTES;
/// Serialized group public key width: h || u || v || w.
pub const GPK_LEN: usize = 3 * G1_BYTES + G2_BYTES;
/// Serialized member key width: id || A || x.
pub const MEMBER_KEY_LEN: usize = 8 + G1_BYTES + SCALAR_BYTES;

/// Public verification material for the whole group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPublicKey {
    h: G1Element,
    u: G1Element,
    v: G1Element,
    w: G2Element,
}

impl GroupPublicKey {
    pub fn to_bytes(&self) -> [u8; GPK_LEN] {
        let mut out = [0u8; GPK_LEN];
        out[..48].copy_from_slice(&self.h.to_bytes());
        out[48..96].copy_from_slice(&self.u.to_bytes());
        out[96..144].copy_from_slice(&self.v.to_bytes());
        out[144..].copy_from_slice(&self.w.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != GPK_LEN {
            return Err(CryptoError::InvalidLength { expected: GPK_LEN, got: bytes.len() });
        }
        Ok(GroupPublicKey {
            h: G1Element::from_bytes(&bytes[..48])?,
            u: G1Element::from_bytes(&bytes[48..96])?,
            v: G1Element::from_bytes(&bytes[96..144])?,
            w: G2Element::from_bytes(&bytes[144..])?,
        })
    }
}

/// One member's enrollment record held by the manager.
#[derive(Clone, Debug)]
struct MemberRecord {
    a: G1Element,
    x: Scalar,
}

/// A member's signing credential.
#[derive(Clone, Debug)]
pub struct MemberKey {
    member_id: u64,
    a: G1Element,
    x: Scalar,
}

impl MemberKey {
    pub fn member_id(&self) -> u64 {
        self.member_id
    }

    pub fn to_bytes(&self) -> [u8; MEMBER_KEY_LEN] {
        let mut out = [0u8; MEMBER_KEY_LEN];
        out[..8].copy_from_slice(&self.member_id.to_be_bytes());
        out[8..56].copy_from_slice(&self.a.to_bytes());
        out[56..].copy_from_slice(&self.x.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != MEMBER_KEY_LEN {
            return Err(CryptoError::InvalidLength { expected: MEMBER_KEY_LEN, got: bytes.len() });
        }
        Ok(MemberKey {
            member_id: u64::from_be_bytes(bytes[..8].try_into().unwrap()),
            a: G1Element::from_bytes(&bytes[8..56])?,
            x: Scalar::from_bytes(&bytes[56..])?,
        })
    }
}

/// The manager's issuing and opening secrets plus the member registry.
#[derive(Clone, Debug)]
pub struct GroupManagerSecret {
    gamma: Scalar,
    xi1: Scalar,
    xi2: Scalar,
    gpk: GroupPublicKey,
    active: HashMap<u64, MemberRecord>,
    revoked: HashMap<u64, MemberRecord>,
    // Reverse index over both active and revoked credentials, for opening.
    by_credential: HashMap<[u8; G1_BYTES], u64>,
}

/// A group signature. Fixed 336-byte layout, identical for every signer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupSignature {
    t1: G1Element,
    t2: G1Element,
    t3: G1Element,
    c: Scalar,
    s_alpha: Scalar,
    s_beta: Scalar,
    s_x: Scalar,
    s_delta1: Scalar,
    s_delta2: Scalar,
}

impl GroupSignature {
    pub fn to_bytes(&self) -> [u8; SIGNATURE_LEN] {
        let mut out = [0u8; SIGNATURE_LEN];
        out[..48].copy_from_slice(&self.t1.to_bytes());
        out[48..96].copy_from_slice(&self.t2.to_bytes());
        out[96..144].copy_from_slice(&self.t3.to_bytes());
        for (i, s) in
            [self.c, self.s_alpha, self.s_beta, self.s_x, self.s_delta1, self.s_delta2]
                .iter()
                .enumerate()
        {
            out[144 + i * 32..176 + i * 32].copy_from_slice(&s.to_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != SIGNATURE_LEN {
            return Err(CryptoError::InvalidLength { expected: SIGNATURE_LEN, got: bytes.len() });
        }
        let scalar = |i: usize| Scalar::from_bytes(&bytes[144 + i * 32..176 + i * 32]);
        Ok(GroupSignature {
            t1: G1Element::from_bytes(&bytes[..48])?,
            t2: G1Element::from_bytes(&bytes[48..96])?,
            t3: G1Element::from_bytes(&bytes[96..144])?,
            c: scalar(0)?,
            s_alpha: scalar(1)?,
            s_beta: scalar(2)?,
            s_x: scalar(3)?,
            s_delta1: scalar(4)?,
            s_delta2: scalar(5)?,
        })
    }
}

/// Create a fresh group: public key plus manager secret with an empty registry.
pub fn gkgen<R: Rng + ?Sized>(rng: &mut R) -> (GroupPublicKey, GroupManagerSecret) {
    let gamma = Scalar::random(rng);
    let xi1 = Scalar::random(rng);
    let xi2 = Scalar::random(rng);
    let h = G1Element::generator().mul(&Scalar::random(rng));
    let u = h.mul(&xi1.inverse().expect("non-zero"));
    let v = h.mul(&xi2.inverse().expect("non-zero"));
    let w = G2Element::generator().mul(&gamma);
    let gpk = GroupPublicKey { h, u, v, w };
    let gm = GroupManagerSecret {
        gamma,
        xi1,
        xi2,
        gpk: gpk.clone(),
        active: HashMap::new(),
        revoked: HashMap::new(),
        by_credential: HashMap::new(),
    };
    (gpk, gm)
}

impl GroupManagerSecret {
    /// Enroll a member and issue their credential.
    pub fn join<R: Rng + ?Sized>(
        &mut self,
        member_id: u64,
        rng: &mut R,
    ) -> Result<MemberKey, CryptoError> {
        if self.active.contains_key(&member_id) || self.revoked.contains_key(&member_id) {
            return Err(CryptoError::DuplicateMember(member_id));
        }
        let (x, a) = loop {
            let x = Scalar::random(rng);
            if let Some(inv) = self.gamma.add(&x).inverse() {
                break (x, G1Element::generator().mul(&inv));
            }
        };
        self.active.insert(member_id, MemberRecord { a, x });
        self.by_credential.insert(a.to_bytes(), member_id);
        Ok(MemberKey { member_id, a, x })
    }

    /// Remove a member from the active registry. Their old signatures remain
    /// openable; the serving layer stops honoring their requests.
    pub fn revoke(&mut self, member_id: u64) -> Result<(), CryptoError> {
        let record =
            self.active.remove(&member_id).ok_or(CryptoError::UnknownMember(member_id))?;
        self.revoked.insert(member_id, record);
        Ok(())
    }

    pub fn is_enrolled(&self, member_id: u64) -> bool {
        self.active.contains_key(&member_id)
    }

    pub fn member_count(&self) -> usize {
        self.active.len()
    }

    pub fn public_key(&self) -> &GroupPublicKey {
        &self.gpk
    }

    /// Re-issue the credential for an enrolled member (used when loading
    /// pre-enrolled members from a key file).
    pub fn member_key(&self, member_id: u64) -> Option<MemberKey> {
        self.active
            .get(&member_id)
            .map(|r| MemberKey { member_id, a: r.a, x: r.x })
    }

    /// Decrypt the signer credential and look it up. Skips verification; the
    /// caller is expected to have checked the signature.
    pub fn open_unchecked(&self, sig: &GroupSignature) -> Option<u64> {
        let a = sig.t3.sub(&sig.t1.mul(&self.xi1)).sub(&sig.t2.mul(&self.xi2));
        self.by_credential.get(&a.to_bytes()).copied()
    }

    /// Binary encoding for key files: secrets, public key, then both registry
    /// sections as fixed-width rows.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.gamma.to_bytes());
        out.extend_from_slice(&self.xi1.to_bytes());
        out.extend_from_slice(&self.xi2.to_bytes());
        out.extend_from_slice(&self.gpk.to_bytes());
        for section in [&self.active, &self.revoked] {
            let mut ids: Vec<&u64> = section.keys().collect();
            ids.sort();
            out.extend_from_slice(&(ids.len() as u32).to_be_bytes());
            for id in ids {
                let rec = &section[id];
                out.extend_from_slice(&id.to_be_bytes());
                out.extend_from_slice(&rec.a.to_bytes());
                out.extend_from_slice(&rec.x.to_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let need = |ok: bool| if ok { Ok(()) } else { Err(CryptoError::InvalidEncoding) };
        need(bytes.len() >= 96 + GPK_LEN + 4)?;
        let gamma = Scalar::from_bytes(&bytes[..32])?;
        let xi1 = Scalar::from_bytes(&bytes[32..64])?;
        let xi2 = Scalar::from_bytes(&bytes[64..96])?;
        let gpk = GroupPublicKey::from_bytes(&bytes[96..96 + GPK_LEN])?;
        let mut pos = 96 + GPK_LEN;
        let mut sections: [HashMap<u64, MemberRecord>; 2] = [HashMap::new(), HashMap::new()];
        let mut by_credential = HashMap::new();
        for section in sections.iter_mut() {
            need(bytes.len() >= pos + 4)?;
            let n = u32::from_be_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
            pos += 4;
            const ROW: usize = 8 + G1_BYTES + SCALAR_BYTES;
            need(bytes.len() >= pos + n * ROW)?;
            for _ in 0..n {
                let id = u64::from_be_bytes(bytes[pos..pos + 8].try_into().unwrap());
                let a = G1Element::from_bytes(&bytes[pos + 8..pos + 56])?;
                let x = Scalar::from_bytes(&bytes[pos + 56..pos + ROW])?;
                by_credential.insert(a.to_bytes(), id);
                section.insert(id, MemberRecord { a, x });
                pos += ROW;
            }
        }
        need(pos == bytes.len())?;
        let [active, revoked] = sections;
        Ok(GroupManagerSecret { gamma, xi1, xi2, gpk, active, revoked, by_credential })
    }
}

fn challenge(
    msg: &[u8],
    t1: &G1Element,
    t2: &G1Element,
    t3: &G1Element,
    r1: &G1Element,
    r2: &G1Element,
    r3: &GtElement,
    r4: &G1Element,
    r5: &G1Element,
) -> Scalar {
    Scalar::from_hash(
        CHALLENGE_TAG,
        &[
            msg,
            &t1.to_bytes(),
            &t2.to_bytes(),
            &t3.to_bytes(),
            &r1.to_bytes(),
            &r2.to_bytes(),
            &r3.to_bytes(),
            &r4.to_bytes(),
            &r5.to_bytes(),
        ],
    )
}

/// Sign anonymously on behalf of the group.
pub fn gsign<R: Rng + ?Sized>(
    gpk: &GroupPublicKey,
    mk: &MemberKey,
    msg: &[u8],
    rng: &mut R,
) -> GroupSignature {
    let alpha = Scalar::random(rng);
    let beta = Scalar::random(rng);
    let t1 = gpk.u.mul(&alpha);
    let t2 = gpk.v.mul(&beta);
    let t3 = mk.a.add(&gpk.h.mul(&alpha.add(&beta)));

    let delta1 = mk.x.mul(&alpha);
    let delta2 = mk.x.mul(&beta);

    let r_alpha = Scalar::random(rng);
    let r_beta = Scalar::random(rng);
    let r_x = Scalar::random(rng);
    let r_delta1 = Scalar::random(rng);
    let r_delta2 = Scalar::random(rng);

    let big_r1 = gpk.u.mul(&r_alpha);
    let big_r2 = gpk.v.mul(&r_beta);
    // e(T3, g2)^r_x * e(h, g2)^(-r_d1 - r_d2) * e(h, w)^(-r_a - r_b),
    // regrouped into two pairings.
    let lhs1 = t3.mul(&r_x).sub(&gpk.h.mul(&r_delta1.add(&r_delta2)));
    let lhs2 = gpk.h.mul(&r_alpha.add(&r_beta)).neg();
    let big_r3 = pairing_product(&[(&lhs1, &G2Element::generator()), (&lhs2, &gpk.w)]);
    let big_r4 = t1.mul(&r_x).sub(&gpk.u.mul(&r_delta1));
    let big_r5 = t2.mul(&r_x).sub(&gpk.v.mul(&r_delta2));

    let c = challenge(msg, &t1, &t2, &t3, &big_r1, &big_r2, &big_r3, &big_r4, &big_r5);

    GroupSignature {
        t1,
        t2,
        t3,
        c,
        s_alpha: r_alpha.add(&c.mul(&alpha)),
        s_beta: r_beta.add(&c.mul(&beta)),
        s_x: r_x.add(&c.mul(&mk.x)),
        s_delta1: r_delta1.add(&c.mul(&delta1)),
        s_delta2: r_delta2.add(&c.mul(&delta2)),
    }
}

/// Verify a signature against the group public key.
pub fn gverify(gpk: &GroupPublicKey, msg: &[u8], sig: &GroupSignature) -> bool {
    let big_r1 = gpk.u.mul(&sig.s_alpha).sub(&sig.t1.mul(&sig.c));
    let big_r2 = gpk.v.mul(&sig.s_beta).sub(&sig.t2.mul(&sig.c));
    // e(T3, g2)^s_x * e(h, g2)^(-s_d1 - s_d2) * e(g1, g2)^(-c)
    //   * e(h, w)^(-s_a - s_b) * e(T3, w)^c
    let lhs1 = sig
        .t3
        .mul(&sig.s_x)
        .sub(&gpk.h.mul(&sig.s_delta1.add(&sig.s_delta2)))
        .sub(&G1Element::generator().mul(&sig.c));
    let lhs2 = sig.t3.mul(&sig.c).sub(&gpk.h.mul(&sig.s_alpha.add(&sig.s_beta)));
    let big_r3 = pairing_product(&[(&lhs1, &G2Element::generator()), (&lhs2, &gpk.w)]);
    let big_r4 = sig.t1.mul(&sig.s_x).sub(&gpk.u.mul(&sig.s_delta1));
    let big_r5 = sig.t2.mul(&sig.s_x).sub(&gpk.v.mul(&sig.s_delta2));

    challenge(msg, &sig.t1, &sig.t2, &sig.t3, &big_r1, &big_r2, &big_r3, &big_r4, &big_r5)
        == sig.c
}

/// Verify, then open a signature to the member that produced it.
pub fn gopen(
    gm: &GroupManagerSecret,
    msg: &[u8],
    sig: &GroupSignature,
) -> Result<u64, CryptoError> {
    if !gverify(&gm.gpk, msg, sig) {
        return Err(CryptoError::CannotOpen);
    }
    gm.open_unchecked(sig).ok_or(CryptoError::CannotOpen)
}
