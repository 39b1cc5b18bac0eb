//! The Traceback Authority (TA).
//!
//! One service, four roles behind separate endpoints: group manager
//! (enrollment and signature opening), label server (blind OPRF evaluation),
//! trace authorizer (signatures on lookup indices under `sk_R`), and
//! decryption authorizer (signatures on call labels under `sk_T`).
//!
//! Trace authorization is rate-limited per carrier over a rolling window;
//! label requests on the contribution path are not. A decryption
//! authorization is only granted to a carrier holding a previously granted
//! retrieval authorization for the same call, which binds every issued
//! `sigma_T` to a logged `sigma_R` grant.

pub mod http;

use std::collections::{HashMap, HashSet};
use std::time::{Duration, SystemTime};

use parking_lot::{Mutex, RwLock};
use rand::Rng;
use thiserror::Error;

use jager_core::call::{encode_call_parts, Epoch, PhoneNumber};
use jager_core::hop::Hop;
use jager_core::ratelimit::RollingLimiter;
use jager_core::record::{apply_hop_mask, record_message, Index};
use jager_core::validate::{validate, ValidationReport};
use jager_core::wire::{request_auth_message, AccountabilityReport, EntryFinding, EntryStatus};
use jager_core::CarrierId;
use jager_crypto::groupsig::{
    gsign, gverify, GroupManagerSecret, GroupPublicKey, GroupSignature, MemberKey,
};
use jager_crypto::oprf::{direct_evaluate, evaluate, CallLabel, OprfServerKey};
use jager_crypto::pairing::{bls_sign, bls_verify, BlsKeyPair, BlsSignature, G1Element, G2Element};
use jager_crypto::wes::{we_decrypt, WesCiphertext};

/// Default trace-authorization budget per carrier per window.
pub const DEFAULT_TRACE_LIMIT: u32 = 1_000;
/// Default rolling window.
pub const DEFAULT_WINDOW: Duration = Duration::from_secs(24 * 60 * 60);

#[derive(Debug, Clone)]
pub struct TaConfig {
    pub trace_limit: u32,
    pub window: Duration,
    /// Capture label-endpoint transcripts (test hook for the no-plaintext
    /// assertion).
    pub record_transcripts: bool,
}

impl Default for TaConfig {
    fn default() -> Self {
        TaConfig {
            trace_limit: DEFAULT_TRACE_LIMIT,
            window: DEFAULT_WINDOW,
            record_transcripts: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum TaError {
    #[error("carrier {0} is not enrolled")]
    NotEnrolled(u64),
    #[error("request signature does not verify for carrier {0}")]
    BadRequestSignature(u64),
    #[error("trace rate limit ({limit}) exceeded for carrier {carrier}")]
    RateLimited { carrier: u64, limit: u32 },
    #[error("no retrieval authorization on record for this carrier and label")]
    NotAuthorized,
    #[error(transparent)]
    Crypto(#[from] jager_crypto::CryptoError),
}

/// Key material the TA operates with. Everything here is generated at setup
/// or loaded from a key file.
pub struct TaKeys {
    pub oprf: OprfServerKey,
    pub sig_t: BlsKeyPair,
    pub sig_r: BlsKeyPair,
    pub gpk: GroupPublicKey,
    pub gm: GroupManagerSecret,
    /// Request-verification keys announced by already-enrolled carriers.
    pub carrier_vks: HashMap<u64, G1Element>,
}

/// The announced public constants every other party holds.
#[derive(Clone, Debug)]
pub struct PublicParams {
    pub vk_t: G1Element,
    pub vk_r: G1Element,
    pub pk_oprf: G2Element,
    pub gpk: GroupPublicKey,
}

/// One open-request entry, typed. The claimed hop stays a raw triple so a
/// nonsensical claim is representable and checkable.
#[derive(Clone, Debug)]
pub struct OpenEntry {
    pub src: PhoneNumber,
    pub dst: PhoneNumber,
    pub epoch: Epoch,
    pub label: CallLabel,
    pub ct1: WesCiphertext,
    pub ct2: [u8; jager_core::hop::HOP_LEN],
    pub gsig: GroupSignature,
    pub claimed_hop: (u64, u64, u64),
}

struct AuthLog {
    entries: Vec<(u64, Index, SystemTime)>,
    granted: HashSet<(u64, Index)>,
}

/// Attribution rule for accountability review.
///
/// A verified record is implicated when one of its asserted edges touches a
/// carrier the validation flagged as faulty and that carrier's own records do
/// not corroborate the assertion. Claims corroborated by the implicated
/// vertex's own attestation stay anonymous: an honest carrier is not
/// deanonymized just because a forged record polluted its degree profile.
fn hop_is_implicated(hop: &Hop, all: &[Hop], validation: &ValidationReport) -> bool {
    let corroborates_next = |p: CarrierId, c: CarrierId| all.iter().any(|h| h.cur == p && h.next == c);
    let corroborates_prev = |c: CarrierId, n: CarrierId| all.iter().any(|h| h.cur == n && h.prev == c);

    let upstream_suspect = !hop.prev.is_sentinel()
        && validation.faulty.contains(hop.prev)
        && !corroborates_next(hop.prev, hop.cur);
    let downstream_suspect = !hop.next.is_sentinel()
        && validation.faulty.contains(hop.next)
        && !corroborates_prev(hop.cur, hop.next);
    upstream_suspect || downstream_suspect
}

pub struct Ta {
    oprf: OprfServerKey,
    sig_t: BlsKeyPair,
    sig_r: BlsKeyPair,
    gpk: GroupPublicKey,
    gm: RwLock<GroupManagerSecret>,
    carrier_vks: RwLock<HashMap<u64, G1Element>>,
    limiter: RollingLimiter,
    auth_log: Mutex<AuthLog>,
    label_transcripts: Option<Mutex<Vec<(Vec<u8>, Vec<u8>)>>>,
}

impl Ta {
    /// Fresh deployment: generate all four key materials.
    pub fn setup<R: Rng + ?Sized>(rng: &mut R, config: TaConfig) -> Ta {
        let (gpk, gm) = jager_crypto::groupsig::gkgen(rng);
        Ta::from_keys(
            TaKeys {
                oprf: OprfServerKey::generate(rng),
                sig_t: BlsKeyPair::generate(rng),
                sig_r: BlsKeyPair::generate(rng),
                gpk,
                gm,
                carrier_vks: HashMap::new(),
            },
            config,
        )
    }

    pub fn from_keys(keys: TaKeys, config: TaConfig) -> Ta {
        Ta {
            oprf: keys.oprf,
            sig_t: keys.sig_t,
            sig_r: keys.sig_r,
            gpk: keys.gpk,
            gm: RwLock::new(keys.gm),
            carrier_vks: RwLock::new(keys.carrier_vks),
            limiter: RollingLimiter::new(config.trace_limit, config.window),
            auth_log: Mutex::new(AuthLog { entries: Vec::new(), granted: HashSet::new() }),
            label_transcripts: config.record_transcripts.then(|| Mutex::new(Vec::new())),
        }
    }

    pub fn params(&self) -> PublicParams {
        PublicParams {
            vk_t: *self.sig_t.verifying_key(),
            vk_r: *self.sig_r.verifying_key(),
            pk_oprf: *self.oprf.public_key(),
            gpk: self.gpk.clone(),
        }
    }

    pub fn trace_limit(&self) -> u32 {
        self.limiter.limit()
    }

    pub fn is_enrolled(&self, carrier: u64) -> bool {
        self.gm.read().is_enrolled(carrier)
    }

    /// Enroll a carrier: issue a group credential and record its announced
    /// request-verification key.
    pub fn handle_join<R: Rng + ?Sized>(
        &self,
        carrier: u64,
        vk: G1Element,
        rng: &mut R,
    ) -> Result<MemberKey, TaError> {
        let mk = self.gm.write().join(carrier, rng)?;
        self.carrier_vks.write().insert(carrier, vk);
        Ok(mk)
    }

    /// Remove a carrier from the group. Their stored records stay retrievable
    /// and openable; new requests are refused.
    pub fn revoke(&self, carrier: u64) -> Result<(), TaError> {
        self.gm.write().revoke(carrier)?;
        self.carrier_vks.write().remove(&carrier);
        Ok(())
    }

    /// Blind OPRF evaluation. The authority sees only a group element; the
    /// call details stay with the requesting carrier.
    pub fn handle_label_request(
        &self,
        carrier: u64,
        blinded: &G1Element,
    ) -> Result<G1Element, TaError> {
        if !self.is_enrolled(carrier) {
            return Err(TaError::NotEnrolled(carrier));
        }
        let evaluated = evaluate(&self.oprf, blinded);
        if let Some(log) = &self.label_transcripts {
            log.lock().push((blinded.to_bytes().to_vec(), evaluated.to_bytes().to_vec()));
        }
        Ok(evaluated)
    }

    /// Grant a retrieval authorization: `sigma_R` over the index, counted
    /// against the carrier's rolling budget and logged.
    pub fn handle_trace_authorization(
        &self,
        carrier: u64,
        idx: &Index,
        request_sig: &BlsSignature,
    ) -> Result<BlsSignature, TaError> {
        self.check_request_auth(carrier, "authorize", idx.as_bytes(), request_sig)?;
        self.limiter
            .try_acquire(carrier)
            .map_err(|e| TaError::RateLimited { carrier, limit: e.limit })?;
        let sigma_r = bls_sign(self.sig_r.secret(), idx.as_bytes());
        let mut log = self.auth_log.lock();
        log.entries.push((carrier, *idx, SystemTime::now()));
        log.granted.insert((carrier, *idx));
        Ok(sigma_r)
    }

    /// Grant a decryption authorization: `sigma_T` over the label, only when
    /// this carrier already holds a retrieval grant for `H(label)`.
    pub fn handle_decrypt_authorization(
        &self,
        carrier: u64,
        label: &CallLabel,
        request_sig: &BlsSignature,
    ) -> Result<BlsSignature, TaError> {
        self.check_request_auth(carrier, "decrypt-auth", label.as_bytes(), request_sig)?;
        let idx = Index::from_label(label);
        if !self.auth_log.lock().granted.contains(&(carrier, idx)) {
            return Err(TaError::NotAuthorized);
        }
        Ok(bls_sign(self.sig_t.secret(), label.as_bytes()))
    }

    fn check_request_auth(
        &self,
        carrier: u64,
        kind: &str,
        payload: &[u8],
        sig: &BlsSignature,
    ) -> Result<(), TaError> {
        let vks = self.carrier_vks.read();
        let vk = vks.get(&carrier).ok_or(TaError::NotEnrolled(carrier))?;
        let msg = request_auth_message(kind, carrier, payload);
        if !bls_verify(vk, &msg, sig) {
            return Err(TaError::BadRequestSignature(carrier));
        }
        Ok(())
    }

    /// Accountability review of a trace bundle.
    ///
    /// Per entry: check the group signature, re-derive the label with the
    /// direct PRF, re-derive the hop from the ciphertexts, and compare with
    /// the claim. Hops that check out feed the validation algorithm; entries
    /// that fail, and entries whose hop touches a carrier in the faulty sets,
    /// have their signatures opened. A bad entry faults only itself.
    pub fn handle_open_request(&self, entries: &[OpenEntry]) -> AccountabilityReport {
        let gm = self.gm.read();
        let mut findings = Vec::with_capacity(entries.len());
        let mut verified_hops: Vec<(usize, Hop)> = Vec::new();

        for (i, entry) in entries.iter().enumerate() {
            let status = self.review_entry(entry);
            if status == EntryStatus::Ok {
                let (p, c, n) = entry.claimed_hop;
                let hop = Hop::new(CarrierId(p), CarrierId(c), CarrierId(n))
                    .expect("review verified the hop decodes");
                verified_hops.push((i, hop));
            }
            findings.push(EntryFinding { index: i, status, signer: None });
        }

        let hops: Vec<Hop> = verified_hops.iter().map(|(_, h)| *h).collect();
        let validation: ValidationReport = validate(&hops);

        let mut faulty_carriers = Vec::new();
        for finding in findings.iter_mut() {
            let implicated = match finding.status {
                EntryStatus::Ok => {
                    let hop = verified_hops
                        .iter()
                        .find(|(i, _)| *i == finding.index)
                        .map(|(_, h)| *h)
                        .expect("ok entries have verified hops");
                    hop_is_implicated(&hop, &hops, &validation)
                }
                _ => true,
            };
            if implicated {
                finding.signer = gm.open_unchecked(&entries[finding.index].gsig);
                if let Some(id) = finding.signer {
                    faulty_carriers.push(id);
                }
            }
        }
        faulty_carriers.sort_unstable();
        faulty_carriers.dedup();

        AccountabilityReport { entries: findings, validation, faulty_carriers }
    }

    fn review_entry(&self, entry: &OpenEntry) -> EntryStatus {
        let idx = Index::from_label(&entry.label);
        let msg = record_message(&entry.ct1, &entry.ct2, &idx);
        if !gverify(&self.gpk, &msg, &entry.gsig) {
            return EntryStatus::SignatureInvalid;
        }
        let cd_enc = encode_call_parts(&entry.src, &entry.dst, entry.epoch);
        if direct_evaluate(&self.oprf, &cd_enc) != entry.label {
            return EntryStatus::LabelMismatch;
        }
        let sigma_t = bls_sign(self.sig_t.secret(), entry.label.as_bytes());
        let key = we_decrypt(&sigma_t, &entry.ct1);
        let hop_bytes = apply_hop_mask(&entry.ct2, &cd_enc, &key);
        match Hop::decode(&hop_bytes) {
            Ok(hop) if (hop.prev.0, hop.cur.0, hop.next.0) == entry.claimed_hop => EntryStatus::Ok,
            _ => EntryStatus::HopMismatch,
        }
    }

    /// Anonymously sign `msg` as `carrier` would; test helper for building
    /// fixtures without a full client.
    pub fn sign_as_member<R: Rng + ?Sized>(
        &self,
        carrier: u64,
        msg: &[u8],
        rng: &mut R,
    ) -> Option<GroupSignature> {
        let gm = self.gm.read();
        gm.member_key(carrier).map(|mk| gsign(&self.gpk, &mk, msg, rng))
    }

    pub fn auth_log_len(&self) -> usize {
        self.auth_log.lock().entries.len()
    }

    /// Whether a retrieval grant `(carrier, idx)` was ever issued.
    pub fn has_grant(&self, carrier: u64, idx: &Index) -> bool {
        self.auth_log.lock().granted.contains(&(carrier, *idx))
    }

    /// Captured `(request, response)` byte pairs from the label endpoint,
    /// when transcript recording is on.
    pub fn label_transcripts(&self) -> Vec<(Vec<u8>, Vec<u8>)> {
        self.label_transcripts.as_ref().map(|l| l.lock().clone()).unwrap_or_default()
    }

    pub(crate) fn oprf(&self) -> &OprfServerKey {
        &self.oprf
    }
}
