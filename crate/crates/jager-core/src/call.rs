//! Call identities and their canonical encodings.
//!
//! A call is identified from one carrier's vantage by `(src, dst, ts)`. Label
//! derivation never sees the raw timestamp: it is truncated to an epoch, and
//! the OPRF input is the fixed 28-byte encoding
//! `src (10 ASCII digits) || dst (10 digits) || epoch (8-byte big-endian)`.

use serde::{Deserialize, Serialize};

use crate::CoreError;

/// Milliseconds in one epoch at the default granularity (1 second).
pub const DEFAULT_EPOCH_MS: u64 = 1_000;
/// Default half-width of the trace window in seconds.
pub const DEFAULT_T_MAX_SECS: u64 = 10;
/// Width of the canonical call-details encoding.
pub const CALL_DETAILS_LEN: usize = 28;

/// A ten-digit NANP telephone number, stored as ASCII digits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhoneNumber([u8; 10]);

impl PhoneNumber {
    /// Parse `NPA-NXX-XXXX` or a bare 10-digit string.
    pub fn parse(s: &str) -> Result<Self, CoreError> {
        let digits: Vec<u8> = s.bytes().filter(|b| *b != b'-').collect();
        if digits.len() != 10 || !digits.iter().all(u8::is_ascii_digit) {
            return Err(CoreError::InvalidPhoneNumber(s.to_string()));
        }
        let mut out = [0u8; 10];
        out.copy_from_slice(&digits);
        Ok(PhoneNumber(out))
    }

    pub fn from_digits(digits: [u8; 10]) -> Result<Self, CoreError> {
        if !digits.iter().all(u8::is_ascii_digit) {
            return Err(CoreError::InvalidPhoneNumber(format!("{digits:?}")));
        }
        Ok(PhoneNumber(digits))
    }

    pub fn digits(&self) -> &[u8; 10] {
        &self.0
    }
}

impl std::fmt::Display for PhoneNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let d = std::str::from_utf8(&self.0).expect("ascii digits");
        write!(f, "{}-{}-{}", &d[..3], &d[3..6], &d[6..])
    }
}

impl std::fmt::Debug for PhoneNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PhoneNumber({self})")
    }
}

impl Serialize for PhoneNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(std::str::from_utf8(&self.0).expect("ascii digits"))
    }
}

impl<'de> Deserialize<'de> for PhoneNumber {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        PhoneNumber::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// `(src, dst, ts)` for one call as seen by one carrier. `ts` is milliseconds
/// since the Unix epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CallDetails {
    pub src: PhoneNumber,
    pub dst: PhoneNumber,
    pub ts: u64,
}

impl CallDetails {
    pub fn new(src: PhoneNumber, dst: PhoneNumber, ts: u64) -> Result<Self, CoreError> {
        if src == dst {
            return Err(CoreError::InvalidCallDetails("src and dst must differ"));
        }
        if ts == 0 {
            return Err(CoreError::InvalidCallDetails("timestamp must be positive"));
        }
        Ok(CallDetails { src, dst, ts })
    }
}

/// A timestamp truncated to a fixed granularity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Epoch(pub u64);

impl Epoch {
    pub fn from_ts(ts_ms: u64, granularity_ms: u64) -> Epoch {
        Epoch(ts_ms / granularity_ms)
    }
}

/// All epochs whose window intersects `[ts - t_max, ts + t_max]`, ascending.
pub fn derive_epochs(ts_ms: u64, t_max_secs: u64, granularity_ms: u64) -> Vec<Epoch> {
    let lo = ts_ms.saturating_sub(t_max_secs * 1_000) / granularity_ms;
    let hi = (ts_ms + t_max_secs * 1_000) / granularity_ms;
    (lo..=hi).map(Epoch).collect()
}

/// Canonical, injective encoding of `(src, dst, epoch)`.
pub fn encode_call_details(cd: &CallDetails, ep: Epoch) -> [u8; CALL_DETAILS_LEN] {
    encode_call_parts(&cd.src, &cd.dst, ep)
}

/// Same encoding from the parts, for callers that never held a raw timestamp.
pub fn encode_call_parts(src: &PhoneNumber, dst: &PhoneNumber, ep: Epoch) -> [u8; CALL_DETAILS_LEN] {
    let mut out = [0u8; CALL_DETAILS_LEN];
    out[..10].copy_from_slice(src.digits());
    out[10..20].copy_from_slice(dst.digits());
    out[20..].copy_from_slice(&ep.0.to_be_bytes());
    out
}

/// Inverse of [`encode_call_details`] up to the epoch (the raw timestamp is
/// not recoverable).
pub fn decode_call_details(bytes: &[u8]) -> Result<(PhoneNumber, PhoneNumber, Epoch), CoreError> {
    if bytes.len() != CALL_DETAILS_LEN {
        return Err(CoreError::InvalidLength { expected: CALL_DETAILS_LEN, got: bytes.len() });
    }
    let src = PhoneNumber::from_digits(bytes[..10].try_into().unwrap())?;
    let dst = PhoneNumber::from_digits(bytes[10..20].try_into().unwrap())?;
    let ep = Epoch(u64::from_be_bytes(bytes[20..].try_into().unwrap()));
    Ok((src, dst, ep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::collections::HashSet;

    fn num(s: &str) -> PhoneNumber {
        PhoneNumber::parse(s).unwrap()
    }

    #[test]
    fn phone_number_parsing() {
        assert_eq!(num("919-555-0001"), num("9195550001"));
        assert_eq!(num("919-555-0001").to_string(), "919-555-0001");
        assert!(PhoneNumber::parse("919-555-001").is_err());
        assert!(PhoneNumber::parse("919555000a").is_err());
        assert!(PhoneNumber::parse("91955500012").is_err());
    }

    #[test]
    fn call_details_invariants() {
        let a = num("9195550001");
        let b = num("9195550002");
        assert!(CallDetails::new(a, b, 1).is_ok());
        assert!(CallDetails::new(a, a, 1).is_err());
        assert!(CallDetails::new(a, b, 0).is_err());
    }

    #[test]
    fn golden_encoding_vector() {
        let cd = CallDetails::new(num("919-555-0001"), num("212-555-0199"), 1_700_000_000_123).unwrap();
        let ep = Epoch::from_ts(cd.ts, DEFAULT_EPOCH_MS);
        assert_eq!(ep, Epoch(1_700_000_000));
        let enc = encode_call_details(&cd, ep);
        let mut expect = Vec::new();
        expect.extend_from_slice(b"9195550001");
        expect.extend_from_slice(b"2125550199");
        expect.extend_from_slice(&1_700_000_000u64.to_be_bytes());
        assert_eq!(enc.to_vec(), expect);

        let (src, dst, e) = decode_call_details(&enc).unwrap();
        assert_eq!((src, dst, e), (cd.src, cd.dst, ep));
    }

    #[test]
    fn encoding_has_no_collisions_over_random_sample() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        let mut seen = HashSet::new();
        let mut inputs = HashSet::new();
        for _ in 0..10_000 {
            let digits = |r: &mut rand_chacha::ChaCha12Rng| {
                let mut d = [0u8; 10];
                for byte in d.iter_mut() {
                    *byte = b'0' + r.gen_range(0..10u8);
                }
                PhoneNumber::from_digits(d).unwrap()
            };
            let src = digits(&mut rng);
            let dst = digits(&mut rng);
            let ts: u64 = rng.gen_range(1..u64::MAX / 2);
            let ep = Epoch::from_ts(ts, DEFAULT_EPOCH_MS);
            if src == dst || !inputs.insert((src, dst, ep)) {
                continue;
            }
            let cd = CallDetails::new(src, dst, ts).unwrap();
            assert!(seen.insert(encode_call_details(&cd, ep)), "collision for distinct input");
        }
    }

    #[test]
    fn epoch_window_has_twenty_one_labels_at_defaults() {
        let eps = derive_epochs(1_700_000_000_123, DEFAULT_T_MAX_SECS, DEFAULT_EPOCH_MS);
        assert_eq!(eps.len(), 21);
        assert!(eps.windows(2).all(|w| w[0].0 + 1 == w[1].0));
    }

    #[test]
    fn epoch_window_edge_cases() {
        assert_eq!(derive_epochs(5_000, 0, DEFAULT_EPOCH_MS).len(), 1);

        // Interval straddling an epoch boundary includes both boundary epochs.
        let eps = derive_epochs(1_999, 0, DEFAULT_EPOCH_MS);
        assert_eq!(eps, vec![Epoch(1)]);
        let eps = derive_epochs(2_000, 1, DEFAULT_EPOCH_MS);
        assert_eq!(eps, vec![Epoch(1), Epoch(2), Epoch(3)]);

        // Clamped at time zero.
        let eps = derive_epochs(500, 10, DEFAULT_EPOCH_MS);
        assert_eq!(eps.first(), Some(&Epoch(0)));

        // Arithmetic oracle: every epoch's window intersects [ts-t, ts+t].
        let (ts, t, g) = (123_456_789u64, 7u64, 250u64);
        for ep in derive_epochs(ts, t, g) {
            let (lo, hi) = (ep.0 * g, (ep.0 + 1) * g - 1);
            assert!(hi >= ts - t * 1000 && lo <= ts + t * 1000);
        }
    }
}
