//! Per-key rolling-window request limiter.
//!
//! Both services rate-limit trace activity per carrier. Grants are counted
//! over a sliding window; the check-and-count step is atomic under one lock,
//! so concurrent requests can never over-grant.

use std::collections::{HashMap, VecDeque};
use std::time::{Duration, Instant};

use parking_lot::Mutex;

#[derive(Debug)]
pub struct RollingLimiter {
    limit: u32,
    window: Duration,
    grants: Mutex<HashMap<u64, VecDeque<Instant>>>,
}

impl RollingLimiter {
    pub fn new(limit: u32, window: Duration) -> Self {
        RollingLimiter { limit, window, grants: Mutex::new(HashMap::new()) }
    }

    pub fn limit(&self) -> u32 {
        self.limit
    }

    /// Try to take one grant for `key`. Returns the number of grants consumed
    /// in the current window (including this one), or `Err` when the limit is
    /// exhausted.
    pub fn try_acquire(&self, key: u64) -> Result<u32, RateLimited> {
        let now = Instant::now();
        let mut grants = self.grants.lock();
        let q = grants.entry(key).or_default();
        while let Some(front) = q.front() {
            if now.duration_since(*front) > self.window {
                q.pop_front();
            } else {
                break;
            }
        }
        if q.len() >= self.limit as usize {
            return Err(RateLimited { limit: self.limit });
        }
        q.push_back(now);
        Ok(q.len() as u32)
    }

    /// Grants currently counted against `key`.
    pub fn used(&self, key: u64) -> u32 {
        let now = Instant::now();
        let grants = self.grants.lock();
        grants
            .get(&key)
            .map(|q| q.iter().filter(|t| now.duration_since(**t) <= self.window).count() as u32)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("rate limit of {limit} requests per window exceeded")]
pub struct RateLimited {
    pub limit: u32,
}
