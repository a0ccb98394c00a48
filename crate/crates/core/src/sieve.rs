//! Segmented sieve of Eratosthenes with a process-wide cache.
//!
//! The largest sieve built so far is kept behind a lock and handed out as an
//! `Arc`; a request that fits is served from it. If `DML_SIEVE_CACHE` names a
//! directory, prime tables are also persisted there as little-endian `u32`s.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

pub const SIEVE_CAP: u64 = 100_000_000;
pub const CACHE_ENV: &str = "DML_SIEVE_CACHE";

const SEGMENT: usize = 1 << 15;

#[derive(Debug, Clone)]
pub struct PrimeSieve {
    limit: u64,
    primes: Vec<u32>,
}

impl PrimeSieve {
    /// All primes `≤ limit`.
    pub fn new(limit: u64) -> Result<Self> {
        if limit > SIEVE_CAP {
            return Err(Error::SieveCapacity { requested: limit, cap: SIEVE_CAP });
        }
        Ok(PrimeSieve { limit, primes: segmented(limit) })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `≤ x`; `x` must not exceed the sieve limit.
    pub fn primes_up_to(&self, x: u64) -> &[u32] {
        debug_assert!(x <= self.limit);
        let end = self.primes.partition_point(|&p| (p as u64) <= x);
        &self.primes[..end]
    }

    /// Primes in the half-open range `(lo, hi]`.
    pub fn primes_between(&self, lo: f64, hi: f64) -> &[u32] {
        let start = self.primes.partition_point(|&p| (p as f64) <= lo);
        let end = self.primes.partition_point(|&p| (p as f64) <= hi);
        &self.primes[start..end.max(start)]
    }

    /// A shared sieve covering at least `limit`.
    pub fn shared(limit: u64) -> Result<Arc<PrimeSieve>> {
        static CACHE: OnceLock<Mutex<Option<Arc<PrimeSieve>>>> = OnceLock::new();
        if limit > SIEVE_CAP {
            return Err(Error::SieveCapacity { requested: limit, cap: SIEVE_CAP });
        }
        let cell = CACHE.get_or_init(|| Mutex::new(None));
        let mut guard = cell.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(s) = guard.as_ref() {
            if s.limit >= limit {
                return Ok(s.clone());
            }
        }
        // grow geometrically so that a sequence of slightly larger requests
        // does not re-sieve each time
        let target = limit.max(guard.as_ref().map_or(0, |s| s.limit * 2)).min(SIEVE_CAP).max(1000);
        let sieve = Arc::new(match load_from_disk(target) {
            Some(s) => s,
            None => {
                let s = PrimeSieve::new(target)?;
                let _ = store_to_disk(&s);
                s
            }
        });
        *guard = Some(sieve.clone());
        Ok(sieve)
    }
}

fn segmented(limit: u64) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    // base primes by a plain sieve
    let mut small = vec![true; root as usize + 1];
    small[0] = false;
    if root >= 1 {
        small[1] = false;
    }
    let mut i = 2usize;
    while i * i <= root as usize {
        if small[i] {
            let mut j = i * i;
            while j <= root as usize {
                small[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    let base: Vec<u64> = (2..=root).filter(|&k| small[k as usize]).collect();

    let mut primes = Vec::new();
    let mut seg = vec![true; SEGMENT];
    let mut low = 2u64;
    while low <= limit {
        let high = (low + SEGMENT as u64 - 1).min(limit);
        let len = (high - low + 1) as usize;
        seg[..len].iter_mut().for_each(|b| *b = true);
        for &p in &base {
            if p * p > high {
                break;
            }
            let mut start = ((low + p - 1) / p) * p;
            if start < p * p {
                start = p * p;
            }
            let mut m = start;
            while m <= high {
                seg[(m - low) as usize] = false;
                m += p;
            }
        }
        primes.extend((0..len).filter(|&k| seg[k]).map(|k| (low + k as u64) as u32));
        low = high + 1;
    }
    primes
}

fn cache_path(limit: u64) -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(|dir| PathBuf::from(dir).join(format!("primes-{limit}.bin")))
}

fn load_from_disk(limit: u64) -> Option<PrimeSieve> {
    let path = cache_path(limit)?;
    let mut bytes = Vec::new();
    fs::File::open(path).ok()?.read_to_end(&mut bytes).ok()?;
    if bytes.len() < 8 || (bytes.len() - 8) % 4 != 0 {
        return None;
    }
    let stored = u64::from_le_bytes(bytes[..8].try_into().ok()?);
    if stored != limit {
        return None;
    }
    let primes = bytes[8..].chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    Some(PrimeSieve { limit, primes })
}

fn store_to_disk(s: &PrimeSieve) -> std::io::Result<()> {
    let Some(path) = cache_path(s.limit) else { return Ok(()) };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&s.limit.to_le_bytes())?;
    let mut buf = Vec::with_capacity(s.primes.len() * 4);
    for p in &s.primes {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    f.write_all(&buf)
}
