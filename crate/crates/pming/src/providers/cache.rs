//! Persistent pair-count cache.
//!
//! Live hit counts drift as the underlying collection changes, and
//! engines rate-limit aggressively, so fetched pair statistics are
//! worth keeping. The cache is a single JSON file keyed by provider
//! identity plus the order-normalized term pair; entries expire after
//! a TTL (default 7 days). Cache I/O failures never block scoring:
//! the wrapper logs a warning and passes queries through.

use super::term::Term;
use super::{CountProvider, ProviderError};
use crate::measures::PairCounts;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

pub const DEFAULT_TTL: Duration = Duration::from_secs(7 * 24 * 60 * 60);

/// Location of the cache file: `$PMING_CACHE` when set, otherwise
/// `.pming-cache.json` in the working directory.
pub fn default_cache_path() -> PathBuf {
    std::env::var_os("PMING_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".pming-cache.json"))
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
struct CacheEntry {
    f_x: u64,
    f_y: u64,
    f_xy: u64,
    m: u64,
    fetched_at_ms: u64,
}

#[derive(Serialize, Deserialize, Default)]
struct CacheFile {
    version: u32,
    entries: HashMap<String, CacheEntry>,
}

/// The persistent store itself. Opening never fails: unreadable or
/// corrupt files degrade to an empty cache with a warning on stderr.
pub struct CountCache {
    path: PathBuf,
    ttl: Duration,
    entries: Mutex<HashMap<String, CacheEntry>>,
}

impl CountCache {
    pub fn open(path: &Path, ttl: Duration) -> Self {
        let entries = match fs::read_to_string(path) {
            Ok(data) => match serde_json::from_str::<CacheFile>(&data) {
                Ok(file) => file.entries,
                Err(e) => {
                    eprintln!(
                        "warning: cache file {} is unreadable ({e}); starting empty",
                        path.display()
                    );
                    HashMap::new()
                }
            },
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => HashMap::new(),
            Err(e) => {
                eprintln!(
                    "warning: cannot read cache file {} ({e}); starting empty",
                    path.display()
                );
                HashMap::new()
            }
        };
        CountCache {
            path: path.to_path_buf(),
            ttl,
            entries: Mutex::new(entries),
        }
    }

    fn lookup(&self, key: &str) -> Option<CacheEntry> {
        let entries = self.entries.lock().unwrap_or_else(|e| e.into_inner());
        let entry = entries.get(key)?;
        let age = now_ms().saturating_sub(entry.fetched_at_ms);
        if Duration::from_millis(age) < self.ttl {
            Some(*entry)
        } else {
            None
        }
    }

    fn store(&self, key: String, entry: CacheEntry) {
        let snapshot = {
            let mut entries = self.entries.lock().unwrap_or_else(|e| e.into_inner());
            entries.insert(key, entry);
            CacheFile {
                version: 1,
                entries: entries.clone(),
            }
        };
        if let Err(e) = self.persist(&snapshot) {
            eprintln!(
                "warning: cannot write cache file {} ({e}); continuing without persistence",
                self.path.display()
            );
        }
    }

    fn persist(&self, file: &CacheFile) -> std::io::Result<()> {
        let tmp = self.path.with_extension("tmp");
        fs::write(
            &tmp,
            serde_json::to_string(file).expect("cache serialization"),
        )?;
        fs::rename(&tmp, &self.path)
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// A caching wrapper around any provider. Pair lookups are served from
/// the cache when fresh; single-term queries go through the diagonal
/// pair, so they are cached too. Keys normalize the pair order, so
/// `(x, y)` and `(y, x)` share one entry.
pub struct CachedProvider {
    inner: Arc<dyn CountProvider>,
    cache: CountCache,
}

impl CachedProvider {
    pub fn new(inner: Arc<dyn CountProvider>, cache: CountCache) -> Self {
        CachedProvider { inner, cache }
    }

    fn key(&self, a: &str, b: &str) -> String {
        format!("{}\u{1f}{a}\u{1f}{b}", self.inner.provider_id())
    }
}

impl CountProvider for CachedProvider {
    fn occurrence(&self, term: &Term) -> Result<u64, ProviderError> {
        Ok(self.pair_counts(term, term)?.f_x())
    }

    fn cooccurrence(&self, x: &Term, y: &Term) -> Result<u64, ProviderError> {
        Ok(self.pair_counts(x, y)?.f_xy())
    }

    fn corpus_size(&self) -> u64 {
        self.inner.corpus_size()
    }

    fn provider_id(&self) -> String {
        self.inner.provider_id()
    }

    fn pair_counts(&self, x: &Term, y: &Term) -> Result<PairCounts, ProviderError> {
        let (first, second, swapped) = if x.normalized() <= y.normalized() {
            (x, y, false)
        } else {
            (y, x, true)
        };
        let key = self.key(&first.normalized(), &second.normalized());

        let counts = if let Some(entry) = self.cache.lookup(&key) {
            PairCounts::new(entry.f_x, entry.f_y, entry.f_xy, entry.m)?
        } else {
            let fresh = self.inner.pair_counts(first, second)?;
            self.cache.store(
                key,
                CacheEntry {
                    f_x: fresh.f_x(),
                    f_y: fresh.f_y(),
                    f_xy: fresh.f_xy(),
                    m: fresh.m(),
                    fetched_at_ms: now_ms(),
                },
            );
            fresh
        };

        Ok(if swapped { counts.swapped() } else { counts })
    }
}
