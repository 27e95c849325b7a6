//! Persistent store of γ-independent coefficient integrals.
//!
//! The file is a JSON object mapping [`PotentialSpec::cache_key`] to
//! [`CoefficientIntegrals`]. Writers merge with whatever is on disk and
//! replace the file atomically, so concurrent processes never see a torn
//! file; on identical keys the last write wins, which is harmless because
//! the values are deterministic.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use thiserror::Error;

use crate::eigensolver::{integrals_for, EigenError, PotentialSpec};
use crate::params::CoefficientIntegrals;

pub const CACHE_ENV: &str = "DWELL4_CACHE";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cache {path} is not valid JSON: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

type Entries = BTreeMap<String, CoefficientIntegrals>;

#[derive(Debug, Default)]
pub struct CoefficientCache {
    path: Option<PathBuf>,
    entries: Mutex<Entries>,
    dirty: Mutex<bool>,
}

impl CoefficientCache {
    /// A cache that never touches the filesystem.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or prepares to create) the cache at `path`.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, CacheError> {
        let path = path.into();
        let entries = read_entries(&path)?;
        Ok(Self {
            path: Some(path),
            entries: Mutex::new(entries),
            dirty: Mutex::new(false),
        })
    }

    /// `$DWELL4_CACHE` if set, otherwise `~/.cache/dwell4/coefficients.json`.
    pub fn default_path() -> Option<PathBuf> {
        if let Some(p) = std::env::var_os(CACHE_ENV) {
            return Some(PathBuf::from(p));
        }
        std::env::var_os("HOME")
            .map(|home| PathBuf::from(home).join(".cache/dwell4/coefficients.json"))
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, spec: &PotentialSpec) -> Option<CoefficientIntegrals> {
        self.entries.lock().unwrap().get(&spec.cache_key()).copied()
    }

    /// Returns cached integrals or solves the eigenproblem and records them.
    /// The lock is not held while solving, so parallel sweeps proceed.
    pub fn get_or_compute(&self, spec: &PotentialSpec) -> Result<CoefficientIntegrals, EigenError> {
        if let Some(c) = self.get(spec) {
            return Ok(c);
        }
        let c = integrals_for(spec)?;
        self.entries.lock().unwrap().insert(spec.cache_key(), c);
        *self.dirty.lock().unwrap() = true;
        Ok(c)
    }

    /// Merges new entries into the file on disk. A no-op for in-memory caches
    /// or when nothing was computed.
    pub fn flush(&self) -> Result<(), CacheError> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let mut dirty = self.dirty.lock().unwrap();
        if !*dirty {
            return Ok(());
        }
        let mut merged = read_entries(path)?;
        merged.extend(self.entries.lock().unwrap().iter().map(|(k, v)| (k.clone(), *v)));
        write_atomic(path, &merged)?;
        *dirty = false;
        Ok(())
    }
}

fn read_entries(path: &Path) -> Result<Entries, CacheError> {
    match std::fs::read(path) {
        Ok(bytes) => serde_json::from_slice(&bytes).map_err(|source| CacheError::Parse {
            path: path.to_owned(),
            source,
        }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Entries::new()),
        Err(source) => Err(CacheError::Io {
            path: path.to_owned(),
            source,
        }),
    }
}

fn write_atomic(path: &Path, entries: &Entries) -> Result<(), CacheError> {
    let io = |source| CacheError::Io {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_owned(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    let text = serde_json::to_string_pretty(entries).expect("cache entries serialize");
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.write_all(b"\n").map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(v0: f64) -> PotentialSpec {
        PotentialSpec {
            v0,
            domain_halfwidth: 1.5,
            grid_points: 256,
        }
    }

    #[test]
    fn round_trips_through_disk_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/cache.json");
        let c = CoefficientCache::open(&path).unwrap();
        let fresh = c.get_or_compute(&small(5.0)).unwrap();
        c.flush().unwrap();
        let reopened = CoefficientCache::open(&path).unwrap();
        assert_eq!(reopened.get(&small(5.0)), Some(fresh));
    }

    #[test]
    fn concurrent_writers_merge() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");
        let a = CoefficientCache::open(&path).unwrap();
        let b = CoefficientCache::open(&path).unwrap();
        a.get_or_compute(&small(4.0)).unwrap();
        b.get_or_compute(&small(6.0)).unwrap();
        a.flush().unwrap();
        b.flush().unwrap();
        assert_eq!(CoefficientCache::open(&path).unwrap().len(), 2);
    }

    #[test]
    fn key_format() {
        assert_eq!(small(8.75).cache_key(), "v0=8.75;n=256;L=1.5");
    }

    #[test]
    fn corrupt_file_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.json");
        std::fs::write(&path, "not json").unwrap();
        assert!(matches!(
            CoefficientCache::open(&path),
            Err(CacheError::Parse { .. })
        ));
    }
}
