//! On-disk cache of enumerated quotients, one `<key>.tfq` file per level.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use treefpp::quotient::cache_key;
use treefpp::{enumerate_quotient, Group, LevelQuotient, Result};

pub const CACHE_ENV: &str = "TREEFPP_CACHE";

#[derive(Debug, Clone, Default)]
pub struct QuotientCache {
    dir: Option<PathBuf>,
}

/// Canonical text identifying a group for cache keys.
pub fn canonical_text(group: &Group) -> String {
    match group {
        Group::Presented(e) => e.presentation().to_dsl(),
        Group::FiniteType(s) => s.describe(),
    }
}

impl QuotientCache {
    /// `TREEFPP_CACHE` if set, else `flag`, else no caching.
    pub fn resolve(flag: Option<&Path>) -> Self {
        let dir = std::env::var_os(CACHE_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .or_else(|| flag.map(Path::to_path_buf));
        QuotientCache { dir }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        QuotientCache { dir: Some(dir.into()) }
    }

    pub fn disabled() -> Self {
        QuotientCache { dir: None }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn path_for(&self, group: &Group, level: usize) -> Option<PathBuf> {
        let dir = self.dir.as_ref()?;
        Some(dir.join(format!("{}.tfq", cache_key(&canonical_text(group), level))))
    }

    /// Cached `π_n(G)` when present and valid, otherwise enumerated and
    /// stored. Unreadable cache files are recomputed and replaced.
    pub fn quotient(&self, group: &Group, level: usize, element_limit: usize) -> Result<LevelQuotient> {
        let Some(path) = self.path_for(group, level) else {
            return enumerate_quotient(group, level, element_limit);
        };
        if let Ok(f) = fs::File::open(&path) {
            if let Ok(q) = LevelQuotient::read_from(&mut BufReader::new(f)) {
                if q.order() <= element_limit {
                    return Ok(q);
                }
                return Err(treefpp::Error::LimitExceeded {
                    level,
                    limit: element_limit,
                    partial: q.order(),
                });
            }
        }
        let q = enumerate_quotient(group, level, element_limit)?;
        // A failed write only loses the cache entry.
        let _ = store(&path, &q);
        Ok(q)
    }
}

fn store(path: &Path, q: &LevelQuotient) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!("tfq.{}", std::process::id()));
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        q.write_to(&mut w).map_err(|e| std::io::Error::other(e.to_string()))?;
        std::io::Write::flush(&mut w)?;
    }
    fs::rename(&tmp, path)
}
