//! Content-keyed band cache.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use harperlab_core::spectral::MERGE_TOL;
use harperlab_core::{BandSet, Fraction};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub model: String,
    pub lambda: Option<f64>,
    pub p: u64,
    pub q: u64,
    pub tol: f64,
    pub version: String,
    pub created_at: u64,
    pub bands: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct BandCache {
    dir: PathBuf,
}

pub fn cache_key(model: &str, frac: Fraction, tol: f64) -> String {
    let mut h = Sha256::new();
    h.update(format!("{model}\n{}\n{}\n{tol:e}\n{CODE_VERSION}", frac.p, frac.q));
    hex::encode(h.finalize())
}

impl BandCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        BandCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, model: &str, frac: Fraction, tol: f64) -> PathBuf {
        self.dir.join(format!("{}.json", cache_key(model, frac, tol)))
    }

    /// The cached bands, or `None` on a miss. Unreadable or inconsistent
    /// entries are misses with a warning on stderr.
    pub fn get(&self, model: &str, frac: Fraction, tol: f64) -> Option<BandSet> {
        let path = self.path_for(model, frac, tol);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                eprintln!("warning: cannot read cache entry {}: {e}", path.display());
                return None;
            }
        };
        match validate(&text, model, frac, tol) {
            Ok(b) => Some(b),
            Err(why) => {
                eprintln!("warning: ignoring corrupt cache entry {}: {why}", path.display());
                None
            }
        }
    }

    /// Atomic write: temp file in the cache directory, then rename.
    pub fn put(&self, model: &str, lambda: Option<f64>, frac: Fraction, tol: f64, bands: &BandSet) -> anyhow::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let entry = CacheEntry {
            model: model.to_string(),
            lambda,
            p: frac.p,
            q: frac.q,
            tol,
            version: CODE_VERSION.to_string(),
            created_at: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            bands: bands.intervals().to_vec(),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, &entry)?;
        tmp.flush()?;
        tmp.persist(self.path_for(model, frac, tol))?;
        Ok(())
    }
}

fn validate(text: &str, model: &str, frac: Fraction, tol: f64) -> Result<BandSet, String> {
    let e: CacheEntry = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if e.version != CODE_VERSION {
        return Err(format!("written by version {}", e.version));
    }
    if e.model != model || e.p != frac.p || e.q != frac.q || e.tol != tol {
        return Err("key fields do not match".into());
    }
    if e.bands.iter().any(|b| !(b[0].is_finite() && b[1].is_finite() && b[0] <= b[1])) {
        return Err("malformed interval".into());
    }
    if e.bands.windows(2).any(|w| !(w[0][1] < w[1][0])) {
        return Err("intervals not sorted and disjoint".into());
    }
    Ok(BandSet::new(e.bands.iter().map(|b| (b[0], b[1])), MERGE_TOL))
}
