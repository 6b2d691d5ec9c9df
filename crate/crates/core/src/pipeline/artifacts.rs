//! On-disk artifacts: checksummed caches, JSON encodings, the manifest.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cm::QExpansion;
use crate::cyclo::CycloNumber;
use crate::error::{Error, Result};
use crate::padic::PadicCyclo;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Writes `bytes` to `path` via a temporary file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io(path, e))
}

/// Exclusive advisory lock held for the lifetime of the guard.
pub struct CacheLock {
    file: File,
}

impl CacheLock {
    pub fn acquire(path: &Path) -> Result<CacheLock> {
        let lock_path = path.with_extension("lock");
        if let Some(dir) = lock_path.parent() {
            fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(|e| io(&lock_path, e))?;
        file.lock().map_err(|e| io(&lock_path, e))?;
        Ok(CacheLock { file })
    }
}

impl Drop for CacheLock {
    fn drop(&mut self) {
        let _ = self.file.unlock();
    }
}

/// Body followed by a trailer line `sha256 <hex of body>`.
pub fn seal(body: &str) -> String {
    format!("{body}sha256 {}\n", sha256_hex(body.as_bytes()))
}

/// Inverse of `seal`; a missing or wrong trailer is a validation error.
pub fn unseal<'a>(text: &'a str, path: &Path) -> Result<&'a str> {
    let trimmed = text.strip_suffix('\n').unwrap_or(text);
    let cut = trimmed.rfind('\n').map(|i| i + 1).unwrap_or(0);
    let (body, trailer) = trimmed.split_at(cut);
    match trailer.strip_prefix("sha256 ") {
        Some(h) if h == sha256_hex(body.as_bytes()) => Ok(body),
        _ => Err(Error::Validation(format!("checksum mismatch in cache file {}", path.display()))),
    }
}

/// Coefficient cache: one sealed q-expansion per character descriptor.
#[derive(Clone, Debug)]
pub struct ExpansionCache {
    pub dir: PathBuf,
}

impl ExpansionCache {
    pub fn new(dir: impl Into<PathBuf>) -> ExpansionCache {
        ExpansionCache { dir: dir.into() }
    }

    pub fn path_for(&self, name: &str) -> PathBuf {
        self.dir.join("an").join(format!("{name}.qexp"))
    }

    /// The first `n` coefficients for `descriptor`, computing and storing them
    /// when the cache holds fewer. A cached file with a bad checksum or a
    /// different descriptor is rejected, never overwritten.
    pub fn get_or_compute(
        &self,
        name: &str,
        descriptor: &str,
        n: usize,
        compute: impl FnOnce(usize) -> Result<QExpansion>,
    ) -> Result<QExpansion> {
        let path = self.path_for(name);
        let _lock = CacheLock::acquire(&path)?;
        if path.exists() {
            let text = fs::read_to_string(&path).map_err(|e| io(&path, e))?;
            let (q, desc) = QExpansion::from_text(unseal(&text, &path)?)?;
            if desc != descriptor {
                return Err(Error::Validation(format!("cache file {} describes '{desc}', expected '{descriptor}'", path.display())));
            }
            if q.n_max() >= n {
                return Ok(truncate_expansion(q, n));
            }
        }
        let q = compute(n)?;
        write_atomic(&path, seal(&q.to_text(descriptor)).as_bytes())?;
        Ok(q)
    }
}

pub fn truncate_expansion(mut q: QExpansion, n: usize) -> QExpansion {
    q.coeffs.truncate(n + 1);
    q
}

/// Exact element as {"modulus": M, "coeffs": [...]} in the power basis of Q(zeta_M).
pub fn cyclo_json(x: &CycloNumber) -> Value {
    json!({ "modulus": x.modulus(), "coeffs": x.coeff_strings() })
}

/// p-adic element: printed form, valuation (null for zero) and absolute precision.
pub fn padic_json(x: &PadicCyclo) -> Value {
    json!({
        "value": x.to_string(),
        "valuation": x.valuation().map(|v| v.to_string()),
        "precision": x.abs_precision(),
        "exact_zero": x.is_exact_zero(),
    })
}

/// Serializes with sorted keys and a trailing newline.
pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

/// Files written by a build, with their digests, for the manifest.
#[derive(Default, Debug)]
pub struct OutputSet {
    pub root: PathBuf,
    pub files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn new(root: &Path) -> OutputSet {
        OutputSet { root: root.to_path_buf(), files: Vec::new() }
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.root.join(rel), bytes)?;
        self.files.push((rel.to_string(), sha256_hex(bytes)));
        Ok(())
    }

    pub fn listing(&self) -> Value {
        let mut files = self.files.clone();
        files.sort();
        Value::Array(files.into_iter().map(|(f, h)| json!({ "file": f, "sha256": h })).collect())
    }

    /// Writes manifest.json with the file listing added and returns it.
    pub fn flush_manifest(&mut self, mut manifest: Value) -> Result<Value> {
        manifest["files"] = self.listing();
        let bytes = json_bytes(&manifest);
        let mut f = File::create(self.root.join("manifest.json")).map_err(|e| io(&self.root, e))?;
        f.write_all(&bytes).map_err(|e| io(&self.root, e))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seal_round_trip_and_tamper() {
        let p = Path::new("x");
        let s = seal("a\nb\n");
        assert_eq!(unseal(&s, p).unwrap(), "a\nb\n");
        let bad = s.replace("b\n", "c\n");
        assert!(matches!(unseal(&bad, p), Err(Error::Validation(_))));
        assert!(matches!(unseal("a\nb\n", p), Err(Error::Validation(_))));
    }

    #[test]
    fn cache_reuses_and_rejects() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ExpansionCache::new(dir.path());
        let make = |n: usize| Ok(QExpansion { modulus: 1, coeffs: (0..=n as i64).map(|k| CycloNumber::from_int(1, k)).collect() });
        let a = cache.get_or_compute("t", "desc", 10, make).unwrap();
        let b = cache.get_or_compute("t", "desc", 5, |_| panic!("cached")).unwrap();
        assert_eq!(b.coeffs[..], a.coeffs[..6]);
        assert!(matches!(cache.get_or_compute("t", "other", 5, make), Err(Error::Validation(_))));
        let path = cache.path_for("t");
        let text = fs::read_to_string(&path).unwrap().replace("\n7\n", "\n8\n");
        fs::write(&path, text).unwrap();
        assert!(matches!(cache.get_or_compute("t", "desc", 5, make), Err(Error::Validation(_))));
    }
}
