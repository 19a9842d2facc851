//! Result cache for the pure heavyweight payloads (rank tables, limit
//! builds).  Keys are hashes of canonical serializations; entries from a
//! different tool version are ignored; writes are atomic via a temp file
//! rename.  Cache state never changes a payload, only timing.

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct Cache {
    dir: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct Entry<T> {
    version: String,
    fingerprint: String,
    payload: T,
}

impl Cache {
    pub fn from_flags(no_cache: bool, dir_flag: Option<PathBuf>) -> Self {
        if no_cache {
            return Cache { dir: None };
        }
        let dir = dir_flag.or_else(|| std::env::var_os("FRLAB_CACHE_DIR").map(PathBuf::from));
        Cache { dir }
    }

    pub fn fingerprint(parts: &[&str]) -> String {
        let mut hasher = Sha256::new();
        for p in parts {
            hasher.update(p.as_bytes());
            hasher.update([0]);
        }
        format!("{:x}", hasher.finalize())
    }

    pub fn get<T: DeserializeOwned>(&self, fingerprint: &str) -> Option<T> {
        let dir = self.dir.as_ref()?;
        let path = dir.join(format!("{fingerprint}.json"));
        let text = std::fs::read_to_string(path).ok()?;
        let entry: Entry<T> = serde_json::from_str(&text).ok()?;
        (entry.version == VERSION && entry.fingerprint == fingerprint).then_some(entry.payload)
    }

    pub fn put<T: Serialize>(&self, fingerprint: &str, payload: &T) {
        let Some(dir) = self.dir.as_ref() else {
            return;
        };
        if std::fs::create_dir_all(dir).is_err() {
            return;
        }
        let entry = Entry {
            version: VERSION.to_string(),
            fingerprint: fingerprint.to_string(),
            payload,
        };
        let Ok(text) = serde_json::to_string(&entry) else {
            return;
        };
        let tmp = dir.join(format!(".{fingerprint}.tmp"));
        let path = dir.join(format!("{fingerprint}.json"));
        if std::fs::write(&tmp, text).is_ok() {
            let _ = std::fs::rename(tmp, path);
        }
    }

    /// Fetch-or-compute; the computation runs exactly once per key.
    pub fn memo<T, F>(&self, parts: &[&str], compute: F) -> anyhow::Result<T>
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> anyhow::Result<T>,
    {
        let key = Self::fingerprint(parts);
        if let Some(hit) = self.get::<T>(&key) {
            return Ok(hit);
        }
        let value = compute()?;
        self.put(&key, &value);
        Ok(value)
    }
}
