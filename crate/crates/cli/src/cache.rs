//! On-disk cache under `$HZ_CACHE_DIR/v1`, keyed by a digest of the request.

use std::path::PathBuf;

use serde_json::Value;

use hz_core::qseries::sha256_hex;

use crate::manifest::write_atomic;

/// Bumped whenever a cached format changes; older directories are ignored.
const SCHEMA: &str = "v1";

fn dir() -> Option<PathBuf> {
    let base = std::env::var_os("HZ_CACHE_DIR")?;
    Some(PathBuf::from(base).join(SCHEMA))
}

fn path_for(key: &str) -> Option<PathBuf> {
    Some(dir()?.join(format!("{}.json", sha256_hex(key.as_bytes()))))
}

pub fn get(key: &str) -> Option<Value> {
    let text = std::fs::read_to_string(path_for(key)?).ok()?;
    let v: Value = serde_json::from_str(&text).ok()?;
    (v.get("key")?.as_str()? == key).then(|| v.get("value").cloned()).flatten()
}

/// Failures to write are ignored; the cache is an optimization.
pub fn put(key: &str, value: &Value) {
    let (Some(d), Some(p)) = (dir(), path_for(key)) else { return };
    if std::fs::create_dir_all(&d).is_ok() {
        let text = serde_json::json!({ "key": key, "value": value }).to_string();
        let _ = write_atomic(&p, &text);
    }
}
