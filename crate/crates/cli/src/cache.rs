//! On-disk cache for the exact distribution tables, keyed by
//! (kind, n_max, p_max) with a content hash; corrupt or stale files are
//! rebuilt transparently.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use treespan_core::exactdist::{build_x_table, build_y_table, TableJson, WeightedDistTable};
use treespan_core::Kind;

use crate::commands::CliError;

pub const CACHE_DIR_ENV: &str = "TREESPAN_CACHE_DIR";

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    content_hash: String,
    table: TableJson,
}

fn hash_table(table: &TableJson) -> String {
    let mut hasher = DefaultHasher::new();
    serde_json::to_string(table)
        .expect("table serialization cannot fail")
        .hash(&mut hasher);
    format!("{:016x}", hasher.finish())
}

fn cache_path(dir: &Path, kind: Kind, n_max: usize, p_max: usize) -> PathBuf {
    dir.join(format!(
        "table-{}-n{n_max}-p{p_max}.json",
        kind.as_str().to_lowercase()
    ))
}

fn try_load(path: &Path, kind: Kind, n_max: usize, p_max: usize) -> Option<WeightedDistTable> {
    let text = std::fs::read_to_string(path).ok()?;
    let file: CacheFile = serde_json::from_str(&text).ok()?;
    if file.content_hash != hash_table(&file.table) {
        return None;
    }
    if file.table.kind != kind || file.table.n_max < n_max || file.table.p_max < p_max {
        return None;
    }
    WeightedDistTable::from_json(&file.table).ok()
}

fn store(path: &Path, table: &WeightedDistTable) {
    let json = table.to_json();
    let file = CacheFile {
        content_hash: hash_table(&json),
        table: json,
    };
    if let Some(parent) = path.parent() {
        let _ = std::fs::create_dir_all(parent);
    }
    // cache write failure is not an error; the table is already in memory
    if let Ok(text) = serde_json::to_string(&file) {
        let _ = std::fs::write(path, text);
    }
}

/// Resolve the cache directory: flag first, then environment.
pub fn resolve_dir(flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
}

/// Load a table from the cache or build it (building and caching the
/// companion pass-count table first when the span-size table is requested).
pub fn load_or_build(
    kind: Kind,
    n_max: usize,
    p_max: usize,
    cache_dir: Option<&Path>,
) -> Result<WeightedDistTable, CliError> {
    if let Some(dir) = cache_dir {
        let path = cache_path(dir, kind, n_max, p_max);
        if let Some(table) = try_load(&path, kind, n_max, p_max) {
            return Ok(table);
        }
    }
    let x = {
        if let Some(dir) = cache_dir {
            let x_path = cache_path(dir, Kind::X, n_max, p_max);
            match try_load(&x_path, Kind::X, n_max, p_max) {
                Some(t) => t,
                None => {
                    let t = build_x_table(n_max, p_max)?;
                    store(&x_path, &t);
                    t
                }
            }
        } else {
            build_x_table(n_max, p_max)?
        }
    };
    match kind {
        Kind::X => Ok(x),
        Kind::Y => {
            let y = build_y_table(n_max, p_max, &x)?;
            if let Some(dir) = cache_dir {
                store(&cache_path(dir, Kind::Y, n_max, p_max), &y);
            }
            Ok(y)
        }
    }
}
