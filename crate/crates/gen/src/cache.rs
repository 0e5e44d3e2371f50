use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Content-addressed store of completions, one JSON file per key.
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub model: String,
    pub temperature: f64,
    pub sample_index: usize,
    pub completion: String,
}

/// Hash over every field that determines a completion request.
pub fn cache_key(prompt: &str, model: &str, temperature: f64, sample_index: usize) -> String {
    let fields = serde_json::json!([prompt, model, temperature, sample_index]);
    hex::encode(Sha256::digest(fields.to_string().as_bytes()))
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    /// Unreadable or corrupt entries count as misses.
    pub fn get(&self, key: &str) -> Option<CacheEntry> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn put(&self, key: &str, entry: &CacheEntry) -> io::Result<()> {
        let path = self.path(key);
        let dir = path.parent().expect("cache path has a parent");
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(".{key}.tmp"));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(serde_json::to_string(entry)?.as_bytes())?;
        }
        fs::rename(tmp, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_covers_every_field() {
        let base = cache_key("p", "m", 0.25, 0);
        assert_ne!(base, cache_key("q", "m", 0.25, 0));
        assert_ne!(base, cache_key("p", "n", 0.25, 0));
        assert_ne!(base, cache_key("p", "m", 0.6, 0));
        assert_ne!(base, cache_key("p", "m", 0.25, 1));
        assert_eq!(base, cache_key("p", "m", 0.25, 0));
    }
}
