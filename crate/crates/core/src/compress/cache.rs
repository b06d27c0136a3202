//! Persistent compressed-size cache.
//!
//! File format: one record per line, `hex-digest TAB compressor-id TAB bits`,
//! where the digest is SHA-256 of the uncompressed content and `bits` is an
//! integer. Records are written sorted so the file is reproducible.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::RwLock;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type ContentDigest = [u8; 32];

pub fn digest(bytes: &[u8]) -> ContentDigest {
    Sha256::digest(bytes).into()
}

#[derive(Debug, Default)]
pub struct SizeCache {
    entries: RwLock<HashMap<(String, ContentDigest), u64>>,
}

impl SizeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, compressor: &str, key: &ContentDigest) -> Option<u64> {
        let map = self.entries.read().unwrap_or_else(|e| e.into_inner());
        map.get(&(compressor.to_owned(), *key)).copied()
    }

    pub fn insert(&self, compressor: &str, key: ContentDigest, bits: u64) {
        let mut map = self.entries.write().unwrap_or_else(|e| e.into_inner());
        map.insert((compressor.to_owned(), key), bits);
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Loads a cache file. A missing file yields an empty cache.
    pub fn load(path: &Path) -> Result<Self> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::new()),
            Err(e) => return Err(e.into()),
        };
        let cache = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| Error::CacheFormat {
                line: i + 1,
                reason: reason.to_owned(),
            };
            let mut fields = line.split('\t');
            let (Some(hex_digest), Some(id), Some(bits), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(bad("expected three tab-separated fields"));
            };
            let key: ContentDigest = hex::decode(hex_digest)
                .ok()
                .and_then(|v| v.try_into().ok())
                .ok_or_else(|| bad("digest is not 64 hex digits"))?;
            let bits: u64 = bits.parse().map_err(|_| bad("bits is not an integer"))?;
            cache.insert(id, key, bits);
        }
        Ok(cache)
    }

    /// Writes the cache atomically (temporary file, then rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut records: Vec<(String, String, u64)> = {
            let map = self.entries.read().unwrap_or_else(|e| e.into_inner());
            map.iter()
                .map(|((id, key), bits)| (hex::encode(key), id.clone(), *bits))
                .collect()
        };
        records.sort();
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            for (d, id, bits) in &records {
                writeln!(f, "{d}\t{id}\t{bits}")?;
            }
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        if let Some(dir) = dir {
            let _ = fs::File::open(dir).and_then(|d| d.sync_all());
        }
        Ok(())
    }
}
