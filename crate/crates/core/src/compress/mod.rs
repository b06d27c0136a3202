//! Compressors as computable upper bounds on complexity.

mod cache;
mod external;
pub mod lz;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use cache::{digest, ContentDigest, SizeCache};
pub use external::{external_compressed_size, ExternalCommand};

use crate::complexity::{concat, ComplexityEstimate, ComplexitySource, Mode};
use crate::error::{Error, Result};

pub const BUILTIN_ID: &str = "builtin-lz77/2";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompressorKind {
    BuiltIn,
    ExternalProcess,
}

/// Identity and contract of a compressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressorProfile {
    pub id: String,
    pub deterministic: bool,
    /// Size of the empty input's compressed form.
    pub overhead_bits: f64,
    pub kind: CompressorKind,
}

#[derive(Debug, Clone)]
enum Backend {
    BuiltIn,
    External(ExternalCommand),
}

/// A compressor with an optional shared size cache.
#[derive(Debug, Clone)]
pub struct Compressor {
    profile: CompressorProfile,
    backend: Backend,
    cache: Option<Arc<SizeCache>>,
}

impl Compressor {
    pub fn builtin() -> Self {
        Compressor {
            profile: CompressorProfile {
                id: BUILTIN_ID.into(),
                deterministic: true,
                overhead_bits: 8.0 * lz::compress(&[]).len() as f64,
                kind: CompressorKind::BuiltIn,
            },
            backend: Backend::BuiltIn,
            cache: None,
        }
    }

    /// Wraps an external command. The empty input is compressed once to
    /// measure the header overhead; the command is trusted to be
    /// deterministic (enable `audit` on the command to verify every call).
    pub fn external(cmd: ExternalCommand) -> Result<Self> {
        let overhead = cmd.run(&[])?;
        Ok(Compressor {
            profile: CompressorProfile {
                id: cmd.id(),
                deterministic: true,
                overhead_bits: 8.0 * overhead as f64,
                kind: CompressorKind::ExternalProcess,
            },
            backend: Backend::External(cmd),
            cache: None,
        })
    }

    pub fn with_cache(mut self, cache: Arc<SizeCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn profile(&self) -> &CompressorProfile {
        &self.profile
    }

    pub fn cache(&self) -> Option<&Arc<SizeCache>> {
        self.cache.as_ref()
    }

    /// Size of the compressed form without consulting the cache.
    pub fn measure(&self, bytes: &[u8]) -> Result<u64> {
        let n = match &self.backend {
            Backend::BuiltIn => lz::compress(bytes).len(),
            Backend::External(cmd) => external_compressed_size(bytes, cmd)?.bits as usize / 8,
        };
        Ok(8 * n as u64)
    }

    /// `8 × |compress(bytes)|`, cached by content digest.
    pub fn compressed_size(&self, bytes: &[u8]) -> Result<ComplexityEstimate> {
        if !self.profile.deterministic {
            return Err(Error::NotDeterministic(self.profile.id.clone()));
        }
        let bits = match &self.cache {
            Some(cache) => {
                let key = digest(bytes);
                match cache.get(&self.profile.id, &key) {
                    Some(bits) => bits,
                    None => {
                        let bits = self.measure(bytes)?;
                        cache.insert(&self.profile.id, key, bits);
                        bits
                    }
                }
            }
            None => self.measure(bytes)?,
        };
        Ok(ComplexityEstimate::new(
            bits as f64,
            self.profile.id.clone(),
            Mode::Unconditional,
        ))
    }

    /// `max(0, C(condition ‖ BOUNDARY ‖ target) − C(condition))`.
    pub fn conditional_size(&self, target: &[u8], condition: &[u8]) -> Result<ComplexityEstimate> {
        let joint = self.compressed_size(&concat(condition, target))?;
        let cond = self.compressed_size(condition)?;
        Ok(ComplexityEstimate::new(
            (joint.bits - cond.bits).max(0.0),
            self.profile.id.clone(),
            Mode::ConditionalViaSoi,
        ))
    }
}

impl ComplexitySource for Compressor {
    fn id(&self) -> &str {
        &self.profile.id
    }

    fn complexity(&self, bytes: &[u8]) -> Result<ComplexityEstimate> {
        self.compressed_size(bytes)
    }

    fn conditional(&self, target: &[u8], condition: &[u8]) -> Result<ComplexityEstimate> {
        self.conditional_size(target, condition)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngCore, SeedableRng};

    fn random_bytes(seed: u64, n: usize) -> Vec<u8> {
        let mut v = vec![0u8; n];
        rand_chacha::ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut v);
        v
    }

    #[test]
    fn empty_string_costs_the_header() {
        let c = Compressor::builtin();
        let h = c.compressed_size(&[]).unwrap().bits;
        assert_eq!(h, 8.0);
        assert_eq!(c.profile().overhead_bits, 8.0);
    }

    #[test]
    fn expansion_bound_holds() {
        let c = Compressor::builtin();
        let h = c.profile().overhead_bits;
        for (seed, n) in [(1u64, 10usize), (2, 1000), (3, 70_000)] {
            let b = random_bytes(seed, n);
            let bits = c.compressed_size(&b).unwrap().bits;
            let raw = 8.0 * n as f64;
            assert!(bits <= raw + h + 0.01 * raw + 64.0, "n={n}: {bits}");
        }
    }

    #[test]
    fn self_conditioning_collapses() {
        let c = Compressor::builtin();
        let x = random_bytes(7, 100 * 1024);
        let cx = c.compressed_size(&x).unwrap().bits;
        let cond = c.conditional_size(&x, &x).unwrap();
        assert_eq!(cond.mode, Mode::ConditionalViaSoi);
        assert!(cond.bits <= 0.05 * cx, "{} vs {cx}", cond.bits);
    }

    #[test]
    fn empty_condition_is_roughly_unconditional() {
        let c = Compressor::builtin();
        let x = random_bytes(8, 5000);
        let cx = c.compressed_size(&x).unwrap().bits;
        let h = c.profile().overhead_bits;
        let cond = c.conditional_size(&x, &[]).unwrap().bits;
        assert!((cond - (cx - h)).abs() <= 128.0, "{cond} vs {}", cx - h);
    }

    #[test]
    fn conditional_clamps_at_zero() {
        // Whatever the compressor does, the clamp keeps results nonnegative.
        let c = Compressor::builtin();
        for (t, y) in [(&b""[..], &b"abcdefgh"[..]), (b"a", b"aaaaaaaaaaaaaaaa")] {
            assert!(c.conditional_size(t, y).unwrap().bits >= 0.0);
        }
    }

    #[test]
    fn cache_hits_match_recomputation() {
        let cache = Arc::new(SizeCache::new());
        let c = Compressor::builtin().with_cache(cache.clone());
        let x = random_bytes(9, 4096);
        let first = c.compressed_size(&x).unwrap();
        assert_eq!(cache.len(), 1);
        let second = c.compressed_size(&x).unwrap();
        assert_eq!(first, second);
        assert_eq!(first.bits as u64, c.measure(&x).unwrap());
    }
}
