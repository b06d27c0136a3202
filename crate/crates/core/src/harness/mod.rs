//! Empirical checks of the list-distance properties on a complexity source.
//!
//! Every report carries the raw values it was decided from, the seed that
//! generated its inputs, and the allowance it was judged against.

mod cluster;
mod demos;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::complexity::ComplexitySource;
use crate::error::{Error, Result};
use crate::estimate::{emax, emin, sum_bound};
use crate::model::{canonicalize, encode_list, ByteString, StringList};

pub use cluster::{cluster, Dendrogram, Linkage, Merge};
pub use demos::{
    additivity_demo, counterexample_strings, minimal_overlap_demo, normalization_violation_demo, random_bits,
    AdditivityCase, AdditivityReport, MinimalOverlapReport, NormalizationReport,
};

/// Additive slack standing in for logarithmic error terms.
pub fn allowance(max_bits: f64) -> f64 {
    64.0 + 4.0 * max_bits.max(2.0).log2()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// SHA-256 over the encoded input lists.
    pub inputs: String,
    pub values: BTreeMap<String, f64>,
    pub slack: f64,
    pub allowance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub property: String,
    pub seed: u64,
    pub trials: usize,
    /// Slack of the trial closest to (or furthest over) its allowance.
    pub worst_slack: f64,
    /// That trial's allowance.
    pub allowance: f64,
    pub records: Vec<TrialRecord>,
    pub pass: bool,
}

impl ViolationReport {
    fn from_records(property: &str, seed: u64, records: Vec<TrialRecord>) -> Self {
        let worst = records
            .iter()
            .max_by(|a, b| (a.slack - a.allowance).total_cmp(&(b.slack - b.allowance)))
            .map_or((f64::NEG_INFINITY, 0.0), |r| (r.slack, r.allowance));
        ViolationReport {
            property: property.into(),
            seed,
            trials: records.len(),
            worst_slack: worst.0,
            allowance: worst.1,
            pass: worst.0 <= worst.1,
            records,
        }
    }

    /// Trials whose slack exceeds their allowance.
    pub fn violations(&self) -> usize {
        self.records.iter().filter(|r| r.slack > r.allowance).count()
    }
}

fn digest_lists(lists: &[&StringList]) -> String {
    let mut h = Sha256::new();
    for l in lists {
        h.update(encode_list(l).as_bytes());
    }
    hex::encode(h.finalize())
}

fn values<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContentKind {
    Text,
    Binary,
    Random,
}

const WORDS: &[&str] = &[
    "the",
    "of",
    "and",
    "list",
    "string",
    "program",
    "shortest",
    "machine",
    "bits",
    "distance",
    "metric",
    "compress",
    "window",
    "match",
    "literal",
    "random",
    "entropy",
    "order",
    "element",
    "length",
    "common",
    "information",
    "symmetry",
    "source",
    "triangle",
    "encode",
    "decode",
    "color",
    "graph",
    "node",
];

/// Seeded generator of test strings and lists.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
    pub min_len: usize,
    pub max_len: usize,
    /// Previously drawn elements; later draws may mutate them.
    pool: Vec<ByteString>,
}

impl Sampler {
    pub fn new(seed: u64, min_len: usize, max_len: usize) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            min_len,
            max_len: max_len.max(min_len),
            pool: Vec::new(),
        }
    }

    pub fn content(&mut self, kind: ContentKind, len: usize) -> ByteString {
        let rng = &mut self.rng;
        let bytes = match kind {
            ContentKind::Random => {
                let mut v = vec![0u8; len];
                rng.fill_bytes(&mut v);
                v
            }
            ContentKind::Text => {
                let mut v = Vec::with_capacity(len + 16);
                while v.len() < len {
                    v.extend_from_slice(WORDS[rng.gen_range(0..WORDS.len())].as_bytes());
                    v.push(if rng.gen_ratio(1, 12) { b'\n' } else { b' ' });
                }
                v.truncate(len);
                v
            }
            ContentKind::Binary => {
                let mut v = Vec::with_capacity(len + 8);
                let mut counter: u32 = rng.gen();
                let tag: u16 = rng.gen();
                while v.len() < len {
                    counter = counter.wrapping_add(rng.gen_range(1..5));
                    v.extend_from_slice(&counter.to_le_bytes());
                    v.extend_from_slice(&tag.to_le_bytes());
                    v.push(rng.gen_range(0..4));
                    v.push(0);
                }
                v.truncate(len);
                v
            }
        };
        ByteString::new(bytes)
    }

    /// A fresh element of random kind and length, or with probability 1/3 a
    /// lightly edited copy of an earlier one.
    pub fn element(&mut self) -> ByteString {
        if !self.pool.is_empty() && self.rng.gen_ratio(1, 3) {
            let base = self.pool[self.rng.gen_range(0..self.pool.len())].clone();
            let edits = self.rng.gen_range(1..=8);
            return self.edited(&base, edits);
        }
        let kind = [ContentKind::Text, ContentKind::Binary, ContentKind::Random][self.rng.gen_range(0..3)];
        let len = self.rng.gen_range(self.min_len..=self.max_len);
        let e = self.content(kind, len);
        self.pool.push(e.clone());
        e
    }

    /// `base` with `edits` random byte substitutions.
    pub fn edited(&mut self, base: &ByteString, edits: usize) -> ByteString {
        let mut v = base.as_bytes().to_vec();
        if !v.is_empty() {
            for _ in 0..edits {
                let i = self.rng.gen_range(0..v.len());
                v[i] = self.rng.gen();
            }
        }
        ByteString::new(v)
    }

    pub fn list(&mut self, m: usize) -> Result<StringList> {
        canonicalize((0..m).map(|_| self.element()).collect::<Vec<_>>())
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// The shipped sample corpus: near-duplicate pairs of two text files and of
/// one binary record file, plus two unrelated random files.
pub fn fixture_corpus() -> Vec<(String, ByteString)> {
    let mut s = Sampler::new(2024, 0, 0);
    let mut out = Vec::new();
    for (stem, kind, ext, len) in [
        ("notes", ContentKind::Text, "txt", 12_000),
        ("log", ContentKind::Text, "txt", 9_000),
        ("records", ContentKind::Binary, "bin", 10_000),
    ] {
        let a = s.content(kind, len);
        let b = s.edited(&a, 40);
        out.push((format!("{stem}-a.{ext}"), a));
        out.push((format!("{stem}-b.{ext}"), b));
    }
    for tag in ["a", "b"] {
        let r = s.content(ContentKind::Random, 8192);
        out.push((format!("random-{tag}.bin"), r));
    }
    out
}

/// Three reports from one sampled batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub definiteness: ViolationReport,
    pub symmetry: ViolationReport,
    pub triangle: ViolationReport,
}

impl MetricReport {
    pub fn pass(&self) -> bool {
        self.definiteness.pass && self.symmetry.pass && self.triangle.pass
    }
}

struct MetricTrial {
    x: StringList,
    y: StringList,
    z: StringList,
    shuffled: Vec<ByteString>,
    repeated: ByteString,
}

/// Samples `trials` triples of lists (one to three elements each) and
/// checks definiteness, permutation symmetry and the triangle inequality
/// for `Ê_max`. Definiteness requires all-equal lists to score at most
/// `0.05 · Ĉ(element)` and mixed lists above zero.
pub fn metric_check<S: ComplexitySource>(
    sampler: &mut Sampler,
    seed: u64,
    trials: usize,
    src: &S,
) -> Result<MetricReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut inputs = Vec::with_capacity(trials);
    for _ in 0..trials {
        let (mx, my, mz) = (
            sampler.rng().gen_range(1..=3),
            sampler.rng().gen_range(1..=3),
            sampler.rng().gen_range(1..=3),
        );
        let x = sampler.list(mx)?;
        let y = sampler.list(my)?;
        let z = sampler.list(mz)?;
        let mut shuffled = x.concat(&y).into_vec();
        shuffled.shuffle(sampler.rng());
        let repeated = x.get(0).clone();
        inputs.push(MetricTrial {
            x,
            y,
            z,
            shuffled,
            repeated,
        });
    }
    let rows: Vec<(TrialRecord, TrialRecord, TrialRecord)> = inputs
        .par_iter()
        .enumerate()
        .map(|(t, tr)| metric_trial(t, tr, src))
        .collect::<Result<_>>()?;
    let (mut d, mut s, mut tri) = (Vec::new(), Vec::new(), Vec::new());
    for (a, b, c) in rows {
        d.push(a);
        s.push(b);
        tri.push(c);
    }
    Ok(MetricReport {
        definiteness: ViolationReport::from_records("definiteness", seed, d),
        symmetry: ViolationReport::from_records("symmetry", seed, s),
        triangle: ViolationReport::from_records("triangle", seed, tri),
    })
}

fn metric_trial<S: ComplexitySource>(
    t: usize,
    tr: &MetricTrial,
    src: &S,
) -> Result<(TrialRecord, TrialRecord, TrialRecord)> {
    let same = canonicalize(vec![tr.repeated.clone(); 3])?;
    let e_same = emax(&same, src)?.value;
    let c_elem = src.complexity(tr.repeated.as_bytes())?.bits;
    let xy = tr.x.concat(&tr.y);
    let e_xy = emax(&xy, src)?.value;
    let mixed_positive = xy.all_equal() || e_xy > 0.0;
    let definiteness = TrialRecord {
        trial: t,
        inputs: digest_lists(&[&same, &xy]),
        values: values([("emax_all_equal", e_same), ("element_bits", c_elem), ("emax_xy", e_xy)]),
        slack: if mixed_positive {
            e_same - 0.05 * c_elem
        } else {
            f64::INFINITY
        },
        allowance: 0.0,
    };

    let permuted = canonicalize(tr.shuffled.clone())?;
    let e_perm = emax(&permuted, src)?.value;
    let symmetry = TrialRecord {
        trial: t,
        inputs: digest_lists(&[&xy]),
        values: values([("emax_xy", e_xy), ("emax_permuted", e_perm)]),
        slack: (e_perm - e_xy).abs(),
        allowance: 0.0,
    };

    let xz = tr.x.concat(&tr.z);
    let zy = tr.z.concat(&tr.y);
    let e_xz = emax(&xz, src)?.value;
    let e_zy = emax(&zy, src)?.value;
    let max_bits = [&xy, &xz, &zy].iter().map(|l| 8 * l.total_len()).max().unwrap_or(0) as f64;
    let triangle = TrialRecord {
        trial: t,
        inputs: digest_lists(&[&tr.x, &tr.y, &tr.z]),
        values: values([("emax_xy", e_xy), ("emax_xz", e_xz), ("emax_zy", e_zy)]),
        slack: e_xy - e_xz - e_zy,
        allowance: allowance(max_bits),
    };
    Ok((definiteness, symmetry, triangle))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub emin: f64,
    pub emax: f64,
    pub sum_bound: f64,
    /// `Ê_min − Ê_max`; never positive.
    pub left_slack: f64,
    /// `Ê_max − sum_bound`.
    pub right_slack: f64,
    pub allowance: f64,
    pub pass: bool,
}

/// `Ê_min ≤ Ê_max` exactly and `Ê_max ≤ sum_bound + allowance`.
pub fn inequality_chain_check<S: ComplexitySource>(list: &StringList, src: &S) -> Result<ChainReport> {
    if list.m() < 2 {
        return Err(Error::TooFewElements {
            needed: 2,
            got: list.m(),
        });
    }
    let lo = emin(list, src)?.value;
    let hi = emax(list, src)?.value;
    let sb = sum_bound(list, src)?.value;
    let allow = allowance(8.0 * list.total_len() as f64);
    Ok(ChainReport {
        emin: lo,
        emax: hi,
        sum_bound: sb,
        left_slack: lo - hi,
        right_slack: hi - sb,
        allowance: allow,
        pass: lo <= hi && hi - sb <= allow,
    })
}

/// The chain over `trials` sampled lists with three to five elements.
pub fn chain_suite<S: ComplexitySource>(
    sampler: &mut Sampler,
    seed: u64,
    trials: usize,
    src: &S,
) -> Result<ViolationReport> {
    let lists: Vec<StringList> = (0..trials)
        .map(|_| {
            let m = sampler.rng().gen_range(3..=5);
            sampler.list(m)
        })
        .collect::<Result<_>>()?;
    let records = lists
        .par_iter()
        .enumerate()
        .map(|(t, list)| {
            let r = inequality_chain_check(list, src)?;
            Ok(TrialRecord {
                trial: t,
                inputs: digest_lists(&[list]),
                values: values([
                    ("m", list.m() as f64),
                    ("emin", r.emin),
                    ("emax", r.emax),
                    ("sum_bound", r.sum_bound),
                ]),
                slack: if r.left_slack > 0.0 {
                    f64::INFINITY
                } else {
                    r.right_slack
                },
                allowance: r.allowance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ViolationReport::from_records("inequality-chain", seed, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compress::Compressor;

    #[test]
    fn allowance_grows_logarithmically() {
        assert_eq!(allowance(1024.0), 104.0);
        assert_eq!(allowance(0.0), 68.0);
    }

    #[test]
    fn sampler_is_reproducible() {
        let a = Sampler::new(3, 100, 200).list(3).unwrap();
        let b = Sampler::new(3, 100, 200).list(3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, Sampler::new(4, 100, 200).list(3).unwrap());
        assert!(a.iter().all(|e| (100..=200).contains(&e.len())));
    }

    #[test]
    fn small_metric_batch_passes() {
        let c = Compressor::builtin();
        let mut s = Sampler::new(1, 1024, 4096);
        let r = metric_check(&mut s, 1, 6, &c).unwrap();
        assert_eq!(r.symmetry.worst_slack, 0.0);
        assert!(r.pass(), "{r:#?}");
        assert_eq!(r.triangle.records.len(), 6);
    }

    #[test]
    fn chain_on_all_equal_and_singletons() {
        let c = Compressor::builtin();
        let x = Sampler::new(2, 2048, 2048).element();
        let same = canonicalize(vec![x.clone(); 3]).unwrap();
        let r = inequality_chain_check(&same, &c).unwrap();
        assert!(r.pass && r.left_slack <= 0.0);
        let one = canonicalize([x]).unwrap();
        assert!(matches!(
            inequality_chain_check(&one, &c),
            Err(Error::TooFewElements { .. })
        ));
    }

    #[test]
    fn report_pass_is_recomputable() {
        let c = Compressor::builtin();
        let mut s = Sampler::new(5, 512, 1024);
        let r = chain_suite(&mut s, 5, 4, &c).unwrap();
        let recomputed = r.records.iter().all(|t| t.slack <= t.allowance);
        assert_eq!(r.pass, recomputed);
        assert_eq!(r.violations(), 0);
    }
}
