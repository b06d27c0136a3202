//! The built-in compressor: greedy LZ77 over a 16 MiB window followed by a
//! fixed (non-adaptive) bit code.
//!
//! # Stream format
//!
//! ```text
//! 0x01                      coded block
//! LEB128(n)                 uncompressed length
//! token bits                MSB first, zero-padded to a whole byte
//! ```
//!
//! or, when that would not be shorter than the input itself,
//!
//! ```text
//! 0x02                      stored block
//! raw bytes                 the input, verbatim
//! ```
//!
//! so no input grows by more than one byte.
//!
//! Tokens are decoded until `n` bytes have been produced:
//!
//! ```text
//! 0   b7..b0                          literal byte
//! 10  gamma(length - 3)  offset - 1   copy `length` bytes from `offset` back
//! 11  gamma(r)  r × b7..b0            run of r raw bytes
//! ```
//!
//! `offset - 1` is a plain 24-bit field. `gamma(v)` for `v >= 1` with
//! `k = floor(log2 v)` writes `k` one-bits, a zero-bit, then the low `k` bits
//! of `v`, so it takes `2k + 1` bits. Copies may overlap their source.
//!
//! The parser is greedy. At each position it takes the longest candidate,
//! among the 48 most recent positions sharing a 4-byte hash, whose code is
//! shorter than that of the literals it covers. Every position is inserted
//! into the hash chains. Each maximal stretch of literals is then written as
//! a raw run when that is strictly shorter.

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u8 = 1;
pub const STORED: u8 = 2;

pub const WINDOW: usize = 1 << 24;
const MIN_MATCH: usize = 4;
const MAX_CHAIN: usize = 48;
const NICE_LEN: usize = 1 << 12;
const HASH_BITS: u32 = 17;
const NONE: u32 = u32::MAX;
const LITERAL_BITS: u64 = 9;
const OFFSET_BITS: u32 = 24;

fn gamma_bits(v: u64) -> u64 {
    2 * u64::from(63 - v.leading_zeros()) + 1
}

fn match_bits(len: usize) -> u64 {
    2 + gamma_bits((len - 3) as u64) + u64::from(OFFSET_BITS)
}

fn raw_run_bits(r: usize) -> u64 {
    2 + gamma_bits(r as u64) + 8 * r as u64
}

#[inline]
fn hash4(b: &[u8]) -> usize {
    let v = u32::from_le_bytes([b[0], b[1], b[2], b[3]]);
    (v.wrapping_mul(0x9E37_79B1) >> (32 - HASH_BITS)) as usize
}

struct MatchFinder {
    head: Vec<u32>,
    prev: Vec<u32>,
}

impl MatchFinder {
    fn new(n: usize) -> Self {
        MatchFinder {
            head: vec![NONE; 1 << HASH_BITS],
            prev: vec![NONE; n],
        }
    }

    fn insert(&mut self, data: &[u8], pos: usize) {
        if pos + MIN_MATCH <= data.len() {
            let h = hash4(&data[pos..]);
            self.prev[pos] = self.head[h];
            self.head[h] = pos as u32;
        }
    }

    /// Longest match at `pos` that is cheaper than the literals it replaces,
    /// as `(length, offset)`. Among equally long ones the nearest wins.
    fn find(&self, data: &[u8], pos: usize) -> Option<(usize, usize)> {
        if pos + MIN_MATCH > data.len() {
            return None;
        }
        let max_len = data.len() - pos;
        let mut cand = self.head[hash4(&data[pos..])];
        let mut best: Option<(usize, usize)> = None;
        let mut chain = 0;
        while cand != NONE && chain < MAX_CHAIN {
            let c = cand as usize;
            let offset = pos - c;
            if offset > WINDOW {
                break;
            }
            let best_len = best.map_or(0, |b| b.0);
            if best_len < max_len && data[c + best_len] == data[pos + best_len] {
                let len = common_prefix(&data[c..], &data[pos..], max_len);
                if len > best_len && len >= MIN_MATCH && match_bits(len) < LITERAL_BITS * len as u64 {
                    best = Some((len, offset));
                    if len >= NICE_LEN || len == max_len {
                        break;
                    }
                }
            }
            cand = self.prev[c];
            chain += 1;
        }
        best
    }
}

fn common_prefix(a: &[u8], b: &[u8], max: usize) -> usize {
    // a may overlap b (a starts earlier in the same buffer); comparing
    // byte-wise against the source stays correct for overlapping copies.
    let limit = max.min(a.len()).min(b.len());
    let mut i = 0;
    while i + 8 <= limit {
        let x = u64::from_le_bytes(a[i..i + 8].try_into().unwrap());
        let y = u64::from_le_bytes(b[i..i + 8].try_into().unwrap());
        if x != y {
            return i + ((x ^ y).trailing_zeros() / 8) as usize;
        }
        i += 8;
    }
    while i < limit && a[i] == b[i] {
        i += 1;
    }
    i
}

struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    used: u32,
}

impl BitWriter {
    fn new(out: Vec<u8>) -> Self {
        BitWriter { out, acc: 0, used: 0 }
    }

    /// Appends the low `n` bits of `v`, most significant first; `n <= 32`.
    fn put(&mut self, v: u64, n: u32) {
        debug_assert!(n <= 32);
        self.acc = (self.acc << n) | (v & ((1u64 << n) - 1));
        self.used += n;
        while self.used >= 8 {
            self.used -= 8;
            self.out.push((self.acc >> self.used) as u8);
        }
    }

    fn gamma(&mut self, v: u64) {
        debug_assert!(v >= 1);
        let k = 63 - v.leading_zeros();
        for _ in 0..k {
            self.put(1, 1);
        }
        self.put(0, 1);
        let low = v & ((1u64 << k) - 1);
        if k > 32 {
            self.put(low >> 32, k - 32);
            self.put(low, 32);
        } else {
            self.put(low, k);
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.used > 0 {
            self.out.push((self.acc << (8 - self.used)) as u8);
        }
        self.out
    }
}

struct BitReader<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn bit(&mut self) -> Result<bool> {
        let byte = self
            .input
            .get(self.pos / 8)
            .ok_or(Error::MalformedEncoding("truncated stream"))?;
        let b = (byte >> (7 - self.pos % 8)) & 1 == 1;
        self.pos += 1;
        Ok(b)
    }

    fn bits(&mut self, n: u32) -> Result<u64> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.bit()? as u64;
        }
        Ok(v)
    }

    fn gamma(&mut self) -> Result<u64> {
        let mut k = 0u32;
        while self.bit()? {
            k += 1;
            if k > 62 {
                return Err(Error::MalformedEncoding("gamma prefix too long"));
            }
        }
        Ok((1u64 << k) | self.bits(k)?)
    }
}

fn write_leb128(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7F) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn read_leb128(input: &[u8]) -> Result<(u64, usize)> {
    let mut v = 0u64;
    for (i, &b) in input.iter().enumerate().take(10) {
        v |= ((b & 0x7F) as u64) << (7 * i);
        if b & 0x80 == 0 {
            return Ok((v, i + 1));
        }
    }
    Err(Error::MalformedEncoding("bad length prefix"))
}

/// Compresses `data` into the format described in the module docs.
pub fn compress(data: &[u8]) -> Vec<u8> {
    let coded = compress_coded(data);
    if coded.len() <= data.len() {
        return coded;
    }
    let mut stored = Vec::with_capacity(data.len() + 1);
    stored.push(STORED);
    stored.extend_from_slice(data);
    stored
}

/// `(length, offset)`, or `(1, 0)` for a literal.
fn parse(data: &[u8]) -> Vec<(usize, usize)> {
    let mut finder = MatchFinder::new(data.len());
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < data.len() {
        let token = finder.find(data, pos).unwrap_or((1, 0));
        for p in pos..pos + token.0 {
            finder.insert(data, p);
        }
        pos += token.0;
        tokens.push(token);
    }
    tokens
}

fn compress_coded(data: &[u8]) -> Vec<u8> {
    let mut out = vec![FORMAT_VERSION];
    write_leb128(&mut out, data.len() as u64);
    if data.is_empty() {
        return out;
    }
    let tokens = parse(data);
    let mut w = BitWriter::new(out);
    let mut pos = 0;
    let mut t = 0;
    while t < tokens.len() {
        let (len, offset) = tokens[t];
        if offset != 0 {
            w.put(0b10, 2);
            w.gamma((len - 3) as u64);
            w.put((offset - 1) as u64, OFFSET_BITS);
            pos += len;
            t += 1;
            continue;
        }
        let run = tokens[t..].iter().take_while(|tok| tok.1 == 0).count();
        let bytes = &data[pos..pos + run];
        let raw = raw_run_bits(run) < LITERAL_BITS * run as u64;
        if raw {
            w.put(0b11, 2);
            w.gamma(run as u64);
        }
        for &b in bytes {
            if !raw {
                w.put(0, 1);
            }
            w.put(b as u64, 8);
        }
        pos += run;
        t += run;
    }
    w.finish()
}

/// Inverse of [`compress`].
pub fn decompress(stream: &[u8]) -> Result<Vec<u8>> {
    match stream.first() {
        Some(&FORMAT_VERSION) => {}
        Some(&STORED) => return Ok(stream[1..].to_vec()),
        _ => return Err(Error::MalformedEncoding("unknown compressed format")),
    }
    let (n, used) = read_leb128(&stream[1..])?;
    let n = usize::try_from(n).map_err(|_| Error::MalformedEncoding("length overflow"))?;
    let mut out = Vec::with_capacity(n.min(1 << 24));
    let mut r = BitReader {
        input: &stream[1 + used..],
        pos: 0,
    };
    while out.len() < n {
        if !r.bit()? {
            out.push(r.bits(8)? as u8);
        } else if !r.bit()? {
            let len = r.gamma()? as usize + 3;
            let offset = r.bits(OFFSET_BITS)? as usize + 1;
            if offset > out.len() || len > n - out.len() {
                return Err(Error::MalformedEncoding("match out of range"));
            }
            let start = out.len() - offset;
            for i in 0..len {
                let b = out[start + i];
                out.push(b);
            }
        } else {
            let run = r.gamma()? as usize;
            if run > n - out.len() {
                return Err(Error::MalformedEncoding("raw run out of range"));
            }
            for _ in 0..run {
                out.push(r.bits(8)? as u8);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{RngCore, SeedableRng};

    fn random_bytes(seed: u64, n: usize) -> Vec<u8> {
        let mut v = vec![0u8; n];
        rand_chacha::ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut v);
        v
    }

    #[test]
    fn empty_input_is_header_only() {
        assert_eq!(compress(&[]), vec![STORED]);
        assert_eq!(compress_coded(&[]), vec![FORMAT_VERSION, 0]);
        assert_eq!(decompress(&[FORMAT_VERSION, 0]).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn zeros_collapse() {
        let data = vec![0u8; 100_000];
        let c = compress(&data);
        assert!(c.len() * 8 <= 8_000, "{} bytes", c.len());
        assert_eq!(decompress(&c).unwrap(), data);
    }

    #[test]
    fn small_random_inputs_fall_back_to_stored() {
        let data = random_bytes(12, 1000);
        let c = compress(&data);
        assert_eq!(c.len(), 1001);
        assert_eq!(c[0], STORED);
        assert_eq!(decompress(&c).unwrap(), data);
    }

    #[test]
    fn random_data_barely_expands() {
        let data = random_bytes(11, 100_000);
        let c = compress(&data);
        let bits = c.len() * 8;
        assert!(bits >= 792_000);
        assert!(bits <= 800_000 + 8_000 + 64 + 16, "{bits}");
        assert_eq!(decompress(&c).unwrap(), data);
    }

    #[test]
    fn second_copy_is_almost_free_across_the_window() {
        let x = random_bytes(5, 300 * 1024);
        let mut xx = x.clone();
        xx.extend_from_slice(&x);
        let (cx, cxx) = (compress_coded(&x).len(), compress(&xx).len());
        assert!(cxx - cx < 32, "C(x)={cx} C(xx)={cxx}");
        assert_eq!(decompress(&compress(&xx)).unwrap(), xx);
    }

    #[test]
    fn text_compresses() {
        let text = "the quick brown fox jumps over the lazy dog. ".repeat(200);
        let c = compress(text.as_bytes());
        assert!(c.len() < text.len() / 20);
        assert_eq!(decompress(&c).unwrap(), text.as_bytes());
    }

    #[test]
    fn code_lengths() {
        assert_eq!(
            (gamma_bits(1), gamma_bits(2), gamma_bits(3), gamma_bits(4)),
            (1, 3, 3, 5)
        );
        assert_eq!(match_bits(4), 27);
        assert_eq!(raw_run_bits(12), 105);
        let mut w = BitWriter::new(Vec::new());
        for v in [1u64, 2, 5, 1 << 40, u64::MAX >> 2] {
            w.gamma(v);
        }
        let bytes = w.finish();
        let mut r = BitReader { input: &bytes, pos: 0 };
        for v in [1u64, 2, 5, 1 << 40, u64::MAX >> 2] {
            assert_eq!(r.gamma().unwrap(), v);
        }
    }

    #[test]
    fn literal_stretches_become_raw_runs_only_when_shorter() {
        // 11 literals: 99 bits either way, so they stay literals
        let short: Vec<u8> = (0..11).collect();
        assert_eq!(compress_coded(&short).len(), 2 + 99usize.div_ceil(8));
        let long: Vec<u8> = (0..200).map(|i| (i * 7 % 251) as u8).collect();
        assert_eq!(
            compress_coded(&long).len(),
            3 + (raw_run_bits(200) as usize).div_ceil(8)
        );
        assert_eq!(decompress(&compress_coded(&long)).unwrap(), long);
    }

    #[test]
    fn copies_cost_the_same_at_any_distance() {
        let unit = random_bytes(3, 64);
        let near = [unit.clone(), unit.clone()].concat();
        let far = [unit.clone(), random_bytes(4, 100_000), unit.clone()].concat();
        assert_eq!(parse(&near).last(), Some(&(64, 64)));
        assert_eq!(parse(&far).last(), Some(&(64, 100_064)));
        let filler = compress_coded(&far[..100_064]).len();
        let near_extra = compress_coded(&near).len() - compress_coded(&unit).len();
        let far_extra = compress_coded(&far).len() - filler;
        // whole-byte rounding only
        assert!(near_extra.abs_diff(far_extra) <= 1, "{near_extra} vs {far_extra}");
    }

    #[test]
    fn truncated_streams_are_rejected() {
        let c = compress_coded(b"abcabcabcabcabcabcabc and then some more text");
        assert!(decompress(&c[..c.len() - 2]).is_err());
    }

    #[test]
    fn rejects_unknown_format() {
        assert!(decompress(&[]).is_err());
        assert!(decompress(&[9, 0]).is_err());
        assert_eq!(decompress(&[STORED, 7]).unwrap(), vec![7]);
    }

    proptest! {
        #[test]
        fn round_trip(data in prop::collection::vec(prop_oneof![Just(0u8), Just(1u8), any::<u8>()], 0..3000)) {
            prop_assert_eq!(decompress(&compress(&data)).unwrap(), data);
        }

        #[test]
        fn deterministic(data in prop::collection::vec(any::<u8>(), 0..500)) {
            prop_assert_eq!(compress(&data), compress(&data));
        }
    }
}
