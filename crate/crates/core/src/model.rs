//! Byte strings, canonically ordered lists of byte strings, and the
//! self-delimiting list encoding fed to compressors.
//!
//! # List encoding
//!
//! `encode_list` writes every element as
//!
//! ```text
//! delta(len + 1)  zero padding to the next byte boundary  raw bytes
//! ```
//!
//! where `delta(v)` is the Elias delta code of `v >= 1`, written MSB first:
//! with `N = floor(log2 v)` and `L = N + 1`, emit `floor(log2 L)` zero bits,
//! then `L` in binary (`floor(log2 L) + 1` bits), then the low `N` bits of
//! `v`. There is no separator between elements and no element count. The
//! list `("")` therefore encodes to the single byte `0x80` and `("a")` to
//! `0x40 0x61`.
//!
//! Decoding is strict: padding bits must be zero, lengths must fit the
//! remaining input, the elements must already be in canonical order and
//! nothing may follow the last element. This makes the encoding a
//! bijection between [`StringList`] values and its image.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite string of bytes. The empty string is allowed.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ByteString(#[serde(with = "hex_bytes")] Vec<u8>);

impl ByteString {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        ByteString(bytes.into())
    }

    pub fn empty() -> Self {
        ByteString(Vec::new())
    }

    /// Parses a textual bit string such as `"0110"` into a byte string
    /// holding one `0x00`/`0x01` byte per bit. This is the representation
    /// the toy machine works with.
    pub fn from_bits(bits: &str) -> Result<Self> {
        bits.bytes()
            .map(|c| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                other => Err(Error::InvalidArgument(format!(
                    "bit string contains {:?}",
                    other as char
                ))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(ByteString)
    }

    /// Renders a `0x00`/`0x01` byte string as text, e.g. `"0110"`.
    pub fn to_bit_string(&self) -> Result<String> {
        self.0
            .iter()
            .map(|&b| match b {
                0 => Ok('0'),
                1 => Ok('1'),
                other => Err(Error::NotBits(other)),
            })
            .collect()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }
}

impl From<Vec<u8>> for ByteString {
    fn from(v: Vec<u8>) -> Self {
        ByteString(v)
    }
}

impl From<&[u8]> for ByteString {
    fn from(v: &[u8]) -> Self {
        ByteString(v.to_vec())
    }
}

impl From<&str> for ByteString {
    fn from(v: &str) -> Self {
        ByteString(v.as_bytes().to_vec())
    }
}

impl AsRef<[u8]> for ByteString {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for ByteString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() <= 32 {
            write!(f, "{:?}", String::from_utf8_lossy(&self.0))
        } else {
            write!(f, "<{} bytes>", self.0.len())
        }
    }
}

/// Length-increasing order, ties broken by unsigned byte-wise comparison.
impl Ord for ByteString {
    fn cmp(&self, other: &Self) -> Ordering {
        canonical_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for ByteString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn canonical_cmp(a: &[u8], b: &[u8]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// A nonempty bag of byte strings kept in canonical order.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<ByteString>", into = "Vec<ByteString>")]
pub struct StringList(Vec<ByteString>);

impl StringList {
    /// Number of elements, counting duplicates.
    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn elements(&self) -> &[ByteString] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &ByteString {
        &self.0[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ByteString> {
        self.0.iter()
    }

    pub fn all_equal(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    pub fn contains(&self, x: &ByteString) -> bool {
        self.0.binary_search(x).is_ok()
    }

    /// The list with the element at `i` removed; `None` for singletons.
    pub fn without(&self, i: usize) -> Option<StringList> {
        if self.0.len() < 2 {
            return None;
        }
        let mut v = self.0.clone();
        v.remove(i);
        Some(StringList(v))
    }

    /// The set of distinct elements, as a list.
    pub fn dedup(&self) -> StringList {
        let mut v = self.0.clone();
        v.dedup();
        StringList(v)
    }

    /// Merges two lists and re-canonicalizes, i.e. the list `XY`.
    pub fn concat(&self, other: &StringList) -> StringList {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        v.sort();
        StringList(v)
    }

    pub fn into_vec(self) -> Vec<ByteString> {
        self.0
    }

    pub fn total_len(&self) -> usize {
        self.0.iter().map(ByteString::len).sum()
    }
}

impl fmt::Debug for StringList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("StringList").field(&self.0).finish()
    }
}

impl TryFrom<Vec<ByteString>> for StringList {
    type Error = Error;

    fn try_from(v: Vec<ByteString>) -> Result<Self> {
        canonicalize(v)
    }
}

impl From<StringList> for Vec<ByteString> {
    fn from(l: StringList) -> Self {
        l.0
    }
}

impl<'a> IntoIterator for &'a StringList {
    type Item = &'a ByteString;
    type IntoIter = std::slice::Iter<'a, ByteString>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Sorts `items` into canonical order. Duplicates are kept.
pub fn canonicalize<I>(items: I) -> Result<StringList>
where
    I: IntoIterator,
    I::Item: Into<ByteString>,
{
    let mut v: Vec<ByteString> = items.into_iter().map(Into::into).collect();
    if v.is_empty() {
        return Err(Error::EmptyList);
    }
    v.sort();
    Ok(StringList(v))
}

/// Self-delimiting encoding of a list; see the module docs for the format.
pub fn encode_list(list: &StringList) -> ByteString {
    ByteString(encode_sequence(list.elements()))
}

/// Element-wise encoding of an arbitrary (not necessarily canonical)
/// sequence. `encode_list` is this function restricted to canonical lists.
pub fn encode_sequence(elements: &[ByteString]) -> Vec<u8> {
    let mut out = Vec::with_capacity(elements.iter().map(|e| e.len() + 2).sum());
    for e in elements {
        write_header(&mut out, e.len() as u64 + 1);
        out.extend_from_slice(e.as_bytes());
    }
    out
}

/// Inverse of [`encode_list`].
pub fn decode_list(bytes: &[u8]) -> Result<StringList> {
    let elements = decode_sequence(bytes)?;
    if elements.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::MalformedEncoding("elements not in canonical order"));
    }
    Ok(StringList(elements))
}

/// Inverse of [`encode_sequence`] for nonempty sequences.
pub fn decode_sequence(bytes: &[u8]) -> Result<Vec<ByteString>> {
    if bytes.is_empty() {
        return Err(Error::MalformedEncoding("empty input"));
    }
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < bytes.len() {
        let (v, header_len) = match read_header(&bytes[pos..]) {
            Ok(h) => h,
            // A well-formed prefix followed by junk reads as trailing bytes.
            Err(_) if !out.is_empty() => return Err(Error::TrailingBytes(bytes.len() - pos)),
            Err(e) => return Err(e),
        };
        let len = (v - 1) as usize;
        let start = pos + header_len;
        if bytes.len() - start < len {
            if out.is_empty() {
                return Err(Error::MalformedEncoding("element runs past end of input"));
            }
            return Err(Error::TrailingBytes(bytes.len() - pos));
        }
        out.push(ByteString(bytes[start..start + len].to_vec()));
        pos = start + len;
    }
    Ok(out)
}

fn write_header(out: &mut Vec<u8>, v: u64) {
    debug_assert!(v >= 1);
    let n = 63 - v.leading_zeros();
    let l = (n + 1) as u64;
    let ln = 63 - l.leading_zeros();
    let mut bits = BitSink::default();
    bits.push_n(0, ln);
    bits.push_n(l, ln + 1);
    bits.push_n(v & ((1u64 << n) - 1), n);
    out.extend_from_slice(&bits.finish());
}

/// Returns `(value, header length in bytes)`.
fn read_header(bytes: &[u8]) -> Result<(u64, usize)> {
    let mut r = BitSource { bytes, pos: 0 };
    let mut zeros = 0;
    while !r.next()? {
        zeros += 1;
        if zeros > 6 {
            return Err(Error::MalformedEncoding("length header too long"));
        }
    }
    let mut l: u64 = 1;
    for _ in 0..zeros {
        l = (l << 1) | r.next()? as u64;
    }
    if l > 64 {
        return Err(Error::MalformedEncoding("length header out of range"));
    }
    let n = (l - 1) as u32;
    let mut v: u64 = 1;
    for _ in 0..n {
        v = (v << 1) | r.next()? as u64;
    }
    while !r.pos.is_multiple_of(8) {
        if r.next()? {
            return Err(Error::MalformedEncoding("nonzero padding"));
        }
    }
    Ok((v, r.pos / 8))
}

#[derive(Default)]
struct BitSink {
    bytes: Vec<u8>,
    acc: u8,
    used: u32,
}

impl BitSink {
    fn push(&mut self, bit: bool) {
        self.acc = (self.acc << 1) | bit as u8;
        self.used += 1;
        if self.used == 8 {
            self.bytes.push(self.acc);
            self.acc = 0;
            self.used = 0;
        }
    }

    fn push_n(&mut self, value: u64, n: u32) {
        for i in (0..n).rev() {
            self.push((value >> i) & 1 == 1);
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.used > 0 {
            self.bytes.push(self.acc << (8 - self.used));
        }
        self.bytes
    }
}

struct BitSource<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl BitSource<'_> {
    fn next(&mut self) -> Result<bool> {
        let byte = self
            .bytes
            .get(self.pos / 8)
            .ok_or(Error::MalformedEncoding("truncated length header"))?;
        let bit = (byte >> (7 - self.pos % 8)) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}
