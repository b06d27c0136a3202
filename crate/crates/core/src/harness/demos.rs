use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complexity::ComplexitySource;
use crate::error::{Error, Result};
use crate::estimate::{emax, mutual_information, normalized_list, DistanceReport, NormScheme};
use crate::model::{canonicalize, encode_list, ByteString, StringList};

/// `nbits` seeded random bits packed MSB first; a partial last byte is
/// zero-padded.
pub fn random_bits<R: Rng>(rng: &mut R, nbits: usize) -> Vec<u8> {
    let mut v = vec![0u8; nbits.div_ceil(8)];
    rng.fill(&mut v[..]);
    if !nbits.is_multiple_of(8) {
        let last = v.len() - 1;
        v[last] &= 0xFFu8 << (8 - nbits % 8);
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivityCase {
    pub emax_xy: f64,
    pub emax_x: f64,
    pub emax_y: f64,
    pub sum: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub n: usize,
    pub seed: u64,
    /// Shared content: `X = (ε, x)`, `Y = (ε, x)`; expects
    /// `Ê(XY) ≤ 0.6 · (Ê(X) + Ê(Y))`.
    pub subadditive: AdditivityCase,
    /// Independent content: `X = (x, x)`, `Y = (y, y)`; expects
    /// `Ê(XY) ≥ Ê(X) + Ê(Y) + 0.5n`.
    pub superadditive: AdditivityCase,
    pub pass: bool,
}

fn additivity_case<S: ComplexitySource>(x: &StringList, y: &StringList, src: &S) -> Result<(f64, f64, f64)> {
    let e_x = emax(x, src)?.value;
    let e_y = emax(y, src)?.value;
    let e_xy = emax(&x.concat(y), src)?.value;
    Ok((e_xy, e_x, e_y))
}

/// Both directions of non-additivity of `Ê_max` on one seed.
pub fn additivity_demo<S: ComplexitySource>(n: usize, seed: u64, src: &S) -> Result<AdditivityReport> {
    if n < 1000 {
        return Err(Error::InvalidArgument(format!("n must be at least 1000, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = ByteString::new(random_bits(&mut rng, n));
    let y = ByteString::new(random_bits(&mut rng, n));
    let eps = ByteString::empty();

    let xa = canonicalize([eps.clone(), x.clone()])?;
    let (e_xy, e_x, e_y) = additivity_case(&xa, &xa, src)?;
    let sum = e_x + e_y;
    let sub = AdditivityCase {
        emax_xy: e_xy,
        emax_x: e_x,
        emax_y: e_y,
        sum,
        threshold: 0.6 * sum,
        pass: e_xy <= 0.6 * sum,
    };

    let xb = canonicalize([x.clone(), x])?;
    let yb = canonicalize([y.clone(), y])?;
    let (e_xy, e_x, e_y) = additivity_case(&xb, &yb, src)?;
    let sum = e_x + e_y;
    let threshold = sum + 0.5 * n as f64;
    let sup = AdditivityCase {
        emax_xy: e_xy,
        emax_x: e_x,
        emax_y: e_y,
        sum,
        threshold,
        pass: e_xy >= threshold,
    };
    Ok(AdditivityReport {
        n,
        seed,
        pass: sub.pass && sup.pass,
        subadditive: sub,
        superadditive: sup,
    })
}

/// `x`: `n` random bits. `y`: `0.9n` random bits followed by `0.1n` zero
/// bits. Both packed MSB first.
pub fn counterexample_strings(n: usize, seed: u64) -> (ByteString, ByteString) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_bits(&mut rng, n);
    let head = n * 9 / 10;
    let mut y = random_bits(&mut rng, head);
    y.resize(n.div_ceil(8), 0);
    (ByteString::new(x), ByteString::new(y))
}

fn flip_bit(s: &ByteString, i: usize) -> ByteString {
    let mut v = s.as_bytes().to_vec();
    v[i / 8] ^= 0x80 >> (i % 8);
    ByteString::new(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub n: usize,
    pub seed: u64,
    pub scheme: String,
    pub e_xy: f64,
    pub e_xz: f64,
    pub e_zy: f64,
    /// `e(XY) > e(XZ) + e(ZY)`.
    pub violation: bool,
    pub xy: DistanceReport,
    pub xz: DistanceReport,
    pub zy: DistanceReport,
}

/// The triangle counterexample for a normalized scheme: `X = (x)`,
/// `Y = (y)`, `Z = (y, y)`, or for set variants `Z = (y₁, y₂)` with `y_i`
/// equal to `y` except for bit `i` (1-based, MSB first).
pub fn normalization_violation_demo<S: ComplexitySource>(
    n: usize,
    scheme: NormScheme,
    seed: u64,
    src: &S,
) -> Result<NormalizationReport> {
    if n < 10_000 || !n.is_multiple_of(10) {
        return Err(Error::InvalidArgument(format!(
            "n must be a multiple of 10 and at least 10000, got {n}"
        )));
    }
    let (x, y) = counterexample_strings(n, seed);
    let xl = canonicalize([x])?;
    let yl = canonicalize([y.clone()])?;
    let z = if scheme.is_set_variant() {
        canonicalize([flip_bit(&y, 0), flip_bit(&y, 1)])?
    } else {
        canonicalize([y.clone(), y])?
    };
    let xy = normalized_list(&xl.concat(&yl), scheme, src)?;
    let xz = normalized_list(&xl.concat(&z), scheme, src)?;
    let zy = normalized_list(&z.concat(&yl), scheme, src)?;
    Ok(NormalizationReport {
        n,
        seed,
        scheme: scheme.id().into(),
        e_xy: xy.value,
        e_xz: xz.value,
        e_zy: zy.value,
        violation: xy.value > xz.value + zy.value,
        xy,
        xz,
        zy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalOverlapReport {
    pub n: usize,
    pub seed: u64,
    pub i_zy: f64,
    pub i_zx: f64,
    pub i_yx: f64,
    /// `Ĉ(x | y)`.
    pub x_given_y: f64,
    /// `Ĉ(x | (y, z))`. A compressor does not see the XOR relation, so this
    /// stays near `n`; reported, not judged.
    pub x_given_yz: f64,
    /// `x == y ⊕ z`, checked bytewise: the exact short conversion program.
    pub xor_witness: bool,
    pub limit: f64,
    pub pass: bool,
}

/// `y`, `z` independent random `n`-bit strings and `x = y ⊕ z`. Both `z`
/// and the literal `x` turn `y` into `x`, yet neither shares information
/// with the other or with `y`.
pub fn minimal_overlap_demo<S: ComplexitySource>(n: usize, seed: u64, src: &S) -> Result<MinimalOverlapReport> {
    if n < 1000 {
        return Err(Error::InvalidArgument(format!("n must be at least 1000, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = random_bits(&mut rng, n);
    let z = random_bits(&mut rng, n);
    let x: Vec<u8> = y.iter().zip(&z).map(|(a, b)| a ^ b).collect();
    let xor_witness = x.iter().zip(y.iter().zip(&z)).all(|(x, (y, z))| *x == y ^ z);
    let i_zy = mutual_information(&z, &y, src)?.bits;
    let i_zx = mutual_information(&z, &x, src)?.bits;
    let i_yx = mutual_information(&y, &x, src)?.bits;
    let x_given_y = src.conditional(&x, &y)?.bits;
    let pair = encode_list(&canonicalize([y.clone(), z.clone()])?);
    let x_given_yz = src.conditional(&x, pair.as_bytes())?.bits;
    let limit = 0.1 * n as f64;
    Ok(MinimalOverlapReport {
        n,
        seed,
        i_zy,
        i_zx,
        i_yx,
        x_given_y,
        x_given_yz,
        xor_witness,
        limit,
        pass: xor_witness && i_zy <= limit && i_zx <= limit && i_yx <= limit && x_given_y >= 0.9 * n as f64,
    })
}
