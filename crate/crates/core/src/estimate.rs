//! List and pair distances computed from a [`ComplexitySource`].
//!
//! Hatted quantities below are estimates: `Ĉ` is the source's complexity,
//! `K̂(a|b)` its conditional complexity.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{ComplexityEstimate, ComplexitySource};
use crate::error::{Error, Result};
use crate::model::{ByteString, StringList};

/// The four normalizations of the list distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormScheme {
    /// Divide by the largest `Ĉ` of a one-element-deleted sublist.
    MaxSublist,
    /// Divide by `Ĉ` of the list with the maximizing element deleted.
    DropMaximizer,
    /// As `MaxSublist`, with each sublist reduced to its set of elements.
    SetMaxSublist,
    /// As `DropMaximizer`, with the sublist reduced to its set of elements.
    SetDropMaximizer,
}

impl NormScheme {
    pub const ALL: [NormScheme; 4] = [
        NormScheme::MaxSublist,
        NormScheme::DropMaximizer,
        NormScheme::SetMaxSublist,
        NormScheme::SetDropMaximizer,
    ];

    pub fn id(self) -> &'static str {
        match self {
            NormScheme::MaxSublist => "norm-max-sublist",
            NormScheme::DropMaximizer => "norm-drop-maximizer",
            NormScheme::SetMaxSublist => "norm-set-max-sublist",
            NormScheme::SetDropMaximizer => "norm-set-drop-maximizer",
        }
    }

    pub fn is_set_variant(self) -> bool {
        matches!(self, NormScheme::SetMaxSublist | NormScheme::SetDropMaximizer)
    }
}

/// Schemes that score a whole list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ListScheme {
    Emax,
    Emin,
    SumBound,
    Normalized(NormScheme),
}

impl ListScheme {
    pub fn id(self) -> &'static str {
        match self {
            ListScheme::Emax => "emax",
            ListScheme::Emin => "emin",
            ListScheme::SumBound => "sum-bound",
            ListScheme::Normalized(n) => n.id(),
        }
    }
}

impl fmt::Display for ListScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ListScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "emax" => ListScheme::Emax,
            "emin" => ListScheme::Emin,
            "sum-bound" => ListScheme::SumBound,
            other => ListScheme::Normalized(
                NormScheme::ALL
                    .into_iter()
                    .find(|n| n.id() == other)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown list scheme `{other}`")))?,
            ),
        })
    }
}

/// Schemes that score a pair; used for distance matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairScheme {
    Ncd,
    E1,
    /// Unnormalized pairwise `max{K̂(x|y), K̂(y|x)}` in bits.
    Emax,
}

impl PairScheme {
    pub fn id(self) -> &'static str {
        match self {
            PairScheme::Ncd => "ncd",
            PairScheme::E1 => "e1",
            PairScheme::Emax => "emax-pair",
        }
    }

    pub fn is_normalized(self) -> bool {
        !matches!(self, PairScheme::Emax)
    }
}

impl FromStr for PairScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ncd" => Ok(PairScheme::Ncd),
            "e1" => Ok(PairScheme::E1),
            "emax-pair" | "emax" => Ok(PairScheme::Emax),
            other => Err(Error::InvalidArgument(format!("unknown pair scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementBits {
    pub index: usize,
    pub bits: f64,
}

/// A distance value with everything needed to audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub value: f64,
    pub scheme: String,
    pub numerator_bits: f64,
    /// Present for normalized schemes only.
    pub denominator_bits: Option<f64>,
    pub per_element: Vec<ElementBits>,
    pub source: String,
}

impl DistanceReport {
    fn absolute(scheme: &str, bits: f64, per_element: Vec<ElementBits>, source: &str) -> Self {
        DistanceReport {
            value: bits,
            scheme: scheme.into(),
            numerator_bits: bits,
            denominator_bits: None,
            per_element,
            source: source.into(),
        }
    }

    fn normalized(
        scheme: &'static str,
        numerator: f64,
        denominator: f64,
        per_element: Vec<ElementBits>,
        source: &str,
    ) -> Result<Self> {
        if denominator <= 0.0 {
            return Err(Error::ZeroDenominator(scheme));
        }
        Ok(DistanceReport {
            value: numerator / denominator,
            scheme: scheme.into(),
            numerator_bits: numerator,
            denominator_bits: Some(denominator),
            per_element,
            source: source.into(),
        })
    }
}

/// `K̂(X | x_i)` for every index, computed once per distinct element.
pub fn per_element_conditionals<S: ComplexitySource>(list: &StringList, src: &S) -> Result<Vec<ElementBits>> {
    let mut out: Vec<ElementBits> = Vec::with_capacity(list.m());
    for (i, x) in list.iter().enumerate() {
        let bits = match i.checked_sub(1) {
            // canonical order puts duplicates next to each other
            Some(p) if list.get(p) == x => out[p].bits,
            _ => src.list_conditional(list, x)?.bits,
        };
        out.push(ElementBits { index: i, bits });
    }
    Ok(out)
}

/// Index of the largest per-element value, lowest index on ties.
fn argmax(values: &[ElementBits]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.bits > values[best].bits {
            best = i;
        }
    }
    best
}

/// `Ê_max(X) = max_i K̂(X | x_i)`.
pub fn emax<S: ComplexitySource>(list: &StringList, src: &S) -> Result<DistanceReport> {
    let per = per_element_conditionals(list, src)?;
    let value = per[argmax(&per)].bits;
    Ok(DistanceReport::absolute("emax", value, per, src.id()))
}

/// `Ê_min(X) = min_i K̂(X | x_i)`.
pub fn emin<S: ComplexitySource>(list: &StringList, src: &S) -> Result<DistanceReport> {
    let per = per_element_conditionals(list, src)?;
    let value = per.iter().map(|e| e.bits).fold(f64::INFINITY, f64::min);
    Ok(DistanceReport::absolute("emin", value, per, src.id()))
}

/// Pairwise `Ê_max(a, b) = max{K̂(a|b), K̂(b|a)}`.
pub fn pair_emax<S: ComplexitySource>(a: &ByteString, b: &ByteString, src: &S) -> Result<f64> {
    let ab = src.conditional(a.as_bytes(), b.as_bytes())?.bits;
    let ba = src.conditional(b.as_bytes(), a.as_bytes())?.bits;
    Ok(ab.max(ba))
}

/// `min_i Σ_{k≠i} Ê_max(x_i, x_k)`; `per_element` carries each row sum.
pub fn sum_bound<S: ComplexitySource>(list: &StringList, src: &S) -> Result<DistanceReport> {
    let m = list.m();
    if m < 2 {
        return Err(Error::TooFewElements { needed: 2, got: m });
    }
    let mut memo: HashMap<(&ByteString, &ByteString), f64> = HashMap::new();
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut sum = 0.0;
        for k in (0..m).filter(|&k| k != i) {
            let (a, b) = (list.get(i), list.get(k));
            let key = if a <= b { (a, b) } else { (b, a) };
            let d = match memo.get(&key) {
                Some(&d) => d,
                None => {
                    let d = pair_emax(a, b, src)?;
                    memo.insert(key, d);
                    d
                }
            };
            sum += d;
        }
        rows.push(ElementBits { index: i, bits: sum });
    }
    let value = rows.iter().map(|e| e.bits).fold(f64::INFINITY, f64::min);
    Ok(DistanceReport::absolute("sum-bound", value, rows, src.id()))
}

/// `Ê_max(X)` divided by the complexity of a sublist chosen by `scheme`.
pub fn normalized_list<S: ComplexitySource>(list: &StringList, scheme: NormScheme, src: &S) -> Result<DistanceReport> {
    if list.m() < 2 {
        return Err(Error::SingletonNormalization);
    }
    let per = per_element_conditionals(list, src)?;
    let maximizer = argmax(&per);
    let numerator = per[maximizer].bits;
    let sized = |sub: StringList| -> Result<f64> {
        let sub = if scheme.is_set_variant() { sub.dedup() } else { sub };
        Ok(src.list_complexity(&sub)?.bits)
    };
    let denominator = match scheme {
        NormScheme::MaxSublist | NormScheme::SetMaxSublist => {
            let mut best = f64::NEG_INFINITY;
            for i in 0..list.m() {
                if i > 0 && list.get(i) == list.get(i - 1) {
                    continue;
                }
                best = best.max(sized(list.without(i).expect("m >= 2"))?);
            }
            best
        }
        NormScheme::DropMaximizer | NormScheme::SetDropMaximizer => sized(list.without(maximizer).expect("m >= 2"))?,
    };
    DistanceReport::normalized(scheme.id(), numerator, denominator, per, src.id())
}

/// Dispatches on a [`ListScheme`].
pub fn list_distance<S: ComplexitySource>(list: &StringList, scheme: ListScheme, src: &S) -> Result<DistanceReport> {
    match scheme {
        ListScheme::Emax => emax(list, src),
        ListScheme::Emin => emin(list, src),
        ListScheme::SumBound => sum_bound(list, src),
        ListScheme::Normalized(n) => normalized_list(list, n, src),
    }
}

/// `[Ĉ(x‖y) − min{Ĉ(x),Ĉ(y)}] / max{Ĉ(x),Ĉ(y)}` with order-canonical
/// concatenation, so the value is exactly symmetric.
pub fn ncd_pair<S: ComplexitySource>(x: &ByteString, y: &ByteString, src: &S) -> Result<DistanceReport> {
    if x.is_empty() && y.is_empty() {
        return Err(Error::DegeneratePair);
    }
    let cx = src.complexity(x.as_bytes())?.bits;
    let cy = src.complexity(y.as_bytes())?.bits;
    let cxy = src.pair_complexity(x.as_bytes(), y.as_bytes())?.bits;
    let (lo, hi) = (cx.min(cy), cx.max(cy));
    if hi <= 0.0 {
        return Err(Error::DegeneratePair);
    }
    let per = vec![ElementBits { index: 0, bits: cx }, ElementBits { index: 1, bits: cy }];
    DistanceReport::normalized("ncd", (cxy - lo).max(0.0), hi, per, src.id())
}

/// Pairwise `Ê_max(x,y) / Ĉ(x‖y)`.
pub fn e1_pair<S: ComplexitySource>(x: &ByteString, y: &ByteString, src: &S) -> Result<DistanceReport> {
    if x.is_empty() && y.is_empty() {
        return Err(Error::DegeneratePair);
    }
    let num = pair_emax(x, y, src)?;
    let joint = src.pair_complexity(x.as_bytes(), y.as_bytes())?.bits;
    DistanceReport::normalized("e1", num, joint, Vec::new(), src.id()).map_err(|_| Error::ZeroDenominator("e1"))
}

/// `I(y:x) = max(0, Ĉ(x) − K̂(x|y))`.
pub fn mutual_information<S: ComplexitySource>(x: &[u8], y: &[u8], src: &S) -> Result<ComplexityEstimate> {
    let cx = src.complexity(x)?;
    let cond = src.conditional(x, y)?;
    Ok(ComplexityEstimate::new(
        (cx.bits - cond.bits).max(0.0),
        src.id(),
        cond.mode,
    ))
}

pub fn pair_distance<S: ComplexitySource>(x: &ByteString, y: &ByteString, scheme: PairScheme, src: &S) -> Result<f64> {
    match scheme {
        PairScheme::Ncd => ncd_pair(x, y, src).map(|r| r.value),
        PairScheme::E1 => e1_pair(x, y, src).map(|r| r.value),
        PairScheme::Emax => pair_emax(x, y, src),
    }
}

pub const MATRIX_FORMAT: &str = "mid-matrix/1";

/// Symmetric matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub format: String,
    pub labels: Vec<String>,
    pub scheme: PairScheme,
    pub source: String,
    /// Largest diagonal value tolerated for normalized schemes.
    pub diagonal_tolerance: f64,
    /// Row-major, `labels.len()²` values.
    pub entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(labels: Vec<String>, scheme: PairScheme, source: &str, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("matrix is not square".into()));
        }
        Ok(DistanceMatrix {
            format: MATRIX_FORMAT.into(),
            labels,
            scheme,
            source: source.into(),
            diagonal_tolerance: 0.05,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size() + j]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.size()).map(|i| self.get(i, i)).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: DistanceMatrix = serde_json::from_str(s)?;
        if m.entries.len() != m.size() * m.size() {
            return Err(Error::InvalidArgument("entries do not match labels".into()));
        }
        Ok(m)
    }

    /// CSV with a header row `label,<label_1>,…` and one row per item.
    /// Numbers use the shortest decimal that round-trips.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["label".to_owned()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (i, label) in self.labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            row.extend((0..self.size()).map(|j| format!("{}", self.get(i, j))));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Computes every cell (diagonal included) of the upper triangle, possibly
/// in parallel, then mirrors it.
pub fn distance_matrix<S: ComplexitySource>(
    corpus: &[(String, ByteString)],
    scheme: PairScheme,
    src: &S,
) -> Result<DistanceMatrix> {
    let n = corpus.len();
    if n < 2 {
        return Err(Error::TooFewElements { needed: 2, got: n });
    }
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            pair_distance(&corpus[i].1, &corpus[j].1, scheme, src).map_err(|e| Error::Item {
                label: if i == j {
                    corpus[i].0.clone()
                } else {
                    format!("{} / {}", corpus[i].0, corpus[j].0)
                },
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = vec![vec![0.0; n]; n];
    for (&(i, j), v) in cells.iter().zip(values) {
        rows[i][j] = v;
        rows[j][i] = v;
    }
    DistanceMatrix::from_rows(corpus.iter().map(|c| c.0.clone()).collect(), scheme, src.id(), rows)
}
