//! Density and dominance over a finite universe of lists.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::oracle::{all_bit_strings, Budget, OracleTable, OutputFilter};
use crate::error::Result;
use crate::model::{ByteString, StringList};

/// Every list of `1..=max_m` elements (repetitions allowed) over the bit
/// strings of at most `max_bits` bits, in canonical order.
pub fn toy_universe(max_m: usize, max_bits: usize) -> Vec<StringList> {
    let strings = all_bit_strings(max_bits);
    let mut out = Vec::new();
    let mut idx = Vec::new();
    fn rec(strings: &[ByteString], max_m: usize, start: usize, idx: &mut Vec<usize>, out: &mut Vec<StringList>) {
        if !idx.is_empty() {
            let v: Vec<ByteString> = idx.iter().map(|&i| strings[i].clone()).collect();
            out.push(StringList::try_from(v).expect("nonempty, sorted"));
        }
        if idx.len() == max_m {
            return;
        }
        for i in start..strings.len() {
            idx.push(i);
            rec(strings, max_m, i, idx, out);
            idx.pop();
        }
    }
    rec(&strings, max_m, 0, &mut idx, &mut out);
    out
}

/// A list distance tabulated on a universe; `None` stands for `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceTable {
    pub name: String,
    pub values: HashMap<StringList, Option<f64>>,
}

impl DistanceTable {
    pub fn from_fn(name: impl Into<String>, universe: &[StringList], f: impl Fn(&StringList) -> Option<f64>) -> Self {
        DistanceTable {
            name: name.into(),
            values: universe.iter().map(|x| (x.clone(), f(x))).collect(),
        }
    }

    /// Lists missing from the table count as `+∞`.
    pub fn get(&self, x: &StringList) -> Option<f64> {
        self.values.get(x).copied().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub anchor: ByteString,
    pub sum: f64,
    pub pass: bool,
    /// Lists that contain the anchor and have a finite positive distance.
    pub counted: usize,
    /// Lists that do not contain the anchor.
    pub skipped: usize,
}

/// `Σ 2^-D(X)` over the lists `X ∋ x` with `D(X) > 0`.
pub fn density_check(d: &DistanceTable, x: &ByteString, universe: &[StringList]) -> DensityReport {
    let mut sum = 0.0;
    let mut counted = 0;
    let mut skipped = 0;
    for list in universe {
        if !list.contains(x) {
            skipped += 1;
            continue;
        }
        if let Some(v) = d.get(list).filter(|&v| v > 0.0) {
            sum += (-v).exp2();
            counted += 1;
        }
    }
    DensityReport {
        anchor: x.clone(),
        sum,
        pass: sum <= 1.0,
        counted,
        skipped,
    }
}

/// Every distinct element occurring in the universe, canonical order.
pub fn anchors(universe: &[StringList]) -> Vec<ByteString> {
    let set: BTreeSet<&ByteString> = universe.iter().flat_map(|l| l.iter()).collect();
    set.into_iter().cloned().collect()
}

/// Whether `d` passes the density check at every anchor.
pub fn admissible(d: &DistanceTable, universe: &[StringList]) -> bool {
    anchors(universe).iter().all(|x| density_check(d, x, universe).pass)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub distance: String,
    pub admissible: bool,
    /// Smallest integer `c ≥ 0` with `E_max(X) ≤ D(X) + c` on every resolved `X`.
    pub c: Option<u32>,
    pub pass: bool,
    pub resolved: usize,
    /// Lists whose bounded `E_max` is absent.
    pub unresolved: usize,
}

pub fn dominance_check(
    d: &DistanceTable,
    universe: &[StringList],
    emax: &DistanceTable,
    bound: u32,
) -> DominanceReport {
    let ok = admissible(d, universe);
    let mut worst = 0.0f64;
    let mut resolved = 0;
    let mut unresolved = 0;
    for x in universe {
        let Some(e) = emax.get(x) else {
            unresolved += 1;
            continue;
        };
        resolved += 1;
        if let Some(v) = d.get(x) {
            worst = worst.max(e - v);
        }
    }
    let c = ok.then(|| worst.ceil() as u32);
    DominanceReport {
        distance: d.name.clone(),
        admissible: ok,
        c,
        pass: c.is_some_and(|c| c <= bound),
        resolved,
        unresolved,
    }
}

/// Bounded-exact `E_max(X) = max_{x ∈ X} C(X | x)` for every list in the
/// universe, absent when any conditional is.
pub fn emax_table(universe: &[StringList], budget: Budget) -> Result<DistanceTable> {
    let max_m = universe.iter().map(StringList::m).max().unwrap_or(1);
    let max_bits = universe
        .iter()
        .flat_map(|l| l.iter())
        .map(ByteString::len)
        .max()
        .unwrap_or(0);
    let filter = OutputFilter::lists(max_m, max_bits);
    let mut tables = HashMap::new();
    for a in anchors(universe) {
        let t = OracleTable::build(&a, budget, filter)?;
        tables.insert(a, t);
    }
    Ok(DistanceTable::from_fn("emax", universe, |list| {
        let mut best: Option<u32> = None;
        for x in list.dedup().iter() {
            let c = tables[x].complexity(list.elements())?;
            best = Some(best.map_or(c, |b| b.max(c)));
        }
        best.map(f64::from)
    }))
}

fn hamming(a: &ByteString, b: &ByteString) -> u32 {
    let common = a.as_bytes().iter().zip(b.as_bytes()).filter(|(x, y)| x != y).count();
    (common + a.len().abs_diff(b.len())) as u32
}

/// Sum of Hamming-style distances between canonically adjacent elements.
pub fn adjacent_hamming(list: &StringList) -> u32 {
    list.elements().windows(2).map(|w| hamming(&w[0], &w[1])).sum()
}

/// Smallest integer shift `t ≥ 1` for which `0` on all-equal lists and
/// `t + base(X)` elsewhere passes the density check at every anchor.
pub fn minimal_shift(universe: &[StringList], base: impl Fn(&StringList) -> f64) -> u32 {
    let mut t = 1;
    loop {
        let d = shifted("probe", universe, t, &base);
        if admissible(&d, universe) {
            return t;
        }
        t += 1;
    }
}

fn shifted(name: &str, universe: &[StringList], t: u32, base: &impl Fn(&StringList) -> f64) -> DistanceTable {
    DistanceTable::from_fn(name, universe, |x| {
        Some(if x.all_equal() { 0.0 } else { t as f64 + base(x) })
    })
}

/// The candidate distances the dominance suite is run against: `E_max`,
/// `E_max + 5`, and two admissible toy distances shifted just enough to
/// satisfy the density condition.
pub fn candidate_family(universe: &[StringList], emax: &DistanceTable) -> Vec<DistanceTable> {
    let mut plus = emax.clone();
    plus.name = "emax+5".into();
    for v in plus.values.values_mut() {
        *v = v.map(|v| v + 5.0);
    }
    let ham = |x: &StringList| adjacent_hamming(x) as f64;
    let t_ham = minimal_shift(universe, ham);
    let t_uni = minimal_shift(universe, |_| 0.0);
    vec![
        emax.clone(),
        plus,
        shifted(&format!("hamming+{t_ham}"), universe, t_ham, &ham),
        shifted(&format!("uniform+{t_uni}"), universe, t_uni, &|_| 0.0),
    ]
}
