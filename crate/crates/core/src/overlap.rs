//! Shared-program construction for lists.
//!
//! Given a finite family `B` of `m`-element lists, every list `v` is joined to
//! a node `r‖s` for each distinct component `s`, where `r` is an `l`-bit
//! prefix (`l = k2 − k1`) chosen so that no node gets more than `2^k1`
//! edges. The edges of one list all receive one color, the smallest that is
//! free at every endpoint, so that `(x, r, color)` identifies the list and
//! `⌈log2 m⌉` more bits pick the target element.
//!
//! The use-counter behind `r` counts, per string, how many lists of `B`
//! (in enumeration order) contain it; it starts at 1.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ByteString, StringList};
use crate::toylab::{Budget, OracleTable, OutputFilter};

/// Largest `k2` supported; colors and prefixes must fit in 64 bits.
pub const MAX_K2: u32 = 40;

pub fn ceil_log2(m: usize) -> u32 {
    if m <= 1 {
        0
    } else {
        usize::BITS - (m - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapInstance {
    pub m: usize,
    pub k1: u32,
    pub k2: u32,
    /// Canonical order, no repeats.
    pub vectors: Vec<StringList>,
}

impl OverlapInstance {
    /// Validates the parameters and puts `vectors` in canonical order.
    pub fn new(m: usize, k1: u32, k2: u32, vectors: Vec<StringList>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInstance("m must be positive".into()));
        }
        if k1 > k2 || k2 > MAX_K2 {
            return Err(Error::InvalidInstance(format!(
                "need k1 ≤ k2 ≤ {MAX_K2}, got k1={k1} k2={k2}"
            )));
        }
        if let Some(v) = vectors.iter().find(|v| v.m() != m) {
            return Err(Error::InvalidInstance(format!(
                "vector {v:?} does not have {m} components"
            )));
        }
        let mut vectors = vectors;
        vectors.sort_by(|a, b| a.elements().cmp(b.elements()));
        vectors.dedup();
        Ok(OverlapInstance { m, k1, k2, vectors })
    }

    pub fn l(&self) -> u32 {
        self.k2 - self.k1
    }

    pub fn color_bits(&self) -> u32 {
        self.k1 + ceil_log2(self.m)
    }

    pub fn delta_bits(&self) -> u32 {
        ceil_log2(self.m)
    }

    /// Side information needed beyond `x`: prefix, color and index offset.
    pub fn side_bits(&self) -> u32 {
        self.l() + self.color_bits() + self.delta_bits()
    }

    pub fn position(&self, v: &StringList) -> Option<usize> {
        self.vectors.binary_search_by(|w| w.elements().cmp(v.elements())).ok()
    }

    /// Rebuilds the graph and decodes; see [`ColoredGraph::decode`].
    pub fn decode(&self, x: &ByteString, side: &SideInfo) -> Result<(StringList, ByteString)> {
        let g = build(self)?;
        let (v, e) = g.decode(x, side)?;
        Ok((v.clone(), e.clone()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: OverlapInstance = serde_json::from_str(text)?;
        Self::new(raw.m, raw.k1, raw.k2, raw.vectors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SideInfo {
    pub prefix: u64,
    pub color: u64,
    pub delta: u64,
}

fn push_bits(out: &mut Vec<u8>, v: u64, n: u32) {
    for i in (0..n).rev() {
        out.push(((v >> i) & 1) as u8);
    }
}

fn bit_text(v: u64, n: u32) -> String {
    (0..n)
        .rev()
        .map(|i| if (v >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

impl SideInfo {
    /// Fixed-width `r ‖ c ‖ delta`.
    pub fn to_bits(&self, inst: &OverlapInstance) -> ByteString {
        let mut out = Vec::new();
        push_bits(&mut out, self.prefix, inst.l());
        push_bits(&mut out, self.color, inst.color_bits());
        push_bits(&mut out, self.delta, inst.delta_bits());
        ByteString::new(out)
    }

    pub fn from_bits(bits: &ByteString, inst: &OverlapInstance) -> Result<Self> {
        let b = bits.as_bytes();
        if b.len() != inst.side_bits() as usize {
            return Err(Error::MalformedEncoding("side information has the wrong length"));
        }
        if let Some(&x) = b.iter().find(|&&x| x > 1) {
            return Err(Error::NotBits(x));
        }
        let mut pos = 0;
        let mut take = |n: u32| {
            let v = b[pos..pos + n as usize].iter().fold(0u64, |v, &x| (v << 1) | x as u64);
            pos += n as usize;
            v
        };
        Ok(SideInfo {
            prefix: take(inst.l()),
            color: take(inst.color_bits()),
            delta: take(inst.delta_bits()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    /// `l` bits, as `0`/`1` text.
    pub prefix: String,
    pub string: ByteString,
    pub vector: usize,
    /// `k1 + ⌈log2 m⌉` bits, as `0`/`1` text.
    pub color: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub edges: usize,
    pub nodes: usize,
    pub max_degree: usize,
    pub max_colors_seen: usize,
    pub distinct_colors: usize,
}

/// The bipartite graph after coloring. Immutable once built.
#[derive(Debug, Clone)]
pub struct ColoredGraph {
    instance: OverlapInstance,
    /// `(prefix, string)` → incident `(color, vector)` pairs.
    nodes: HashMap<(u64, ByteString), Vec<(u64, usize)>>,
    colors: Vec<u64>,
    /// Per vector: prefix of each distinct component.
    prefixes: Vec<BTreeMap<ByteString, u64>>,
    stats: BuildStats,
}

/// Colors the instance's graph, enumerating `B` in its fixed order.
pub fn build(inst: &OverlapInstance) -> Result<ColoredGraph> {
    let capacity = 1u64 << inst.k2;
    let degree_cap = 1usize << inst.k1;
    let palette = 1u64 << inst.color_bits();
    let color_budget = inst.m * degree_cap - inst.m;
    let mut uses: HashMap<ByteString, u64> = HashMap::new();
    let mut nodes: HashMap<(u64, ByteString), Vec<(u64, usize)>> = HashMap::new();
    let mut colors = Vec::with_capacity(inst.vectors.len());
    let mut prefixes = Vec::with_capacity(inst.vectors.len());
    let mut stats = BuildStats::default();
    for (vi, v) in inst.vectors.iter().enumerate() {
        let mut assigned = BTreeMap::new();
        for s in v.dedup().iter() {
            let i = uses.entry(s.clone()).or_insert(0);
            *i += 1;
            if *i > capacity {
                return Err(Error::PromiseViolated {
                    string: s.to_hex(),
                    uses: *i,
                    capacity,
                });
            }
            assigned.insert(s.clone(), (*i - 1) >> inst.k1);
        }
        let mut used: Vec<u64> = Vec::new();
        for (s, &r) in &assigned {
            if let Some(incident) = nodes.get(&(r, s.clone())) {
                if incident.len() >= degree_cap {
                    return Err(Error::ColoringInvariant(format!(
                        "node degree would exceed {degree_cap}"
                    )));
                }
                used.extend(incident.iter().map(|&(c, _)| c));
            }
        }
        used.sort_unstable();
        used.dedup();
        if used.len() > color_budget {
            return Err(Error::ColoringInvariant(format!(
                "{} colors in use around one vector, budget {color_budget}",
                used.len()
            )));
        }
        stats.max_colors_seen = stats.max_colors_seen.max(used.len());
        let color = (0..palette)
            .zip(used.iter().copied().chain(std::iter::repeat(u64::MAX)))
            .find(|(c, u)| c != u)
            .map(|(c, _)| c)
            .ok_or_else(|| Error::ColoringInvariant("no free color".into()))?;
        for (s, &r) in &assigned {
            nodes.entry((r, s.clone())).or_default().push((color, vi));
            stats.edges += 1;
        }
        colors.push(color);
        prefixes.push(assigned);
    }
    stats.nodes = nodes.len();
    stats.max_degree = nodes.values().map(Vec::len).max().unwrap_or(0);
    let mut distinct = colors.clone();
    distinct.sort_unstable();
    distinct.dedup();
    stats.distinct_colors = distinct.len();
    Ok(ColoredGraph {
        instance: inst.clone(),
        nodes,
        colors,
        prefixes,
        stats,
    })
}

impl ColoredGraph {
    pub fn instance(&self) -> &OverlapInstance {
        &self.instance
    }

    pub fn stats(&self) -> &BuildStats {
        &self.stats
    }

    /// Side information that leads from element `i` of `v` to element `k`
    /// (both 0-based).
    pub fn encode(&self, v: &StringList, i: usize, k: usize) -> Result<SideInfo> {
        let m = self.instance.m;
        if i >= m || k >= m {
            return Err(Error::InvalidArgument(format!(
                "indices {i}, {k} out of range for m = {m}"
            )));
        }
        let vi = self
            .instance
            .position(v)
            .ok_or_else(|| Error::InvalidArgument(format!("{v:?} is not in B")))?;
        let x = v.get(i);
        let first = v.iter().position(|s| s == x).expect("element of v");
        Ok(SideInfo {
            prefix: self.prefixes[vi][x],
            color: self.colors[vi],
            delta: ((k + m - first) % m) as u64,
        })
    }

    /// Recovers the list and the target element from `x` and the side
    /// information.
    pub fn decode(&self, x: &ByteString, side: &SideInfo) -> Result<(&StringList, &ByteString)> {
        let incident = self.nodes.get(&(side.prefix, x.clone())).map_or(&[][..], Vec::as_slice);
        let mut hits = incident.iter().filter(|&&(c, _)| c == side.color);
        let Some(&(_, vi)) = hits.next() else {
            return Err(Error::Undecodable(format!(
                "no edge colored {} at this node",
                side.color
            )));
        };
        if hits.next().is_some() {
            return Err(Error::InvariantBroken("two edges share a color at one node".into()));
        }
        let v = &self.instance.vectors[vi];
        let m = self.instance.m;
        let first = v.iter().position(|s| s == x).expect("edge endpoint is a component");
        Ok((v, v.get((first + side.delta as usize) % m)))
    }

    /// Every edge, in vector order then component order.
    pub fn edges(&self) -> Vec<Edge> {
        let l = self.instance.l();
        let w = self.instance.color_bits();
        let mut out = Vec::new();
        for (vi, assigned) in self.prefixes.iter().enumerate() {
            for (s, &r) in assigned {
                out.push(Edge {
                    prefix: bit_text(r, l),
                    string: s.clone(),
                    vector: vi,
                    color: bit_text(self.colors[vi], w),
                });
            }
        }
        out
    }

    /// Per-node color uniqueness and the degree cap.
    pub fn verify(&self) -> Result<()> {
        let cap = 1usize << self.instance.k1;
        for incident in self.nodes.values() {
            if incident.len() > cap {
                return Err(Error::ColoringInvariant(format!("degree {} > {cap}", incident.len())));
            }
            let mut cs: Vec<u64> = incident.iter().map(|&(c, _)| c).collect();
            cs.sort_unstable();
            if cs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::ColoringInvariant("repeated color at a node".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Export<'a> {
            instance: &'a OverlapInstance,
            color_bits: u32,
            prefix_bits: u32,
            edges: Vec<Edge>,
            stats: &'a BuildStats,
        }
        Ok(serde_json::to_string_pretty(&Export {
            instance: &self.instance,
            color_bits: self.instance.color_bits(),
            prefix_bits: self.instance.l(),
            edges: self.edges(),
            stats: &self.stats,
        })?)
    }
}

/// Random instance whose every string is used at most `2^k2` times.
pub fn random_instance<R: Rng>(rng: &mut R, m: usize, k1: u32, k2: u32, vectors: usize) -> Result<OverlapInstance> {
    let pool_size = (m + 2).max(4);
    let pool: Vec<ByteString> = (0..pool_size)
        .map(|_| {
            let len = rng.gen_range(1..=6);
            ByteString::new((0..len).map(|_| rng.gen_range(0..2u8)).collect::<Vec<u8>>())
        })
        .collect();
    let capacity = 1u64 << k2;
    let mut uses: HashMap<ByteString, u64> = HashMap::new();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < vectors && attempts < vectors * 20 {
        attempts += 1;
        let v = crate::model::canonicalize((0..m).map(|_| pool[rng.gen_range(0..pool.len())].clone()))?;
        if seen.contains(&v) {
            continue;
        }
        let distinct = v.dedup();
        if distinct.iter().any(|s| uses.get(s).copied().unwrap_or(0) >= capacity) {
            continue;
        }
        for s in distinct.iter() {
            *uses.entry(s.clone()).or_insert(0) += 1;
        }
        seen.insert(v.clone());
        out.push(v);
    }
    OverlapInstance::new(m, k1, k2, out)
}

/// `B` from the toy machine: every canonical `m`-list over `strings` with
/// `min_j C(v|s_j) ≤ k1` and `max_j C(v|s_j) ≤ k2`, using bounded-exact
/// complexities with `L = k2`.
pub fn instance_from_oracle(
    strings: &[ByteString],
    m: usize,
    k1: u32,
    k2: u32,
    max_steps: u64,
) -> Result<OverlapInstance> {
    let max_bits = strings.iter().map(ByteString::len).max().unwrap_or(0);
    let budget = Budget::new(k2, max_steps);
    let filter = OutputFilter::lists(m, max_bits);
    let mut tables = HashMap::new();
    for s in strings {
        if !tables.contains_key(s) {
            tables.insert(s.clone(), OracleTable::build(s, budget, filter)?);
        }
    }
    let mut sorted: Vec<ByteString> = strings.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut vectors = Vec::new();
    let mut idx = vec![0usize; m];
    'outer: loop {
        let v = StringList::try_from(idx.iter().map(|&i| sorted[i].clone()).collect::<Vec<_>>())?;
        let cs: Option<Vec<u32>> = v.dedup().iter().map(|s| tables[s].complexity(v.elements())).collect();
        if let Some(cs) = cs {
            if cs.iter().min().is_some_and(|&c| c <= k1) && cs.iter().all(|&c| c <= k2) {
                vectors.push(v);
            }
        }
        // next nondecreasing index tuple
        let mut p = m;
        while p > 0 {
            p -= 1;
            if idx[p] + 1 < sorted.len() {
                let n = idx[p] + 1;
                for q in idx.iter_mut().skip(p) {
                    *q = n;
                }
                continue 'outer;
            }
        }
        break;
    }
    OverlapInstance::new(m, k1, k2, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::canonicalize;
    use rand::SeedableRng;

    fn list(items: &[&str]) -> StringList {
        canonicalize(items.iter().map(|s| s.as_bytes())).unwrap()
    }

    fn golden() -> OverlapInstance {
        OverlapInstance::new(
            2,
            1,
            2,
            vec![
                list(&["a", "b"]),
                list(&["a", "c"]),
                list(&["a", "d"]),
                list(&["a", "e"]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn hand_simulated_instance() {
        let inst = golden();
        let g = build(&inst).unwrap();
        let edges = g.edges();
        let at_a: Vec<(String, String)> = edges
            .iter()
            .filter(|e| e.string.as_bytes() == b"a")
            .map(|e| (e.prefix.clone(), e.color.clone()))
            .collect();
        let expect = [("0", "00"), ("0", "01"), ("1", "00"), ("1", "01")];
        assert_eq!(at_a, expect.map(|(p, c)| (p.to_owned(), c.to_owned())));
        assert_eq!(g.stats().max_degree, 2);
        assert_eq!(inst.side_bits(), 1 + 2 + 1);
        g.verify().unwrap();
    }

    #[test]
    fn singleton_lists_use_k1_bit_colors() {
        let inst = OverlapInstance::new(1, 2, 3, vec![list(&["a"]), list(&["b"])]).unwrap();
        assert_eq!(inst.color_bits(), 2);
        assert_eq!(inst.delta_bits(), 0);
        let g = build(&inst).unwrap();
        assert_eq!(g.edges().len(), 2);
        let side = g.encode(&list(&["b"]), 0, 0).unwrap();
        assert_eq!(g.decode(&ByteString::from("b"), &side).unwrap().1.as_bytes(), b"b");
    }

    #[test]
    fn over_capacity_is_a_promise_violation() {
        let vs = ["b", "c", "d", "e", "f"].iter().map(|s| list(&["a", s])).collect();
        let inst = OverlapInstance::new(2, 1, 2, vs).unwrap();
        assert!(matches!(
            build(&inst),
            Err(Error::PromiseViolated {
                uses: 5,
                capacity: 4,
                ..
            })
        ));
    }

    #[test]
    fn round_trip_and_wrong_color() {
        let inst = golden();
        let g = build(&inst).unwrap();
        for v in &inst.vectors {
            for i in 0..2 {
                for k in 0..2 {
                    let side = g.encode(v, i, k).unwrap();
                    if i == k {
                        assert_eq!(side.delta, 0);
                    }
                    let (got, e) = g.decode(v.get(i), &side).unwrap();
                    assert_eq!((got, e), (v, v.get(k)));
                    let bits = side.to_bits(&inst);
                    assert_eq!(bits.len() as u32, inst.l() + inst.k1 + 2 * ceil_log2(inst.m));
                    assert_eq!(SideInfo::from_bits(&bits, &inst).unwrap(), side);
                }
            }
        }
        let mut side = g.encode(&inst.vectors[0], 0, 1).unwrap();
        side.color = 3;
        assert!(matches!(
            g.decode(&ByteString::from("a"), &side),
            Err(Error::Undecodable(_))
        ));
        assert!(g.encode(&list(&["x", "y"]), 0, 0).is_err());
    }

    #[test]
    fn duplicate_components_share_one_edge() {
        let inst = OverlapInstance::new(3, 1, 3, vec![list(&["a", "a", "b"]), list(&["a", "b", "b"])]).unwrap();
        let g = build(&inst).unwrap();
        assert_eq!(g.stats().edges, 4);
        for v in &inst.vectors {
            for i in 0..3 {
                for k in 0..3 {
                    let side = g.encode(v, i, k).unwrap();
                    assert_eq!(g.decode(v.get(i), &side).unwrap().1, v.get(k));
                }
            }
        }
    }

    #[test]
    fn rebuild_is_deterministic_and_json_round_trips() {
        let inst = golden();
        let back = OverlapInstance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(back, inst);
        assert_eq!(build(&inst).unwrap().edges(), build(&back).unwrap().edges());
        let side = build(&inst).unwrap().encode(&inst.vectors[2], 1, 0).unwrap();
        let (v, e) = inst.decode(inst.vectors[2].get(1), &side).unwrap();
        assert_eq!((v, e.as_bytes()), (inst.vectors[2].clone(), &b"a"[..]));
        let v: serde_json::Value = serde_json::from_str(&build(&inst).unwrap().to_json().unwrap()).unwrap();
        assert_eq!(v["edges"][0]["color"], "00");
    }

    #[test]
    fn random_instances_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let m = rng.gen_range(1..=5);
            let k1 = rng.gen_range(0..=3);
            let k2 = k1 + rng.gen_range(0..=3);
            let inst = random_instance(&mut rng, m, k1, k2, 40).unwrap();
            let g = build(&inst).unwrap();
            g.verify().unwrap();
            assert!(g.stats().max_degree <= 1 << k1);
            for v in &inst.vectors {
                for i in 0..m {
                    for k in 0..m {
                        let side = g.encode(v, i, k).unwrap();
                        assert_eq!(g.decode(v.get(i), &side).unwrap(), (v, v.get(k)));
                    }
                }
            }
        }
    }

    #[test]
    fn oracle_instance_respects_thresholds() {
        let strings: Vec<ByteString> = ["", "0", "1", "01"]
            .iter()
            .map(|s| ByteString::from_bits(s).unwrap())
            .collect();
        let inst = instance_from_oracle(&strings, 2, 12, 16, 10_000).unwrap();
        assert!(!inst.vectors.is_empty());
        let g = build(&inst).unwrap();
        g.verify().unwrap();
        assert!(inst.vectors.iter().all(|v| v.m() == 2));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(OverlapInstance::new(2, 3, 2, vec![]).is_err());
        assert!(OverlapInstance::new(2, 1, 2, vec![list(&["a"])]).is_err());
        assert!(OverlapInstance::new(0, 1, 2, vec![]).is_err());
    }
}
