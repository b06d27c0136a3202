//! Exact bounded complexity by exhaustive search.
//!
//! Rather than running every bit string through [`run`](super::run), the
//! search walks the tree of instruction sequences directly: each node is a
//! program prefix that ends on an instruction boundary, and its output tape
//! is extended in place and rolled back on return. Programs that diverge
//! prune their whole subtree, since every extension replays the same steps.
//! An [`OutputFilter`] prunes subtrees whose output can no longer match:
//! elements only grow and the element count never shrinks.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::machine::{execute, Flow, Instr, Tape, MACHINE_ID, MAX_ENUMERATION_BITS};
use crate::error::{Error, Result};
use crate::model::ByteString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    /// `L`: longest program considered, in bits.
    pub max_program_bits: u32,
    /// `S`: step budget per run.
    pub max_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_program_bits: 20,
            max_steps: 10_000,
        }
    }
}

impl Budget {
    pub fn new(max_program_bits: u32, max_steps: u64) -> Self {
        Budget {
            max_program_bits,
            max_steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_program_bits > MAX_ENUMERATION_BITS {
            return Err(Error::EnumerationBudget {
                requested: self.max_program_bits,
                max: MAX_ENUMERATION_BITS,
            });
        }
        Ok(())
    }
}

/// Restricts which outputs a search records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutputFilter {
    pub max_elements: usize,
    pub max_element_bits: usize,
}

impl OutputFilter {
    pub const UNBOUNDED: OutputFilter = OutputFilter {
        max_elements: usize::MAX,
        max_element_bits: usize::MAX,
    };

    /// Single strings of at most `max_bits` bits.
    pub fn strings(max_bits: usize) -> Self {
        Self::lists(1, max_bits)
    }

    pub fn lists(max_elements: usize, max_bits: usize) -> Self {
        OutputFilter {
            max_elements,
            max_element_bits: max_bits,
        }
    }

    fn admits(&self, tape: &Tape) -> bool {
        if tape.element_count() > self.max_elements {
            return false;
        }
        let mut start = 0;
        for &end in tape.bounds.iter().chain(std::iter::once(&tape.bits.len())) {
            if end - start > self.max_element_bits {
                return false;
            }
            start = end;
        }
        true
    }

    pub fn admits_sequence(&self, seq: &[ByteString]) -> bool {
        seq.len() <= self.max_elements && seq.iter().all(|e| e.len() <= self.max_element_bits)
    }
}

struct Coded {
    instr: Instr,
    code: u64,
    len: u32,
}

fn instructions_up_to(max: u32) -> Vec<Instr> {
    let mut out = vec![Instr::Halt, Instr::Sep, Instr::Copy, Instr::Dup, Instr::Flip];
    for start in 0..4 {
        for len in 1..=4 {
            out.push(Instr::Slice { start, len });
        }
    }
    for len in 1..=8u8 {
        if 5 + len as u32 <= max {
            for bits in 0..(1u16 << len) {
                out.push(Instr::Lit { len, bits: bits as u8 });
            }
        }
    }
    if max >= 8 {
        for body in instructions_up_to(max - 6) {
            for times in 2..=5 {
                out.push(Instr::Repeat {
                    times,
                    body: Box::new(body.clone()),
                });
            }
        }
    }
    out.retain(|i| i.bit_len() <= max);
    out
}

/// Every instruction that fits in the enumeration maximum, shortest first.
fn instruction_table() -> &'static [Coded] {
    static TABLE: OnceLock<Vec<Coded>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut v: Vec<Coded> = instructions_up_to(MAX_ENUMERATION_BITS)
            .into_iter()
            .map(|instr| {
                let (code, len) = instr.encode();
                Coded { instr, code, len }
            })
            .collect();
        v.sort_by_key(|c| (c.len, c.code));
        v
    })
}

struct Search<'a, F> {
    condition: &'a [u8],
    budget: Budget,
    filter: OutputFilter,
    tape: Tape,
    visit: F,
}

impl<F: FnMut(u64, u32, &Tape)> Search<'_, F> {
    fn walk(&mut self, used: u32, code: u64, steps: u64) {
        let room = self.budget.max_program_bits - used;
        for c in instruction_table() {
            if c.len > room {
                break;
            }
            let mark = (
                self.tape.bits.len(),
                self.tape.bounds.len(),
                self.tape.bits.last().copied(),
            );
            let mut s = steps;
            let program = (code << c.len) | c.code;
            match execute(&mut self.tape, &c.instr, self.condition, &mut s, self.budget.max_steps) {
                Flow::Halt => {
                    if self.filter.admits(&self.tape) {
                        (self.visit)(program, used + c.len, &self.tape);
                    }
                }
                Flow::Continue => {
                    if self.filter.admits(&self.tape) {
                        self.walk(used + c.len, program, s);
                    }
                }
                Flow::Diverge => {}
            }
            self.tape.bits.truncate(mark.0);
            self.tape.bounds.truncate(mark.1);
            if let Some(last) = mark.2 {
                self.tape.bits[mark.0 - 1] = last;
            }
        }
    }
}

fn check_bits(s: &ByteString) -> Result<()> {
    match s.as_bytes().iter().find(|&&b| b > 1) {
        Some(&b) => Err(Error::NotBits(b)),
        None => Ok(()),
    }
}

/// Calls `visit(program, length, output)` for every halting program of at
/// most `L` bits whose output passes `filter`. `program` holds the bits in
/// its low `length` bits.
pub fn for_each_halting(
    condition: &ByteString,
    budget: Budget,
    filter: OutputFilter,
    visit: impl FnMut(u64, u32, &[&[u8]]),
) -> Result<()> {
    budget.validate()?;
    check_bits(condition)?;
    let mut visit = visit;
    let mut search = Search {
        condition: condition.as_bytes(),
        budget,
        filter,
        tape: Tape::default(),
        visit: |p: u64, len: u32, tape: &Tape| {
            let elements: Vec<&[u8]> = tape.elements().collect();
            visit(p, len, &elements);
        },
    };
    search.walk(0, 0, 0);
    Ok(())
}

/// Total `Σ 2^-|p|` over all halting programs of at most `L` bits.
pub fn kraft_sum(condition: &ByteString, budget: Budget) -> Result<f64> {
    let mut sum = 0.0;
    for_each_halting(condition, budget, OutputFilter::UNBOUNDED, |_, len, _| {
        sum += (-(len as f64)).exp2();
    })?;
    Ok(sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub output: Vec<ByteString>,
    /// Length of the shortest program producing `output`.
    pub complexity: u32,
    /// `Σ 2^-|p|` over all programs producing `output`.
    pub probability: f64,
    pub programs: u64,
}

fn key_of<'a>(elements: impl IntoIterator<Item = &'a [u8]>, buf: &mut Vec<u8>) {
    buf.clear();
    for e in elements {
        buf.extend_from_slice(&(e.len() as u32).to_le_bytes());
        buf.extend_from_slice(e);
    }
}

/// All bounded-exact complexities for one condition, built once and read-only
/// afterwards.
#[derive(Debug, Clone)]
pub struct OracleTable {
    condition: ByteString,
    budget: Budget,
    filter: OutputFilter,
    entries: HashMap<Vec<u8>, TableEntry>,
}

#[derive(Serialize, Deserialize)]
struct TableExport {
    machine: String,
    condition: ByteString,
    max_program_bits: u32,
    max_steps: u64,
    filter: OutputFilter,
    entries: Vec<TableEntry>,
}

impl OracleTable {
    pub fn build(condition: &ByteString, budget: Budget, filter: OutputFilter) -> Result<Self> {
        let mut entries: HashMap<Vec<u8>, TableEntry> = HashMap::new();
        let mut key = Vec::new();
        for_each_halting(condition, budget, filter, |_, len, output| {
            key_of(output.iter().copied(), &mut key);
            let w = (-(len as f64)).exp2();
            match entries.get_mut(key.as_slice()) {
                Some(e) => {
                    e.complexity = e.complexity.min(len);
                    e.probability += w;
                    e.programs += 1;
                }
                None => {
                    entries.insert(
                        key.clone(),
                        TableEntry {
                            output: output.iter().map(|e| ByteString::new(e.to_vec())).collect(),
                            complexity: len,
                            probability: w,
                            programs: 1,
                        },
                    );
                }
            }
        })?;
        Ok(OracleTable {
            condition: condition.clone(),
            budget,
            filter,
            entries,
        })
    }

    pub fn condition(&self) -> &ByteString {
        &self.condition
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn filter(&self) -> OutputFilter {
        self.filter
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, output: &[ByteString]) -> Option<&TableEntry> {
        let mut key = Vec::new();
        key_of(output.iter().map(ByteString::as_bytes), &mut key);
        self.entries.get(&key)
    }

    /// `None` when nothing within budget produces `output`. Outputs the
    /// filter excludes are reported as absent too; check
    /// [`OutputFilter::admits_sequence`] to tell the two apart.
    pub fn complexity(&self, output: &[ByteString]) -> Option<u32> {
        self.entry(output).map(|e| e.complexity)
    }

    pub fn probability(&self, output: &[ByteString]) -> f64 {
        self.entry(output).map_or(0.0, |e| e.probability)
    }

    pub fn entries(&self) -> impl Iterator<Item = &TableEntry> {
        self.entries.values()
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.values().map(|e| e.probability).sum()
    }

    /// JSON export with entries in canonical output order.
    pub fn to_json(&self) -> Result<String> {
        let mut entries: Vec<TableEntry> = self.entries.values().cloned().collect();
        entries.sort_by(|a, b| a.output.cmp(&b.output));
        let export = TableExport {
            machine: MACHINE_ID.into(),
            condition: self.condition.clone(),
            max_program_bits: self.budget.max_program_bits,
            max_steps: self.budget.max_steps,
            filter: self.filter,
            entries,
        };
        Ok(serde_json::to_string_pretty(&export)?)
    }
}

/// `C_{L,S}(x | condition)`: length of the shortest program of at most `L`
/// bits that outputs the single string `x` within `S` steps.
pub fn bounded_complexity(x: &ByteString, condition: &ByteString, budget: Budget) -> Result<Option<u32>> {
    check_bits(x)?;
    let t = OracleTable::build(condition, budget, OutputFilter::strings(x.len()))?;
    Ok(t.complexity(std::slice::from_ref(x)))
}

/// `Σ 2^-|p|` over the programs counted by [`bounded_complexity`].
pub fn apriori_probability(x: &ByteString, condition: &ByteString, budget: Budget) -> Result<f64> {
    check_bits(x)?;
    let t = OracleTable::build(condition, budget, OutputFilter::strings(x.len()))?;
    Ok(t.probability(std::slice::from_ref(x)))
}

/// `C(x) + log2 Q(x)`; absent when `C(x)` is.
pub fn coding_check(x: &ByteString, budget: Budget) -> Result<Option<f64>> {
    check_bits(x)?;
    let t = OracleTable::build(&ByteString::empty(), budget, OutputFilter::strings(x.len()))?;
    Ok(coding_residual(&t, x))
}

fn coding_residual(table: &OracleTable, x: &ByteString) -> Option<f64> {
    table
        .entry(std::slice::from_ref(x))
        .map(|e| e.complexity as f64 + e.probability.log2())
}

/// Both orders of the symmetry-of-information gap for a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoiResidual {
    /// `C(x,y)` of the canonical two-element list.
    pub joint: u32,
    /// `C(x,y) − C(x) − C(y|x)`.
    pub forward: i64,
    /// `C(x,y) − C(y) − C(x|y)`.
    pub backward: i64,
}

impl SoiResidual {
    pub fn max_abs(&self) -> u64 {
        self.forward.unsigned_abs().max(self.backward.unsigned_abs())
    }
}

fn pair_list(x: &ByteString, y: &ByteString) -> Vec<ByteString> {
    let mut v = vec![x.clone(), y.clone()];
    v.sort();
    v
}

fn soi_from_tables(
    joint: &OracleTable,
    given_x: &OracleTable,
    given_y: &OracleTable,
    x: &ByteString,
    y: &ByteString,
) -> Option<SoiResidual> {
    let j = joint.complexity(&pair_list(x, y))? as i64;
    let cx = joint.complexity(std::slice::from_ref(x))? as i64;
    let cy = joint.complexity(std::slice::from_ref(y))? as i64;
    let y_x = given_x.complexity(std::slice::from_ref(y))? as i64;
    let x_y = given_y.complexity(std::slice::from_ref(x))? as i64;
    Some(SoiResidual {
        joint: j as u32,
        forward: j - cx - y_x,
        backward: j - cy - x_y,
    })
}

/// Symmetry-of-information residuals for one pair; absent if any term is.
pub fn soi_residual(x: &ByteString, y: &ByteString, budget: Budget) -> Result<Option<SoiResidual>> {
    check_bits(x)?;
    check_bits(y)?;
    let bits = x.len().max(y.len());
    let joint = OracleTable::build(&ByteString::empty(), budget, OutputFilter::lists(2, bits))?;
    let gx = OracleTable::build(x, budget, OutputFilter::strings(y.len()))?;
    let gy = OracleTable::build(y, budget, OutputFilter::strings(x.len()))?;
    Ok(soi_from_tables(&joint, &gx, &gy, x, y))
}

/// Every bit string of length at most `max_bits`, canonical order.
pub fn all_bit_strings(max_bits: usize) -> Vec<ByteString> {
    let mut out = Vec::new();
    for len in 0..=max_bits {
        for v in 0..(1u64 << len) {
            out.push(ByteString::new(
                (0..len).rev().map(|i| ((v >> i) & 1) as u8).collect::<Vec<u8>>(),
            ));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub checked: usize,
    pub absent: usize,
    pub min: f64,
    pub max: f64,
    pub max_abs: f64,
    pub worst: Vec<ByteString>,
}

impl ResidualReport {
    fn new() -> Self {
        ResidualReport {
            checked: 0,
            absent: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            max_abs: 0.0,
            worst: Vec::new(),
        }
    }

    fn record(&mut self, r: Option<f64>, subject: &[ByteString]) {
        match r {
            None => self.absent += 1,
            Some(r) => {
                self.checked += 1;
                self.min = self.min.min(r);
                self.max = self.max.max(r);
                if r.abs() > self.max_abs || self.worst.is_empty() {
                    self.max_abs = self.max_abs.max(r.abs());
                    self.worst = subject.to_vec();
                }
            }
        }
    }
}

/// Coding-theorem residuals over every string of at most `max_bits` bits.
pub fn coding_suite(max_bits: usize, budget: Budget) -> Result<ResidualReport> {
    let t = OracleTable::build(&ByteString::empty(), budget, OutputFilter::strings(max_bits))?;
    let mut report = ResidualReport::new();
    for x in all_bit_strings(max_bits) {
        report.record(coding_residual(&t, &x), std::slice::from_ref(&x));
    }
    Ok(report)
}

/// Symmetry-of-information residuals over every ordered pair of strings of
/// at most `max_bits` bits. Pairs with an absent term are counted, not
/// scored.
pub fn soi_suite(max_bits: usize, budget: Budget) -> Result<ResidualReport> {
    let strings = all_bit_strings(max_bits);
    let joint = OracleTable::build(&ByteString::empty(), budget, OutputFilter::lists(2, max_bits))?;
    let given: Vec<OracleTable> = strings
        .iter()
        .map(|s| OracleTable::build(s, budget, OutputFilter::strings(max_bits)))
        .collect::<Result<_>>()?;
    let mut report = ResidualReport::new();
    for (i, x) in strings.iter().enumerate() {
        for (j, y) in strings.iter().enumerate().skip(i) {
            let r = soi_from_tables(&joint, &given[i], &given[j], x, y);
            report.record(r.map(|r| r.max_abs() as f64), &[x.clone(), y.clone()]);
        }
    }
    Ok(report)
}

/// Entries present under `small` whose complexity grows under `large`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub compared: usize,
    pub violations: Vec<(Vec<ByteString>, u32, Option<u32>)>,
}

/// Compares two budgets over every output a `small`-budget table holds;
/// `large` must dominate `small` in both coordinates.
pub fn monotonicity_check(
    condition: &ByteString,
    small: Budget,
    large: Budget,
    filter: OutputFilter,
) -> Result<MonotonicityReport> {
    if small.max_program_bits > large.max_program_bits || small.max_steps > large.max_steps {
        return Err(Error::InvalidArgument("larger budget must dominate the smaller".into()));
    }
    let a = OracleTable::build(condition, small, filter)?;
    let b = OracleTable::build(condition, large, filter)?;
    let mut report = MonotonicityReport {
        compared: 0,
        violations: Vec::new(),
    };
    for e in a.entries() {
        report.compared += 1;
        let c = b.complexity(&e.output);
        if c.is_none_or(|c| c > e.complexity) {
            report.violations.push((e.output.clone(), e.complexity, c));
        }
    }
    report.violations.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(report)
}

/// Halting programs that have a halting proper prefix, found by running
/// every bit string of at most `L` bits through the interpreter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixReport {
    pub programs_run: u64,
    pub halting: u64,
    pub violations: u64,
}

pub fn prefix_free_check(condition: &ByteString, budget: Budget) -> Result<PrefixReport> {
    budget.validate()?;
    let mut halting = std::collections::HashSet::new();
    let mut programs_run = 0u64;
    for p in super::machine::enumerate_programs(budget.max_program_bits)? {
        programs_run += 1;
        if let super::machine::Outcome::Halted(_) = super::machine::run(p.as_bytes(), condition, budget.max_steps)? {
            let code = p.as_bytes().iter().fold(0u64, |v, &b| (v << 1) | b as u64);
            halting.insert((p.len() as u32, code));
        }
    }
    let mut violations = 0;
    for &(len, code) in &halting {
        if (0..len).any(|k| halting.contains(&(k, code >> (len - k)))) {
            violations += 1;
        }
    }
    Ok(PrefixReport {
        programs_run,
        halting: halting.len() as u64,
        violations,
    })
}
