//! The reference toy prefix machine.
//!
//! A program is read left to right, one bit at a time, never backing up.
//! It is *valid* when the machine executes `HALT` exactly as the last bit of
//! the program has been consumed; a program that halts earlier, or needs more
//! bits than it has, is invalid. Hence the set of valid programs is
//! prefix-free.
//!
//! The output is a sequence of bit strings ("elements"). Execution starts
//! with one open, empty element. The condition register holds the
//! auxiliary input and is read-only.
//!
//! # Instruction encoding
//!
//! ```text
//! 00                 HALT    close the open element and stop
//! 01 nnn b_0 … b_n   LIT     append the n+1 literal bits (n = 0..7, 3 bits MSB first)
//! 100                SEP     close the open element, open a new empty one
//! 101                COPY    append the whole condition register
//! 110 aa bb          SLICE   append condition bits [a, a+b+1), clipped to its length
//! 1110 kk            REPEAT  decode one instruction, execute it k+2 times
//! 11110              DUP     append a copy of the most recently closed element
//! 11111              FLIP    invert the last bit of the open element (no-op if empty)
//! ```
//!
//! `REPEAT` bodies may themselves be `REPEAT`. Every executed instruction
//! costs one step, counted before it runs (a repeated body costs one step
//! per iteration on top of the `REPEAT` itself). If an instruction would be
//! executed with the full step budget already spent, the run diverges.
//! With a budget of zero steps every program diverges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ByteString;

pub const MACHINE_ID: &str = "toy-prefix/1";

/// Largest program length `enumerate_programs` accepts.
pub const MAX_ENUMERATION_BITS: u32 = 24;

/// `COPY HALT`: outputs the condition register.
pub const COPY_PROGRAM: &str = "10100";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr {
    Halt,
    /// `len` is 1..=8; `bits` holds them MSB first in the low `len` bits.
    Lit {
        len: u8,
        bits: u8,
    },
    Sep,
    Copy,
    Slice {
        start: u8,
        len: u8,
    },
    Repeat {
        times: u8,
        body: Box<Instr>,
    },
    Dup,
    Flip,
}

impl Instr {
    /// `(code, length)` with the code's bits in the low `length` bits.
    pub fn encode(&self) -> (u64, u32) {
        match self {
            Instr::Halt => (0b00, 2),
            Instr::Lit { len, bits } => {
                let n = (*len - 1) as u64;
                ((0b01 << 3 | n) << *len | *bits as u64, 5 + *len as u32)
            }
            Instr::Sep => (0b100, 3),
            Instr::Copy => (0b101, 3),
            Instr::Slice { start, len } => ((0b110 << 4) | ((*start as u64) << 2) | (*len - 1) as u64, 7),
            Instr::Repeat { times, body } => {
                let (b, bl) = body.encode();
                ((((0b1110 << 2) | (*times - 2) as u64) << bl) | b, 6 + bl)
            }
            Instr::Dup => (0b11110, 5),
            Instr::Flip => (0b11111, 5),
        }
    }

    pub fn bit_len(&self) -> u32 {
        self.encode().1
    }
}

/// Result of running a program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "outcome", content = "elements")]
pub enum Outcome {
    Halted(Vec<ByteString>),
    Diverge,
    Invalid,
}

/// Output tape: all elements' bits back to back plus element end offsets.
#[derive(Debug, Clone, Default)]
pub(crate) struct Tape {
    pub bits: Vec<u8>,
    /// End offset of every closed element.
    pub bounds: Vec<usize>,
}

impl Tape {
    fn open_start(&self) -> usize {
        self.bounds.last().copied().unwrap_or(0)
    }

    /// Applies a non-control instruction.
    pub fn apply(&mut self, instr: &Instr, condition: &[u8]) {
        match instr {
            Instr::Lit { len, bits } => {
                for i in (0..*len).rev() {
                    self.bits.push((bits >> i) & 1);
                }
            }
            Instr::Sep => self.bounds.push(self.bits.len()),
            Instr::Copy => self.bits.extend_from_slice(condition),
            Instr::Slice { start, len } => {
                let s = (*start as usize).min(condition.len());
                let e = (s + *len as usize).min(condition.len());
                self.bits.extend_from_slice(&condition[s..e]);
            }
            Instr::Dup => {
                let n = self.bounds.len();
                if n > 0 {
                    let start = if n >= 2 { self.bounds[n - 2] } else { 0 };
                    let end = self.bounds[n - 1];
                    self.bits.extend_from_within(start..end);
                }
            }
            Instr::Flip => {
                if self.bits.len() > self.open_start() {
                    *self.bits.last_mut().expect("nonempty") ^= 1;
                }
            }
            Instr::Halt | Instr::Repeat { .. } => unreachable!("control instruction"),
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = &[u8]> + '_ {
        let ends = self.bounds.iter().copied().chain(std::iter::once(self.bits.len()));
        let mut start = 0;
        ends.map(move |end| {
            let e = &self.bits[start..end];
            start = end;
            e
        })
    }

    pub fn element_count(&self) -> usize {
        self.bounds.len() + 1
    }
}

pub(crate) enum Flow {
    Continue,
    Halt,
    Diverge,
}

/// Executes one decoded instruction, charging steps against `budget`.
pub(crate) fn execute(tape: &mut Tape, instr: &Instr, condition: &[u8], steps: &mut u64, budget: u64) -> Flow {
    if *steps >= budget {
        return Flow::Diverge;
    }
    *steps += 1;
    match instr {
        Instr::Halt => Flow::Halt,
        Instr::Repeat { times, body } => {
            for _ in 0..*times {
                match execute(tape, body, condition, steps, budget) {
                    Flow::Continue => {}
                    other => return other,
                }
            }
            Flow::Continue
        }
        other => {
            tape.apply(other, condition);
            Flow::Continue
        }
    }
}

struct Reader<'a> {
    bits: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn bit(&mut self) -> Option<u8> {
        let b = self.bits.get(self.pos).copied();
        self.pos += 1;
        b
    }

    fn field(&mut self, n: u32) -> Option<u8> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.bit()?;
        }
        Some(v)
    }

    /// Decodes one instruction; `None` when the program runs out of bits.
    fn instr(&mut self) -> Option<Instr> {
        Some(if self.bit()? == 0 {
            if self.bit()? == 0 {
                Instr::Halt
            } else {
                let len = self.field(3)? + 1;
                Instr::Lit {
                    len,
                    bits: self.field(len as u32)?,
                }
            }
        } else if self.bit()? == 0 {
            if self.bit()? == 0 {
                Instr::Sep
            } else {
                Instr::Copy
            }
        } else if self.bit()? == 0 {
            Instr::Slice {
                start: self.field(2)?,
                len: self.field(2)? + 1,
            }
        } else if self.bit()? == 0 {
            Instr::Repeat {
                times: self.field(2)? + 2,
                body: Box::new(self.instr()?),
            }
        } else if self.bit()? == 0 {
            Instr::Dup
        } else {
            Instr::Flip
        })
    }
}

/// Runs `program` (one `0`/`1` byte per bit) with the given condition.
pub fn run(program: &[u8], condition: &ByteString, max_steps: u64) -> Result<Outcome> {
    if let Some(&b) = program.iter().find(|&&b| b > 1) {
        return Err(Error::NotBits(b));
    }
    let cond = condition.as_bytes();
    if let Some(&b) = cond.iter().find(|&&b| b > 1) {
        return Err(Error::NotBits(b));
    }
    let mut reader = Reader { bits: program, pos: 0 };
    let mut tape = Tape::default();
    let mut steps = 0u64;
    loop {
        if steps >= max_steps {
            return Ok(Outcome::Diverge);
        }
        let Some(instr) = reader.instr() else {
            return Ok(Outcome::Invalid);
        };
        if reader.pos > program.len() {
            return Ok(Outcome::Invalid);
        }
        match execute(&mut tape, &instr, cond, &mut steps, max_steps) {
            Flow::Continue => {}
            Flow::Diverge => return Ok(Outcome::Diverge),
            Flow::Halt => {
                if reader.pos != program.len() {
                    return Ok(Outcome::Invalid);
                }
                return Ok(Outcome::Halted(
                    tape.elements().map(|e| ByteString::new(e.to_vec())).collect(),
                ));
            }
        }
    }
}

/// All bit strings of length `0..=max_bits` in length-increasing
/// lexicographic order.
pub fn enumerate_programs(max_bits: u32) -> Result<Programs> {
    if max_bits > MAX_ENUMERATION_BITS {
        return Err(Error::EnumerationBudget {
            requested: max_bits,
            max: MAX_ENUMERATION_BITS,
        });
    }
    Ok(Programs {
        max_bits,
        len: 0,
        next: 0,
    })
}

#[derive(Debug, Clone)]
pub struct Programs {
    max_bits: u32,
    len: u32,
    next: u64,
}

impl Iterator for Programs {
    type Item = ByteString;

    fn next(&mut self) -> Option<ByteString> {
        if self.next == 1 << self.len {
            self.len += 1;
            self.next = 0;
        }
        if self.len > self.max_bits {
            return None;
        }
        let v = self.next;
        self.next += 1;
        Some(ByteString::new(
            (0..self.len).rev().map(|i| ((v >> i) & 1) as u8).collect::<Vec<u8>>(),
        ))
    }
}
