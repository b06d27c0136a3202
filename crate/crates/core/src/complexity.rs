//! Complexity estimates and the sources that produce them.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{canonical_cmp, encode_list, ByteString, StringList};

/// Fixed marker inserted between the two operands whenever two byte
/// strings are concatenated for a joint size measurement.
pub const BOUNDARY: &[u8] = &[0x00, 0xFF, b'M', b'I', b'D', b'|', 0xFF, 0x00];

/// How a complexity value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Unconditional,
    /// `C(y‖x) - C(y)`, clamped at zero.
    ConditionalViaSoi,
    /// A backend that conditions natively (e.g. dictionary priming).
    ConditionalDirect,
    /// Exhaustive shortest-program search on the toy machine.
    ExactBounded,
}

/// A nonnegative bit count together with where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEstimate {
    pub bits: f64,
    pub source: String,
    pub mode: Mode,
}

impl ComplexityEstimate {
    pub fn new(bits: f64, source: impl Into<String>, mode: Mode) -> Self {
        debug_assert!(bits >= 0.0, "negative complexity {bits}");
        ComplexityEstimate {
            bits,
            source: source.into(),
            mode,
        }
    }
}

/// `a ‖ BOUNDARY ‖ b` with the canonically smaller operand first, so the
/// joint size of a pair does not depend on argument order.
pub fn canonical_pair(a: &[u8], b: &[u8]) -> Vec<u8> {
    if canonical_cmp(a, b).is_le() {
        concat(a, b)
    } else {
        concat(b, a)
    }
}

/// `first ‖ BOUNDARY ‖ second`.
pub fn concat(first: &[u8], second: &[u8]) -> Vec<u8> {
    let mut v = Vec::with_capacity(first.len() + BOUNDARY.len() + second.len());
    v.extend_from_slice(first);
    v.extend_from_slice(BOUNDARY);
    v.extend_from_slice(second);
    v
}

/// Anything that can stand in for Kolmogorov complexity: a compressor, or
/// the exact bounded oracle of the toy machine.
///
/// Only [`complexity`](Self::complexity) is required. The remaining methods
/// default to symmetry-of-information realizations on top of it and are
/// overridden by sources that can answer them directly.
pub trait ComplexitySource: Sync {
    fn id(&self) -> &str;

    /// Unconditional complexity of a byte string.
    fn complexity(&self, bytes: &[u8]) -> Result<ComplexityEstimate>;

    /// `K(target | condition)`.
    fn conditional(&self, target: &[u8], condition: &[u8]) -> Result<ComplexityEstimate> {
        let joint = self.complexity(&concat(condition, target))?;
        let cond = self.complexity(condition)?;
        Ok(ComplexityEstimate::new(
            (joint.bits - cond.bits).max(0.0),
            self.id(),
            Mode::ConditionalViaSoi,
        ))
    }

    /// Joint complexity of an unordered pair.
    fn pair_complexity(&self, a: &[u8], b: &[u8]) -> Result<ComplexityEstimate> {
        self.complexity(&canonical_pair(a, b))
    }

    /// `K(X)` for a list.
    fn list_complexity(&self, list: &StringList) -> Result<ComplexityEstimate> {
        self.complexity(encode_list(list).as_bytes())
    }

    /// `K(X | x)` for an element `x` of `X`.
    fn list_conditional(&self, list: &StringList, x: &ByteString) -> Result<ComplexityEstimate> {
        let joint = self.list_complexity(list)?;
        let cond = self.complexity(x.as_bytes())?;
        Ok(ComplexityEstimate::new(
            (joint.bits - cond.bits).max(0.0),
            self.id(),
            Mode::ConditionalViaSoi,
        ))
    }
}

impl<T: ComplexitySource + ?Sized> ComplexitySource for &T {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn complexity(&self, bytes: &[u8]) -> Result<ComplexityEstimate> {
        (**self).complexity(bytes)
    }
    fn conditional(&self, target: &[u8], condition: &[u8]) -> Result<ComplexityEstimate> {
        (**self).conditional(target, condition)
    }
    fn pair_complexity(&self, a: &[u8], b: &[u8]) -> Result<ComplexityEstimate> {
        (**self).pair_complexity(a, b)
    }
    fn list_complexity(&self, list: &StringList) -> Result<ComplexityEstimate> {
        (**self).list_complexity(list)
    }
    fn list_conditional(&self, list: &StringList, x: &ByteString) -> Result<ComplexityEstimate> {
        (**self).list_conditional(list, x)
    }
}
