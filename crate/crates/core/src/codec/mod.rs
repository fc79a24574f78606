//! Bit strings, exact dyadic arithmetic and the self-delimiting encodings
//! everything else is built on.

mod bits;
mod code;
mod dyadic;

use std::collections::BTreeSet;

use thiserror::Error;

pub use bits::BitString;
pub use code::{
    decode_measure, decode_self_delim, decode_string_list, decode_string_set, encode_measure,
    encode_nat, encode_self_delim, encode_string_list, encode_string_set, BitReader,
    MAX_UNIFORM_LEN,
};
pub use dyadic::{
    ceil_log2_rational, ceil_neg_log2, floor_log2_rational, floor_neg_log2_rational, interval_of,
    DyadicRational, OpenInterval,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("invalid bit character {0:?}")]
    BadBit(char),
    #[error("natural number string {0:?} has a leading zero")]
    LeadingZero(String),
    #[error("value does not fit in 64 bits")]
    Overflow,
    #[error("malformed dyadic rational {0:?}")]
    BadDyadic(String),
    #[error("empty or inverted interval ({0}, {1})")]
    BadInterval(String, String),
    #[error("logarithm of zero")]
    ZeroMeasure,
    #[error("value exceeds 1")]
    AboveOne,
    #[error("code ends mid-field")]
    Truncated,
    #[error("{0} bits left over after decoding")]
    TrailingBits(usize),
    #[error("elements not in canonical order")]
    NonCanonical,
    #[error("parameter {0} out of range")]
    TooLarge(u64),
    #[error("{0} is a proper prefix of {1}")]
    NotPrefixFree(BitString, BitString),
}

/// A finite set of strings none of which is a proper prefix of another.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrefixFreeSet {
    members: BTreeSet<BitString>,
}

impl PrefixFreeSet {
    pub fn new(members: impl IntoIterator<Item = BitString>) -> Result<Self, CodecError> {
        let members: BTreeSet<BitString> = members.into_iter().collect();
        let mut lex: Vec<&BitString> = members.iter().collect();
        lex.sort_by(|a, b| a.lex_cmp(b));
        // After a lexicographic sort any prefix pair shows up adjacent.
        for w in lex.windows(2) {
            if w[0].is_prefix_of(w[1]) {
                return Err(CodecError::NotPrefixFree(w[0].clone(), w[1].clone()));
            }
        }
        Ok(Self { members })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn members(&self) -> &BTreeSet<BitString> {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = &BitString> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: &BitString) -> bool {
        self.members.contains(x)
    }

    /// Whether some member is a prefix of `x`, i.e. `x ∈ GΣ*`.
    pub fn covers(&self, x: &BitString) -> bool {
        (0..=x.len()).any(|n| self.members.contains(&x.prefix(n)))
    }

    /// `μ(GΣ^∞) = Σ 2^-‖x‖`
    pub fn measure(&self) -> DyadicRational {
        kraft_sum(self.members.iter())
    }

    pub fn max_len(&self) -> usize {
        self.members.iter().map(BitString::len).max().unwrap_or(0)
    }
}

pub fn kraft_sum<'a>(strings: impl IntoIterator<Item = &'a BitString>) -> DyadicRational {
    strings.into_iter().map(|x| DyadicRational::pow2_neg(x.len() as u32)).sum()
}
