use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CodecError;

/// A finite binary string.
///
/// Ordering is the canonical length-then-lexicographic order, so sorted
/// collections of strings come out in the same order the set encodings use.
/// Use [`BitString::lex_cmp`] for plain lexicographic comparison.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// The `len`-bit big-endian representation of `value`.
    pub fn from_value(value: u64, len: usize) -> Self {
        let bits = (0..len).rev().map(|i| i < 64 && (value >> i) & 1 == 1).collect();
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.bits.get(i).copied()
    }

    pub fn push(&mut self, b: bool) {
        self.bits.push(b);
    }

    pub fn pop(&mut self) -> Option<bool> {
        self.bits.pop()
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = Vec::with_capacity(self.len() + other.len());
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    pub fn with_bit(&self, b: bool) -> BitString {
        let mut out = self.clone();
        out.push(b);
        out
    }

    /// The first `n` bits (the whole string if shorter).
    pub fn prefix(&self, n: usize) -> BitString {
        BitString { bits: self.bits[..n.min(self.len())].to_vec() }
    }

    /// `x⁻`: the string with its last bit removed. `None` for the empty string.
    pub fn parent(&self) -> Option<BitString> {
        if self.is_empty() {
            None
        } else {
            Some(self.prefix(self.len() - 1))
        }
    }

    /// The binary value `[x]` of the string. Panics above 64 bits.
    pub fn value(&self) -> u64 {
        assert!(self.len() <= 64, "binary value of a {}-bit string", self.len());
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// `self ⊑ other`
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len() <= other.len() && other.bits[..self.len()] == self.bits[..]
    }

    /// `self ⊏ other`
    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    pub fn comparable(&self, other: &BitString) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// `self ◁ other`: some `z` has `z0 ⊑ self` and `z1 ⊑ other`.
    pub fn left_of(&self, other: &BitString) -> bool {
        match self.bits.iter().zip(other.bits.iter()).position(|(a, b)| a != b) {
            Some(i) => !self.bits[i],
            None => false,
        }
    }

    pub fn lex_cmp(&self, other: &BitString) -> Ordering {
        self.bits.cmp(&other.bits)
    }

    /// All strings of length `n` in lexicographic order.
    pub fn all_of_len(n: usize) -> impl Iterator<Item = BitString> {
        assert!(n < 64);
        (0..1u64 << n).map(move |v| BitString::from_value(v, n))
    }

    /// All strings of length at most `n`, in canonical order.
    pub fn all_up_to(n: usize) -> impl Iterator<Item = BitString> {
        (0..=n).flat_map(BitString::all_of_len)
    }

    /// Position of this string in the canonical enumeration ε, 0, 1, 00, ...
    pub fn canonical_index(&self) -> u64 {
        (1u64 << self.len()) - 1 + self.value()
    }

    /// The natural number `n` as a string: binary without leading zeros, `0 ↦ ε`.
    pub fn from_nat(n: u64) -> BitString {
        let len = 64 - n.leading_zeros() as usize;
        BitString::from_value(n, len)
    }

    /// Inverse of [`BitString::from_nat`]. Rejects leading zeros.
    pub fn to_nat(&self) -> Result<u64, CodecError> {
        if self.get(0) == Some(false) {
            return Err(CodecError::LeadingZero(self.to_string()));
        }
        if self.len() > 63 {
            return Err(CodecError::Overflow);
        }
        Ok(self.value())
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(CodecError::BadBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString::from_bits)
    }
}

impl From<&str> for BitString {
    /// Panics on anything but `0`/`1`; meant for literals.
    fn from(s: &str) -> Self {
        s.parse().expect("bit string literal")
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
