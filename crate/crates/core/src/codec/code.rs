//! Self-delimiting codes and the canonical encodings built from them.
//!
//! Natural numbers are written as binary strings without leading zeros
//! (`0 ↦ ε`, `1 ↦ 1`, `6 ↦ 110`) before being self-delimited. Every
//! encoding in this module composes `⟨x⟩ = 1^‖x‖ 0 x` over that convention.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::Zero;

use super::{BitString, CodecError, DyadicRational};

/// `⟨x⟩ = 1^‖x‖ 0 x`
pub fn encode_self_delim(x: &BitString) -> BitString {
    let mut out = BitString::new();
    for _ in 0..x.len() {
        out.push(true);
    }
    out.push(false);
    out.extend_from(x);
    out
}

/// `⟨n⟩` for a natural number, through the binary-string convention.
pub fn encode_nat(n: u64) -> BitString {
    encode_self_delim(&BitString::from_nat(n))
}

/// Sequential reader over a bit string, used by every decoder here.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(s: &'a BitString) -> Self {
        Self { bits: s.bits(), pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn is_done(&self) -> bool {
        self.pos == self.bits.len()
    }

    pub fn bit(&mut self) -> Result<bool, CodecError> {
        let b = *self.bits.get(self.pos).ok_or(CodecError::Truncated)?;
        self.pos += 1;
        Ok(b)
    }

    pub fn self_delim(&mut self) -> Result<BitString, CodecError> {
        let mut n = 0usize;
        while self.bit()? {
            n += 1;
        }
        let mut out = BitString::new();
        for _ in 0..n {
            out.push(self.bit()?);
        }
        Ok(out)
    }

    pub fn nat(&mut self) -> Result<u64, CodecError> {
        self.self_delim()?.to_nat()
    }

    pub fn big_nat(&mut self) -> Result<BigUint, CodecError> {
        let s = self.self_delim()?;
        if s.get(0) == Some(false) {
            return Err(CodecError::LeadingZero(s.to_string()));
        }
        Ok(s.bits().iter().fold(BigUint::zero(), |acc, &b| (acc << 1u32) + BigUint::from(b as u8)))
    }

    pub fn finish(self) -> Result<(), CodecError> {
        if self.is_done() {
            Ok(())
        } else {
            Err(CodecError::TrailingBits(self.bits.len() - self.pos))
        }
    }
}

fn big_to_bits(n: &BigUint) -> BitString {
    if n.is_zero() {
        return BitString::new();
    }
    BitString::from_bits(n.to_str_radix(2).bytes().map(|c| c == b'1').collect())
}

/// Decodes one `⟨x⟩` and returns `x` with the number of bits consumed.
pub fn decode_self_delim(code: &BitString) -> Result<(BitString, usize), CodecError> {
    let mut r = BitReader::new(code);
    let x = r.self_delim()?;
    Ok((x, r.position()))
}

/// `⟨n⟩⟨a₁⟩…⟨aₙ⟩` over the set in canonical (length-then-lexicographic) order.
pub fn encode_string_set(set: &BTreeSet<BitString>) -> BitString {
    encode_string_list(set.iter())
}

/// Like [`encode_string_set`] but keeps the given order and multiplicity.
pub fn encode_string_list<'a>(items: impl ExactSizeIterator<Item = &'a BitString>) -> BitString {
    let mut out = encode_nat(items.len() as u64);
    for a in items {
        out.extend_from(&encode_self_delim(a));
    }
    out
}

pub fn decode_string_list(code: &BitString) -> Result<Vec<BitString>, CodecError> {
    let mut r = BitReader::new(code);
    let n = r.nat()?;
    let mut items = Vec::new();
    for _ in 0..n {
        items.push(r.self_delim()?);
    }
    r.finish()?;
    Ok(items)
}

/// Inverse of [`encode_string_set`]; rejects non-canonical orderings.
pub fn decode_string_set(code: &BitString) -> Result<BTreeSet<BitString>, CodecError> {
    let items = decode_string_list(code)?;
    if !items.windows(2).all(|w| w[0] < w[1]) {
        return Err(CodecError::NonCanonical);
    }
    Ok(items.into_iter().collect())
}

/// Largest `n` accepted for the uniform-on-`Σⁿ` measure form.
pub const MAX_UNIFORM_LEN: u64 = 16;

/// Compact code for finite dyadic measures, used whenever a measure has to
/// travel as a machine output or an auxiliary input:
///
/// ```text
/// 0  ⟨a⟩                                  point mass on a
/// 10 ⟨n⟩                                  uniform on Σⁿ (n ≤ 16)
/// 11 ⟨k⟩ (⟨aⱼ⟩ ⟨numⱼ⟩ ⟨expⱼ⟩){k}          explicit list, aⱼ strictly increasing
/// ```
///
/// The encoder picks the first applicable form, so it is injective on measures.
pub fn encode_measure(weights: &[(BitString, DyadicRational)]) -> BitString {
    let mut out = BitString::new();
    if let [(a, w)] = weights {
        if *w == DyadicRational::one() {
            out.push(false);
            out.extend_from(&encode_self_delim(a));
            return out;
        }
    }
    if let Some(n) = uniform_len(weights) {
        out.push(true);
        out.push(false);
        out.extend_from(&encode_nat(n as u64));
        return out;
    }
    out.push(true);
    out.push(true);
    out.extend_from(&encode_nat(weights.len() as u64));
    let mut sorted: Vec<_> = weights.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    for (a, w) in sorted {
        out.extend_from(&encode_self_delim(a));
        out.extend_from(&encode_self_delim(&big_to_bits(w.numerator())));
        out.extend_from(&encode_nat(w.exponent() as u64));
    }
    out
}

fn uniform_len(weights: &[(BitString, DyadicRational)]) -> Option<usize> {
    let n = weights.first()?.0.len();
    if n as u64 > MAX_UNIFORM_LEN || weights.len() != 1usize << n {
        return None;
    }
    let w = DyadicRational::pow2_neg(n as u32);
    let support: BTreeSet<&BitString> = weights.iter().map(|(a, _)| a).collect();
    let ok = support.len() == weights.len()
        && weights.iter().all(|(a, x)| a.len() == n && *x == w);
    ok.then_some(n)
}

/// Decodes a measure code. The result is a list of `(element, weight)` in
/// canonical element order; the caller decides whether it is a valid measure.
pub fn decode_measure(code: &BitString) -> Result<Vec<(BitString, DyadicRational)>, CodecError> {
    let mut r = BitReader::new(code);
    let out = if !r.bit()? {
        vec![(r.self_delim()?, DyadicRational::one())]
    } else if !r.bit()? {
        let n = r.nat()?;
        if n > MAX_UNIFORM_LEN {
            return Err(CodecError::TooLarge(n));
        }
        let w = DyadicRational::pow2_neg(n as u32);
        BitString::all_of_len(n as usize).map(|a| (a, w.clone())).collect()
    } else {
        let k = r.nat()?;
        let mut items: Vec<(BitString, DyadicRational)> = Vec::new();
        for _ in 0..k {
            let a = r.self_delim()?;
            let num = r.big_nat()?;
            let exp = r.nat()?;
            let exp = u32::try_from(exp).map_err(|_| CodecError::Overflow)?;
            if let Some((prev, _)) = items.last() {
                if prev >= &a {
                    return Err(CodecError::NonCanonical);
                }
            }
            items.push((a, DyadicRational::new(num, exp)));
        }
        items
    };
    r.finish()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.into()
    }

    #[test]
    fn self_delim_examples() {
        assert_eq!(encode_self_delim(&bs("01")), bs("11001"));
        assert_eq!(encode_self_delim(&bs("")), bs("0"));
    }

    #[test]
    fn self_delim_round_trip_to_12() {
        for x in BitString::all_up_to(12) {
            let code = encode_self_delim(&x);
            assert_eq!(decode_self_delim(&code).unwrap(), (x.clone(), code.len()));
        }
    }

    #[test]
    fn self_delim_image_is_prefix_free_to_10() {
        let mut codes: Vec<BitString> = BitString::all_up_to(10).map(|x| encode_self_delim(&x)).collect();
        codes.sort_by(|a, b| a.lex_cmp(b));
        // In lexicographic order a prefix sits immediately before one of its extensions.
        for w in codes.windows(2) {
            assert!(!w[0].is_prefix_of(&w[1]), "{} ⊑ {}", w[0], w[1]);
        }
    }

    #[test]
    fn string_set_examples() {
        assert_eq!(encode_string_set(&BTreeSet::new()), encode_nat(0));
        assert_eq!(encode_string_set(&BTreeSet::new()), bs("0"));
        // ⟨1⟩ = ⟨"1"⟩ = 101, then ⟨"1"⟩ = 101.
        let one: BTreeSet<BitString> = [bs("1")].into();
        assert_eq!(encode_string_set(&one), bs("101101"));
        let a: BTreeSet<BitString> = [bs("0"), bs("1")].into();
        let b: BTreeSet<BitString> = [bs("1"), bs("0")].into();
        assert_eq!(encode_string_set(&a), encode_string_set(&b));
        assert_eq!(encode_string_set(&a), bs("11010100101"));
    }

    #[test]
    fn measure_code_forms() {
        let point = vec![(bs("01"), DyadicRational::one())];
        assert_eq!(encode_measure(&point), bs("011001"));
        let uniform: Vec<_> =
            BitString::all_of_len(3).map(|a| (a, DyadicRational::pow2_neg(3))).collect();
        assert_eq!(encode_measure(&uniform), bs("10").concat(&encode_nat(3)));
        let list = vec![(bs("1"), "3/2^2".parse().unwrap()), (bs("0"), "1/2^2".parse().unwrap())];
        let code = encode_measure(&list);
        let mut sorted = list.clone();
        sorted.sort();
        assert_eq!(decode_measure(&code).unwrap(), sorted);
        assert!(decode_measure(&bs("0110")).is_err());
    }

    proptest! {
        #[test]
        fn string_set_round_trip(items in proptest::collection::btree_set("[01]{0,6}", 0..6)) {
            let set: BTreeSet<BitString> = items.iter().map(|s| bs(s)).collect();
            prop_assert_eq!(decode_string_set(&encode_string_set(&set)).unwrap(), set);
        }

        #[test]
        fn measure_round_trip(items in proptest::collection::btree_map("[01]{0,4}", (1u32..40, 0u32..8), 1..6)) {
            let mut weights: Vec<(BitString, DyadicRational)> =
                items.iter().map(|(a, (n, e))| (bs(a), DyadicRational::new(*n, *e))).collect();
            weights.sort();
            let decoded = decode_measure(&encode_measure(&weights)).unwrap();
            prop_assert_eq!(decoded, weights);
        }
    }
}
