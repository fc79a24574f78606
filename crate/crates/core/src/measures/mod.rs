//! Elementary measures and the machinery built on them: tests, deficiency
//! of randomness, Shannon–Fano codes, image and conditioned measures,
//! bounded stochasticity and hitting vectors.
//!
//! Weights are exact rationals. Anything that comes from or goes to the
//! machine is dyadic; conditioning can leave the dyadic ring.

mod hitting;
mod stoch;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{
    decode_measure, encode_measure, floor_log2_rational, floor_neg_log2_rational, BitString,
    CodecError, DyadicRational,
};
use crate::complexity::Estimator;

pub use hitting::{hitting_score, hitting_vector, smallest_hitting_c, HittingError, HittingVector};
pub use stoch::{stochasticity, Scoring, StochBounds, StochError, StochasticityResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Semimeasure,
    Probability,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("weight of {0} is not positive")]
    NonPositive(BitString),
    #[error("total mass {0} exceeds 1")]
    SumExceedsOne(BigRational),
    #[error("total mass {0} is not 1")]
    SumNotOne(BigRational),
    #[error("{0} is not in the support")]
    NotInSupport(BitString),
    #[error("test undefined on {0}")]
    Undefined(BitString),
    #[error("conditioning set has measure zero")]
    ZeroMass,
    #[error("k_t({0}) is infinite within the bounds")]
    Unbounded(BitString),
    #[error("weights are not dyadic")]
    NotDyadic,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryMeasure {
    pub weights: BTreeMap<BitString, BigRational>,
    pub kind: MeasureKind,
}

pub(crate) fn pow2(k: i64) -> BigRational {
    let p = BigInt::one() << k.unsigned_abs() as usize;
    if k >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

impl ElementaryMeasure {
    pub fn new(weights: BTreeMap<BitString, BigRational>, kind: MeasureKind) -> Self {
        Self { weights, kind }
    }

    pub fn from_dyadic(weights: impl IntoIterator<Item = (BitString, DyadicRational)>, kind: MeasureKind) -> Self {
        let mut map = BTreeMap::new();
        for (a, w) in weights {
            *map.entry(a).or_insert_with(BigRational::zero) += w.to_rational();
        }
        Self { weights: map, kind }
    }

    pub fn point(a: BitString) -> Self {
        Self::from_dyadic([(a, DyadicRational::one())], MeasureKind::Probability)
    }

    pub fn uniform(n: usize) -> Self {
        let w = DyadicRational::pow2_neg(n as u32);
        Self::from_dyadic(BitString::all_of_len(n).map(|a| (a, w.clone())), MeasureKind::Probability)
    }

    pub fn weight(&self, a: &BitString) -> BigRational {
        self.weights.get(a).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn mass<'a>(&self, set: impl IntoIterator<Item = &'a BitString>) -> BigRational {
        set.into_iter().map(|a| self.weight(a)).fold(BigRational::zero(), |acc, w| acc + w)
    }

    pub fn total(&self) -> BigRational {
        self.weights.values().fold(BigRational::zero(), |acc, w| acc + w)
    }

    pub fn support(&self) -> impl Iterator<Item = &BitString> {
        self.weights.keys()
    }

    pub fn contains(&self, a: &BitString) -> bool {
        self.weights.contains_key(a)
    }

    /// Checks positivity on the support and the kind's constraint on the
    /// total mass, exactly.
    pub fn validate(&self) -> Result<(), MeasureError> {
        if let Some((a, _)) = self.weights.iter().find(|(_, w)| !w.is_positive()) {
            return Err(MeasureError::NonPositive(a.clone()));
        }
        let total = self.total();
        match self.kind {
            MeasureKind::Semimeasure if total > BigRational::one() => Err(MeasureError::SumExceedsOne(total)),
            MeasureKind::Probability if !total.is_one() => Err(MeasureError::SumNotOne(total)),
            _ => Ok(()),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn to_dyadic(&self) -> Option<Vec<(BitString, DyadicRational)>> {
        self.weights
            .iter()
            .map(|(a, w)| Some((a.clone(), DyadicRational::from_rational(w)?)))
            .collect()
    }

    /// The machine-side code of the measure.
    pub fn encode(&self) -> Result<BitString, MeasureError> {
        Ok(encode_measure(&self.to_dyadic().ok_or(MeasureError::NotDyadic)?))
    }

    /// Decodes a measure code as a probability measure. Invalid measures are
    /// rejected.
    pub fn decode_probability(code: &BitString) -> Result<Self, MeasureError> {
        let m = Self::from_dyadic(decode_measure(code)?, MeasureKind::Probability);
        m.validate()?;
        Ok(m)
    }

    /// Parses lines of `bits<TAB>weight`, where a weight is `n/2^e` or a
    /// plain rational `p/q`.
    pub fn parse(text: &str, kind: MeasureKind) -> Result<Self, MeasureError> {
        let mut weights = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| MeasureError::Parse { line: i + 1, msg };
            let (a, w) = line.split_once('\t').ok_or_else(|| err("expected two fields".into()))?;
            let a: BitString = a.trim().parse().map_err(|e: CodecError| err(e.to_string()))?;
            let w = parse_weight(w.trim()).ok_or_else(|| err(format!("bad weight {w:?}")))?;
            if weights.insert(a.clone(), w).is_some() {
                return Err(err(format!("duplicate element {a}")));
            }
        }
        Ok(Self { weights, kind })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (a, w) in &self.weights {
            out.push_str(&format!("{a}\t{}\n", format_weight(w)));
        }
        out
    }
}

impl fmt::Display for ElementaryMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(|(a, w)| format!("{a}:{}", format_weight(w))).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn parse_weight(s: &str) -> Option<BigRational> {
    if let Ok(d) = s.parse::<DyadicRational>() {
        return Some(d.to_rational());
    }
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.parse().ok()?;
    let q: BigInt = q.parse().ok()?;
    (!q.is_zero()).then(|| BigRational::new(p, q))
}

pub fn format_weight(w: &BigRational) -> String {
    match DyadicRational::from_rational(w) {
        Some(d) => d.to_string(),
        None => format!("{}/{}", w.numer(), w.denom()),
    }
}

/// Whether `s` is a `W`-test: `Σ 2^{s(x)} W(x) ≤ 1`, exactly.
pub fn is_w_test(s: &BTreeMap<BitString, i64>, w: &ElementaryMeasure) -> Result<bool, MeasureError> {
    let mut sum = BigRational::zero();
    for (a, wa) in &w.weights {
        let sa = s.get(a).ok_or_else(|| MeasureError::Undefined(a.clone()))?;
        sum += pow2(*sa) * wa;
    }
    Ok(sum <= BigRational::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeficiencyValue {
    pub value: i64,
    pub floor_neg_log_weight: i64,
    pub conditional_k: i64,
}

impl DeficiencyValue {
    fn new(floor_neg_log_weight: i64, conditional_k: i64) -> Self {
        Self { value: floor_neg_log_weight - conditional_k, floor_neg_log_weight, conditional_k }
    }
}

/// `d(a|W,y) = ⌊-log W(a)⌋ - k_t(a|y)`.
pub fn deficiency(a: &BitString, w: &ElementaryMeasure, y: &BitString, est: &Estimator) -> Result<DeficiencyValue, MeasureError> {
    let wa = w.weights.get(a).ok_or_else(|| MeasureError::NotInSupport(a.clone()))?;
    let floor = floor_neg_log2_rational(wa)?;
    let k = est.k_uncached(a, y).value.ok_or_else(|| MeasureError::Unbounded(a.clone()))?;
    Ok(DeficiencyValue::new(floor, k as i64))
}

/// `Σ 2^{d(a|W,y)} W(a)` over the support. Elements with infinite `k_t`
/// contribute nothing.
pub fn deficiency_test_sum(w: &ElementaryMeasure, y: &BitString, est: &Estimator) -> Result<BigRational, MeasureError> {
    let mut sum = BigRational::zero();
    for (a, wa) in &w.weights {
        match deficiency(a, w, y, est) {
            Ok(d) => sum += pow2(d.value) * wa,
            Err(MeasureError::Unbounded(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(sum)
}

/// A Shannon–Fano–Elias code: `x` gets the first `⌈-log P(x)⌉ + 1` bits of
/// the midpoint of its cumulative interval, elements taken in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShannonFanoCode {
    pub codewords: BTreeMap<BitString, BitString>,
}

impl ShannonFanoCode {
    pub fn encode(&self, x: &BitString) -> Option<&BitString> {
        self.codewords.get(x)
    }

    /// Decodes the codeword at the start of `bits`, returning the element and
    /// the number of bits consumed.
    pub fn decode(&self, bits: &BitString) -> Option<(BitString, usize)> {
        self.codewords
            .iter()
            .find(|(_, c)| c.is_prefix_of(bits))
            .map(|(x, c)| (x.clone(), c.len()))
    }
}

pub fn shannon_fano(p: &ElementaryMeasure) -> Result<ShannonFanoCode, MeasureError> {
    ElementaryMeasure { kind: MeasureKind::Semimeasure, ..p.clone() }.validate()?;
    let mut codewords = BTreeMap::new();
    let mut cum = BigRational::zero();
    for (x, w) in &p.weights {
        let len = (1 - floor_log2_rational(w)?) as usize;
        let mid = &cum + w / BigRational::from_integer(2.into());
        let scaled = (mid * pow2(len as i64)).floor().to_integer();
        codewords.insert(x.clone(), bits_of(&scaled.to_biguint().expect("nonnegative"), len));
        cum += w;
    }
    Ok(ShannonFanoCode { codewords })
}

fn bits_of(n: &BigUint, len: usize) -> BitString {
    BitString::from_bits((0..len).rev().map(|i| n.bit(i as u64)).collect())
}

/// The pushforward `W_g(x) = Σ{W(y) : g(y) = x}`.
pub fn image_measure(w: &ElementaryMeasure, g: impl Fn(&BitString) -> BitString) -> ElementaryMeasure {
    let mut weights: BTreeMap<BitString, BigRational> = BTreeMap::new();
    for (a, wa) in &w.weights {
        *weights.entry(g(a)).or_insert_with(BigRational::zero) += wa;
    }
    ElementaryMeasure { weights, kind: w.kind }
}

/// `Q` conditioned on `S`, renormalized to a probability measure.
pub fn condition_measure(q: &ElementaryMeasure, s: &BTreeSet<BitString>) -> Result<ElementaryMeasure, MeasureError> {
    let mass = q.mass(s.iter().filter(|a| q.contains(a)));
    if mass.is_zero() {
        return Err(MeasureError::ZeroMass);
    }
    let weights = q
        .weights
        .iter()
        .filter(|(a, _)| s.contains(a))
        .map(|(a, w)| (a.clone(), w / &mass))
        .collect();
    Ok(ElementaryMeasure { weights, kind: MeasureKind::Probability })
}

pub(crate) fn ceil_log2_int(n: i64) -> i64 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).to_u64().unwrap().leading_zeros() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::MachineConfig;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    fn measure(items: &[(&str, i64, i64)], kind: MeasureKind) -> ElementaryMeasure {
        ElementaryMeasure::new(items.iter().map(|(a, p, q)| (BitString::from(*a), r(*p, *q))).collect(), kind)
    }

    #[test]
    fn validation() {
        assert!(ElementaryMeasure::uniform(3).is_valid());
        let m = measure(&[("0", 3, 4)], MeasureKind::Semimeasure);
        assert!(m.is_valid());
        let m = ElementaryMeasure { kind: MeasureKind::Probability, ..m };
        assert_eq!(m.validate(), Err(MeasureError::SumNotOne(r(3, 4))));
        let m = measure(&[("0", 1, 2), ("1", 0, 1)], MeasureKind::Semimeasure);
        assert_eq!(m.validate(), Err(MeasureError::NonPositive("1".into())));
    }

    #[test]
    fn w_tests() {
        let w = ElementaryMeasure::uniform(3);
        let zero: BTreeMap<_, _> = w.support().map(|a| (a.clone(), 0)).collect();
        assert!(is_w_test(&zero, &w).unwrap());
        let floor: BTreeMap<_, _> = w.support().map(|a| (a.clone(), 3)).collect();
        assert!(!is_w_test(&floor, &w).unwrap());
        let neg: BTreeMap<_, _> = w.support().map(|a| (a.clone(), -1)).collect();
        assert!(is_w_test(&neg, &w).unwrap());
        assert!(is_w_test(&BTreeMap::new(), &w).is_err());
    }

    #[test]
    fn deficiency_floor_term() {
        let est = Estimator::new(MachineConfig::new(12, 512));
        let a: BitString = "000".into();
        let k = est.k(&a, &BitString::new()).value.unwrap() as i64;
        let d = deficiency(&a, &ElementaryMeasure::uniform(3), &BitString::new(), &est).unwrap();
        assert_eq!(d, DeficiencyValue { value: 3 - k, floor_neg_log_weight: 3, conditional_k: k });
        let d = deficiency(&a, &ElementaryMeasure::point(a.clone()), &BitString::new(), &est).unwrap();
        assert_eq!(d.value, -k);
        let half = measure(&[("000", 1, 4), ("1", 3, 4)], MeasureKind::Probability);
        let double = measure(&[("000", 1, 2), ("1", 1, 2)], MeasureKind::Probability);
        let dh = deficiency(&a, &half, &BitString::new(), &est).unwrap();
        let dd = deficiency(&a, &double, &BitString::new(), &est).unwrap();
        assert_eq!(dh.value - 1, dd.value);
        assert!(deficiency(&"1".into(), &ElementaryMeasure::uniform(3), &BitString::new(), &est).is_err());
    }

    #[test]
    fn shannon_fano_lengths() {
        let p = measure(&[("0", 1, 2), ("1", 1, 4)], MeasureKind::Semimeasure);
        let code = shannon_fano(&p).unwrap();
        assert!(code.encode(&"0".into()).unwrap().len() <= 2);
        assert!(code.encode(&"1".into()).unwrap().len() <= 3);
        let code = shannon_fano(&ElementaryMeasure::point("01".into())).unwrap();
        assert!(code.encode(&"01".into()).unwrap().len() <= 1);
    }

    #[test]
    fn image_and_condition() {
        let w = ElementaryMeasure::uniform(1);
        assert_eq!(image_measure(&w, |a| a.clone()), w);
        assert_eq!(image_measure(&w, |a| a.prefix(a.len() - 1)), ElementaryMeasure::point(BitString::new()));
        let q = ElementaryMeasure::uniform(2);
        let s: BTreeSet<BitString> = ["00".into(), "11".into()].into();
        let c = condition_measure(&q, &s).unwrap();
        assert_eq!(c, measure(&[("00", 1, 2), ("11", 1, 2)], MeasureKind::Probability));
        assert_eq!(condition_measure(&q, &["1".into()].into()), Err(MeasureError::ZeroMass));
        let third = measure(&[("0", 1, 4), ("1", 1, 2)], MeasureKind::Semimeasure);
        let c = condition_measure(&third, &["0".into(), "1".into()].into()).unwrap();
        assert_eq!(c.weight(&"0".into()), r(1, 3));
        assert!(c.is_valid());
        assert_eq!(c.encode(), Err(MeasureError::NotDyadic));
    }

    #[test]
    fn text_round_trip() {
        let m = measure(&[("", 1, 3), ("0110", 3, 8)], MeasureKind::Semimeasure);
        assert_eq!(ElementaryMeasure::parse(&m.to_text(), MeasureKind::Semimeasure).unwrap(), m);
        assert!(ElementaryMeasure::parse("0\t1/2^1\n0\t1/2^2\n", MeasureKind::Semimeasure).is_err());
    }

    #[test]
    fn integer_log() {
        let expect = [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4)];
        for (n, l) in expect {
            assert_eq!(ceil_log2_int(n), l, "{n}");
        }
        assert_eq!(ceil_log2_int(-3), 0);
    }
}
