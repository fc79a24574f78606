use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::codec::{decode_string_set, BitString};

use super::{pow2, ElementaryMeasure, MeasureError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HittingError {
    #[error("{0} is not a set encoding")]
    BadSetEncoding(BitString),
    #[error("set {0} is not heavy: -log m(F) > i")]
    NotHeavy(BitString),
    #[error("vector length c·d·2^(i+1) = {0} is too large")]
    TooLarge(u128),
    #[error("greedy score {0} exceeds 1")]
    Infeasible(BigRational),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HittingVector {
    pub elements: Vec<BitString>,
    /// `(c, d, i)`
    pub params: (u32, u32, u32),
    /// Expected score of a random vector drawn from the sampling measure.
    #[serde(serialize_with = "ser_rational")]
    pub initial_score: BigRational,
    /// `Σ_F Q(⟨F⟩) t_z(F)` for the chosen vector.
    #[serde(serialize_with = "ser_rational")]
    pub final_score: BigRational,
}

fn ser_rational<S: serde::Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&super::format_weight(q))
}

impl HittingVector {
    pub fn hits(&self, f: &BTreeSet<BitString>) -> bool {
        self.elements.iter().any(|x| f.contains(x))
    }
}

struct Heavy {
    set: BTreeSet<BitString>,
    q: BigRational,
    p: BigRational,
}

fn heavy_sets(q: &ElementaryMeasure, m: &ElementaryMeasure, sample: &ElementaryMeasure, i: u32) -> Result<Vec<Heavy>, HittingError> {
    q.validate()?;
    m.validate()?;
    let floor = pow2(-(i as i64));
    q.weights
        .iter()
        .map(|(code, qw)| {
            let set = decode_string_set(code).map_err(|_| HittingError::BadSetEncoding(code.clone()))?;
            if m.mass(&set) < floor {
                return Err(HittingError::NotHeavy(code.clone()));
            }
            let p = sample.mass(&set);
            Ok(Heavy { set, q: qw.clone(), p })
        })
        .collect()
}

/// `m` extended to a probability measure by giving the deficit to `ε`.
fn sampling_measure(m: &ElementaryMeasure) -> ElementaryMeasure {
    let mut s = m.clone();
    s.kind = super::MeasureKind::Probability;
    let deficit = BigRational::one() - m.total();
    if !deficit.is_zero() {
        *s.weights.entry(BitString::new()).or_insert_with(BigRational::zero) += deficit;
    }
    s
}

/// `Σ_F Q(⟨F⟩) t_z(F)` with `t_z(F) = 2^{cd}` when `F ∩ z = ∅`, else 0.
pub fn hitting_score(q: &ElementaryMeasure, z: &[BitString], c: u32, d: u32) -> Result<BigRational, HittingError> {
    let mut sum = BigRational::zero();
    for (code, qw) in &q.weights {
        let set = decode_string_set(code).map_err(|_| HittingError::BadSetEncoding(code.clone()))?;
        if !z.iter().any(|x| set.contains(x)) {
            sum += qw;
        }
    }
    Ok(sum * pow2(c as i64 * d as i64))
}

/// Builds a vector of `c·d·2^{i+1}` strings from the support of `m` (plus
/// `ε` carrying `1 - m(Σ*)`) by the method of conditional expectations: each
/// position takes the candidate minimizing the expected score when the
/// remaining positions are drawn independently from the sampling measure.
/// Ties go to the canonically smallest candidate.
pub fn hitting_vector(q: &ElementaryMeasure, m: &ElementaryMeasure, i: u32, c: u32, d: u32) -> Result<HittingVector, HittingError> {
    let n = c as u128 * d as u128 * (1u128 << (i + 1));
    if n > 1 << 16 {
        return Err(HittingError::TooLarge(n));
    }
    let n = n as usize;
    let sample = sampling_measure(m);
    let sets = heavy_sets(q, m, &sample, i)?;
    let scale = pow2(c as i64 * d as i64);
    let miss = |h: &Heavy, r: usize| -> BigRational { num_traits::pow(BigRational::one() - &h.p, r) };
    let initial_score = sets.iter().map(|h| &h.q * miss(h, n)).fold(BigRational::zero(), |a, b| a + b) * &scale;

    let candidates: Vec<&BitString> = sample.support().collect();
    let mut alive: Vec<&Heavy> = sets.iter().collect();
    let mut elements = Vec::with_capacity(n);
    for j in 0..n {
        let r = n - j - 1;
        // Minimizing the conditional expectation is maximizing the weight
        // removed by hitting, since the alive total is common to all choices.
        let factors: Vec<BigRational> = alive.iter().map(|h| &h.q * miss(h, r)).collect();
        let mut best: Option<(BigRational, &BitString)> = None;
        for x in &candidates {
            let gain = alive
                .iter()
                .zip(&factors)
                .filter(|(h, _)| h.set.contains(*x))
                .fold(BigRational::zero(), |acc, (_, f)| acc + f);
            if best.as_ref().map_or(true, |(g, _)| gain > *g) {
                best = Some((gain, x));
            }
        }
        let (_, x) = best.expect("sampling measure has nonempty support");
        alive.retain(|h| !h.set.contains(x));
        elements.push(x.clone());
    }
    let final_score = alive.iter().map(|h| h.q.clone()).fold(BigRational::zero(), |a, b| a + b) * &scale;
    if final_score > BigRational::one() {
        return Err(HittingError::Infeasible(final_score));
    }
    Ok(HittingVector { elements, params: (c, d, i), initial_score, final_score })
}

/// The smallest `c ≤ max_c` for which the greedy vector meets every set in
/// the support of `Q`.
pub fn smallest_hitting_c(q: &ElementaryMeasure, m: &ElementaryMeasure, i: u32, d: u32, max_c: u32) -> Result<Option<u32>, HittingError> {
    for c in 1..=max_c {
        let z = hitting_vector(q, m, i, c, d)?;
        if z.final_score.is_zero() {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode_string_set;
    use crate::measures::MeasureKind;

    fn set_code(items: &[&str]) -> BitString {
        encode_string_set(&items.iter().map(|s| BitString::from(*s)).collect())
    }

    fn half(items: &[&str]) -> ElementaryMeasure {
        ElementaryMeasure::new(
            items.iter().map(|s| (BitString::from(*s), BigRational::new(1.into(), 2.into()))).collect(),
            MeasureKind::Semimeasure,
        )
    }

    #[test]
    fn single_heavy_set() {
        let q = ElementaryMeasure::point(set_code(&["0"]));
        let z = hitting_vector(&q, &half(&["0"]), 1, 1, 1).unwrap();
        assert_eq!(z.elements.len(), 4);
        assert_eq!(z.elements[0], BitString::from("0"));
        assert!(z.final_score.is_zero());
    }

    #[test]
    fn two_heavy_singletons() {
        let mut q = ElementaryMeasure::point(set_code(&["0"]));
        q.weights.clear();
        q.weights.insert(set_code(&["0"]), BigRational::new(1.into(), 2.into()));
        q.weights.insert(set_code(&["1"]), BigRational::new(1.into(), 2.into()));
        let z = hitting_vector(&q, &half(&["0", "1"]), 1, 1, 1).unwrap();
        let names: Vec<String> = z.elements.iter().map(|x| x.to_string()).collect();
        assert_eq!(names, ["0", "1", "0", "0"]);
        assert!(z.final_score.is_zero());
        assert!(z.initial_score < BigRational::one());
    }

    #[test]
    fn light_sets_are_rejected() {
        let q = ElementaryMeasure::point(set_code(&["0"]));
        let m = ElementaryMeasure::new([("0".into(), BigRational::new(1.into(), 8.into()))].into(), MeasureKind::Semimeasure);
        assert_eq!(hitting_vector(&q, &m, 2, 1, 1), Err(HittingError::NotHeavy(set_code(&["0"]))));
        assert!(hitting_vector(&q, &m, 3, 1, 1).is_ok());
    }
}
