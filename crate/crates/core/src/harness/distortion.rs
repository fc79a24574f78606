use serde::Serialize;

use crate::codec::{BitString, DyadicRational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistortionKind {
    /// Number of differing positions; defined only on equal lengths.
    HammingEqualLength,
    /// Differing positions over the common prefix plus the length difference.
    PrefixDisagreement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistortionSpec {
    pub kind: DistortionKind,
    pub radius: DyadicRational,
}

impl DistortionSpec {
    pub fn new(kind: DistortionKind, radius: DyadicRational) -> Option<Self> {
        (!radius.is_zero()).then_some(Self { kind, radius })
    }

    pub fn distance(&self, x: &BitString, y: &BitString) -> Option<u64> {
        let common = x.bits().iter().zip(y.bits()).filter(|(a, b)| a != b).count() as u64;
        match self.kind {
            DistortionKind::HammingEqualLength => (x.len() == y.len()).then_some(common),
            DistortionKind::PrefixDisagreement => Some(common + x.len().abs_diff(y.len()) as u64),
        }
    }

    fn within(&self, d: u64) -> bool {
        DyadicRational::new(d, 0) < self.radius
    }

    /// `{x : d(x, y) < R}` in canonical order. Both distortions grow with
    /// the length difference, so the ball is finite.
    pub fn ball(&self, y: &BitString) -> Vec<BitString> {
        let lengths = match self.kind {
            DistortionKind::HammingEqualLength => y.len()..=y.len(),
            DistortionKind::PrefixDisagreement => {
                let reach = (0..).find(|&r| !self.within(r)).unwrap() as usize;
                y.len().saturating_sub(reach)..=y.len() + reach
            }
        };
        lengths
            .flat_map(BitString::all_of_len)
            .filter(|x| self.distance(x, y).is_some_and(|d| self.within(d)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_balls() {
        let y: BitString = "0000".into();
        let r1 = DistortionSpec::new(DistortionKind::HammingEqualLength, DyadicRational::one()).unwrap();
        assert_eq!(r1.ball(&y), vec![y.clone()]);
        let r2 = DistortionSpec::new(DistortionKind::HammingEqualLength, DyadicRational::new(2u32, 0)).unwrap();
        let names: Vec<String> = r2.ball(&y).iter().map(|x| x.to_string()).collect();
        assert_eq!(names, ["0000", "0001", "0010", "0100", "1000"]);
        let big = DistortionSpec::new(DistortionKind::HammingEqualLength, DyadicRational::new(9u32, 0)).unwrap();
        assert_eq!(big.ball(&y).len(), 16);
    }

    #[test]
    fn prefix_disagreement_ball() {
        let s = DistortionSpec::new(DistortionKind::PrefixDisagreement, DyadicRational::new(3u32, 1)).unwrap();
        let names: Vec<String> = s.ball(&"01".into()).iter().map(|x| x.to_string()).collect();
        assert_eq!(names, ["0", "00", "01", "11", "010", "011"]);
    }
}
