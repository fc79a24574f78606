//! Finite binary predicates on 1-based bit positions, their cylinders and
//! complete extensions found through monotone complexity.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::codec::{decode_string_list, encode_string_list, BitString, CodecError, PrefixFreeSet};
use crate::complexity::Estimator;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredicateError {
    #[error("index 0 is not a bit position")]
    ZeroIndex,
    #[error("cylinder of the empty predicate is undefined")]
    EmptyDomain,
    #[error("cylinder length {0} too large")]
    TooLong(u64),
    #[error("not a cylinder set")]
    NotCylinder,
    #[error("no program within bounds reaches the cylinder")]
    NotFound,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// A finite partial map from positions `1, 2, …` to bits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryPredicate {
    pairs: BTreeMap<u64, bool>,
}

const MAX_CYLINDER_LEN: u64 = 24;

impl BinaryPredicate {
    pub fn new(pairs: impl IntoIterator<Item = (u64, bool)>) -> Result<Self, PredicateError> {
        let pairs: BTreeMap<u64, bool> = pairs.into_iter().collect();
        if pairs.contains_key(&0) {
            return Err(PredicateError::ZeroIndex);
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &BTreeMap<u64, bool> {
        &self.pairs
    }

    pub fn domain_size(&self) -> usize {
        self.pairs.len()
    }

    pub fn max_index(&self) -> Option<u64> {
        self.pairs.keys().next_back().copied()
    }

    pub fn get(&self, i: u64) -> Option<bool> {
        self.pairs.get(&i).copied()
    }

    /// Whether `x` agrees with the predicate at every defined position it
    /// reaches.
    pub fn agrees_with(&self, x: &BitString) -> bool {
        self.pairs.iter().all(|(&i, &b)| x.get(i as usize - 1).map_or(true, |c| c == b))
    }

    /// `⟨2n⟩⟨bin(x₁)⟩⟨b₁⟩…⟨bin(xₙ)⟩⟨bₙ⟩` in increasing index order.
    pub fn encode(&self) -> BitString {
        let items: Vec<BitString> = self
            .pairs
            .iter()
            .flat_map(|(&i, &b)| [BitString::from_nat(i), BitString::from_bits(vec![b])])
            .collect();
        encode_string_list(items.iter())
    }

    pub fn decode(code: &BitString) -> Result<Self, PredicateError> {
        let items = decode_string_list(code)?;
        if items.len() % 2 != 0 {
            return Err(CodecError::NonCanonical.into());
        }
        let mut pairs = BTreeMap::new();
        let mut prev = 0;
        for chunk in items.chunks(2) {
            let i = chunk[0].to_nat()?;
            let b = match chunk[1].bits() {
                [b] => *b,
                _ => return Err(CodecError::NonCanonical.into()),
            };
            if i <= prev {
                return Err(CodecError::NonCanonical.into());
            }
            prev = i;
            pairs.insert(i, b);
        }
        Ok(Self { pairs })
    }

    /// Parses lines of `index<TAB>bit`.
    pub fn parse(text: &str) -> Result<Self, PredicateError> {
        let mut pairs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| PredicateError::Parse { line: n + 1, msg: msg.into() };
            let (i, b) = line.split_once('\t').ok_or_else(|| err("expected two fields"))?;
            let i: u64 = i.trim().parse().map_err(|_| err("bad index"))?;
            let b = match b.trim() {
                "0" => false,
                "1" => true,
                _ => return Err(err("bad bit")),
            };
            pairs.push((i, b));
        }
        Self::new(pairs)
    }
}

/// All strings of length `max index` that agree with `g`.
pub fn cylinder(g: &BinaryPredicate) -> Result<PrefixFreeSet, PredicateError> {
    let n = g.max_index().ok_or(PredicateError::EmptyDomain)?;
    if n > MAX_CYLINDER_LEN {
        return Err(PredicateError::TooLong(n));
    }
    let free: Vec<usize> = (1..=n).filter(|i| g.get(*i).is_none()).map(|i| i as usize - 1).collect();
    let members = (0..1u64 << free.len()).map(|v| {
        let mut bits = vec![false; n as usize];
        for (&i, &b) in &g.pairs {
            bits[i as usize - 1] = b;
        }
        for (j, &pos) in free.iter().enumerate() {
            bits[pos] = v >> (free.len() - 1 - j) & 1 == 1;
        }
        BitString::from_bits(bits)
    });
    Ok(PrefixFreeSet::new(members)?)
}

/// Recovers the predicate from its cylinder: positions on which all members
/// agree are the defined ones, and the set must be exactly their cylinder.
pub fn predicate_of_cylinder(set: &PrefixFreeSet) -> Result<BinaryPredicate, PredicateError> {
    let first = set.iter().next().ok_or(PredicateError::NotCylinder)?;
    let n = first.len();
    if n == 0 || set.iter().any(|x| x.len() != n) {
        return Err(PredicateError::NotCylinder);
    }
    let pairs: Vec<(u64, bool)> = (0..n)
        .filter(|&i| set.iter().all(|x| x.get(i) == first.get(i)))
        .map(|i| (i as u64 + 1, first.get(i).unwrap()))
        .collect();
    let g = BinaryPredicate::new(pairs)?;
    if g.max_index() != Some(n as u64) || cylinder(&g)? != *set {
        return Err(PredicateError::NotCylinder);
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtensionResult {
    pub program: BitString,
    pub raw_output: BitString,
    pub extension_rule: &'static str,
    /// `‖program‖ - |Dom(γ)|`
    pub bound_slack: i64,
}

impl ExtensionResult {
    /// The complete extension at position `i ≥ 1`: the output bit where
    /// there is one, 0 past the end.
    pub fn extension(&self, i: u64) -> bool {
        self.raw_output.get(i as usize - 1).unwrap_or(false)
    }

    pub fn agrees_with(&self, g: &BinaryPredicate) -> bool {
        g.pairs.iter().all(|(&i, &b)| self.extension(i) == b)
    }
}

/// The shortest program whose output has a prefix in the cylinder of `g`,
/// read as a complete predicate by padding its output with zeros. The empty
/// predicate accepts any output.
pub fn complete_extension_search(g: &BinaryPredicate, est: &Estimator) -> Result<ExtensionResult, PredicateError> {
    let goal = if g.domain_size() == 0 {
        PrefixFreeSet::new([BitString::new()])?
    } else {
        cylinder(g)?
    };
    let program = est.km(&goal).witness.ok_or(PredicateError::NotFound)?;
    let index = est.index(&BitString::new());
    let raw_output = index
        .enumeration
        .records
        .iter()
        .find(|r| r.program == program)
        .map(|r| r.output.clone())
        .expect("witness comes from the enumeration");
    Ok(ExtensionResult {
        bound_slack: program.len() as i64 - g.domain_size() as i64,
        program,
        raw_output,
        extension_rule: "output bits then zeros",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::MachineConfig;

    fn strings(set: &PrefixFreeSet) -> Vec<String> {
        set.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn cylinder_examples() {
        let g = BinaryPredicate::new([(2, false), (4, false)]).unwrap();
        let c = cylinder(&g).unwrap();
        assert_eq!(strings(&c), ["0000", "0010", "1000", "1010"]);
        assert_eq!(c.measure().to_string(), "1/2^2");
        assert_eq!(strings(&cylinder(&BinaryPredicate::new([(1, true)]).unwrap()).unwrap()), ["1"]);
        let c = cylinder(&BinaryPredicate::new([(3, true)]).unwrap()).unwrap();
        assert_eq!(strings(&c), ["001", "011", "101", "111"]);
        assert_eq!(cylinder(&BinaryPredicate::default()), Err(PredicateError::EmptyDomain));
    }

    #[test]
    fn encoding_round_trip() {
        let empty = BinaryPredicate::default();
        assert_eq!(empty.encode(), crate::codec::encode_string_set(&Default::default()));
        let g = BinaryPredicate::new([(2, false), (4, false)]).unwrap();
        assert_eq!(BinaryPredicate::decode(&g.encode()).unwrap(), g);
        assert!(BinaryPredicate::new([(0, true)]).is_err());
    }

    #[test]
    fn cylinder_round_trip_to_index_4() {
        for n in 1..=4u64 {
            for mask in 0..1u32 << n {
                for vals in 0..1u32 << n {
                    let pairs = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).map(|i| (i, vals >> (i - 1) & 1 == 1));
                    let g = BinaryPredicate::new(pairs).unwrap();
                    if g.max_index() != Some(n) {
                        continue;
                    }
                    assert_eq!(predicate_of_cylinder(&cylinder(&g).unwrap()).unwrap(), g);
                }
            }
        }
    }

    #[test]
    fn empty_predicate_takes_cheapest_program() {
        let est = Estimator::new(MachineConfig::new(10, 256));
        let r = complete_extension_search(&BinaryPredicate::default(), &est).unwrap();
        assert_eq!(r.program, BitString::from("10"));
        assert!(r.agrees_with(&BinaryPredicate::default()));
    }

    #[test]
    fn all_zero_prefix() {
        let est = Estimator::new(MachineConfig::new(12, 512));
        let g = BinaryPredicate::new((1..=4).map(|i| (i, false))).unwrap();
        let r = complete_extension_search(&g, &est).unwrap();
        assert!(r.raw_output.len() >= 4 && r.raw_output.prefix(4) == BitString::zeros(4));
        assert!(r.agrees_with(&g));
        assert_eq!(r.bound_slack, r.program.len() as i64 - 4);
    }
}
