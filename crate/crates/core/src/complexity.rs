//! Fuel-bounded estimates of prefix complexity, algorithmic probability,
//! monotone complexity of prefix-free sets and mutual information.
//!
//! `k_t(x|y)` is the length of the shortest program of the reference
//! machine that outputs `x` with auxiliary string `y` within the
//! configured length and fuel bounds, and is infinite when there is none.
//! Pairs are encoded as `⟨x,y⟩ = ⟨x⟩⟨y⟩`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use crate::codec::{encode_self_delim, BitString, DyadicRational, PrefixFreeSet};
use crate::leftward::Domain;
use crate::machine::{asm, enumerate_halting, CachedEnumeration, Enumeration, MachineConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexityError {
    #[error("k_t({0}) is infinite within the bounds")]
    Unbounded(BitString),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityValue {
    /// `None` stands for infinity.
    pub value: Option<usize>,
    pub witness: Option<BitString>,
    pub config: MachineConfig,
}

impl ComplexityValue {
    pub fn is_finite(&self) -> bool {
        self.value.is_some()
    }
}

#[derive(Debug, Clone)]
struct OutputStats {
    witness: BitString,
    weight: DyadicRational,
}

/// An enumeration indexed by output.
#[derive(Debug)]
pub struct Indexed {
    pub enumeration: Enumeration,
    by_output: HashMap<BitString, OutputStats>,
}

impl Indexed {
    pub fn new(enumeration: Enumeration) -> Self {
        let mut by_output: HashMap<BitString, OutputStats> = HashMap::new();
        for r in &enumeration.records {
            let w = DyadicRational::pow2_neg(r.program.len() as u32);
            by_output
                .entry(r.output.clone())
                .and_modify(|s| {
                    let shorter = (r.program.len(), r.program.bits()) < (s.witness.len(), s.witness.bits());
                    if shorter {
                        s.witness = r.program.clone();
                    }
                    s.weight += &w;
                })
                .or_insert(OutputStats { witness: r.program.clone(), weight: w });
        }
        Self { enumeration, by_output }
    }

    pub fn outputs(&self) -> impl Iterator<Item = &BitString> {
        self.by_output.keys()
    }
}

/// Estimator for one machine configuration. Enumerations for auxiliary
/// strings are computed on first use and kept.
pub struct Estimator {
    config: MachineConfig,
    digest: Option<String>,
    indexes: Mutex<HashMap<BitString, Arc<Indexed>>>,
}

impl Estimator {
    pub fn new(config: MachineConfig) -> Self {
        Self { config, digest: None, indexes: Mutex::new(HashMap::new()) }
    }

    /// Seeds the estimator with a cached unconditional enumeration.
    pub fn from_cached(cached: CachedEnumeration) -> Self {
        let e = Self::new(cached.enumeration.config);
        let aux = cached.enumeration.aux.clone();
        e.indexes.lock().unwrap().insert(aux, Arc::new(Indexed::new(cached.enumeration)));
        Self { digest: Some(cached.digest), ..e }
    }

    pub fn config(&self) -> MachineConfig {
        self.config
    }

    pub fn cache_digest(&self) -> Option<&str> {
        self.digest.as_deref()
    }

    pub fn index(&self, aux: &BitString) -> Arc<Indexed> {
        if let Some(ix) = self.indexes.lock().unwrap().get(aux) {
            return ix.clone();
        }
        let ix = Arc::new(Indexed::new(enumerate_halting(self.config, aux)));
        self.indexes.lock().unwrap().entry(aux.clone()).or_insert(ix).clone()
    }

    pub fn k(&self, x: &BitString, y: &BitString) -> ComplexityValue {
        let ix = self.index(y);
        let witness = ix.by_output.get(x).map(|s| s.witness.clone());
        ComplexityValue { value: witness.as_ref().map(BitString::len), witness, config: self.config }
    }

    /// `k_t(x|y)` without keeping the enumeration for `y`. Only programs up to
    /// the length of the literal program for `x` are searched, which cannot
    /// change the minimum.
    pub fn k_uncached(&self, x: &BitString, y: &BitString) -> ComplexityValue {
        if let Some(ix) = self.indexes.lock().unwrap().get(y) {
            let witness = ix.by_output.get(x).map(|s| s.witness.clone());
            return ComplexityValue { value: witness.as_ref().map(BitString::len), witness, config: self.config };
        }
        let bound = asm::fin(x).len().min(self.config.max_program_len);
        let e = enumerate_halting(MachineConfig::new(bound, self.config.fuel), y);
        let witness = e
            .records
            .iter()
            .filter(|r| &r.output == x)
            .map(|r| &r.program)
            .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.lex_cmp(b)))
            .cloned();
        ComplexityValue { value: witness.as_ref().map(BitString::len), witness, config: self.config }
    }

    pub fn m(&self, x: &BitString, y: &BitString) -> DyadicRational {
        self.index(y).by_output.get(x).map(|s| s.weight.clone()).unwrap_or_default()
    }

    pub fn m_set<'a>(&self, d: impl IntoIterator<Item = &'a BitString>, y: &BitString) -> DyadicRational {
        let ix = self.index(y);
        d.into_iter()
            .filter_map(|x| ix.by_output.get(x).map(|s| s.weight.clone()))
            .sum()
    }

    /// `Km_t(G)`: shortest program whose output has a prefix in `G`.
    pub fn km(&self, g: &PrefixFreeSet) -> ComplexityValue {
        let ix = self.index(&BitString::new());
        let witness = ix
            .enumeration
            .records
            .iter()
            .filter(|r| g.covers(&r.output))
            .map(|r| &r.program)
            .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.lex_cmp(b)))
            .cloned();
        ComplexityValue { value: witness.as_ref().map(BitString::len), witness, config: self.config }
    }

    /// `I_t(x;y) = k_t(x) - k_t(x|y)`, unclamped. Undefined when either term is infinite.
    pub fn mutual_info(&self, x: &BitString, y: &BitString) -> Result<i64, ComplexityError> {
        let kx = self.k(x, &BitString::new()).value.ok_or_else(|| ComplexityError::Unbounded(x.clone()))?;
        let kxy = self.k(x, y).value.ok_or_else(|| ComplexityError::Unbounded(x.clone()))?;
        Ok(kx as i64 - kxy as i64)
    }

    pub fn halting_proxy(&self) -> HaltingProxy {
        let domain = Domain::of_u(&self.index(&BitString::new()).enumeration);
        let bits = BitString::all_up_to(self.config.max_program_len)
            .map(|s| domain.halts_on(&s).is_some())
            .collect();
        HaltingProxy { bits: BitString::from_bits(bits), config: self.config }
    }

    /// `I_t(x : H_t)`, with the halting proxy as auxiliary string.
    pub fn info_with_halting(&self, x: &BitString, proxy: &HaltingProxy) -> Result<i64, ComplexityError> {
        self.mutual_info(x, &proxy.bits)
    }

    pub fn chain_rule(&self, x: &BitString, y: &BitString) -> ChainRuleReport {
        let empty = BitString::new();
        let k_pair = self.k(&pair(x, y), &empty).value;
        let k_x = self.k(x, &empty).value;
        let k_y_given = k_x.and_then(|k| self.k(y, &pair(x, &BitString::from_nat(k as u64))).value);
        let gap = match (k_pair, k_x, k_y_given) {
            (Some(l), Some(a), Some(b)) => Some(l as i64 - (a + b) as i64),
            _ => None,
        };
        ChainRuleReport { x: x.clone(), y: y.clone(), k_pair, k_x, k_y_given, gap }
    }
}

/// `⟨x,y⟩ = ⟨x⟩⟨y⟩`
pub fn pair(x: &BitString, y: &BitString) -> BitString {
    encode_self_delim(x).concat(&encode_self_delim(y))
}

/// Characteristic sequence of the fuel-bounded domain over strings of length
/// at most `L` in canonical order: bit `i` is 1 iff the machine halts when
/// run on the `i`-th string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaltingProxy {
    pub bits: BitString,
    pub config: MachineConfig,
}

impl HaltingProxy {
    pub fn halts(&self, s: &BitString) -> bool {
        self.bits.get(s.canonical_index() as usize).unwrap_or(false)
    }
}

/// Both sides of `k(x,y) ≤ k(x) + k(y | ⟨x, k(x)⟩)`; `gap` is the left side
/// minus the right side and is absent when some term is infinite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainRuleReport {
    pub x: BitString,
    pub y: BitString,
    pub k_pair: Option<usize>,
    pub k_x: Option<usize>,
    pub k_y_given: Option<usize>,
    pub gap: Option<i64>,
}

pub fn k_t(x: &BitString, y: &BitString, cfg: MachineConfig) -> ComplexityValue {
    Estimator::new(cfg).k(x, y)
}

pub fn m_t(x: &BitString, y: &BitString, cfg: MachineConfig) -> DyadicRational {
    Estimator::new(cfg).m(x, y)
}

pub fn m_set(d: &[BitString], y: &BitString, cfg: MachineConfig) -> DyadicRational {
    Estimator::new(cfg).m_set(d, y)
}

pub fn km_t(g: &PrefixFreeSet, cfg: MachineConfig) -> ComplexityValue {
    Estimator::new(cfg).km(g)
}

pub fn mutual_info_t(x: &BitString, y: &BitString, cfg: MachineConfig) -> Result<i64, ComplexityError> {
    Estimator::new(cfg).mutual_info(x, y)
}

pub fn halting_proxy(cfg: MachineConfig) -> HaltingProxy {
    Estimator::new(cfg).halting_proxy()
}

pub fn chain_rule_report(x: &BitString, y: &BitString, cfg: MachineConfig) -> ChainRuleReport {
    Estimator::new(cfg).chain_rule(x, y)
}
