use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{BitString, DyadicRational};

use super::MonotoneError;

/// Staged lower approximations `θ(x, k)` of a continuous semimeasure.
/// Missing entries are zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaTable {
    pub entries: BTreeMap<(BitString, usize), DyadicRational>,
    pub max_stage: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ThetaError {
    #[error("θ({x}, {k}) > θ({x}, {})", k + 1)]
    Decreasing { x: BitString, k: usize },
    #[error("θ({x}, {k}) < θ({x}0, {k}) + θ({x}1, {k})")]
    NotSuperadditive { x: BitString, k: usize },
    #[error("θ(ε, {k}) > 1")]
    AboveOne { k: usize },
    #[error("entry ({x}, {k}) beyond max stage")]
    StageOutOfRange { x: BitString, k: usize },
}

impl ThetaTable {
    pub fn new(max_stage: usize) -> Self {
        Self { entries: BTreeMap::new(), max_stage }
    }

    pub fn set(&mut self, x: BitString, k: usize, v: DyadicRational) {
        if v.is_zero() {
            self.entries.remove(&(x, k));
        } else {
            self.entries.insert((x, k), v);
        }
    }

    pub fn get(&self, x: &BitString, k: usize) -> DyadicRational {
        self.entries.get(&(x.clone(), k)).cloned().unwrap_or_default()
    }

    /// Strings with positive weight at stage `k`, in canonical order.
    pub fn support(&self, k: usize) -> BTreeSet<BitString> {
        self.entries.keys().filter(|(_, j)| *j == k).map(|(x, _)| x.clone()).collect()
    }

    pub fn final_weight(&self, x: &BitString) -> DyadicRational {
        self.get(x, self.max_stage)
    }

    /// `θ(x, k) = 2^-‖x‖` for `‖x‖ ≤ k`.
    pub fn uniform(max_stage: usize) -> Self {
        let mut t = Self::new(max_stage);
        for k in 0..=max_stage {
            for x in BitString::all_up_to(k) {
                let w = DyadicRational::pow2_neg(x.len() as u32);
                t.set(x, k, w);
            }
        }
        t
    }

    /// `θ(0^j, k) = 1` for `j ≤ k`.
    pub fn point_mass(max_stage: usize) -> Self {
        let mut t = Self::new(max_stage);
        for k in 0..=max_stage {
            for j in 0..=k {
                t.set(BitString::zeros(j), k, DyadicRational::one());
            }
        }
        t
    }

    /// A random valid table with weights on the grid `2^-grid`. A random
    /// split tree of depth `max_stage` gives the final weights; stage `k`
    /// keeps strings of length at most `k` and scales by `1 - 2^-(k+2)`
    /// rounded down, so every stage stays superadditive. The root keeps
    /// weight 1 throughout, which the compiler requires.
    pub fn random(rng: &mut impl Rng, max_stage: usize, grid: u32) -> Self {
        let unit = 1u64 << grid;
        let mut final_units: BTreeMap<BitString, u64> = BTreeMap::new();
        let mut frontier = vec![(BitString::new(), unit)];
        final_units.insert(BitString::new(), unit);
        while let Some((x, v)) = frontier.pop() {
            if x.len() >= max_stage || v == 0 {
                continue;
            }
            let keep = rng.gen_range(0..=v / 4);
            let a = rng.gen_range(0..=v - keep);
            let b = v - keep - a;
            for (bit, w) in [(false, a), (true, b)] {
                if w > 0 {
                    final_units.insert(x.with_bit(bit), w);
                    frontier.push((x.with_bit(bit), w));
                }
            }
        }
        let mut t = Self::new(max_stage);
        for k in 0..=max_stage {
            let scale_num = (1u128 << (k + 2)) - 1;
            for (x, &u) in &final_units {
                if x.is_empty() {
                    t.set(x.clone(), k, DyadicRational::one());
                } else if x.len() <= k {
                    let scaled = (u as u128 * scale_num) >> (k + 2);
                    t.set(x.clone(), k, DyadicRational::new(scaled as u64, grid));
                }
            }
        }
        t
    }

    /// Parses lines of `x<TAB>k<TAB>n/2^e`.
    pub fn parse(text: &str) -> Result<Self, MonotoneError> {
        let mut entries = BTreeMap::new();
        let mut max_stage = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| MonotoneError::Parse { line: i + 1, msg };
            let fields: Vec<&str> = line.split('\t').collect();
            let [x, k, w] = fields[..] else {
                return Err(err("expected three fields".into()));
            };
            let x: BitString = x.parse().map_err(|e| err(format!("{e}")))?;
            let k: usize = k.trim().parse().map_err(|e| err(format!("{e}")))?;
            let w: DyadicRational = w.trim().parse().map_err(|e| err(format!("{e}")))?;
            max_stage = max_stage.max(k);
            if !w.is_zero() {
                entries.insert((x, k), w);
            }
        }
        Ok(Self { entries, max_stage })
    }

    pub fn to_text(&self) -> String {
        let mut rows: Vec<_> = self.entries.iter().collect();
        rows.sort_by(|a, b| a.0 .1.cmp(&b.0 .1).then(a.0 .0.cmp(&b.0 .0)));
        rows.iter().map(|((x, k), w)| format!("{x}\t{k}\t{w}\n")).collect()
    }
}

/// Checks stage monotonicity, stagewise superadditivity and `θ(ε, k) ≤ 1`,
/// reporting the first violation in stage-then-canonical order.
pub fn validate_theta(t: &ThetaTable) -> Result<(), ThetaError> {
    if let Some((x, k)) = t.entries.keys().find(|(_, k)| *k > t.max_stage) {
        return Err(ThetaError::StageOutOfRange { x: x.clone(), k: *k });
    }
    for k in 0..=t.max_stage {
        if t.get(&BitString::new(), k) > DyadicRational::one() {
            return Err(ThetaError::AboveOne { k });
        }
        let mut parents: BTreeSet<BitString> = t.support(k);
        parents.extend(t.support(k).iter().filter_map(BitString::parent));
        for x in parents {
            let children = t.get(&x.with_bit(false), k) + t.get(&x.with_bit(true), k);
            if children > t.get(&x, k) {
                return Err(ThetaError::NotSuperadditive { x, k });
            }
        }
        if k < t.max_stage {
            for x in t.support(k) {
                if t.get(&x, k + 1) < t.get(&x, k) {
                    return Err(ThetaError::Decreasing { x, k });
                }
            }
        }
    }
    Ok(())
}
