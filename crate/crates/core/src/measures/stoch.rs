use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::BitString;
use crate::complexity::{pair, Estimator};

use super::{ceil_log2_int, deficiency, DeficiencyValue, ElementaryMeasure, MeasureError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Scoring {
    /// `j + 3⌈log₂ max(d, 1)⌉`
    #[default]
    #[serde(rename = "3logk")]
    ThreeLogK,
    /// `j + max(d, 0)`
    #[serde(rename = "k")]
    Linear,
}

impl Scoring {
    pub fn score(self, j: usize, d: i64) -> i64 {
        match self {
            Scoring::ThreeLogK => j as i64 + 3 * ceil_log2_int(d.max(1)),
            Scoring::Linear => j as i64 + d.max(0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StochBounds {
    pub max_v_len: usize,
    pub scoring: Scoring,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StochError {
    #[error("max_v_len {0} exceeds the machine's program length bound")]
    BoundsTooLarge(usize),
    #[error("no program within bounds outputs a probability measure with {0} in its support")]
    NotFound(BitString),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticityResult {
    pub value: i64,
    pub witness_program: BitString,
    pub witness_measure: ElementaryMeasure,
    pub deficiency: DeficiencyValue,
    /// `(max_v_len, fuel)`
    pub search_bounds: (usize, u64),
    pub scoring: Scoring,
}

/// Bounded stochasticity `Λ_t(a|y)`: the minimum score over every program
/// `v` with `‖v‖ ≤ max_v_len` that outputs, on auxiliary `y`, the code of a
/// probability measure `W` with `a ∈ supp(W)`. The deficiency is taken
/// conditional to `⟨v,y⟩`. Ties go to the shorter program, then the
/// lexicographically smaller one.
pub fn stochasticity(
    a: &BitString,
    y: &BitString,
    bounds: StochBounds,
    est: &Estimator,
) -> Result<StochasticityResult, StochError> {
    let cfg = est.config();
    if bounds.max_v_len > cfg.max_program_len {
        return Err(StochError::BoundsTooLarge(bounds.max_v_len));
    }
    let index = est.index(y);
    let candidates: Vec<(&BitString, ElementaryMeasure)> = index
        .enumeration
        .records
        .iter()
        .filter(|r| r.program.len() <= bounds.max_v_len)
        .filter_map(|r| {
            let w = ElementaryMeasure::decode_probability(&r.output).ok()?;
            w.contains(a).then_some((&r.program, w))
        })
        .collect();
    let best = candidates
        .into_par_iter()
        .filter_map(|(v, w)| {
            let d = match deficiency(a, &w, &pair(v, y), est) {
                Ok(d) => d,
                Err(MeasureError::Unbounded(_)) => return None,
                Err(e) => panic!("candidate measure rejected after validation: {e}"),
            };
            Some((bounds.scoring.score(v.len(), d.value), v, w, d))
        })
        .min_by(|x, y| {
            x.0.cmp(&y.0)
                .then(x.1.len().cmp(&y.1.len()))
                .then_with(|| x.1.lex_cmp(y.1))
        });
    let (value, v, w, d) = best.ok_or_else(|| StochError::NotFound(a.clone()))?;
    Ok(StochasticityResult {
        value,
        witness_program: v.clone(),
        witness_measure: w,
        deficiency: d,
        search_bounds: (bounds.max_v_len, cfg.fuel),
        scoring: bounds.scoring,
    })
}
