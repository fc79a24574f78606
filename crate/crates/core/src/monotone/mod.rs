//! Continuous semimeasures given as staged θ tables, and their compilation
//! into total string-monotonic transducers.
//!
//! Stage `k` partitions `Σ^{N_k}` into sets `S_{x,k}`: the strings whose
//! image is `x` so far. `T_{x,k}` records what `x` has passed on to its
//! children. The builder keeps `ξ(x,k) = ⌈-log μ(S_{x,k} ∪ T_{x,k})⌉` equal
//! to `⌈-log θ(x,k)⌉` at every stage.
//!
//! Gifts are sized by need: a child is brought up to
//! `max(current mass, 2^-⌈-log θ⌉, Σ need of its children)`, computed
//! bottom-up before any string moves. This never exceeds `θ`, so a parent
//! always has enough strings to hand down, and `ξ`-equality holds exactly.

mod theta;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::codec::{kraft_sum, BitString, CodecError, DyadicRational, PrefixFreeSet};

pub use theta::{validate_theta, ThetaError, ThetaTable};

/// `N_0`.
pub const C0: usize = 1;
/// Largest `N_k` the builder accepts.
pub const MAX_N: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonotoneError {
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error("θ(ε, {0}) < 1 cannot match the full root mass")]
    RootMass(usize),
    #[error("θ({0}, 0) > 0 for a nonempty string")]
    EarlyMass(BitString),
    #[error("S_({x},{k}) has too few strings to gift")]
    InsufficientMass { x: BitString, k: usize },
    #[error("stage {k} needs N = {n} > {MAX_N}")]
    TooDeep { k: usize, n: usize },
    #[error("input of length {len} beyond built depth {depth}")]
    DepthExceeded { len: usize, depth: usize },
    #[error("zero measure")]
    ZeroMeasure,
    #[error("no threshold N' within depth {0}")]
    NotFound(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl From<CodecError> for MonotoneError {
    fn from(_: CodecError) -> Self {
        MonotoneError::ZeroMeasure
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub n: usize,
    pub s: BTreeMap<BitString, BTreeSet<BitString>>,
    pub t: BTreeMap<BitString, BTreeSet<BitString>>,
    #[serde(skip)]
    owner: HashMap<BitString, BitString>,
}

impl Stage {
    fn new(n: usize, s: BTreeMap<BitString, BTreeSet<BitString>>, t: BTreeMap<BitString, BTreeSet<BitString>>) -> Self {
        let owner = s.iter().flat_map(|(x, set)| set.iter().map(move |y| (y.clone(), x.clone()))).collect();
        Self { n, s, t, owner }
    }

    pub fn owner(&self, z: &BitString) -> Option<&BitString> {
        self.owner.get(z)
    }

    /// `μ(S_x ∪ T_x)`.
    pub fn mass(&self, x: &BitString) -> DyadicRational {
        let s = self.s.get(x).map(kraft_sum).unwrap_or_default();
        let t = self.t.get(x).map(kraft_sum).unwrap_or_default();
        s + t
    }

    pub fn xi(&self, x: &BitString) -> Option<i64> {
        let m = self.mass(x);
        (!m.is_zero()).then(|| m.ceil_neg_log2().expect("mass at most one"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotoneTransducer {
    pub stages: Vec<Stage>,
    #[serde(skip)]
    pub origin: ThetaTable,
}

fn extend(set: &BTreeSet<BitString>, n: usize) -> BTreeSet<BitString> {
    set.iter()
        .flat_map(|z| BitString::all_of_len(n - z.len()).map(move |w| z.concat(&w)))
        .collect()
}

fn target(theta: &DyadicRational) -> i64 {
    theta.ceil_neg_log2().expect("positive θ at most one")
}

/// Compiles a θ table stage by stage.
pub fn build_nu(t: &ThetaTable) -> Result<MonotoneTransducer, MonotoneError> {
    validate_theta(t)?;
    for k in 0..=t.max_stage {
        if t.get(&BitString::new(), k) != DyadicRational::one() {
            return Err(MonotoneError::RootMass(k));
        }
    }
    if let Some(x) = t.support(0).into_iter().find(|x| !x.is_empty()) {
        return Err(MonotoneError::EarlyMass(x));
    }
    let root: BTreeSet<BitString> = BitString::all_of_len(C0).collect();
    let mut stages = vec![Stage::new(C0, [(BitString::new(), root)].into(), BTreeMap::new())];
    for k in 1..=t.max_stage {
        let prev = &stages[k - 1];
        let support = t.support(k);
        let max_t = support.iter().map(|x| target(&t.get(x, k))).max().unwrap_or(0);
        let n = (prev.n + 1).max(max_t as usize + 2);
        if n > MAX_N {
            return Err(MonotoneError::TooDeep { k, n });
        }
        let mut s: BTreeMap<BitString, BTreeSet<BitString>> =
            prev.s.iter().map(|(x, set)| (x.clone(), extend(set, n))).collect();
        let mut tt = prev.t.clone();

        let mut need: BTreeMap<BitString, DyadicRational> = BTreeMap::new();
        for x in support.iter().rev() {
            let children: DyadicRational = [false, true]
                .iter()
                .filter_map(|&b| need.get(&x.with_bit(b)))
                .sum();
            let floor = DyadicRational::pow2_neg(target(&t.get(x, k)) as u32);
            let v = prev.mass(x).max(floor).max(children);
            need.insert(x.clone(), v);
        }

        for x in &support {
            for b in [false, true] {
                let child = x.with_bit(b);
                let Some(want) = need.get(&child) else { continue };
                let have = s.get(&child).map(kraft_sum).unwrap_or_default()
                    + tt.get(&child).map(kraft_sum).unwrap_or_default();
                let deficit = want.checked_sub(&have).expect("need covers current mass");
                let count = deficit.scaled_numerator(n as u32).expect("need on the stage grid");
                let count: usize = count.try_into().expect("gift count fits");
                if count == 0 {
                    continue;
                }
                let pool = s.entry(x.clone()).or_default();
                if pool.len() < count {
                    return Err(MonotoneError::InsufficientMass { x: x.clone(), k });
                }
                let gift: Vec<BitString> = pool.iter().take(count).cloned().collect();
                for z in &gift {
                    pool.remove(z);
                }
                tt.entry(x.clone()).or_default().extend(gift.iter().cloned());
                s.entry(child).or_default().extend(gift);
            }
        }
        s.retain(|_, set| !set.is_empty());
        stages.push(Stage::new(n, s, tt));
    }
    Ok(MonotoneTransducer { stages, origin: t.clone() })
}

impl MonotoneTransducer {
    pub fn depth(&self) -> usize {
        self.stages.last().map_or(0, |s| s.n)
    }

    /// `(x, k, ξ(x,k), ⌈-log θ(x,k)⌉)` for every mismatch, recomputed from
    /// the stored sets.
    pub fn xi_violations(&self) -> Vec<(BitString, usize, Option<i64>, i64)> {
        let mut out = Vec::new();
        for (k, stage) in self.stages.iter().enumerate() {
            for x in self.origin.support(k) {
                let want = target(&self.origin.get(&x, k));
                let got = stage.xi(&x);
                if got != Some(want) {
                    out.push((x, k, got, want));
                }
            }
        }
        out
    }

    /// `ν(y)`. For `N_k ≤ ‖y‖ < N_{k+1}` this is the owner of `y`'s length
    /// `N_k` prefix at stage `k`. Whenever one of the three membership cases
    /// in the construction matches it names this same owner; when all of
    /// `y`'s extensions have moved further down the tree none matches and
    /// the owner is still the only monotone choice.
    pub fn apply(&self, y: &BitString) -> Result<BitString, MonotoneError> {
        let depth = self.depth();
        if y.len() > depth {
            return Err(MonotoneError::DepthExceeded { len: y.len(), depth });
        }
        let Some(k) = self.stages.iter().rposition(|s| s.n <= y.len()) else {
            return Ok(BitString::new());
        };
        let stage = &self.stages[k];
        Ok(stage.owner(&y.prefix(stage.n)).expect("stage partitions Σ^N").clone())
    }

    /// The three-case definition taken literally, `None` when no case
    /// matches at any built stage.
    pub fn apply_by_cases(&self, y: &BitString) -> Option<BitString> {
        for (k, stage) in self.stages.iter().enumerate() {
            if y.len() == stage.n {
                return stage.owner(y).cloned();
            }
            let Some(next) = self.stages.get(k + 1) else { continue };
            if !(stage.n < y.len() && y.len() < next.n) {
                continue;
            }
            let x = stage.owner(&y.prefix(stage.n))?;
            let hit = BitString::all_of_len(next.n - y.len()).any(|w| {
                next.owner(&y.concat(&w))
                    .is_some_and(|o| o == x || o.parent().as_ref() == Some(x))
            });
            if hit {
                return Some(x.clone());
            }
        }
        None
    }

    /// The per-stage sets as JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.stages).expect("serializable")
    }
}

/// A total string-monotonic map evaluated up to a finite depth.
pub trait StringMonotone: Sync {
    fn apply(&self, y: &BitString) -> Result<BitString, MonotoneError>;
    fn depth(&self) -> usize;
}

/// The compiled `ν_σ`.
#[derive(Debug, Clone)]
pub struct NuFunction {
    pub transducer: MonotoneTransducer,
}

impl NuFunction {
    pub fn build(t: &ThetaTable) -> Result<Self, MonotoneError> {
        Ok(Self { transducer: build_nu(t)? })
    }
}

impl StringMonotone for NuFunction {
    fn apply(&self, y: &BitString) -> Result<BitString, MonotoneError> {
        self.transducer.apply(y)
    }

    fn depth(&self) -> usize {
        self.transducer.depth()
    }
}

/// The identity map up to `depth`.
#[derive(Debug, Clone, Copy)]
pub struct IdentityNu {
    pub depth: usize,
}

impl StringMonotone for IdentityNu {
    fn apply(&self, y: &BitString) -> Result<BitString, MonotoneError> {
        if y.len() > self.depth {
            return Err(MonotoneError::DepthExceeded { len: y.len(), depth: self.depth });
        }
        Ok(y.clone())
    }

    fn depth(&self) -> usize {
        self.depth
    }
}

/// `|G^N_ν| = |{y ∈ Σ^N : ν(y) ⊒ x for some x ∈ G}|`.
pub fn preimage_count(nu: &impl StringMonotone, g: &PrefixFreeSet, n: usize) -> Result<u64, MonotoneError> {
    if n > nu.depth() {
        return Err(MonotoneError::DepthExceeded { len: n, depth: nu.depth() });
    }
    let ys: Vec<BitString> = BitString::all_of_len(n).collect();
    ys.par_iter()
        .map(|y| nu.apply(y).map(|v| g.covers(&v) as u64))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Threshold {
    pub i: i64,
    pub n_prime: usize,
    /// `|G^N_ν|` for `N = 0..=depth`.
    pub counts: Vec<u64>,
    /// `2^{-i+2} > |G^N|·2^-N > 2^-i` for every evaluated `N ≥ N'`.
    pub clause1: bool,
    /// `|G^N|·2^-N ≤ 2^-i` for every `N < N'`.
    pub clause2: bool,
}

fn above(c: u64, n: usize, i: i64) -> bool {
    // c·2^-n > 2^-i
    ((c as u128) << i) > 1u128 << n
}

fn below(c: u64, n: usize, i: i64) -> bool {
    // c·2^-n < 2^(2-i)
    ((c as u128) << i) < 1u128 << (n + 2)
}

/// `i = 1 + ⌈-log μ⌉` for the preimage measure at the deepest evaluated `N`.
pub fn deep_i(counts: &[u64]) -> Result<i64, MonotoneError> {
    let n = counts.len() - 1;
    let mu = DyadicRational::new(counts[n], n as u32);
    Ok(1 + mu.ceil_neg_log2()?)
}

/// The least `N'` with `2^{-i+2} > |G^{N'}|·2^{-N'} > 2^{-i}`, and whether
/// both clauses hold over the evaluated depth.
pub fn threshold_n(nu: &impl StringMonotone, g: &PrefixFreeSet, i: Option<i64>) -> Result<Threshold, MonotoneError> {
    let counts = (0..=nu.depth()).map(|n| preimage_count(nu, g, n)).collect::<Result<Vec<_>, _>>()?;
    let i = match i {
        Some(i) => i,
        None => deep_i(&counts)?,
    };
    if !(0..=100).contains(&i) {
        return Err(MonotoneError::NotFound(nu.depth()));
    }
    let ok = |n: usize| above(counts[n], n, i) && below(counts[n], n, i);
    let n_prime = (0..counts.len()).find(|&n| ok(n)).ok_or(MonotoneError::NotFound(nu.depth()))?;
    let clause1 = (n_prime..counts.len()).all(ok);
    let clause2 = (0..n_prime).all(|n| !above(counts[n], n, i));
    Ok(Threshold { i, n_prime, counts, clause1, clause2 })
}

/// `|G^{N+1}| ≥ 2|G^N|` over consecutive counts.
pub fn doubles(counts: &[u64]) -> bool {
    counts.windows(2).all(|w| w[1] >= 2 * w[0])
}

/// `1 - ⌈log₂ σ(G)⌉` with `σ(G) = Σ_{x∈G} θ(x, max_stage)`.
pub fn km_sigma(g: &PrefixFreeSet, t: &ThetaTable, depth: usize) -> Result<i64, MonotoneError> {
    if g.max_len() > depth {
        return Err(MonotoneError::DepthExceeded { len: g.max_len(), depth });
    }
    let sigma: DyadicRational = g.iter().map(|x| t.final_weight(x)).sum();
    if sigma.is_zero() {
        return Err(MonotoneError::ZeroMeasure);
    }
    Ok(1 - sigma.ceil_log2()?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchRow {
    pub x: BitString,
    /// `⌈-log θ(x, max_stage)⌉`
    pub theta_log: i64,
    /// `⌈-log μ{y ∈ Σ^depth : x ⊑ ν(y)}⌉`, `None` for an empty preimage.
    pub preimage_log: Option<i64>,
}

impl MatchRow {
    pub fn gap(&self) -> Option<i64> {
        self.preimage_log.map(|p| (p - self.theta_log).abs())
    }
}

/// Compares θ with the preimage measure of `ν` at full depth for every `x`
/// in the table's final support.
pub fn measure_matching(nu: &NuFunction) -> Vec<MatchRow> {
    let depth = nu.depth();
    let ys: Vec<BitString> = BitString::all_of_len(depth).collect();
    let images: Vec<BitString> = ys.par_iter().map(|y| nu.apply(y).expect("within depth")).collect();
    let mut counts: HashMap<BitString, u64> = HashMap::new();
    for v in &images {
        for j in 0..=v.len() {
            *counts.entry(v.prefix(j)).or_default() += 1;
        }
    }
    let t = &nu.transducer.origin;
    t.support(t.max_stage)
        .into_iter()
        .map(|x| {
            let c = counts.get(&x).copied().unwrap_or(0);
            let preimage_log = (c > 0).then(|| DyadicRational::new(c, depth as u32).ceil_neg_log2().unwrap());
            MatchRow { theta_log: target(&t.final_weight(&x)), preimage_log, x }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn d(n: u64, e: u32) -> DyadicRational {
        DyadicRational::new(n, e)
    }

    #[test]
    fn validation_examples() {
        assert_eq!(validate_theta(&ThetaTable::uniform(4)), Ok(()));
        let mut t = ThetaTable::new(0);
        t.set("".into(), 0, DyadicRational::one());
        t.set("0".into(), 0, d(3, 2));
        t.set("1".into(), 0, d(3, 3));
        assert_eq!(validate_theta(&t), Err(ThetaError::NotSuperadditive { x: "".into(), k: 0 }));
        let mut t = ThetaTable::new(1);
        t.set("".into(), 0, DyadicRational::one());
        t.set("".into(), 1, d(3, 2));
        assert_eq!(validate_theta(&t), Err(ThetaError::Decreasing { x: "".into(), k: 0 }));
    }

    #[test]
    fn random_tables_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let t = ThetaTable::random(&mut rng, 5, 8);
            assert_eq!(validate_theta(&t), Ok(()));
            assert_eq!(t.get(&BitString::new(), 0), DyadicRational::one());
        }
    }

    #[test]
    fn uniform_stage_lengths_and_identity_shape() {
        let nu = build_nu(&ThetaTable::uniform(4)).unwrap();
        let ns: Vec<usize> = nu.stages.iter().map(|s| s.n).collect();
        assert_eq!(ns, [1, 3, 4, 5, 6]);
        assert!(nu.xi_violations().is_empty());
        for y in BitString::all_of_len(6) {
            assert_eq!(nu.apply(&y).unwrap(), y.prefix(4));
        }
        assert_eq!(nu.stages[0].s[&BitString::new()].len(), 2);
        assert!(nu.stages[0].t.is_empty());
    }

    #[test]
    fn point_mass_funnels_down_zeros() {
        let nu = build_nu(&ThetaTable::point_mass(4)).unwrap();
        assert!(nu.xi_violations().is_empty());
        for (k, stage) in nu.stages.iter().enumerate() {
            assert_eq!(stage.xi(&BitString::zeros(k)), Some(0));
        }
        assert_eq!(nu.apply(&"11111".into()).unwrap(), BitString::zeros(4));
    }

    #[test]
    fn gifting_needs_more_than_the_minimum() {
        // Minimal gifts give "0" only 1/4, which cannot fund 1/4 + 1/8.
        let mut t = ThetaTable::new(1);
        t.set("".into(), 0, DyadicRational::one());
        t.set("".into(), 1, DyadicRational::one());
        t.set("0".into(), 1, d(125, 8));
        t.set("00".into(), 1, d(64, 8));
        t.set("01".into(), 1, d(61, 8));
        assert_eq!(validate_theta(&t), Ok(()));
        let nu = build_nu(&t).unwrap();
        assert!(nu.xi_violations().is_empty());
    }

    #[test]
    fn root_mass_and_early_mass_rejected() {
        let mut t = ThetaTable::new(0);
        t.set("".into(), 0, d(1, 1));
        assert_eq!(build_nu(&t).unwrap_err(), MonotoneError::RootMass(0));
        let mut t = ThetaTable::new(0);
        t.set("".into(), 0, DyadicRational::one());
        t.set("1".into(), 0, d(1, 1));
        assert_eq!(build_nu(&t).unwrap_err(), MonotoneError::EarlyMass("1".into()));
    }

    #[test]
    fn identity_threshold() {
        let g = PrefixFreeSet::new(["0".into()]).unwrap();
        let th = threshold_n(&IdentityNu { depth: 6 }, &g, None).unwrap();
        assert_eq!((th.i, th.n_prime, th.clause1, th.clause2), (2, 1, true, true));
        assert!(doubles(&th.counts));
        let all = PrefixFreeSet::new([BitString::new()]).unwrap();
        let th = threshold_n(&IdentityNu { depth: 4 }, &all, None).unwrap();
        assert_eq!((th.i, th.n_prime), (1, 0));
    }

    #[test]
    fn km_sigma_examples() {
        let t = ThetaTable::uniform(3);
        let g = PrefixFreeSet::new(["0".into()]).unwrap();
        assert_eq!(km_sigma(&g, &t, 3), Ok(2));
        assert_eq!(km_sigma(&PrefixFreeSet::new([BitString::new()]).unwrap(), &t, 3), Ok(1));
        assert_eq!(km_sigma(&PrefixFreeSet::empty(), &t, 3), Err(MonotoneError::ZeroMeasure));
    }

    #[test]
    fn table_text_round_trip() {
        let t = ThetaTable::random(&mut ChaCha8Rng::seed_from_u64(3), 3, 6);
        assert_eq!(ThetaTable::parse(&t.to_text()).unwrap(), t);
    }
}
