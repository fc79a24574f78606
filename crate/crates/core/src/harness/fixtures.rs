//! Deterministic fixture families. Random ones come from ChaCha8 with fixed
//! seeds, so they are the same on every run and platform.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{encode_string_set, BitString, DyadicRational, PrefixFreeSet};
use crate::complexity::Estimator;
use crate::measures::{ElementaryMeasure, MeasureKind};
use crate::monotone::ThetaTable;
use crate::predicates::BinaryPredicate;

use super::distortion::{DistortionKind, DistortionSpec};

pub const SET_SEED: u64 = 0x5e7;
pub const PREFIX_FREE_SEED: u64 = 0x9f5;
pub const PREDICATE_SEED: u64 = 0x9ed;
pub const HITTING_SEED: u64 = 0x417;
pub const THETA_SEED: u64 = 0x7e7a;
pub const MEASURE_SEED: u64 = 0x3ea5;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Reachable outputs of length at most 5, in canonical order.
pub fn reachable_universe(est: &Estimator) -> Vec<BitString> {
    let ix = est.index(&BitString::new());
    let mut out: Vec<BitString> = ix.outputs().filter(|x| x.len() <= 5).cloned().collect();
    out.sort();
    out
}

/// `count` nonempty sets of one to four reachable strings.
pub fn set_family(est: &Estimator, count: usize) -> Vec<Vec<BitString>> {
    let universe = reachable_universe(est);
    let mut rng = rng(SET_SEED);
    (0..count)
        .map(|_| {
            let size = rng.gen_range(1..=4.min(universe.len()));
            let mut d: Vec<BitString> = universe.choose_multiple(&mut rng, size).cloned().collect();
            d.sort();
            d
        })
        .collect()
}

/// `S_n`: the strings of length `n` with `k_t(x) ≥ n`, for `1 ≤ n ≤ max_n`.
pub fn random_string_sets(est: &Estimator, max_n: usize) -> Vec<Vec<BitString>> {
    (1..=max_n)
        .map(|n| {
            BitString::all_of_len(n)
                .filter(|x| est.k(x, &BitString::new()).value.map_or(true, |k| k >= n))
                .collect()
        })
        .filter(|d: &Vec<BitString>| !d.is_empty())
        .collect()
}

/// `count` prefix-free sets of one to three strings of length one to five.
pub fn prefix_free_family(count: usize) -> Vec<PrefixFreeSet> {
    let mut rng = rng(PREFIX_FREE_SEED);
    (0..count)
        .map(|_| {
            let size = rng.gen_range(1..=3);
            let mut members: Vec<BitString> = Vec::new();
            for _ in 0..64 {
                if members.len() == size {
                    break;
                }
                let len = rng.gen_range(1..=5);
                let x = BitString::from_value(rng.gen_range(0..1u64 << len), len);
                if members.iter().all(|m| !m.comparable(&x)) {
                    members.push(x);
                }
            }
            PrefixFreeSet::new(members).expect("incomparable members")
        })
        .collect()
}

/// `count` predicates with one to six defined positions among `1..=8`.
pub fn predicate_family(count: usize) -> Vec<BinaryPredicate> {
    let mut rng = rng(PREDICATE_SEED);
    let positions: Vec<u64> = (1..=8).collect();
    (0..count)
        .map(|_| {
            let size = rng.gen_range(1..=6);
            let dom = positions.choose_multiple(&mut rng, size).copied().collect::<Vec<_>>();
            BinaryPredicate::new(dom.into_iter().map(|i| (i, rng.gen_bool(0.5)))).unwrap()
        })
        .collect()
}

/// All fully constrained predicates with maximum index `k`.
pub fn full_predicates(k: u64) -> Vec<BinaryPredicate> {
    (0..1u64 << k)
        .map(|v| BinaryPredicate::new((1..=k).map(|i| (i, v >> (k - i) & 1 == 1))).unwrap())
        .collect()
}

/// The worked example: positions 2 and 4 set to 0.
pub fn example_predicate() -> BinaryPredicate {
    BinaryPredicate::new([(2, false), (4, false)]).unwrap()
}

#[derive(Debug, Clone)]
pub struct HittingInstance {
    pub q: ElementaryMeasure,
    pub m: ElementaryMeasure,
    pub i: u32,
    pub c: u32,
    pub d: u32,
}

/// `parts` positive integers summing to `2^exp`.
fn random_dyadic_split(rng: &mut ChaCha8Rng, parts: usize, exp: u32) -> Vec<u64> {
    let total = 1u64 << exp;
    let mut cuts: BTreeSet<u64> = BTreeSet::new();
    while cuts.len() + 1 < parts {
        cuts.insert(rng.gen_range(1..total));
    }
    let mut last = 0;
    cuts.into_iter()
        .chain(std::iter::once(total))
        .map(|c| c - std::mem::replace(&mut last, c))
        .collect()
}

/// `count` instances whose set measure only charges `i`-heavy sets. `m`
/// lives on at most four strings with weights in eighths and keeps some
/// mass back.
pub fn hitting_instances(count: usize) -> Vec<HittingInstance> {
    let mut rng = rng(HITTING_SEED);
    let mut out = Vec::new();
    while out.len() < count {
        let support_size = rng.gen_range(1..=4);
        let mut strings: Vec<BitString> = BitString::all_up_to(3).collect();
        strings.shuffle(&mut rng);
        strings.truncate(support_size);
        strings.sort();
        let units = random_dyadic_split(&mut rng, support_size + 1, 3);
        let m = ElementaryMeasure::from_dyadic(
            strings.iter().zip(&units).map(|(x, &u)| (x.clone(), DyadicRational::new(u, 3))),
            MeasureKind::Semimeasure,
        );
        let i = rng.gen_range(1..=3u32);
        let floor = DyadicRational::pow2_neg(i).to_rational();
        let mut sets: Vec<BTreeSet<BitString>> = (1..1u32 << support_size)
            .map(|mask| strings.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, x)| x.clone()).collect())
            .filter(|f: &BTreeSet<BitString>| m.mass(f) >= floor)
            .collect();
        if sets.is_empty() {
            continue;
        }
        sets.shuffle(&mut rng);
        sets.truncate(rng.gen_range(1..=4));
        let q_units = random_dyadic_split(&mut rng, sets.len(), 4);
        let q = ElementaryMeasure::from_dyadic(
            sets.iter().zip(&q_units).map(|(f, &u)| (encode_string_set(f), DyadicRational::new(u, 4))),
            MeasureKind::Probability,
        );
        out.push(HittingInstance { q, m, i, c: rng.gen_range(1..=2), d: rng.gen_range(1..=2) });
    }
    out
}

/// Measures for the deficiency-as-test sweep: uniform measures, point
/// masses and random dyadic measures on short strings.
pub fn measure_family() -> Vec<ElementaryMeasure> {
    let mut out: Vec<ElementaryMeasure> = (0..=4).map(ElementaryMeasure::uniform).collect();
    out.extend(["", "0", "101", "0110"].iter().map(|a| ElementaryMeasure::point((*a).into())));
    let mut rng = rng(MEASURE_SEED);
    for _ in 0..12 {
        let size = rng.gen_range(2..=6);
        let mut support: Vec<BitString> = BitString::all_up_to(4).collect();
        support.shuffle(&mut rng);
        support.truncate(size);
        let units = random_dyadic_split(&mut rng, size, 5);
        out.push(ElementaryMeasure::from_dyadic(
            support.into_iter().zip(units).map(|(a, u)| (a, DyadicRational::new(u, 5))),
            MeasureKind::Probability,
        ));
    }
    out
}

/// The uniform and point-mass tables to stage 4 and ten random tables.
pub fn theta_family() -> Vec<(String, ThetaTable)> {
    let mut out = vec![("uniform".to_string(), ThetaTable::uniform(4)), ("point-mass".to_string(), ThetaTable::point_mass(4))];
    let mut rng = rng(THETA_SEED);
    for j in 0..10 {
        let stages = rng.gen_range(2..=6);
        out.push((format!("random-{j}"), ThetaTable::random(&mut rng, stages, 6)));
    }
    out
}

/// Prefix-free sets for the clopen experiment, within depth of every table
/// in [`theta_family`].
pub fn clopen_sets() -> Vec<PrefixFreeSet> {
    [&["0"][..], &["1"], &["00", "01"], &["000", "1"], &["01", "10"], &[""]]
        .iter()
        .map(|g| PrefixFreeSet::new(g.iter().map(|s| BitString::from(*s))).unwrap())
        .collect()
}

pub fn distortion_cases() -> Vec<(BitString, DistortionSpec)> {
    let r = |n: u32| DyadicRational::new(n, 0);
    let h = DistortionKind::HammingEqualLength;
    let p = DistortionKind::PrefixDisagreement;
    vec![
        ("0000".into(), DistortionSpec::new(h, r(1)).unwrap()),
        ("0000".into(), DistortionSpec::new(h, r(2)).unwrap()),
        ("1011".into(), DistortionSpec::new(h, r(5)).unwrap()),
        ("0110".into(), DistortionSpec::new(p, r(2)).unwrap()),
    ]
}
