use std::collections::BTreeSet;

use ait_core::codec::{decode_string_set, encode_string_set, BitString, DyadicRational};
use ait_core::complexity::{pair, Estimator};
use ait_core::harness::{fixtures, measure_c_test, Constants};
use ait_core::machine::{asm, run, ExecOutcome, MachineConfig};
use ait_core::measures::{
    condition_measure, deficiency_test_sum, hitting_vector, image_measure, shannon_fano, stochasticity, ElementaryMeasure,
    MeasureKind, Scoring, StochBounds, StochError,
};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn pow2(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(num_bigint::BigInt::from(1) << k as usize)
    } else {
        BigRational::new(1.into(), num_bigint::BigInt::from(1) << (-k) as usize)
    }
}

#[test]
fn hitting_vectors_on_generated_instances() {
    let instances = fixtures::hitting_instances(50);
    assert_eq!(instances.len(), 50);
    for (j, inst) in instances.iter().enumerate() {
        let (c, d, i) = (inst.c, inst.d, inst.i);
        // precondition of the generator: every set in supp(Q) is i-heavy
        for code in inst.q.weights.keys() {
            let f = decode_string_set(code).unwrap();
            assert!(inst.m.mass(&f) >= pow2(-(i as i64)), "instance {j}");
        }
        let z = hitting_vector(&inst.q, &inst.m, i, c, d).unwrap_or_else(|e| panic!("instance {j}: {e}"));
        assert_eq!(z.elements.len() as u64, (c as u64 * d as u64) << (i + 1), "instance {j}");
        let support: BTreeSet<&BitString> = inst.m.support().collect();
        assert!(z.elements.iter().all(|x| x.is_empty() || support.contains(x)));
        // score recomputed from the definition
        let zset: BTreeSet<&BitString> = z.elements.iter().collect();
        let mut score = BigRational::zero();
        for (code, qf) in &inst.q.weights {
            let f = decode_string_set(code).unwrap();
            if f.iter().all(|x| !zset.contains(x)) {
                score += qf * pow2((c * d) as i64);
                assert!(*qf <= pow2(-((c * d) as i64)), "instance {j}: heavy set missed");
            }
        }
        assert_eq!(score, z.final_score, "instance {j}");
        assert!(score <= BigRational::one(), "instance {j}");
    }
}

#[test]
fn hitting_two_singletons_by_hand() {
    // Q uniform on ⟨{0}⟩, ⟨{1}⟩ and m(0) = m(1) = 1/2 with i = c = d = 1.
    // The first pick gains 1/2·(1/2)^3 from either set; ties go to "0". The
    // second pick must take "1".
    let code = |s: &str| encode_string_set(&[BitString::from(s)].into_iter().collect());
    let q = ElementaryMeasure::new([(code("0"), rat(1, 2)), (code("1"), rat(1, 2))].into(), MeasureKind::Probability);
    let m = ElementaryMeasure::new([("0".into(), rat(1, 2)), ("1".into(), rat(1, 2))].into(), MeasureKind::Semimeasure);
    let z = hitting_vector(&q, &m, 1, 1, 1).unwrap();
    assert_eq!(z.elements, vec![BitString::from("0"), "1".into(), "0".into(), "0".into()]);
    assert!(z.final_score.is_zero());
    assert_eq!(z.initial_score, rat(1, 8));
}

#[test]
fn shannon_fano_codes_for_fixture_measures() {
    for p in fixtures::measure_family() {
        let code = shannon_fano(&p).unwrap();
        let words: Vec<&BitString> = code.codewords.values().collect();
        for (a, w) in &p.weights {
            let c = code.encode(a).unwrap();
            let expect = 1 + DyadicRational::from_rational(w).unwrap().ceil_neg_log2().unwrap();
            assert_eq!(c.len() as i64, expect);
        }
        for (i, a) in words.iter().enumerate() {
            for b in &words[i + 1..] {
                assert!(!a.comparable(b), "{a} and {b}");
            }
        }
        // the codeword's interval lies inside the element's cumulative slot
        let mut cum = BigRational::zero();
        for (a, w) in &p.weights {
            let c = code.encode(a).unwrap();
            let lo = BigRational::new(c.value().into(), 1.into()) * pow2(-(c.len() as i64));
            let hi = &lo + pow2(-(c.len() as i64));
            assert!(cum <= lo && hi <= &cum + w, "{a}");
            cum += w;
        }
        // decoding a concatenation recovers the sequence
        let seq: Vec<&BitString> = p.weights.keys().rev().collect();
        let mut stream = BitString::new();
        for a in &seq {
            stream.extend_from(code.encode(a).unwrap());
        }
        let mut got = Vec::new();
        while !stream.is_empty() {
            let (a, n) = code.decode(&stream).unwrap();
            got.push(a);
            stream = BitString::from_bits(stream.bits()[n..].to_vec());
        }
        assert_eq!(got, seq.into_iter().cloned().collect::<Vec<_>>());
    }
}

#[test]
fn deficiency_is_a_test_up_to_the_frozen_constant() {
    let est = Estimator::new(MachineConfig::FIXTURE);
    let c = Constants::frozen().c_test;
    assert_eq!(measure_c_test(&est), c);
    for w in fixtures::measure_family() {
        let s = deficiency_test_sum(&w, &BitString::new(), &est).unwrap();
        assert!(s <= pow2(c), "{w}");
    }
}

/// Shortest program printing `a` on auxiliary `aux`, by direct scan.
fn k_scan(a: &BitString, aux: &BitString, cfg: MachineConfig) -> Option<usize> {
    BitString::all_up_to(asm::fin(a).len()).find_map(|p| match run(&p, aux, cfg.fuel) {
        ExecOutcome::Halted { output, bits_read, .. } if bits_read == p.len() && &output == a => Some(p.len()),
        _ => None,
    })
}

#[test]
fn stochasticity_of_101_matches_naive_scan() {
    let cfg = MachineConfig::new(16, 2048);
    let a: BitString = "101".into();
    let e = BitString::new();
    let mut candidates = Vec::new();
    for v in BitString::all_up_to(16) {
        if let ExecOutcome::Halted { output, bits_read, .. } = run(&v, &e, cfg.fuel) {
            if bits_read != v.len() {
                continue;
            }
            if let Ok(w) = ElementaryMeasure::decode_probability(&output) {
                if w.contains(&a) {
                    let floor = DyadicRational::from_rational(&w.weight(&a)).unwrap().floor_neg_log2().unwrap();
                    let k = k_scan(&a, &pair(&v, &e), cfg).unwrap() as i64;
                    let d = floor - k;
                    let log = if d <= 1 { 0 } else { 64 - (d as u64 - 1).leading_zeros() as i64 };
                    candidates.push((v.len() as i64 + 3 * log, v.len(), v, w));
                }
            }
        }
    }
    candidates.sort_by(|x, y| (x.0, x.1, x.2.bits()).cmp(&(y.0, y.1, y.2.bits())));
    assert_eq!(candidates.len(), 1);
    let (score, _, v, w) = &candidates[0];
    assert_eq!(*w, ElementaryMeasure::uniform(3));

    let est = Estimator::new(cfg);
    let bounds = StochBounds { max_v_len: 16, scoring: Scoring::ThreeLogK };
    let r = stochasticity(&a, &e, bounds, &est).unwrap();
    assert_eq!((r.value, &r.witness_program), (*score, v));
    assert_eq!(r.value, 16);
    assert_eq!(run(&r.witness_program, &e, cfg.fuel).output(), Some(&r.witness_measure.encode().unwrap()));

    let narrower = StochBounds { max_v_len: 15, ..bounds };
    assert_eq!(stochasticity(&a, &e, narrower, &est), Err(StochError::NotFound(a.clone())));
    let linear = StochBounds { scoring: Scoring::Linear, ..bounds };
    assert_eq!(stochasticity(&a, &e, linear, &est).unwrap().value, 16);
}

fn measure_strategy() -> impl Strategy<Value = ElementaryMeasure> {
    proptest::collection::btree_map(
        proptest::collection::vec(any::<bool>(), 0..4).prop_map(BitString::from_bits),
        1u32..8,
        1..6,
    )
    .prop_map(|m| {
        let total: u32 = m.values().sum();
        ElementaryMeasure::new(
            m.into_iter().map(|(a, n)| (a, rat(n as i64, total as i64))).collect(),
            MeasureKind::Probability,
        )
    })
}

proptest! {
    #[test]
    fn image_measure_preserves_mass(w in measure_strategy(), keep in 0usize..4) {
        let img = image_measure(&w, |a| a.prefix(keep.min(a.len())));
        prop_assert_eq!(img.total(), w.total());
        prop_assert_eq!(image_measure(&w, |a| a.clone()), w.clone());
    }

    #[test]
    fn conditioning_renormalizes(w in measure_strategy(), pick in proptest::collection::vec(any::<bool>(), 6)) {
        let s: BTreeSet<BitString> = w.support().zip(pick.iter().cycle()).filter(|(_, b)| **b).map(|(a, _)| a.clone()).collect();
        match condition_measure(&w, &s) {
            Ok(c) => {
                prop_assert_eq!(c.total(), BigRational::one());
                prop_assert!(c.support().all(|a| s.contains(a)));
            }
            Err(_) => prop_assert!(s.is_empty()),
        }
    }
}
