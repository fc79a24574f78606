use std::collections::{BTreeMap, HashSet};

use ait_core::codec::{BitString, DyadicRational};
use ait_core::machine::{asm, enumerate_halting, load_or_build, run, CacheError, ExecOutcome, MachineConfig};
use proptest::prelude::*;

const CFG: MachineConfig = MachineConfig::FIXTURE;

/// Every string of length at most L that the machine halts on after
/// reading exactly all of it, found by running each one.
fn swept_domain(cfg: MachineConfig, aux: &BitString) -> BTreeMap<BitString, BitString> {
    BitString::all_up_to(cfg.max_program_len)
        .filter_map(|p| match run(&p, aux, cfg.fuel) {
            ExecOutcome::Halted { output, bits_read, .. } if bits_read == p.len() => Some((p, output)),
            _ => None,
        })
        .collect()
}

#[test]
fn enumeration_equals_exhaustive_sweep() {
    let e = BitString::new();
    let swept = swept_domain(CFG, &e);
    let listed: BTreeMap<BitString, BitString> =
        enumerate_halting(CFG, &e).records.into_iter().map(|r| (r.program, r.output)).collect();
    assert_eq!(listed, swept);
}

#[test]
fn sweep_domain_is_prefix_free() {
    let swept = swept_domain(CFG, &BitString::new());
    let programs: HashSet<&BitString> = swept.keys().collect();
    let violations: Vec<_> = swept
        .keys()
        .flat_map(|p| (0..p.len()).map(move |j| (p.prefix(j), p)))
        .filter(|(q, _)| programs.contains(q))
        .collect();
    assert!(violations.is_empty(), "{violations:?}");
}

#[test]
fn kraft_sum_is_at_most_one() {
    let e = enumerate_halting(CFG, &BitString::new());
    let direct: DyadicRational = e.records.iter().map(|r| DyadicRational::pow2_neg(r.program.len() as u32)).sum();
    assert_eq!(direct, e.kraft_sum());
    assert!(direct <= DyadicRational::one());
}

#[test]
fn enumeration_is_byte_deterministic() {
    let a = enumerate_halting(CFG, &BitString::new()).to_tsv();
    let b = enumerate_halting(CFG, &BitString::new()).to_tsv();
    assert_eq!(a, b);
}

#[test]
fn cache_round_trip_and_tamper_detection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = MachineConfig::new(10, 512);
    let first = load_or_build(cfg, &BitString::new(), Some(dir.path())).unwrap();
    let second = load_or_build(cfg, &BitString::new(), Some(dir.path())).unwrap();
    assert_eq!(first.digest, second.digest);
    assert_eq!(first.enumeration.records, second.enumeration.records);

    let body = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|x| x == "tsv"))
        .unwrap();
    let mut text = std::fs::read_to_string(&body).unwrap();
    text.push_str("0\t\t1\n");
    std::fs::write(&body, text).unwrap();
    assert!(matches!(
        load_or_build(cfg, &BitString::new(), Some(dir.path())),
        Err(CacheError::DigestMismatch { .. })
    ));
}

#[test]
fn conditional_programs_read_the_auxiliary_string() {
    let p = asm::seq(&[asm::cpy(), asm::halt()]);
    let aux: BitString = "10110".into();
    assert_eq!(run(&p, &aux, 256).output(), Some(&aux));
    let e = enumerate_halting(MachineConfig::new(8, 256), &aux);
    assert!(e.records.iter().any(|r| r.program == p && r.output == aux));
}

proptest! {
    #[test]
    fn trailing_bits_are_never_read(bits in proptest::collection::vec(any::<bool>(), 0..14), tail in proptest::collection::vec(any::<bool>(), 1..6)) {
        let p = BitString::from_bits(bits);
        if let ExecOutcome::Halted { output, bits_read, .. } = run(&p, &BitString::new(), CFG.fuel) {
            let mut longer = p.prefix(bits_read);
            for b in tail {
                longer.push(b);
            }
            prop_assert_eq!(run(&longer, &BitString::new(), CFG.fuel).output().cloned(), Some(output));
        }
    }

    #[test]
    fn more_fuel_keeps_halting_results(bits in proptest::collection::vec(any::<bool>(), 0..14)) {
        let p = BitString::from_bits(bits);
        if let ExecOutcome::Halted { output, .. } = run(&p, &BitString::new(), 512) {
            prop_assert_eq!(run(&p, &BitString::new(), 4096).output().cloned(), Some(output));
        }
    }
}
