use ait_core::codec::BitString;
use ait_core::complexity::Estimator;
use ait_core::harness::fixtures;
use ait_core::machine::MachineConfig;
use ait_core::predicates::{complete_extension_search, cylinder, predicate_of_cylinder, BinaryPredicate};

fn estimator() -> Estimator {
    Estimator::new(MachineConfig::new(18, 2048))
}

#[test]
fn worked_example() {
    let g = fixtures::example_predicate();
    let c = cylinder(&g).unwrap();
    let names: Vec<String> = c.iter().map(|x| x.to_string()).collect();
    assert_eq!(names, ["0000", "0010", "1000", "1010"]);
    assert_eq!(c.measure().to_string(), "1/2^2");
    assert_eq!(g.encode(), BitString::from("1110100110101001110100100"));
    let r = complete_extension_search(&g, &estimator()).unwrap();
    assert!(r.agrees_with(&g));
    assert_eq!(r.bound_slack, r.program.len() as i64 - 2);
}

/// Shortest program, then lexicographic, whose output has a prefix in the
/// cylinder, by direct scan of the enumeration.
fn naive_search(g: &BinaryPredicate, est: &Estimator) -> Option<BitString> {
    let ix = est.index(&BitString::new());
    let n = g.max_index().unwrap_or(0) as usize;
    ix.enumeration
        .records
        .iter()
        .filter(|r| r.output.len() >= n && g.pairs().iter().all(|(&i, &b)| r.output.get(i as usize - 1) == Some(b)))
        .map(|r| r.program.clone())
        .min_by(|a, b| a.len().cmp(&b.len()).then(a.bits().cmp(b.bits())))
}

#[test]
fn random_predicates_complete() {
    let est = estimator();
    let family = fixtures::predicate_family(200);
    assert_eq!(family.len(), 200);
    for g in family {
        assert!(g.domain_size() >= 1 && g.domain_size() <= 6);
        let r = complete_extension_search(&g, &est).unwrap_or_else(|e| panic!("{g:?}: {e}"));
        assert!(r.agrees_with(&g), "{g:?}");
        assert_eq!(Some(r.program.clone()), naive_search(&g, &est), "{g:?}");
        let n = g.max_index().unwrap() as usize;
        assert!(cylinder(&g).unwrap().iter().any(|x| *x == r.raw_output.prefix(n)));
    }
}

#[test]
fn cylinder_round_trip_to_index_8() {
    let mut count = 0;
    for n in 1..=8u64 {
        // each position below n is free, 0 or 1; position n is defined
        for code in 0..3u32.pow(n as u32 - 1) * 2 {
            let mut c = code;
            let mut pairs = vec![(n, c % 2 == 1)];
            c /= 2;
            for i in 1..n {
                match c % 3 {
                    1 => pairs.push((i, false)),
                    2 => pairs.push((i, true)),
                    _ => {}
                }
                c /= 3;
            }
            let g = BinaryPredicate::new(pairs).unwrap();
            let cyl = cylinder(&g).unwrap();
            assert_eq!(cyl.len(), 1 << (n as usize - g.domain_size()));
            assert_eq!(predicate_of_cylinder(&cyl).unwrap(), g);
            assert_eq!(BinaryPredicate::decode(&g.encode()).unwrap(), g);
            count += 1;
        }
    }
    assert_eq!(count, (1..=8).map(|n| 2 * 3u32.pow(n - 1)).sum::<u32>());
}

#[test]
fn full_predicates_have_singleton_cylinders() {
    for k in 1..=4 {
        for g in fixtures::full_predicates(k) {
            let c = cylinder(&g).unwrap();
            assert_eq!(c.len(), 1);
            assert!(g.agrees_with(c.iter().next().unwrap()));
        }
    }
}
