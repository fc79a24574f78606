use std::collections::BTreeSet;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::codec::{decode_string_set, encode_string_set, BitString, DyadicRational};
use crate::complexity::{Estimator, HaltingProxy};
use crate::leftward::{first_total_of_len, set_probability_prefix, shortest_total_satisfying, LeftwardError, TotalSearch};
use crate::machine::{load_or_build, run};
use crate::measures::{deficiency_test_sum, format_weight, hitting_vector, pow2, smallest_hitting_c};
use crate::monotone::{doubles, km_sigma, threshold_n, NuFunction};
use crate::predicates::{complete_extension_search, cylinder, BinaryPredicate};

use super::fixtures::{self, HittingInstance};
use super::{Constants, ExperimentReport, HarnessError, Lab};

pub const EXPERIMENTS: &[&str] = &[
    "coding",
    "set-probability",
    "info-with-set",
    "distortion",
    "clopen",
    "predicate",
    "hitting",
    "deficiency",
    "monotonicity",
];

/// Program length used for the predicate sweep; cylinders of index 8 are
/// out of reach of the shorter fixture programs.
pub const PREDICATE_MIN_LEN: usize = 18;

pub fn run_experiment(lab: &Lab, name: &str) -> Result<ExperimentReport, HarnessError> {
    Ok(match name {
        "coding" => coding(lab),
        "set-probability" => set_probability(lab),
        "info-with-set" => info_with_set(lab),
        "distortion" => distortion(lab),
        "clopen" => clopen(lab),
        "predicate" => predicate(lab)?,
        "hitting" => hitting(lab),
        "deficiency" => deficiency(lab),
        "monotonicity" => monotonicity(lab)?,
        _ => return Err(HarnessError::UnknownExperiment(name.into())),
    })
}

/// Every experiment, in [`EXPERIMENTS`] order.
pub fn run_all(lab: &Lab) -> Result<Vec<ExperimentReport>, HarnessError> {
    EXPERIMENTS.par_iter().map(|name| run_experiment(lab, name)).collect()
}

fn empty() -> BitString {
    BitString::new()
}

fn min_k<'a>(est: &Estimator, d: impl IntoIterator<Item = &'a BitString>) -> Option<usize> {
    d.into_iter().filter_map(|x| est.k(x, &empty()).value).min()
}

fn set_name(d: &[BitString]) -> String {
    let parts: Vec<String> = d.iter().map(|x| if x.is_empty() { "ε".into() } else { x.to_string() }).collect();
    format!("{{{}}}", parts.join(","))
}

fn proxy_info(est: &Estimator, x: &BitString, proxy: &HaltingProxy) -> Option<i64> {
    est.info_with_halting(x, proxy).ok()
}

/// Records a shortest-total-string search: a unique hit passes, several
/// hits at one length fail, and an empty search is reported.
fn record_search(r: &mut ExperimentReport, name: String, search: &Result<TotalSearch, LeftwardError>, rhs: Value) {
    match search {
        Ok(s) => {
            r.check(name, json!({"b": s.b, "scanned": s.scanned_at_len}), rhs, true);
        }
        Err(LeftwardError::NotUnique(hits)) => {
            r.check(name, json!({"hits": hits}), rhs, false);
        }
        Err(e) => r.measure(name, e.to_string(), rhs),
    }
}

fn set_families(est: &Estimator) -> Vec<(String, Vec<BitString>)> {
    let mut out: Vec<(String, Vec<BitString>)> =
        fixtures::set_family(est, 100).into_iter().enumerate().map(|(j, d)| (format!("set-{j}"), d)).collect();
    out.extend(fixtures::random_string_sets(est, 4).into_iter().map(|d| (format!("S_{}", d[0].len()), d)));
    out
}

fn coding(lab: &Lab) -> ExperimentReport {
    let est = &lab.est;
    let e = empty();
    let mut r = lab.report("coding", json!({"sets": 100, "prefix_free_sets": 50}));
    let ix = est.index(&e);
    let mut outputs: Vec<&BitString> = ix.outputs().collect();
    outputs.sort();
    let bad: Vec<&BitString> = outputs
        .iter()
        .filter(|x| {
            let k = est.k(x, &e).value.expect("reachable") as i64;
            est.m(x, &e).ceil_neg_log2().expect("positive") > k
        })
        .copied()
        .collect();
    r.check("m-below-k/violations", &bad, outputs.len(), bad.is_empty());

    let sets = fixtures::set_family(est, 100);
    let bad: Vec<String> = sets
        .iter()
        .filter(|d| {
            let floor = est.m_set(d.iter(), &e).ceil_neg_log2().expect("reachable members");
            floor > min_k(est, d.iter()).expect("reachable members") as i64
        })
        .map(|d| set_name(d))
        .collect();
    r.check("mset-below-min-k/violations", &bad, sets.len(), bad.is_empty());

    let pf = fixtures::prefix_free_family(50);
    let mut bad = Vec::new();
    for g in &pf {
        let km = est.km(g).value;
        let k = min_k(est, g.iter());
        let members: Vec<BitString> = g.iter().cloned().collect();
        if let (Some(km), Some(k)) = (km, k) {
            if km > k {
                bad.push(set_name(&members));
            }
        }
        r.measure(format!("km/{}", set_name(&members)), km, k);
    }
    r.check("km-below-min-k/violations", &bad, pf.len(), bad.is_empty());
    r
}

fn set_probability(lab: &Lab) -> ExperimentReport {
    let est = &lab.est;
    let e = empty();
    let mut r = lab.report("set-probability", json!({"sets": 100, "random_string_sets_max_n": 4}));
    let proxy = est.halting_proxy();
    for (name, d) in set_families(est) {
        let floor = est.m_set(d.iter(), &e).ceil_neg_log2().ok();
        let k = min_k(est, d.iter());
        match (floor, k) {
            (Some(f), Some(k)) => {
                r.check(format!("{name}/floor"), f, k, f <= k as i64);
                r.measure(format!("{name}/slack"), k as i64 - f, Value::Null);
            }
            _ => r.measure(format!("{name}/floor"), floor, k),
        }
        match set_probability_prefix(&lab.domain, &d) {
            None => r.measure(format!("{name}/b"), "zero mass", Value::Null),
            Some((i, search)) => {
                record_search(&mut r, format!("{name}/b-unique"), &search, json!({"i": i}));
                if let Ok(s) = &search {
                    let threshold = DyadicRational::pow2(-i);
                    let recovered = first_total_of_len(&lab.domain, s.b.len(), |b| lab.domain.m_b_set(b, &d) >= threshold);
                    let ok = recovered.as_ref() == Some(&s.b);
                    r.check(format!("{name}/b-recovered"), recovered, &s.b, ok);
                }
            }
        }
        let code = encode_string_set(&d.iter().cloned().collect());
        r.measure(format!("{name}/info-halting"), proxy_info(est, &code, &proxy), set_name(&d));
    }
    r
}

fn info_with_set(lab: &Lab) -> ExperimentReport {
    let est = &lab.est;
    let e = empty();
    let mut r = lab.report("info-with-set", json!({"sets": 100}));
    for (name, d) in set_families(est) {
        let m = est.m_set(d.iter(), &e);
        let Ok(i) = m.ceil_neg_log2() else {
            r.measure(format!("{name}/tau"), "zero mass", Value::Null);
            continue;
        };
        let tau: DyadicRational = d.iter().map(|x| est.m(x, &e).mul_pow2(i - 1)).sum();
        let ok = tau <= DyadicRational::one();
        r.check(format!("{name}/tau-semimeasure"), tau.to_string(), "1", ok);
        let code = encode_string_set(&d.iter().cloned().collect());
        let info = d
            .iter()
            .filter_map(|x| {
                let kx = est.k(x, &e).value?;
                let kxd = est.k_uncached(x, &code).value?;
                Some(kx as i64 - kxd as i64)
            })
            .min();
        r.measure(format!("{name}/min-info"), info, i);
    }
    r
}

fn distortion(lab: &Lab) -> ExperimentReport {
    let est = &lab.est;
    let dom = &lab.domain;
    let e = empty();
    let mut r = lab.report("distortion", json!({"cases": fixtures::distortion_cases()}));
    for (y, spec) in fixtures::distortion_cases() {
        let kind = serde_json::to_value(spec.kind).unwrap();
        let name = format!("{}/{y}/R={}", kind.as_str().unwrap(), spec.radius);
        let ball = spec.ball(&y);
        r.measure(format!("{name}/ball-size"), ball.len(), Value::Null);
        let best = ball
            .iter()
            .filter_map(|x| est.k(x, &e).witness.map(|w| (w.len(), x.clone(), w)))
            .min_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        r.check(format!("{name}/codeword-exists"), best.as_ref().map(|b| &b.1), ball.len(), best.is_some() || ball.is_empty());
        let m: DyadicRational = ball.iter().map(|x| dom.m(x)).sum();
        let Ok(neg_log) = m.ceil_neg_log2() else {
            r.measure(format!("{name}/b"), "zero mass", Value::Null);
            continue;
        };
        let i = 1 + neg_log;
        let threshold = DyadicRational::pow2(-i);
        let search = shortest_total_satisfying(dom, |b| {
            let n = dom.bb(b);
            dom.m_b_set(b, ball.iter().filter(|x| x.len() <= n)) >= threshold
        });
        record_search(&mut r, format!("{name}/b-unique"), &search, json!({"i": i}));
        if let Some((k, x, w)) = &best {
            let out = run(w, &e, lab.config().fuel);
            r.check(format!("{name}/witness-reexecutes"), out.output(), x, out.output() == Some(x));
            r.measure(format!("{name}/k-best"), k, x);
            r.measure(format!("{name}/slack"), *k as i64 - neg_log, Value::Null);
        }
        let info = ball
            .iter()
            .filter_map(|x| {
                let kx = est.k(x, &e).value?;
                let kxy = est.k_uncached(x, &y).value?;
                Some(kx as i64 - kxy as i64)
            })
            .max();
        r.measure(format!("{name}/max-info"), info, Value::Null);
    }
    r
}

fn clopen(lab: &Lab) -> ExperimentReport {
    let est = &lab.est;
    let dom = &lab.domain;
    let mut r = lab.report("clopen", json!({"tables": fixtures::theta_family().len()}));
    let proxy = est.halting_proxy();
    let tables = fixtures::theta_family();
    let built: Vec<_> = tables.par_iter().map(|(_, t)| NuFunction::build(t)).collect();
    for ((tname, t), nu) in tables.iter().zip(built) {
        let nu = match nu {
            Ok(nu) => nu,
            Err(err) => {
                r.check(format!("{tname}/compiles"), err.to_string(), Value::Null, false);
                continue;
            }
        };
        r.measure(format!("{tname}/depth"), nu.transducer.depth(), Value::Null);
        let bad = nu.transducer.xi_violations();
        let first = bad.first().map(|(x, k, got, want)| json!({"x": x, "k": k, "xi": got, "target": want}));
        r.check(format!("{tname}/xi-equality"), bad.len(), first, bad.is_empty());
        for g in fixtures::clopen_sets() {
            let members: Vec<BitString> = g.iter().cloned().collect();
            let name = format!("{tname}/{}", set_name(&members));
            let Ok(ks) = km_sigma(&g, t, nu.transducer.depth()) else {
                r.measure(format!("{name}/km-sigma"), "zero measure", Value::Null);
                continue;
            };
            let km = est.km(&g).value;
            if let (Some(km), Some(k)) = (km, min_k(est, g.iter())) {
                r.check(format!("{name}/km-below-min-k"), km, k, km <= k);
            }
            let code = encode_string_set(g.members());
            r.measure(format!("{name}/slack"), km.map(|km| km as i64 - ks), proxy_info(est, &code, &proxy));
            match threshold_n(&nu, &g, None) {
                Ok(th) => {
                    r.check(format!("{name}/doubling"), &th.counts, Value::Null, doubles(&th.counts));
                    r.check(format!("{name}/clause1"), th.n_prime, th.i, th.clause1);
                    r.check(format!("{name}/clause2"), th.n_prime, th.i, th.clause2);
                    let search = shortest_total_satisfying(dom, |b| dom.bb(b) >= th.n_prime);
                    record_search(&mut r, format!("{name}/b-unique"), &search, json!({"n_prime": th.n_prime}));
                }
                Err(err) => {
                    r.check(format!("{name}/threshold"), err.to_string(), Value::Null, false);
                }
            }
        }
    }
    r
}

fn predicate_families() -> Vec<(String, BinaryPredicate)> {
    let mut out = vec![("example".to_string(), fixtures::example_predicate()), ("empty".to_string(), BinaryPredicate::default())];
    for k in 1..=4 {
        for (j, g) in fixtures::full_predicates(k).into_iter().enumerate() {
            out.push((format!("full-{k}-{j}"), g));
        }
    }
    out.extend(fixtures::predicate_family(200).into_iter().enumerate().map(|(j, g)| (format!("random-{j}"), g)));
    out
}

fn predicate(lab: &Lab) -> Result<ExperimentReport, HarnessError> {
    let cfg = lab.config();
    let pcfg = cfg.with_max_len(cfg.max_program_len.max(PREDICATE_MIN_LEN));
    let wide;
    let est = if pcfg == cfg {
        &lab.est
    } else {
        wide = Estimator::from_cached(load_or_build(pcfg, &empty(), lab.settings.cache_dir.as_deref())?);
        &wide
    };
    let c_machine = Constants::frozen().c_machine;
    let e = empty();
    let mut r = lab.report("predicate", json!({"max_len": pcfg.max_program_len, "random": 200, "c_machine": c_machine}));
    let proxy = lab.est.halting_proxy();
    let example: Vec<BitString> = ["0000", "0010", "1000", "1010"].iter().map(|s| BitString::from(*s)).collect();
    let preds = predicate_families();
    let results: Vec<_> = preds.par_iter().map(|(_, g)| complete_extension_search(g, est)).collect();
    for ((name, g), res) in preds.iter().zip(results) {
        let dom = g.domain_size();
        let cyl = cylinder(g).ok();
        if let Some(cyl) = &cyl {
            let mu = cyl.measure();
            r.check(format!("{name}/cylinder-measure"), mu.to_string(), format!("1/2^{dom}"), mu == DyadicRational::pow2_neg(dom as u32));
        }
        if name == "example" {
            let got: Vec<BitString> = cyl.iter().flat_map(|c| c.iter().cloned()).collect();
            r.check(format!("{name}/cylinder"), &got, &example, got == example);
        }
        match res {
            Ok(ext) => {
                r.check(format!("{name}/agrees"), &ext.raw_output, &ext.program, ext.agrees_with(g));
                r.measure(format!("{name}/slack"), ext.bound_slack, proxy_info(&lab.est, &g.encode(), &proxy));
                let cheap = cyl.iter().flat_map(|c| c.iter()).any(|x| est.k(x, &e).value.is_some_and(|k| k as i64 <= dom as i64 + c_machine));
                if cheap {
                    r.check(format!("{name}/slack-bounded"), ext.bound_slack, c_machine, ext.bound_slack <= c_machine);
                }
            }
            Err(err) => {
                r.check(format!("{name}/found"), err.to_string(), Value::Null, false);
            }
        }
    }
    Ok(r)
}

fn hitting_record(r: &mut ExperimentReport, name: &str, inst: &HittingInstance) {
    let HittingInstance { q, m, i, c, d } = inst;
    let n = (*c as u64 * *d as u64) << (i + 1);
    let z = match hitting_vector(q, m, *i, *c, *d) {
        Ok(z) => z,
        Err(err) => {
            r.check(format!("{name}/feasible"), err.to_string(), Value::Null, false);
            return;
        }
    };
    r.check(format!("{name}/length"), z.elements.len(), n, z.elements.len() as u64 == n);
    let one = pow2(0);
    r.check(format!("{name}/score"), format_weight(&z.final_score), "1", z.final_score <= one);
    let floor = pow2(-((c * d) as i64));
    let missed: Vec<String> = q
        .weights
        .iter()
        .filter(|(_, w)| **w > floor)
        .map(|(code, _)| decode_string_set(code).expect("set codes"))
        .filter(|f| !z.hits(f))
        .map(|f| set_name(&f.into_iter().collect::<Vec<_>>()))
        .collect();
    r.check(format!("{name}/heavy-sets-hit"), &missed, format_weight(&floor), missed.is_empty());
    r.measure(format!("{name}/initial-score"), format_weight(&z.initial_score), Value::Null);
    r.measure(format!("{name}/smallest-c"), smallest_hitting_c(q, m, *i, *d, 4).ok().flatten(), c);
}

fn hitting(lab: &Lab) -> ExperimentReport {
    let mut r = lab.report("hitting", json!({"instances": 50, "seed": fixtures::HITTING_SEED}));
    for (j, inst) in fixtures::hitting_instances(50).iter().enumerate() {
        hitting_record(&mut r, &format!("instance-{j}"), inst);
    }
    r
}

fn deficiency(lab: &Lab) -> ExperimentReport {
    let c_test = Constants::frozen().c_test;
    let mut r = lab.report("deficiency", json!({"c_test": c_test}));
    let bound = pow2(c_test);
    for (j, w) in fixtures::measure_family().iter().enumerate() {
        let name = format!("measure-{j}");
        match deficiency_test_sum(w, &empty(), &lab.est) {
            Ok(s) => {
                r.check(format!("{name}/test-sum"), format_weight(&s), format_weight(&bound), s <= bound);
            }
            Err(err) => {
                r.check(format!("{name}/test-sum"), err.to_string(), Value::Null, false);
            }
        }
    }
    r
}

fn monotonicity(lab: &Lab) -> Result<ExperimentReport, HarnessError> {
    let cfg = lab.config();
    let e = empty();
    let more = Estimator::from_cached(load_or_build(cfg.with_fuel(2 * cfg.fuel), &e, lab.settings.cache_dir.as_deref())?);
    let mut r = lab.report("monotonicity", json!({"fuel_pair": [cfg.fuel, 2 * cfg.fuel]}));
    let (a, b) = (lab.est.index(&e), more.index(&e));
    let corpus: BTreeSet<&BitString> = a.outputs().chain(b.outputs()).collect();
    let k_bad: Vec<&BitString> = corpus
        .iter()
        .filter(|x| match (lab.est.k(x, &e).value, more.k(x, &e).value) {
            (Some(k1), Some(k2)) => k2 > k1,
            (Some(_), None) => true,
            _ => false,
        })
        .copied()
        .collect();
    r.check("k-antitone/violations", &k_bad, corpus.len(), k_bad.is_empty());
    let m_bad: Vec<&BitString> = corpus.iter().filter(|x| more.m(x, &e) < lab.est.m(x, &e)).copied().collect();
    r.check("m-monotone/violations", &m_bad, corpus.len(), m_bad.is_empty());
    let (p1, p2) = (lab.est.halting_proxy(), more.halting_proxy());
    let h_bad: Vec<usize> = (0..p1.bits.len()).filter(|&j| p1.bits.get(j) == Some(true) && p2.bits.get(j) != Some(true)).collect();
    r.check("halting-proxy-monotone/violations", &h_bad, p1.bits.len(), h_bad.is_empty());

    let dom = &lab.domain;
    let probes: Vec<BitString> = BitString::all_up_to(4).collect();
    let pairs: Vec<BitString> = (1..=dom.depth())
        .flat_map(|n| dom.total_strings(n).collect::<Vec<_>>())
        .filter(|b| dom.is_total(&b.parent().unwrap()))
        .collect();
    let bad: Vec<&BitString> = pairs
        .par_iter()
        .filter(|b| {
            let parent = b.parent().unwrap();
            dom.bb(&parent) < dom.bb(b) || probes.iter().any(|x| dom.m_b(&parent, x) < dom.m_b(b, x))
        })
        .collect();
    r.check("parent-dominates/violations", &bad, pairs.len(), bad.is_empty());
    Ok(r)
}
