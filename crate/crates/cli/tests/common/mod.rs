use std::path::Path;
use std::process::{Command, Output};

pub const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

/// One invocation of every subcommand, plus every experiment.
pub fn invocations() -> Vec<Vec<String>> {
    let d = |f: &str| format!("{DATA}/{f}");
    let mut out: Vec<Vec<String>> = vec![
        vec!["machine".into(), "enumerate".into()],
        vec!["machine".into(), "enumerate".into(), "--aux".into(), "1".into()],
        vec!["machine".into(), "enumerate".into(), "--tsv".into()],
        vec!["machine".into(), "run".into(), "1100".into()],
        vec!["border".into()],
        vec!["omega".into()],
        vec!["mb".into(), "1100".into(), "0".into()],
        vec!["k".into(), "0101".into()],
        vec!["k".into(), "0".into(), "--cond".into(), "0".into()],
        vec!["m".into(), "11".into()],
        vec!["mset".into(), d("set.txt")],
        vec!["km".into(), d("prefix_free.txt")],
        vec!["deficiency".into(), "101".into(), "--measure".into(), d("measure.tsv")],
        vec!["stoch".into(), "00".into(), "--max-v-len".into(), "14".into()],
        vec!["hitvec".into(), "--q".into(), d("q.tsv"), "--m".into(), d("m.tsv"), "-i".into(), "1".into(), "-c".into(), "1".into(), "-d".into(), "1".into()],
        vec!["nu".into(), "build".into(), d("uniform3.tsv")],
        vec!["nu".into(), "apply".into(), d("uniform3.tsv"), "01101".into()],
        vec!["nu".into(), "preimage".into(), d("uniform3.tsv"), d("g.txt"), "4".into()],
        vec!["predicate".into(), "complete".into(), d("predicate.tsv")],
        vec!["calibrate".into()],
    ];
    for e in ait_core::harness::EXPERIMENTS {
        out.push(vec!["experiment".into(), e.to_string()]);
    }
    out.push(vec!["experiment".into(), "all".into()]);
    out
}

pub fn ait(cache: &Path, args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ait"))
        .arg("--cache")
        .arg(cache)
        .args(args)
        .output()
        .expect("binary runs")
}
