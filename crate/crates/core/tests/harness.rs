use ait_core::harness::{calibrate, run_all, run_experiment, Constants, HarnessError, Lab, RecordKind, Settings, EXPERIMENTS};
use ait_core::machine::MachineConfig;
use ait_core::measures::Scoring;

#[test]
fn settings_parse() {
    let s = Settings::parse("# comment\nmax_len = 12\nfuel=512\n\nlambda_scoring=k\nstoch_max_v_len=20\n").unwrap();
    assert_eq!(s.config, MachineConfig::new(12, 512));
    assert_eq!(s.scoring, Scoring::Linear);
    assert_eq!(s.stoch_max_v_len, 12);
    assert_eq!(Settings::parse("").unwrap(), Settings::default());
    assert!(matches!(Settings::parse("fuel\n"), Err(HarnessError::Config { line: 1, .. })));
    assert!(matches!(Settings::parse("x=1"), Err(HarnessError::Config { .. })));
    assert!(matches!(Settings::parse("fuel=0"), Err(HarnessError::Config { .. })));
    assert!(matches!(Settings::parse("lambda_scoring=2k"), Err(HarnessError::Config { .. })));
}

#[test]
fn unknown_experiment() {
    let lab = Lab::new(Settings::default()).unwrap();
    assert!(matches!(run_experiment(&lab, "nope"), Err(HarnessError::UnknownExperiment(_))));
}

#[test]
fn reports_are_well_formed_deterministic_and_green() {
    let lab = Lab::new(Settings::default()).unwrap();
    let a = run_all(&lab).unwrap();
    let b = run_all(&lab).unwrap();
    assert_eq!(a.iter().map(|r| r.experiment.as_str()).collect::<Vec<_>>(), EXPERIMENTS);
    for (ra, rb) in a.iter().zip(&b) {
        let text = ra.to_jsonl();
        assert_eq!(text, rb.to_jsonl());
        let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines[0]["kind"], "meta");
        assert_eq!(lines[0]["rhs"]["fixture_hash"], lab.fixture_hash);
        for l in &lines {
            assert_eq!(l["experiment"], ra.experiment);
            assert!(l["name"].is_string());
            assert_eq!(l.get("pass").is_some(), l["kind"] == "assert", "{l}");
        }
        assert!(ra.assertions().count() > 0, "{}", ra.experiment);
        let failed: Vec<_> = ra.failures().collect();
        assert!(failed.is_empty(), "{}: {failed:?}", ra.experiment);
        assert!(ra.records.iter().all(|r| r.kind != RecordKind::Meta));
    }
}

#[test]
fn calibration_reproduces_frozen_constants() {
    let lab = Lab::new(Settings::default()).unwrap();
    let c = calibrate(&lab);
    assert_eq!(c, Constants::frozen());
    assert_eq!(c.to_json(), include_str!("../../../fixtures/constants.json"));
}
