//! Experiment runner: fixture families, sweeps that check exact claims and
//! report the rest, and the frozen machine constants.

mod distortion;
mod experiments;
pub mod fixtures;
mod report;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{ceil_log2_rational, BitString};
use crate::complexity::Estimator;
use crate::leftward::{border_prefix, build_interval_table, Domain, MachineKind};
use crate::machine::{load_or_build, sha256_hex, CacheError, MachineConfig};
use crate::measures::{deficiency_test_sum, Scoring};
use crate::monotone::{build_nu, measure_matching, NuFunction, ThetaTable};

pub use distortion::{DistortionKind, DistortionSpec};
pub use experiments::{run_all, run_experiment, EXPERIMENTS};
pub use report::{ExperimentReport, Record, RecordKind};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("unknown experiment {0}")]
    UnknownExperiment(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    pub config: MachineConfig,
    pub cache_dir: Option<PathBuf>,
    pub stoch_max_v_len: usize,
    pub scoring: Scoring,
}

impl Default for Settings {
    fn default() -> Self {
        Self { config: MachineConfig::FIXTURE, cache_dir: None, stoch_max_v_len: 12, scoring: Scoring::ThreeLogK }
    }
}

impl Settings {
    /// Reads `key=value` lines over the defaults. Blank lines and `#`
    /// comments are skipped.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut s = Self::default();
        let (mut max_len, mut fuel) = (s.config.max_program_len, s.config.fuel);
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| HarnessError::Config { line: n + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || err(format!("bad value for {key}: {value}"));
            match key {
                "max_len" => max_len = value.parse().map_err(|_| bad())?,
                "fuel" => fuel = value.parse().map_err(|_| bad())?,
                "cache_dir" => s.cache_dir = Some(value.into()),
                "stoch_max_v_len" => s.stoch_max_v_len = value.parse().map_err(|_| bad())?,
                "lambda_scoring" => {
                    s.scoring = match value {
                        "3logk" => Scoring::ThreeLogK,
                        "k" => Scoring::Linear,
                        _ => return Err(bad()),
                    }
                }
                _ => return Err(err(format!("unknown key {key}"))),
            }
        }
        if !(1..40).contains(&max_len) || fuel == 0 {
            return Err(HarnessError::Config { line: 0, msg: "degenerate machine config".into() });
        }
        s.config = MachineConfig::new(max_len, fuel);
        s.stoch_max_v_len = s.stoch_max_v_len.min(max_len);
        Ok(s)
    }
}

/// Shared state for one run: the unconditional enumeration and the
/// left-total domain built from it.
pub struct Lab {
    pub settings: Settings,
    pub est: Estimator,
    pub domain: Domain,
    pub fixture_hash: String,
}

impl Lab {
    pub fn new(settings: Settings) -> Result<Self, HarnessError> {
        let cached = load_or_build(settings.config, &BitString::new(), settings.cache_dir.as_deref())?;
        let fixture_hash = cached.digest.clone();
        let domain = Domain::build(&cached.enumeration, MachineKind::UPrime);
        Ok(Self { est: Estimator::from_cached(cached), domain, fixture_hash, settings })
    }

    pub fn config(&self) -> MachineConfig {
        self.settings.config
    }

    fn report(&self, experiment: &str, params: serde_json::Value) -> ExperimentReport {
        ExperimentReport::new(experiment, self.config(), params, &self.fixture_hash)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Golden {
    pub enumeration_digest: String,
    pub interval_table_sha256: String,
    pub uniform4_transducer_sha256: String,
    pub predicate_example_encoding: BitString,
    pub omega: String,
    pub border_prefix: BitString,
}

/// Machine constants measured once at the fixture config and then frozen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constants {
    pub max_len: usize,
    pub fuel: u64,
    /// `max k_t(x) - ‖⟨x⟩‖` over `‖x‖ ≤ 6`.
    pub c_machine: i64,
    /// `max k_t(x|x)` over `‖x‖ ≤ 6`.
    pub c_copy: i64,
    /// Largest chain-rule gap over resolved pairs with `‖x‖, ‖y‖ ≤ 3`.
    pub c_chain: i64,
    /// `max ⌈log Σ 2^d W⌉`, at least 0, over the measure fixtures.
    pub c_test: i64,
    /// Largest measure-matching gap over the θ fixtures.
    pub c_nu: i64,
    /// The shortest program with empty output.
    pub p_epsilon: BitString,
    pub golden: Golden,
}

const FROZEN: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/constants.json"));

impl Constants {
    pub fn frozen() -> Self {
        serde_json::from_str(FROZEN).expect("fixtures/constants.json is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

fn sweep_max<T: Ord>(it: impl Iterator<Item = T>) -> T {
    it.max().expect("nonempty sweep")
}

pub fn measure_c_machine(est: &Estimator) -> i64 {
    let e = BitString::new();
    sweep_max(BitString::all_up_to(6).map(|x| {
        let k = est.k(&x, &e).value.expect("literal program fits") as i64;
        k - (2 * x.len() as i64 + 1)
    }))
}

pub fn measure_c_copy(est: &Estimator) -> i64 {
    sweep_max(BitString::all_up_to(6).map(|x| est.k_uncached(&x, &x).value.expect("copy program fits") as i64))
}

pub fn measure_c_chain(est: &Estimator) -> i64 {
    let xs: Vec<BitString> = BitString::all_up_to(3).collect();
    xs.iter()
        .flat_map(|x| xs.iter().map(move |y| (x, y)))
        .filter_map(|(x, y)| est.chain_rule(x, y).gap)
        .max()
        .unwrap_or(0)
}

pub fn measure_c_test(est: &Estimator) -> i64 {
    let e = BitString::new();
    sweep_max(fixtures::measure_family().iter().map(|w| {
        let s = deficiency_test_sum(w, &e, est).expect("fixture measures are valid");
        ceil_log2_rational(&s).unwrap_or(0).max(0)
    }))
}

pub fn measure_c_nu() -> i64 {
    sweep_max(fixtures::theta_family().iter().map(|(_, t)| {
        let nu = NuFunction::build(t).expect("fixture tables compile");
        measure_matching(&nu).iter().filter_map(|r| r.gap()).max().unwrap_or(0)
    }))
}

pub fn golden(lab: &Lab) -> Golden {
    let ix = lab.est.index(&BitString::new());
    let table = build_interval_table(&ix.enumeration);
    let nu = build_nu(&ThetaTable::uniform(4)).expect("uniform table compiles");
    Golden {
        enumeration_digest: lab.fixture_hash.clone(),
        interval_table_sha256: sha256_hex(table.to_tsv().as_bytes()),
        uniform4_transducer_sha256: sha256_hex(nu.to_json().as_bytes()),
        predicate_example_encoding: fixtures::example_predicate().encode(),
        omega: lab.domain.omega().to_string(),
        border_prefix: border_prefix(&lab.domain).bits,
    }
}

/// Measures every constant from scratch.
pub fn calibrate(lab: &Lab) -> Constants {
    let e = BitString::new();
    let cfg = lab.config();
    Constants {
        max_len: cfg.max_program_len,
        fuel: cfg.fuel,
        c_machine: measure_c_machine(&lab.est),
        c_copy: measure_c_copy(&lab.est),
        c_chain: measure_c_chain(&lab.est),
        c_test: measure_c_test(&lab.est),
        c_nu: measure_c_nu(),
        p_epsilon: lab.est.k(&e, &e).witness.expect("some program prints nothing"),
        golden: golden(lab),
    }
}
