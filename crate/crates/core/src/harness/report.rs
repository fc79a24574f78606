use serde::Serialize;
use serde_json::{json, Value};

use crate::machine::MachineConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Meta,
    Assert,
    Measure,
}

/// One JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub experiment: String,
    pub name: String,
    pub kind: RecordKind,
    pub lhs: Value,
    pub rhs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: MachineConfig,
    pub params: Value,
    pub fixture_hash: String,
    pub records: Vec<Record>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: MachineConfig, params: Value, fixture_hash: &str) -> Self {
        Self { experiment: experiment.into(), config, params, fixture_hash: fixture_hash.into(), records: Vec::new() }
    }

    fn push(&mut self, name: String, kind: RecordKind, lhs: Value, rhs: Value, pass: Option<bool>) {
        self.records.push(Record { experiment: self.experiment.clone(), name, kind, lhs, rhs, pass });
    }

    pub fn check(&mut self, name: impl Into<String>, lhs: impl Serialize, rhs: impl Serialize, pass: bool) -> bool {
        self.push(name.into(), RecordKind::Assert, json!(lhs), json!(rhs), Some(pass));
        pass
    }

    pub fn measure(&mut self, name: impl Into<String>, lhs: impl Serialize, rhs: impl Serialize) {
        self.push(name.into(), RecordKind::Measure, json!(lhs), json!(rhs), None);
    }

    pub fn assertions(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| r.kind == RecordKind::Assert)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.assertions().filter(|r| r.pass == Some(false))
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    /// The meta line followed by one line per record.
    pub fn to_jsonl(&self) -> String {
        let meta = Record {
            experiment: self.experiment.clone(),
            name: "config".into(),
            kind: RecordKind::Meta,
            lhs: json!({"max_len": self.config.max_program_len, "fuel": self.config.fuel, "params": self.params}),
            rhs: json!({"fixture_hash": self.fixture_hash}),
            pass: None,
        };
        std::iter::once(&meta)
            .chain(&self.records)
            .map(|r| serde_json::to_string(r).expect("serializable") + "\n")
            .collect()
    }
}
