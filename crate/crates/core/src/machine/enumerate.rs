use rayon::prelude::*;

use crate::codec::{kraft_sum, BitString, DyadicRational};

use super::{run, ExecOutcome, MachineConfig, ProgramRecord};

/// All fuel-bounded halting programs of one configuration and auxiliary
/// string, sorted by `(steps, program)` with programs compared
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub config: MachineConfig,
    pub aux: BitString,
    pub records: Vec<ProgramRecord>,
}

impl Enumeration {
    pub fn kraft_sum(&self) -> DyadicRational {
        kraft_sum(self.records.iter().map(|r| &r.program))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The cache file body: one `program<TAB>output<TAB>steps` line per record.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!("{}\t{}\t{}\n", r.program, r.output, r.steps));
        }
        out
    }

    pub fn from_tsv(config: MachineConfig, aux: BitString, text: &str) -> Result<Self, String> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split('\t').collect();
            let [p, o, s] = fields[..] else {
                return Err(format!("line {}: expected 3 fields", i + 1));
            };
            let bad = |e: &dyn std::fmt::Display| format!("line {}: {e}", i + 1);
            records.push(ProgramRecord {
                program: p.parse().map_err(|e| bad(&e))?,
                output: o.parse().map_err(|e| bad(&e))?,
                steps: s.parse().map_err(|e| bad(&e))?,
                aux: aux.clone(),
            });
        }
        Ok(Self { config, aux, records })
    }
}

fn explore(prefix: BitString, aux: &BitString, cfg: MachineConfig, out: &mut Vec<ProgramRecord>) {
    let mut stack = vec![prefix];
    while let Some(p) = stack.pop() {
        match run(&p, aux, cfg.fuel) {
            ExecOutcome::Halted { output, bits_read, steps } => {
                debug_assert_eq!(bits_read, p.len());
                out.push(ProgramRecord { program: p, output, steps, aux: aux.clone() });
            }
            ExecOutcome::NeedsMoreInput if p.len() < cfg.max_program_len => {
                stack.push(p.with_bit(true));
                stack.push(p.with_bit(false));
            }
            _ => {}
        }
    }
}

/// Enumerates the minimal halting programs of length at most
/// `cfg.max_program_len` that halt within `cfg.fuel` steps on `aux`.
///
/// The program tree is split at a fixed depth and the subtrees are searched
/// in parallel; the final sort makes the result independent of scheduling.
pub fn enumerate_halting(cfg: MachineConfig, aux: &BitString) -> Enumeration {
    let split = cfg.max_program_len.min(8);
    let mut records = Vec::new();
    let mut frontier = vec![BitString::new()];
    for _ in 0..split {
        let mut next = Vec::new();
        for p in frontier {
            match run(&p, aux, cfg.fuel) {
                ExecOutcome::Halted { output, steps, .. } => {
                    records.push(ProgramRecord { program: p, output, steps, aux: aux.clone() })
                }
                ExecOutcome::NeedsMoreInput => {
                    next.push(p.with_bit(false));
                    next.push(p.with_bit(true));
                }
                _ => {}
            }
        }
        frontier = next;
    }
    let deeper: Vec<Vec<ProgramRecord>> = frontier
        .into_par_iter()
        .map(|p| {
            let mut out = Vec::new();
            explore(p, aux, cfg, &mut out);
            out
        })
        .collect();
    records.extend(deeper.into_iter().flatten());
    records.sort_by(|a, b| a.steps.cmp(&b.steps).then_with(|| a.program.lex_cmp(&b.program)));
    Enumeration { config: cfg, aux: aux.clone(), records }
}
