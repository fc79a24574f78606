//! The left-total transform `U′` and everything defined by position in the
//! program tree: totality, the border prefix, `B(b)`, `m_b` and the
//! shortest-total-string search.
//!
//! `U′` lays the halting programs of `U` (in convergence order) side by side
//! as consecutive intervals `i_p ⊂ [0,1)` of width `2^-‖p‖`. An input `p′`
//! halts with output `U(p)` at the first prefix whose dyadic interval lies
//! inside `i_p`. The domain of `U′` is therefore the canonical dyadic
//! decomposition of each `i_p`, and it fills `[0, Ω_t)` with no gaps.
//!
//! Totality is relative to the configuration: `x` is total when every
//! depth-`L` leaf below it runs into a halting program, i.e. has a prefix
//! in the fuel-bounded domain.

use std::collections::HashMap;

use thiserror::Error;

use crate::codec::{interval_of, BitString, DyadicRational, OpenInterval};
use crate::machine::{Enumeration, ExecOutcome, MachineConfig, ProgramRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LeftwardError {
    #[error("no total string within bounds satisfies the predicate")]
    NotFound,
    #[error("total strings {0:?} of equal length all satisfy the predicate")]
    NotUnique(Vec<BitString>),
}

/// Convergence-ordered halting programs with their assigned intervals.
#[derive(Debug, Clone)]
pub struct IntervalTable {
    pub config: MachineConfig,
    pub aux: BitString,
    pub entries: Vec<(ProgramRecord, OpenInterval)>,
}

pub fn build_interval_table(enumeration: &Enumeration) -> IntervalTable {
    let mut lo = DyadicRational::zero();
    let mut entries = Vec::with_capacity(enumeration.len());
    for r in &enumeration.records {
        let hi = &lo + &DyadicRational::pow2_neg(r.program.len() as u32);
        let interval = OpenInterval::new(lo, hi.clone()).expect("positive width");
        entries.push((r.clone(), interval));
        lo = hi;
    }
    IntervalTable { config: enumeration.config, aux: enumeration.aux.clone(), entries }
}

impl IntervalTable {
    pub fn total_width(&self) -> DyadicRational {
        self.entries.last().map(|(_, i)| i.hi.clone()).unwrap_or_default()
    }

    /// One `program<TAB>lo<TAB>hi` line per entry.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (r, i) in &self.entries {
            out.push_str(&format!("{}\t{}\t{}\n", r.program, i.lo, i.hi));
        }
        out
    }

    fn entry_at(&self, i: &OpenInterval) -> Option<&(ProgramRecord, OpenInterval)> {
        let k = self.entries.partition_point(|(_, e)| e.lo <= i.lo);
        let candidate = self.entries.get(k.checked_sub(1)?)?;
        candidate.1.contains(i).then_some(candidate)
    }
}

/// Runs `U′` on `p_prime`: halts at the first prefix whose interval lies in
/// some `i_p` (so the parent's does not), with `U(p)` as output.
pub fn run_left_total(p_prime: &BitString, table: &IntervalTable) -> ExecOutcome {
    for k in 0..=p_prime.len() {
        let q = p_prime.prefix(k);
        let iq = interval_of(&q);
        if let Some((r, _)) = table.entry_at(&iq) {
            return ExecOutcome::Halted { output: r.output.clone(), bits_read: k, steps: r.steps };
        }
    }
    ExecOutcome::NeedsMoreInput
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MachineKind {
    U,
    UPrime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainEntry {
    pub program: BitString,
    pub output: BitString,
    pub steps: u64,
    lo_leaf: u64,
    hi_leaf: u64,
}

impl DomainEntry {
    fn new(program: BitString, output: BitString, steps: u64, depth: usize) -> Self {
        let shift = depth - program.len();
        let lo_leaf = program.value() << shift;
        Self { lo_leaf, hi_leaf: lo_leaf + (1 << shift), program, output, steps }
    }
}

#[derive(Debug, Clone)]
struct OutputIndex {
    positions: Vec<usize>,
    // prefix[j] = Σ weights of the first j positions
    prefix: Vec<DyadicRational>,
}

/// The fuel-bounded domain of `U` or `U′`, sorted by position in `[0,1)`.
#[derive(Debug, Clone)]
pub struct Domain {
    pub config: MachineConfig,
    pub kind: MachineKind,
    pub aux: BitString,
    entries: Vec<DomainEntry>,
    covered_prefix: Vec<u64>,
    weight_prefix: Vec<DyadicRational>,
    max_out_prefix: Vec<usize>,
    by_output: HashMap<BitString, OutputIndex>,
}

/// Maximal aligned dyadic pieces of `[a, b)` in units of `2^-depth`.
fn dyadic_pieces(mut a: u64, b: u64, depth: usize) -> Vec<BitString> {
    let mut out = Vec::new();
    while a < b {
        let mut j = if a == 0 { depth as u32 } else { a.trailing_zeros().min(depth as u32) };
        while a + (1u64 << j) > b {
            j -= 1;
        }
        out.push(BitString::from_value(a >> j, depth - j as usize));
        a += 1 << j;
    }
    out
}

impl Domain {
    pub fn of_u(enumeration: &Enumeration) -> Self {
        let depth = enumeration.config.max_program_len;
        let mut entries: Vec<DomainEntry> = enumeration
            .records
            .iter()
            .map(|r| DomainEntry::new(r.program.clone(), r.output.clone(), r.steps, depth))
            .collect();
        entries.sort_by_key(|e| e.lo_leaf);
        Self::from_entries(enumeration.config, MachineKind::U, enumeration.aux.clone(), entries)
    }

    pub fn of_u_prime(table: &IntervalTable) -> Self {
        let depth = table.config.max_program_len;
        let scale = |q: &DyadicRational| -> u64 {
            let n = q.scaled_numerator(depth as u32).expect("endpoint on the 2^-L grid");
            u64::try_from(n).expect("fits")
        };
        let mut entries = Vec::new();
        for (r, i) in &table.entries {
            for piece in dyadic_pieces(scale(&i.lo), scale(&i.hi), depth) {
                entries.push(DomainEntry::new(piece, r.output.clone(), r.steps, depth));
            }
        }
        Self::from_entries(table.config, MachineKind::UPrime, table.aux.clone(), entries)
    }

    pub fn build(enumeration: &Enumeration, kind: MachineKind) -> Self {
        match kind {
            MachineKind::U => Self::of_u(enumeration),
            MachineKind::UPrime => Self::of_u_prime(&build_interval_table(enumeration)),
        }
    }

    fn from_entries(config: MachineConfig, kind: MachineKind, aux: BitString, entries: Vec<DomainEntry>) -> Self {
        let mut covered_prefix = vec![0u64];
        let mut weight_prefix = vec![DyadicRational::zero()];
        let mut max_out_prefix = vec![0usize];
        let mut by_output: HashMap<BitString, OutputIndex> = HashMap::new();
        for (k, e) in entries.iter().enumerate() {
            let w = DyadicRational::pow2_neg(e.program.len() as u32);
            covered_prefix.push(covered_prefix[k] + (e.hi_leaf - e.lo_leaf));
            weight_prefix.push(&weight_prefix[k] + &w);
            max_out_prefix.push(max_out_prefix[k].max(e.output.len()));
            let idx = by_output
                .entry(e.output.clone())
                .or_insert_with(|| OutputIndex { positions: Vec::new(), prefix: vec![DyadicRational::zero()] });
            idx.positions.push(k);
            let last = idx.prefix.last().unwrap().clone();
            idx.prefix.push(&last + &w);
        }
        Self { config, kind, aux, entries, covered_prefix, weight_prefix, max_out_prefix, by_output }
    }

    pub fn entries(&self) -> &[DomainEntry] {
        &self.entries
    }

    pub fn depth(&self) -> usize {
        self.config.max_program_len
    }

    /// `Ω_t`: the Kraft sum of the domain.
    pub fn omega(&self) -> DyadicRational {
        self.weight_prefix.last().unwrap().clone()
    }

    fn leaf_range(&self, x: &BitString) -> (u64, u64) {
        let shift = self.depth() - x.len();
        let lo = x.value() << shift;
        (lo, lo + (1 << shift))
    }

    /// Number of depth-`L` leaves in `[a, b)` that have a halting prefix.
    fn covered(&self, a: u64, b: u64) -> u64 {
        let first = self.entries.partition_point(|e| e.hi_leaf <= a);
        let last = self.entries.partition_point(|e| e.lo_leaf < b);
        if first >= last {
            return 0;
        }
        let mut total = self.covered_prefix[last] - self.covered_prefix[first];
        let (f, l) = (&self.entries[first], &self.entries[last - 1]);
        total -= a.saturating_sub(f.lo_leaf);
        total -= l.hi_leaf.saturating_sub(b);
        total
    }

    fn halting_leaves(&self, x: &BitString) -> (u64, u64) {
        assert!(x.len() <= self.depth(), "{x} is deeper than the configured length bound");
        let (a, b) = self.leaf_range(x);
        (self.covered(a, b), b - a)
    }

    /// Whether the machine halts on `x` itself, i.e. some prefix of `x` is a program.
    pub fn halts_on(&self, x: &BitString) -> Option<&DomainEntry> {
        let (a, _) = self.leaf_range(&x.prefix(self.depth()));
        let k = self.entries.partition_point(|e| e.lo_leaf <= a).checked_sub(1)?;
        let e = &self.entries[k];
        e.program.is_prefix_of(x).then_some(e)
    }

    pub fn is_total(&self, x: &BitString) -> bool {
        let (h, all) = self.halting_leaves(x);
        h == all
    }

    /// Has both total and non-total expansions within the bounds.
    pub fn is_mixed(&self, x: &BitString) -> bool {
        let (h, all) = self.halting_leaves(x);
        0 < h && h < all
    }

    /// Number of entries counted by `B(b)` and `m_b`: programs left of `b`
    /// or extending it. These form a prefix of the position order.
    fn included(&self, b: &BitString) -> usize {
        let (_, hi_b) = self.leaf_range(b);
        let k = self.entries.partition_point(|e| e.hi_leaf <= hi_b);
        match k.checked_sub(1) {
            Some(j) if self.entries[j].program.is_proper_prefix_of(b) => j,
            _ => k,
        }
    }

    /// `B(b)`: longest output of a program left of `b` or extending it; 0 if `b` is not total.
    pub fn bb(&self, b: &BitString) -> usize {
        if !self.is_total(b) {
            return 0;
        }
        self.max_out_prefix[self.included(b)]
    }

    /// `m_b(x)` relative to this domain's auxiliary string; 0 if `b` is not total.
    pub fn m_b(&self, b: &BitString, x: &BitString) -> DyadicRational {
        if !self.is_total(b) {
            return DyadicRational::zero();
        }
        self.m_upto(self.included(b), x)
    }

    pub fn m_b_set<'a>(&self, b: &BitString, d: impl IntoIterator<Item = &'a BitString>) -> DyadicRational {
        if !self.is_total(b) {
            return DyadicRational::zero();
        }
        let k = self.included(b);
        d.into_iter().map(|x| self.m_upto(k, x)).sum()
    }

    fn m_upto(&self, k: usize, x: &BitString) -> DyadicRational {
        match self.by_output.get(x) {
            Some(idx) => idx.prefix[idx.positions.partition_point(|&p| p < k)].clone(),
            None => DyadicRational::zero(),
        }
    }

    /// `m_t(x)` over the whole domain.
    pub fn m(&self, x: &BitString) -> DyadicRational {
        self.m_upto(self.entries.len(), x)
    }

    /// Programs strictly left of `b`: the `Ω̂` sum.
    pub fn weight_left_of(&self, b: &BitString) -> DyadicRational {
        let (lo_b, _) = self.leaf_range(b);
        self.weight_prefix[self.entries.partition_point(|e| e.hi_leaf <= lo_b)].clone()
    }

    /// All total strings of length `n` in lexicographic order.
    pub fn total_strings(&self, n: usize) -> impl Iterator<Item = BitString> + '_ {
        BitString::all_of_len(n).filter(move |x| self.is_total(x))
    }

    /// Runs the machine on `x` within the domain, as `run`/`run_left_total` would.
    pub fn run(&self, x: &BitString) -> ExecOutcome {
        match self.halts_on(x) {
            Some(e) => ExecOutcome::Halted {
                output: e.output.clone(),
                bits_read: e.program.len(),
                steps: e.steps,
            },
            None => ExecOutcome::NeedsMoreInput,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BorderPrefix {
    pub bits: BitString,
    pub config: MachineConfig,
}

/// Walks down from the root, preferring a mixed `x1` over a mixed `x0`.
pub fn border_prefix(domain: &Domain) -> BorderPrefix {
    let mut x = BitString::new();
    while x.len() < domain.depth() {
        let one = x.with_bit(true);
        let zero = x.with_bit(false);
        if domain.is_mixed(&one) {
            x = one;
        } else if domain.is_mixed(&zero) {
            x = zero;
        } else {
            break;
        }
    }
    BorderPrefix { bits: x, config: domain.config }
}

/// `(Ω_t, Ω̂)`: the full halting weight and the weight of programs left of `b`.
pub fn omega_pair(b: &BorderPrefix, domain: &Domain) -> (DyadicRational, DyadicRational) {
    (domain.omega(), domain.weight_left_of(&b.bits))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalSearch {
    pub b: BitString,
    /// Number of strings examined at the winning length (all of them, so
    /// uniqueness is checked rather than assumed).
    pub scanned_at_len: usize,
}

/// The shortest total string satisfying `pred`, checked unique at its length.
pub fn shortest_total_satisfying(
    domain: &Domain,
    mut pred: impl FnMut(&BitString) -> bool,
) -> Result<TotalSearch, LeftwardError> {
    for n in 0..=domain.depth() {
        let mut hits = Vec::new();
        let mut scanned = 0;
        for b in domain.total_strings(n) {
            scanned += 1;
            if pred(&b) {
                hits.push(b);
            }
        }
        match hits.len() {
            0 => continue,
            1 => return Ok(TotalSearch { b: hits.pop().unwrap(), scanned_at_len: scanned }),
            _ => return Err(LeftwardError::NotUnique(hits)),
        }
    }
    Err(LeftwardError::NotFound)
}

/// The recovery step of the set-probability argument: given the length of
/// `b`, the first total string of that length satisfying `pred`.
pub fn first_total_of_len(
    domain: &Domain,
    n: usize,
    mut pred: impl FnMut(&BitString) -> bool,
) -> Option<BitString> {
    domain.total_strings(n).find(|b| pred(b))
}

/// `i = 1 + ⌈-log m(D)⌉` and the shortest total `b` with `m_b(D) ≥ 2^-i`.
pub fn set_probability_prefix(domain: &Domain, d: &[BitString]) -> Option<(i64, Result<TotalSearch, LeftwardError>)> {
    let m: DyadicRational = d.iter().map(|x| domain.m(x)).sum();
    let i = 1 + m.ceil_neg_log2().ok()?;
    let threshold = DyadicRational::pow2(-i);
    Some((i, shortest_total_satisfying(domain, |b| domain.m_b_set(b, d) >= threshold)))
}
