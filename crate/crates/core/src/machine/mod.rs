//! The reference prefix-free machine.
//!
//! Programs are read bit by bit from a prefix-free opcode table:
//!
//! ```text
//! 1        FIN ⟨y⟩    append y to the output and halt
//! 000      HALT       halt
//! 001      LIT ⟨y⟩    append y to the output
//! 0100     REP ⟨n⟩ I  run instruction I n times ([n] is the field's binary value)
//! 0101     CPY        append auxiliary data bits up to the end marker
//! 0110     FLD        read one self-delimited field ⟨z⟩ from the auxiliary tape, append z
//! 01110    DUP        output ← output · output
//! 011110   LOOP I     run I forever
//! 0111110  BRA I J    read an auxiliary symbol; run I on data bit 1, otherwise J
//! 0111111  (invalid)  stuck
//! ```
//!
//! `⟨y⟩` is `1^‖y‖ 0 y`. Bodies (`I`, `J`) are decoded once when their
//! instruction is read. Instructions run in sequence until one halts.
//!
//! The auxiliary string `α` is presented as the tape `α#^∞` of two-cell
//! symbols: data bit `b` is the cell pair `1b` and `#` is `00`. CPY stops at
//! the first `#`; FLD gets stuck on it.
//!
//! Step costs: one per program bit read, one per instruction dispatch, one
//! per output bit written (DUP costs one plus the current output length),
//! two per auxiliary symbol read.

mod cache;
mod enumerate;
mod interp;

use serde::{Deserialize, Serialize};

use crate::codec::BitString;

pub use cache::{load_or_build, sha256_hex, CacheError, CachedEnumeration};
pub use enumerate::{enumerate_halting, Enumeration};
pub use interp::{run, Instr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MachineConfig {
    pub max_program_len: usize,
    pub fuel: u64,
}

impl MachineConfig {
    pub const FIXTURE: MachineConfig = MachineConfig { max_program_len: 14, fuel: 2048 };
    pub const EXTENDED: MachineConfig = MachineConfig { max_program_len: 16, fuel: 4096 };

    pub fn new(max_program_len: usize, fuel: u64) -> Self {
        assert!(max_program_len >= 1 && fuel >= 1, "degenerate machine config");
        assert!(max_program_len < 40, "program space too large to enumerate");
        Self { max_program_len, fuel }
    }

    pub fn with_fuel(self, fuel: u64) -> Self {
        Self::new(self.max_program_len, fuel)
    }

    pub fn with_max_len(self, max_program_len: usize) -> Self {
        Self::new(max_program_len, self.fuel)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecOutcome {
    Halted { output: BitString, bits_read: usize, steps: u64 },
    OutOfFuel,
    NeedsMoreInput,
    Stuck,
}

impl ExecOutcome {
    pub fn output(&self) -> Option<&BitString> {
        match self {
            ExecOutcome::Halted { output, .. } => Some(output),
            _ => None,
        }
    }

    pub fn is_halted(&self) -> bool {
        matches!(self, ExecOutcome::Halted { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProgramRecord {
    pub program: BitString,
    pub output: BitString,
    pub steps: u64,
    pub aux: BitString,
}

impl ProgramRecord {
    pub fn len(&self) -> usize {
        self.program.len()
    }

    pub fn is_empty(&self) -> bool {
        self.program.is_empty()
    }
}

/// Program builders for the opcode table, used by calibration and tests.
pub mod asm {
    use crate::codec::{encode_nat, encode_self_delim, BitString};

    pub fn fin(y: &BitString) -> BitString {
        BitString::from("1").concat(&encode_self_delim(y))
    }

    pub fn halt() -> BitString {
        "000".into()
    }

    pub fn lit(y: &BitString) -> BitString {
        BitString::from("001").concat(&encode_self_delim(y))
    }

    pub fn rep(n: u64, body: &BitString) -> BitString {
        BitString::from("0100").concat(&encode_nat(n)).concat(body)
    }

    pub fn cpy() -> BitString {
        "0101".into()
    }

    pub fn fld() -> BitString {
        "0110".into()
    }

    pub fn dup() -> BitString {
        "01110".into()
    }

    pub fn lp(body: &BitString) -> BitString {
        BitString::from("011110").concat(body)
    }

    pub fn bra(i: &BitString, j: &BitString) -> BitString {
        BitString::from("0111110").concat(i).concat(j)
    }

    pub fn seq(parts: &[BitString]) -> BitString {
        parts.iter().fold(BitString::new(), |acc, p| acc.concat(p))
    }
}
