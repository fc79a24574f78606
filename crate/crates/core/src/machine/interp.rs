use crate::codec::BitString;

use super::ExecOutcome;

/// One decoded instruction. Bodies of `Rep`, `Loop` and `Bra` are decoded
/// once, when the enclosing instruction is read, and may run many times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr {
    Fin(BitString),
    Halt,
    Lit(BitString),
    Rep(u64, Box<Instr>),
    Cpy,
    Fld,
    Dup,
    Loop(Box<Instr>),
    Bra(Box<Instr>, Box<Instr>),
}

enum Stop {
    Halt,
    NeedsInput,
    OutOfFuel,
    Stuck,
}

#[derive(Clone, Copy)]
enum AuxSymbol {
    Data(bool),
    End,
}

struct Vm<'a> {
    program: &'a [bool],
    pos: usize,
    aux: &'a [bool],
    aux_pos: usize,
    output: Vec<bool>,
    steps: u64,
    fuel: u64,
}

impl<'a> Vm<'a> {
    fn tick(&mut self, n: u64) -> Result<(), Stop> {
        if self.steps + n > self.fuel {
            return Err(Stop::OutOfFuel);
        }
        self.steps += n;
        Ok(())
    }

    fn read_bit(&mut self) -> Result<bool, Stop> {
        self.tick(1)?;
        let b = *self.program.get(self.pos).ok_or(Stop::NeedsInput)?;
        self.pos += 1;
        Ok(b)
    }

    fn read_field(&mut self) -> Result<Vec<bool>, Stop> {
        let mut n = 0usize;
        while self.read_bit()? {
            n += 1;
        }
        (0..n).map(|_| self.read_bit()).collect()
    }

    fn read_aux(&mut self) -> Result<AuxSymbol, Stop> {
        // Each symbol occupies two tape cells: 1b for a data bit b, 00 for #.
        self.tick(2)?;
        let sym = match self.aux.get(self.aux_pos) {
            Some(&b) => AuxSymbol::Data(b),
            None => AuxSymbol::End,
        };
        self.aux_pos += 1;
        Ok(sym)
    }

    fn read_aux_bit(&mut self) -> Result<bool, Stop> {
        match self.read_aux()? {
            AuxSymbol::Data(b) => Ok(b),
            AuxSymbol::End => Err(Stop::Stuck),
        }
    }

    fn emit(&mut self, bits: &[bool]) -> Result<(), Stop> {
        self.tick(bits.len() as u64)?;
        self.output.extend_from_slice(bits);
        Ok(())
    }

    fn decode(&mut self) -> Result<Instr, Stop> {
        if self.read_bit()? {
            return Ok(Instr::Fin(BitString::from_bits(self.read_field()?)));
        }
        if !self.read_bit()? {
            return Ok(if self.read_bit()? {
                Instr::Lit(BitString::from_bits(self.read_field()?))
            } else {
                Instr::Halt
            });
        }
        if !self.read_bit()? {
            if self.read_bit()? {
                return Ok(Instr::Cpy);
            }
            let n = self.read_field()?;
            if n.len() > 64 {
                return Err(Stop::Stuck);
            }
            let n = n.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
            return Ok(Instr::Rep(n, Box::new(self.decode()?)));
        }
        if !self.read_bit()? {
            return Ok(Instr::Fld);
        }
        if !self.read_bit()? {
            return Ok(Instr::Dup);
        }
        if !self.read_bit()? {
            return Ok(Instr::Loop(Box::new(self.decode()?)));
        }
        if !self.read_bit()? {
            let i = self.decode()?;
            let j = self.decode()?;
            return Ok(Instr::Bra(Box::new(i), Box::new(j)));
        }
        Err(Stop::Stuck)
    }

    fn exec(&mut self, instr: &Instr) -> Result<(), Stop> {
        self.tick(1)?;
        match instr {
            Instr::Fin(y) => {
                self.emit(y.bits())?;
                Err(Stop::Halt)
            }
            Instr::Halt => Err(Stop::Halt),
            Instr::Lit(y) => self.emit(y.bits()),
            Instr::Rep(n, body) => {
                for _ in 0..*n {
                    self.exec(body)?;
                }
                Ok(())
            }
            Instr::Cpy => loop {
                match self.read_aux()? {
                    AuxSymbol::Data(b) => self.emit(&[b])?,
                    AuxSymbol::End => return Ok(()),
                }
            },
            Instr::Fld => {
                let mut n = 0usize;
                while self.read_aux_bit()? {
                    n += 1;
                }
                for _ in 0..n {
                    let b = self.read_aux_bit()?;
                    self.emit(&[b])?;
                }
                Ok(())
            }
            Instr::Dup => {
                self.tick(self.output.len() as u64)?;
                self.output.extend_from_within(..);
                Ok(())
            }
            Instr::Loop(body) => loop {
                self.exec(body)?;
            },
            Instr::Bra(i, j) => match self.read_aux()? {
                AuxSymbol::Data(true) => self.exec(i),
                _ => self.exec(j),
            },
        }
    }
}

/// Runs `program` with auxiliary string `aux` for at most `fuel` steps.
///
/// The program is read one bit at a time as instructions are decoded, so
/// the result depends only on the bits actually consumed.
pub fn run(program: &BitString, aux: &BitString, fuel: u64) -> ExecOutcome {
    let mut vm = Vm {
        program: program.bits(),
        pos: 0,
        aux: aux.bits(),
        aux_pos: 0,
        output: Vec::new(),
        steps: 0,
        fuel,
    };
    let stop = loop {
        let instr = match vm.decode() {
            Ok(i) => i,
            Err(e) => break e,
        };
        if let Err(e) = vm.exec(&instr) {
            break e;
        }
    };
    match stop {
        Stop::Halt => ExecOutcome::Halted {
            output: BitString::from_bits(vm.output),
            bits_read: vm.pos,
            steps: vm.steps,
        },
        Stop::NeedsInput => ExecOutcome::NeedsMoreInput,
        Stop::OutOfFuel => ExecOutcome::OutOfFuel,
        Stop::Stuck => ExecOutcome::Stuck,
    }
}
