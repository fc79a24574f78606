use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use ait_core::codec::{BitString, PrefixFreeSet};
use ait_core::complexity::Estimator;
use ait_core::harness::{calibrate, run_all, run_experiment, Lab, Settings};
use ait_core::leftward::{border_prefix, omega_pair};
use ait_core::machine::{enumerate_halting, load_or_build, run, MachineConfig};
use ait_core::measures::{
    deficiency, format_weight, hitting_vector, stochasticity, ElementaryMeasure, MeasureKind, Scoring, StochBounds,
};
use ait_core::monotone::{preimage_count, NuFunction, ThetaTable};
use ait_core::predicates::{complete_extension_search, BinaryPredicate};

#[derive(Parser)]
#[command(name = "ait", version, about = "Bounded algorithmic information experiments")]
struct Cli {
    /// Longest program enumerated.
    #[arg(long, global = true)]
    max_len: Option<usize>,
    #[arg(long, global = true)]
    fuel: Option<u64>,
    /// Directory for the enumeration cache.
    #[arg(long, global = true, value_name = "DIR")]
    cache: Option<PathBuf>,
    /// Accepted for scripts; every run is deterministic and no entropy
    /// source is read either way.
    #[arg(long, global = true)]
    seedless: bool,
    /// key=value settings file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    #[command(subcommand)]
    Machine(MachineCmd),
    /// The border prefix and the omega pair.
    Border,
    /// Total halting weight.
    Omega,
    /// m_b(x) and B(b) over the left-total machine.
    Mb { b: String, x: String },
    /// Bounded prefix complexity.
    K {
        x: String,
        #[arg(long)]
        cond: Option<String>,
    },
    /// Bounded algorithmic probability.
    M {
        x: String,
        #[arg(long)]
        cond: Option<String>,
    },
    /// m of a set of strings, one per line.
    Mset { file: PathBuf },
    /// Monotone complexity of a prefix-free set, one string per line.
    Km { file: PathBuf },
    /// Randomness deficiency of a string in a measure file.
    Deficiency {
        a: String,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        cond: Option<String>,
    },
    /// Bounded stochasticity.
    Stoch {
        a: String,
        #[arg(long)]
        cond: Option<String>,
        #[arg(long)]
        max_v_len: Option<usize>,
        /// 3logk or k
        #[arg(long)]
        scoring: Option<String>,
    },
    /// Greedy hitting vector for a measure over encoded sets.
    Hitvec {
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        m: PathBuf,
        #[arg(short)]
        i: u32,
        #[arg(short)]
        c: u32,
        #[arg(short)]
        d: u32,
    },
    #[command(subcommand)]
    Nu(NuCmd),
    #[command(subcommand)]
    Predicate(PredicateCmd),
    /// Runs one experiment or all of them and prints JSONL.
    Experiment {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measures the machine constants and prints them as JSON.
    Calibrate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MachineCmd {
    /// Summary of the halting enumeration; --tsv prints every record.
    Enumerate {
        #[arg(long)]
        aux: Option<String>,
        #[arg(long)]
        tsv: bool,
    },
    Run {
        program: String,
        #[arg(long)]
        aux: Option<String>,
    },
}

#[derive(Subcommand)]
enum NuCmd {
    /// Compiles a θ table and prints the per-stage transducer JSON.
    Build { table: PathBuf },
    Apply { table: PathBuf, y: String },
    Preimage { table: PathBuf, g: PathBuf, n: usize },
}

#[derive(Subcommand)]
enum PredicateCmd {
    Complete { file: PathBuf },
}

fn bits(s: &str) -> Result<BitString> {
    if s == "ε" || s == "-" {
        return Ok(BitString::new());
    }
    s.parse().with_context(|| format!("not a bit string: {s:?}"))
}

fn cond(c: &Option<String>) -> Result<BitString> {
    c.as_deref().map_or(Ok(BitString::new()), bits)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_strings(path: &Path) -> Result<Vec<BitString>> {
    read(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(bits)
        .collect()
}

fn read_measure(path: &Path, kind: MeasureKind) -> Result<ElementaryMeasure> {
    Ok(ElementaryMeasure::parse(&read(path)?, kind)?)
}

fn measure_json(w: &ElementaryMeasure) -> Value {
    w.weights.iter().map(|(a, q)| (a.to_string(), json!(format_weight(q)))).collect::<serde_json::Map<_, _>>().into()
}

fn line(input: Value, value: Value, witness: Value) -> String {
    json!({"input": input, "value": value, "witness": witness}).to_string()
}

fn settings(cli: &Cli) -> Result<Settings> {
    let mut s = match &cli.config {
        Some(p) => Settings::parse(&read(p)?)?,
        None => Settings::default(),
    };
    let max_len = cli.max_len.unwrap_or(s.config.max_program_len);
    let fuel = cli.fuel.unwrap_or(s.config.fuel);
    if !(1..40).contains(&max_len) || fuel == 0 {
        bail!("--max-len must be in 1..40 and --fuel positive");
    }
    s.config = MachineConfig::new(max_len, fuel);
    s.stoch_max_v_len = s.stoch_max_v_len.min(max_len);
    if cli.cache.is_some() {
        s.cache_dir = cli.cache.clone();
    }
    Ok(s)
}

enum Outcome {
    Ok(Vec<String>),
    Failed(Vec<String>, String),
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let s = settings(cli)?;
    let cfg = s.config;
    let out = match &cli.cmd {
        Cmd::Machine(MachineCmd::Enumerate { aux, tsv }) => {
            let aux = cond(aux)?;
            let e = if aux.is_empty() {
                load_or_build(cfg, &aux, s.cache_dir.as_deref())?.enumeration
            } else {
                enumerate_halting(cfg, &aux)
            };
            if *tsv {
                vec![e.to_tsv().trim_end().to_string()]
            } else {
                let digest = ait_core::machine::sha256_hex(e.to_tsv().as_bytes());
                vec![line(
                    json!({"aux": aux, "max_len": cfg.max_program_len, "fuel": cfg.fuel}),
                    json!({"programs": e.len(), "kraft_sum": e.kraft_sum(), "digest": digest}),
                    Value::Null,
                )]
            }
        }
        Cmd::Machine(MachineCmd::Run { program, aux }) => {
            let p = bits(program)?;
            let outcome = run(&p, &cond(aux)?, cfg.fuel);
            vec![line(json!({"program": p, "aux": cond(aux)?}), json!(outcome), Value::Null)]
        }
        Cmd::Border | Cmd::Omega => {
            let lab = Lab::new(s)?;
            let b = border_prefix(&lab.domain);
            let (omega, left) = omega_pair(&b, &lab.domain);
            let value = match cli.cmd {
                Cmd::Border => json!({"border_prefix": b.bits, "omega": omega, "omega_left": left}),
                _ => json!(omega),
            };
            vec![line(json!({"max_len": cfg.max_program_len, "fuel": cfg.fuel}), value, Value::Null)]
        }
        Cmd::Mb { b, x } => {
            let lab = Lab::new(s)?;
            let (b, x) = (bits(b)?, bits(x)?);
            if b.len() > cfg.max_program_len {
                bail!("b is longer than --max-len");
            }
            let value = json!({"m_b": lab.domain.m_b(&b, &x), "bb": lab.domain.bb(&b), "total": lab.domain.is_total(&b)});
            vec![line(json!({"b": b, "x": x}), value, Value::Null)]
        }
        Cmd::K { x, cond: c } => {
            let lab = Lab::new(s)?;
            let (x, y) = (bits(x)?, cond(c)?);
            let k = lab.est.k(&x, &y);
            vec![line(json!({"x": x, "cond": y}), json!(k.value), json!(k.witness))]
        }
        Cmd::M { x, cond: c } => {
            let lab = Lab::new(s)?;
            let (x, y) = (bits(x)?, cond(c)?);
            vec![line(json!({"x": x, "cond": y}), json!(lab.est.m(&x, &y)), Value::Null)]
        }
        Cmd::Mset { file } => {
            let lab = Lab::new(s)?;
            let d = read_strings(file)?;
            let set: BTreeSet<BitString> = d.into_iter().collect();
            vec![line(json!(set), json!(lab.est.m_set(set.iter(), &BitString::new())), Value::Null)]
        }
        Cmd::Km { file } => {
            let lab = Lab::new(s)?;
            let g = PrefixFreeSet::new(read_strings(file)?)?;
            let km = lab.est.km(&g);
            vec![line(json!(g.members()), json!(km.value), json!(km.witness))]
        }
        Cmd::Deficiency { a, measure, cond: c } => {
            let lab = Lab::new(s)?;
            let w = read_measure(measure, MeasureKind::Probability)?;
            let (a, y) = (bits(a)?, cond(c)?);
            let d = deficiency(&a, &w, &y, &lab.est)?;
            vec![line(json!({"a": a, "cond": y, "measure": measure_json(&w)}), json!(d), Value::Null)]
        }
        Cmd::Stoch { a, cond: c, max_v_len, scoring } => {
            let scoring = match scoring.as_deref() {
                None => s.scoring,
                Some("3logk") => Scoring::ThreeLogK,
                Some("k") => Scoring::Linear,
                Some(other) => bail!("unknown scoring {other}; use 3logk or k"),
            };
            let bounds = StochBounds { max_v_len: max_v_len.unwrap_or(s.stoch_max_v_len), scoring };
            let lab = Lab::new(s)?;
            let (a, y) = (bits(a)?, cond(c)?);
            let r = stochasticity(&a, &y, bounds, &lab.est)?;
            vec![line(
                json!({"a": a, "cond": y, "max_v_len": bounds.max_v_len, "scoring": scoring}),
                json!(r.value),
                json!({"program": r.witness_program, "measure": measure_json(&r.witness_measure), "deficiency": r.deficiency}),
            )]
        }
        Cmd::Hitvec { q, m, i, c, d } => {
            let q = read_measure(q, MeasureKind::Probability)?;
            let m = read_measure(m, MeasureKind::Semimeasure)?;
            let z = hitting_vector(&q, &m, *i, *c, *d)?;
            vec![line(json!({"i": i, "c": c, "d": d}), json!(z), Value::Null)]
        }
        Cmd::Nu(cmd) => {
            let table = match cmd {
                NuCmd::Build { table } | NuCmd::Apply { table, .. } | NuCmd::Preimage { table, .. } => table,
            };
            let nu = NuFunction::build(&ThetaTable::parse(&read(table)?)?)?;
            match cmd {
                NuCmd::Build { .. } => vec![nu.transducer.to_json()],
                NuCmd::Apply { y, .. } => {
                    let y = bits(y)?;
                    vec![line(json!({"y": y}), json!(nu.transducer.apply(&y)?), Value::Null)]
                }
                NuCmd::Preimage { g, n, .. } => {
                    let g = PrefixFreeSet::new(read_strings(g)?)?;
                    let count = preimage_count(&nu, &g, *n)?;
                    vec![line(json!({"g": g.members(), "n": n}), json!(count), Value::Null)]
                }
            }
        }
        Cmd::Predicate(PredicateCmd::Complete { file }) => {
            let g = BinaryPredicate::parse(&read(file)?)?;
            let est = Estimator::from_cached(load_or_build(cfg, &BitString::new(), s.cache_dir.as_deref())?);
            let r = complete_extension_search(&g, &est)?;
            vec![line(
                json!({"predicate": g.pairs(), "max_len": cfg.max_program_len, "fuel": cfg.fuel}),
                json!({"program": r.program, "output": r.raw_output, "slack": r.bound_slack}),
                json!(r.extension_rule),
            )]
        }
        Cmd::Experiment { name, out } => {
            let lab = Lab::new(s)?;
            let reports = if name == "all" { run_all(&lab)? } else { vec![run_experiment(&lab, name)?] };
            let text: String = reports.iter().map(|r| r.to_jsonl()).collect();
            if let Some(path) = out {
                fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            }
            let lines: Vec<String> = text.lines().map(str::to_string).collect();
            let failed = reports.iter().flat_map(|r| r.failures()).next();
            if let Some(rec) = failed {
                return Ok(Outcome::Failed(lines, serde_json::to_string(rec)?));
            }
            lines
        }
        Cmd::Calibrate { out } => {
            let lab = Lab::new(s)?;
            let text = calibrate(&lab).to_json();
            if let Some(path) = out {
                fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            }
            vec![text.trim_end().to_string()]
        }
    };
    Ok(Outcome::Ok(out))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(Outcome::Ok(lines)) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Ok(Outcome::Failed(lines, first)) => {
            for l in lines {
                println!("{l}");
            }
            eprintln!("assertion failed: {first}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
