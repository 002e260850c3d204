// SPDX-License-Identifier: Apache-2.0

//! `ringcirc`: evaluate, translate, lower and check circuits and formulas.
//!
//! Failures print `{"error": {"kind": ..., "message": ...}}` on stderr and
//! exit with status 1; malformed command lines exit with status 2.

mod error;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use ringcirc::algebra::{Domain, DomainValue};
use ringcirc::circuit::{balance, io, pad_and_number, Circuit};
use ringcirc::compile::{circuit_to_gfr, compile_formula, roundtrip_check, CompileError, CompileOptions};
use ringcirc::frontend::{parse_formula, parse_structure, print_formula, template_for, write_structure};
use ringcirc::logic::{eval_formula_with, EvalOptions, Formula};
use ringcirc::numeric::{countdown_table, digit_halving_countdown, seq_d, seq_d_table};
use ringcirc::simulate::{check_simulation, lower, LowerOptions, SimulationMap};

use error::CliError;

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "ringcirc", version, about = "Algebraic circuits and first-order logic with recursion")]
struct Cli {
    /// Seed for every randomized check.
    #[arg(long, global = true, env = "RINGCIRC_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a circuit on input values given in its domain's notation.
    EvalCircuit {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(allow_negative_numbers = true)]
        inputs: Vec<String>,
    },
    /// Evaluate a sentence on a structure file.
    EvalFormula {
        /// Formula text if it starts with '(' or is true/false, otherwise a file.
        #[arg(long)]
        formula: String,
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        no_memo: bool,
        #[arg(long)]
        no_prune: bool,
        #[arg(long)]
        depth_cap: Option<usize>,
        /// Print recursion statistics as JSON.
        #[arg(long)]
        stats: bool,
    },
    /// Compile a sentence into a circuit.
    Compile {
        #[arg(long)]
        formula: String,
        /// Universe size; read from --structure when given.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value = "Z")]
        domain: String,
        /// Template structure supplying skeleton and auxiliary functions.
        #[arg(long)]
        structure: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Describe a normalized circuit as a structure plus a recursion sentence.
    ToGfr {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        cfac: usize,
        #[arg(long)]
        exp: usize,
        /// Balance and number the circuit first.
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        formula_out: Option<PathBuf>,
        #[arg(long)]
        structure_out: Option<PathBuf>,
    },
    /// Pad every input-to-gate path to the same length.
    Balance {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Balance, pad to the normal-form depth and assign gate numbers.
    Normalize {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        cfac: usize,
        #[arg(long)]
        exp: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower a circuit to another domain.
    Lower {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
    /// Compare a circuit with its lowering on sampled inputs.
    CheckSim {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        dst: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        mag: i64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the sequence d(n, c, i) as a table.
    SeqD {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: usize,
        #[arg(long)]
        i: usize,
    },
    /// Print the digit-halving countdown as a table; the step count goes to stderr.
    Countdown {
        #[arg(long)]
        base: usize,
        /// Digits, most significant first: "444", or "1,12,0" for bases above 10.
        #[arg(long)]
        start: String,
    },
    /// Compare a sentence with its compiled circuits on sampled inputs.
    Roundtrip {
        #[arg(long)]
        formula: String,
        /// Universe sizes: "2..6" (inclusive) or "2,3,5".
        #[arg(long, default_value = "2..4")]
        sizes: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value = "Z")]
        domain: String,
        #[arg(long, default_value_t = 3)]
        mag: i64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Render a circuit in Graphviz DOT.
    ExportDot {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    Ok(io::from_json(&read(path)?)?)
}

fn load_formula(arg: &str) -> Result<Formula> {
    let inline = arg.trim_start().starts_with('(') || matches!(arg.trim(), "true" | "false");
    let text = if inline {
        arg.to_string()
    } else {
        read(Path::new(arg))?
    };
    Ok(parse_formula(&text).map_err(ringcirc::frontend::FrontendError::from)?)
}

fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let bad = || CliError::usage(format!("bad size list {text:?}; use \"2..6\" or \"2,3,5\""));
    let sizes: Vec<usize> = match text.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            (a..=b).collect()
        }
        None => text
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?,
    };
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(bad());
    }
    Ok(sizes)
}

fn parse_digits(text: &str) -> Result<Vec<usize>> {
    let bad = || CliError::usage(format!("bad digit string {text:?}"));
    if text.contains(',') {
        text.split(',').map(|d| d.trim().parse().map_err(|_| bad())).collect()
    } else {
        text.chars().map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad)).collect()
    }
}

fn json_text(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("value serializes") + "\n"
}

fn run(cli: Cli) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    match cli.command {
        Command::EvalCircuit { circuit, inputs } => {
            let c = load_circuit(&circuit)?;
            let d = c.domain();
            let x = inputs
                .iter()
                .map(|t| d.parse_value(t))
                .collect::<std::result::Result<Vec<DomainValue>, _>>()?;
            let out: Vec<String> = c.evaluate(&x)?.iter().map(|v| d.render(v)).collect();
            println!("{}", out.join(" "));
        }
        Command::EvalFormula {
            formula,
            structure,
            no_memo,
            no_prune,
            depth_cap,
            stats,
        } => {
            let f = load_formula(&formula)?;
            let s = parse_structure(&read(&structure)?)?;
            let opts = EvalOptions {
                memoize: !no_memo,
                prune: !no_prune,
                depth_cap,
                ..EvalOptions::default()
            };
            let (value, st) = eval_formula_with(&s, &[], &f, opts)?;
            if stats {
                let gfr: Vec<_> = st
                    .gfr
                    .iter()
                    .map(|g| {
                        json!({"name": g.name, "calls": g.calls, "memo_hits": g.memo_hits,
                               "max_depth": g.max_depth, "max_nd_depth": g.max_nd_depth, "cap": g.cap})
                    })
                    .collect();
                print!("{}", json_text(&json!({"value": value, "gfr": gfr})));
            } else {
                println!("{value}");
            }
        }
        Command::Compile {
            formula,
            size,
            domain,
            structure,
            out,
        } => {
            let f = load_formula(&formula)?;
            let template = match structure {
                Some(p) => {
                    let s = parse_structure(&read(&p)?)?;
                    if size.is_some_and(|n| n != s.size()) {
                        return Err(CliError::usage(format!("--size disagrees with the structure's size {}", s.size())));
                    }
                    s
                }
                None => {
                    let n = size.ok_or_else(|| CliError::usage("compile needs --size or --structure".into()))?;
                    template_for(&f, &Domain::parse(&domain)?, n)?
                }
            };
            let compiled = compile_formula(&f, &template, &CompileOptions::default())?;
            emit(out.as_deref(), &io::to_json(&compiled.circuit))?;
            if out.is_some() {
                let inputs: Vec<_> = compiled.layout.symbols.iter().map(|(s, a)| json!({"symbol": s, "arity": a})).collect();
                print!(
                    "{}",
                    json_text(&json!({"gates": compiled.circuit.size(), "depth": compiled.circuit.depth(),
                                      "universe": compiled.layout.n, "inputs": inputs}))
                );
            }
        }
        Command::ToGfr {
            circuit,
            cfac,
            exp,
            normalize,
            formula_out,
            structure_out,
        } => {
            let mut c = load_circuit(&circuit)?;
            if normalize {
                c = pad_and_number(&c, cfac, exp)?.circuit;
            }
            let (desc, f) = circuit_to_gfr(&c, cfac, exp)?;
            emit(formula_out.as_deref(), &print_formula(&f))?;
            emit(structure_out.as_deref(), &write_structure(&desc.structure))?;
        }
        Command::Balance { circuit, out } => {
            let c = load_circuit(&circuit)?;
            emit(out.as_deref(), &io::to_json(&balance(&c)))?;
        }
        Command::Normalize { circuit, cfac, exp, out } => {
            let c = load_circuit(&circuit)?;
            let nf = pad_and_number(&c, cfac, exp)?;
            emit(out.as_deref(), &io::to_json(&nf.circuit))?;
        }
        Command::Lower {
            circuit,
            from,
            to,
            out,
            map_out,
        } => {
            let c = load_circuit(&circuit)?;
            let from = Domain::parse(&from)?;
            if &from != c.domain() {
                return Err(CliError::usage(format!("--from {from} but the circuit is over {}", c.domain())));
            }
            let l = lower(&c, &Domain::parse(&to)?, &LowerOptions::default())?;
            emit(out.as_deref(), &io::to_json(&l.circuit))?;
            if out.is_some() {
                // Tree-lowered multiplications cost extra depth.
                print!(
                    "{}",
                    json_text(&json!({"width": l.map.width, "gates": l.circuit.size(), "depth": l.circuit.depth(),
                                      "tree_muls": l.tree_muls}))
                );
            }
            if let Some(p) = map_out {
                emit(Some(&p), &l.map.to_json())?;
            }
        }
        Command::CheckSim {
            map,
            src,
            dst,
            samples,
            mag,
            report,
        } => {
            let m = SimulationMap::from_json(&read(&map)?).map_err(|e| CliError::new("simulate", e))?;
            let (s, d) = (load_circuit(&src)?, load_circuit(&dst)?);
            let r = check_simulation(&m, &s, &d, None, samples, mag, &mut rng)?;
            let mut v = serde_json::to_value(&r).expect("report serializes");
            v["passes"] = json!(r.passes());
            v["seed"] = json!(cli.seed);
            emit(report.as_deref(), &json_text(&v))?;
        }
        Command::SeqD { n, c, i } => print!("{}", seq_d_table(&seq_d(n, c, i)?)),
        Command::Countdown { base, start } => {
            let cd = digit_halving_countdown(base, &parse_digits(&start)?)?;
            print!("{}", countdown_table(&cd));
            eprintln!("{} steps", cd.steps());
        }
        Command::Roundtrip {
            formula,
            sizes,
            samples,
            domain,
            mag,
            report,
        } => {
            let f = load_formula(&formula)?;
            let d = Domain::parse(&domain)?;
            let sizes = parse_sizes(&sizes)?;
            let template = |n| template_for(&f, &d, n).map_err(|e| CompileError::Precondition(e.to_string()));
            let r = roundtrip_check(&f, template, &sizes, samples, mag, &mut rng, &CompileOptions::default())?;
            let mut v = serde_json::to_value(&r).expect("report serializes");
            v["all_agree"] = json!(r.all_agree());
            v["seed"] = json!(cli.seed);
            emit(report.as_deref(), &json_text(&v))?;
        }
        Command::ExportDot { circuit, out } => {
            let c = load_circuit(&circuit)?;
            emit(out.as_deref(), &io::to_dot(&c))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            CliError::usage(e.render().to_string().trim_end().to_string()).print();
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.print();
            ExitCode::from(if e.kind == "usage" { 2 } else { 1 })
        }
    }
}
