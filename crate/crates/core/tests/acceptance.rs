// SPDX-License-Identifier: Apache-2.0

//! The acceptance suite: one PASS/FAIL line per criterion, nonzero exit on
//! any failure. Run with `cargo test -p ringcirc --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ringcirc::algebra::{BaseKind, Domain, DomainValue};
use ringcirc::circuit::random::{random_circuit, random_inputs, RandomCircuitSpec};
use ringcirc::circuit::{balance, pad_and_number, CircuitBuilder, FanIn, GateKind};
use ringcirc::compile::{circuit_to_gfr, roundtrip_check, CompileOptions};
use ringcirc::frontend::template_for;
use ringcirc::logic::random::{random_sentence, RandomFormulaSpec};
use ringcirc::logic::{eval_formula_with, EvalOptions};
use ringcirc::numeric::{
    countdown_table, digit_halving_countdown, fo_half_leq, numval, seq_d, seq_d_table, shrink_steps, DElement,
};
use ringcirc::simulate::{lower, LowerOptions};

use common::{build, gfr_agrees, mul_gadget_vs_expansion, normalize, path_lengths, small_grid, small_programs};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

const SEQ_812_TABLE: &str = "\
l\\i | 1 | 2
1 | 11 | 11
2 | 11 | 01
3 | 11 | 00
4 | 01 | 11
5 | 01 | 01
6 | 01 | 00
7 | 00 | 11
8 | 00 | 01
9 | 00 | 00
";

fn c1_sequence_table() -> Outcome {
    let t = seq_d_table(&seq_d(8, 1, 2).map_err(err)?);
    ensure!(t == SEQ_812_TABLE, "d(8,1,2) table differs:\n{t}");
    let s = seq_d(8, 2, 2).map_err(err)?;
    ensure!(s.len() == 36, "d(8,2,2) has {} rows", s.len());
    let row = |k: usize| s[k - 1].to_string();
    for (k, want) in [(1, "(11111,11111)"), (7, "(01111,11111)"), (36, "(00000,00000)")] {
        ensure!(row(k) == want, "row {k} is {}, want {want}", row(k));
    }
    Ok("9 rows byte-exact; 36 rows with rows 1, 7, 36 as listed".into())
}

const COUNTDOWN_FIRST_COLUMN: [&str; 16] = [
    "444", "442", "441", "440", "424", "422", "421", "420", "414", "412", "411", "410", "404", "402", "401", "400",
];

fn c2_countdown() -> Outcome {
    let cd = digit_halving_countdown(5, &[4, 4, 4]).map_err(err)?;
    ensure!(cd.steps() == 63, "{} steps", cd.steps());
    let table = countdown_table(&cd);
    let first: Vec<&str> = table.lines().map(|l| l.split(' ').next().unwrap_or("")).collect();
    ensure!(first == COUNTDOWN_FIRST_COLUMN, "first column {first:?}");
    ensure!(table.lines().last() == Some("400 200 100 000"), "last row {:?}", table.lines().last());
    Ok("63 steps; first column 444, 442, 441, 440, 424, ...".into())
}

fn c3_gfr_depth() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut evals = 0;
    let mut report = Vec::new();
    for n in [4usize, 8, 16] {
        for i in [1usize, 2] {
            let log = n.ilog2() as usize;
            let bound = (log + 2).pow(i as u32) - 1;
            let mut worst = 0;
            let mut circuits = 0;
            let mut tries = 0;
            while circuits < 3 {
                tries += 1;
                ensure!(tries < 2000, "no circuit fits n={n}, i={i}");
                let spec = RandomCircuitSpec {
                    n_inputs: n,
                    n_internal: rng.gen_range(1..=2 * log.pow(i as u32)),
                    ..RandomCircuitSpec::new(Domain::integers())
                };
                let Ok(nf) = pad_and_number(&balance(&random_circuit(&mut rng, &spec)), 1, i) else {
                    continue;
                };
                circuits += 1;
                let (desc, f) = circuit_to_gfr(&nf.circuit, 1, i).map_err(err)?;
                for _ in 0..4 {
                    let x = random_inputs(&mut rng, &nf.circuit, 2);
                    let s = desc.with_input(&x).map_err(err)?;
                    let (truth, stats) = eval_formula_with(&s, &[], &f, EvalOptions::default()).map_err(err)?;
                    let want = nf.circuit.domain().is_one(&nf.circuit.evaluate(&x).map_err(err)?[0]);
                    ensure!(truth == want, "n={n}, i={i}: sentence {truth}, circuit {want}");
                    let depth = stats.max_depth();
                    ensure!(depth <= bound, "n={n}, i={i}: depth {depth} > {bound}");
                    worst = worst.max(depth);
                    evals += 1;
                }
            }
            report.push(format!("n={n} i={i}: {worst}<={bound}"));
        }
    }
    Ok(format!("{evals} evaluations; {}", report.join(", ")))
}

fn c4_formula_to_circuit() -> Outcome {
    let spec = RandomFormulaSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = Domain::integers();
    let mut cases = 0;
    for k in 0..100 {
        let f = random_sentence(&mut rng, &spec);
        let rep = roundtrip_check(
            &f,
            |n| Ok(template_for(&f, &d, n).expect("template")),
            &[2, 3, 4],
            5,
            2,
            &mut rng,
            &CompileOptions::default(),
        )
        .map_err(|e| format!("formula {k}: {e}"))?;
        ensure!(rep.all_agree(), "formula {k} disagrees: {rep:?}");
        let depths: Vec<usize> = rep.sizes.iter().map(|s| s.circuit_depth).collect();
        ensure!(depths.windows(2).all(|w| w[0] == w[1]), "formula {k}: depths {depths:?}");
        cases += rep.sizes.iter().map(|s| s.samples).sum::<usize>();
    }
    Ok(format!("100 formulas, {cases} cases, depth constant in n"))
}

fn c5_circuit_to_gfr() -> Outcome {
    let grid = small_grid();
    let progs = small_programs();
    for p in &progs {
        let c = build(p);
        ensure!(c.size() <= 6, "{} gates", c.size());
        let nf = normalize(&c, 1).ok_or("no normal form")?;
        gfr_agrees(&nf, &grid).map_err(|e| format!("{e} on {p:?}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    while done < 50 {
        let spec = RandomCircuitSpec {
            n_inputs: rng.gen_range(2..=4),
            n_internal: rng.gen_range(2..=8),
            ..RandomCircuitSpec::new(Domain::integers())
        };
        let nf = normalize(&random_circuit(&mut rng, &spec), 1).ok_or("no normal form")?;
        if nf.circuit.size() > 40 {
            continue;
        }
        let n = nf.circuit.inputs().len();
        let xs: Vec<Vec<i64>> = (0..10).map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        gfr_agrees(&nf, &xs)?;
        done += 1;
    }
    Ok(format!(
        "{} small circuits x {} inputs, 50 random normalized x 10",
        progs.len(),
        grid.len()
    ))
}

fn c6_adjoined() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in [2, 3] {
        let d = Domain::adjoined(BaseKind::Integer, k).map_err(err)?;
        for _ in 0..50 {
            let spec = RandomCircuitSpec {
                n_inputs: rng.gen_range(1..=3),
                n_internal: rng.gen_range(1..=12),
                max_arity: 6,
                max_degree: 6,
                ..RandomCircuitSpec::new(d.clone())
            };
            let c = random_circuit(&mut rng, &spec);
            let l = lower(&c, &Domain::integers(), &LowerOptions::default()).map_err(err)?;
            for _ in 0..10 {
                let x = random_inputs(&mut rng, &c, 3);
                let mut want = Vec::new();
                for v in c.evaluate(&x).map_err(err)? {
                    want.extend(l.map.apply(&v).map_err(err)?);
                }
                let got = l.circuit.evaluate(&l.map.apply_all(&x).map_err(err)?).map_err(err)?;
                ensure!(got == want, "Z[j{k}] circuit disagrees at {x:?}");
            }
        }
    }
    let pairs = mul_gadget_vs_expansion(2, 3)?;
    Ok(format!("100 circuits x 10 inputs; {pairs} coefficient pairs"))
}

fn c7_finite() -> Outcome {
    let f3 = Domain::finite_field(3).map_err(err)?;
    let f2 = Domain::finite_field(2).map_err(err)?;
    for (name, op) in [("add", 0), ("mul", 1)] {
        let mut b = CircuitBuilder::new(f3.clone(), FanIn::Unbounded);
        let x = b.input();
        let y = b.input();
        let g = if op == 0 { b.add(vec![x, y]) } else { b.mul(vec![x, y]) };
        b.output(g);
        let l = lower(&b.finish().map_err(err)?, &f2, &LowerOptions::default()).map_err(err)?;
        for a in 0..3u64 {
            for c in 0..3u64 {
                let want = if op == 0 { (a + c) % 3 } else { a * c % 3 };
                let bits = |r: u64| [DomainValue::Mod(r / 2), DomainValue::Mod(r % 2)];
                let x: Vec<DomainValue> = bits(a).into_iter().chain(bits(c)).collect();
                let got = l.circuit.evaluate(&x).map_err(err)?;
                ensure!(got == bits(want), "{name}({a}, {c}) = {got:?}");
            }
        }
    }
    Ok("add and mul tables, 9 pairs each".into())
}

fn c8_sign_order() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for d in [Domain::integers(), Domain::rationals()] {
        for _ in 0..1000 {
            let mut draw = || match d.name().as_str() {
                "Z" => DomainValue::int(rng.gen_range(-20..=20)),
                _ => DomainValue::rat(rng.gen_range(-20..=20), rng.gen_range(1..=6)),
            };
            let (x, y) = (draw(), draw());
            let lt = d.lt(&x, &y).map_err(err)?;
            let two = d.from_i64(2);
            let s = d.sign(&d.sub(&y, &x).map_err(err)?).map_err(err)?;
            let t = d.add(&two, &d.sign(&d.sub(&x, &y).map_err(err)?).map_err(err)?).map_err(err)?;
            let rhs = d.sign(&d.mul(&s, &t).map_err(err)?).map_err(err)?;
            ensure!(lt == d.is_one(&rhs), "{} at ({x:?}, {y:?})", d.name());
        }
    }
    Ok("2000 pairs, no violations".into())
}

fn c9_half_leq() -> Outcome {
    let mut checked = 0;
    for base in 2..=6usize {
        for len in 1..=3usize {
            let tuples: Vec<Vec<usize>> = (0..base.pow(len as u32))
                .map(|mut v| {
                    let mut t = vec![0; len];
                    for s in t.iter_mut().rev() {
                        *s = v % base;
                        v /= base;
                    }
                    t
                })
                .collect();
            for x in &tuples {
                for y in &tuples {
                    let want = numval(x, base).map_err(err)? * 2u32 <= numval(y, base).map_err(err)?;
                    ensure!(fo_half_leq(x, y, base).map_err(err)? == want, "base {base}: {x:?}, {y:?}");
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} pairs"))
}

fn c10_shrink() -> Outcome {
    for n in [2u64, 4, 8, 16] {
        for i in [1u32, 2, 3] {
            let m = n.trailing_zeros() as i64;
            let steps = m.pow(i);
            ensure!(shrink_steps(n, i).map_err(err)? == steps as u64, "n={n}, i={i}");
            // log2 of n * alpha^steps, with log2 alpha = -m / steps.
            let log_alpha = BigRational::new(BigInt::from(-m), BigInt::from(steps));
            let total = BigRational::from_integer(BigInt::from(m)) + log_alpha * BigInt::from(steps);
            ensure!(total.is_zero(), "n={n}, i={i}: exponent {total}");
            if i == 1 {
                let alpha = BigRational::new(BigInt::one(), BigInt::from(2));
                let mut v = BigRational::from_integer(BigInt::from(n));
                for _ in 0..steps {
                    v *= &alpha;
                }
                ensure!(v.is_one(), "n={n}: dyadic product {v}");
            }
        }
    }
    Ok("12 (n, i) pairs exact".into())
}

/// Prefix digits of one sequence element: block `j` with `m` ones holds
/// `2^m - 1` in `cfac` base-`n` digits, most significant first.
fn prefix_of(e: &DElement, n: usize, cfac: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for b in &e.blocks {
        let ones = b.bits().iter().filter(|x| **x).count();
        let mut v = (1usize << ones) - 1;
        let mut ds = vec![0; cfac];
        for d in ds.iter_mut().rev() {
            *d = v % n;
            v /= n;
        }
        out.extend(ds);
    }
    out
}

fn c11_balance_normal_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut normalized = 0;
    for k in 0..100 {
        let spec = RandomCircuitSpec {
            n_inputs: rng.gen_range(2..=4),
            n_internal: rng.gen_range(1..=15),
            n_outputs: rng.gen_range(1..=2),
            ..RandomCircuitSpec::new(Domain::integers())
        };
        let c = random_circuit(&mut rng, &spec);
        let b = balance(&c);
        for (g, ls) in path_lengths(&b).iter().enumerate() {
            ensure!(ls.len() == 1, "circuit {k}, gate {g}: path lengths {ls:?}");
        }
        for _ in 0..20 {
            let x = random_inputs(&mut rng, &c, 3);
            ensure!(c.evaluate(&x).map_err(err)? == b.evaluate(&x).map_err(err)?, "circuit {k} changed at {x:?}");
        }
        let i = 1 + k % 2;
        let Some(cfac) = (1..=12).find(|cf| pad_and_number(&b, *cf, i).is_ok()) else {
            return Err(format!("circuit {k}: no normal form"));
        };
        let nf = pad_and_number(&b, cfac, i).map_err(err)?;
        let n = nf.n;
        let seq = seq_d(n, cfac, i).map_err(err)?;
        let want: Vec<Vec<usize>> = seq.iter().map(|e| prefix_of(e, n, cfac)).collect();
        let width = cfac * i;
        // Walk from the output down to a source along first predecessors.
        let mut g = nf.circuit.outputs()[0];
        let mut got = Vec::new();
        while !nf.circuit.gate(g).preds.is_empty() {
            got.push(nf.circuit.gate(g).label[..width].to_vec());
            g = nf.circuit.gate(g).preds[0];
        }
        ensure!(got == want, "circuit {k}: path prefixes {got:?}, want {want:?}");
        for gate in nf.circuit.gates() {
            let lv = nf.level[gate.id];
            let expect = if lv == 0 { &want[seq.len() - 1] } else { &want[seq.len() - lv] };
            ensure!(&gate.label[..width] == expect.as_slice(), "circuit {k}: gate {} on level {lv}", gate.id);
            if matches!(gate.kind, GateKind::Output) {
                ensure!(lv == seq.len(), "circuit {k}: output on level {lv}");
            }
        }
        for _ in 0..5 {
            let x = random_inputs(&mut rng, &c, 3);
            ensure!(c.evaluate(&x).map_err(err)? == nf.circuit.evaluate(&x).map_err(err)?, "circuit {k}: normal form changed");
        }
        normalized += 1;
    }
    Ok(format!("100 circuits balanced and preserved; {normalized} normal forms follow the sequence"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 11] = [
        ("sequence d table", Duration::from_secs(1), c1_sequence_table),
        ("digit-halving countdown", Duration::from_secs(1), c2_countdown),
        ("recursion depth accounting", Duration::from_secs(10), c3_gfr_depth),
        ("formula to circuit", Duration::from_secs(60), c4_formula_to_circuit),
        ("circuit to recursion sentence", Duration::from_secs(120), c5_circuit_to_gfr),
        ("adjoined lowering", Duration::from_secs(60), c6_adjoined),
        ("finite field lowering", Duration::from_secs(1), c7_finite),
        ("sign and order", Duration::from_secs(1), c8_sign_order),
        ("halving definability", Duration::from_secs(5), c9_half_leq),
        ("shrink factor", Duration::from_secs(1), c10_shrink),
        ("balance and normal form", Duration::from_secs(60), c11_balance_normal_form),
    ];
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > *limit => Err(format!("{detail}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} ({took:.2?})", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {why} ({took:.2?})", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria pass", criteria.len());
}
