// SPDX-License-Identifier: Apache-2.0

//! Oracles and generators shared by the integration tests.

#![allow(dead_code)]

use num_bigint::BigInt;

use ringcirc::algebra::{as_bigint, BaseKind, Domain, DomainValue};
use ringcirc::circuit::{balance, pad_and_number, Circuit, CircuitBuilder, FanIn, NormalForm};
use ringcirc::compile::circuit_to_gfr;
use ringcirc::logic::eval_formula;
use ringcirc::simulate::{lower, LowerOptions};

/// `a * b` in `Z[x] / (x^k + 1)`, coefficient by coefficient.
pub fn negacyclic(a: &[i64], b: &[i64]) -> Vec<i64> {
    let k = a.len();
    let mut c = vec![0; k];
    for i in 0..k {
        for j in 0..k {
            let s = if i + j >= k { -1 } else { 1 };
            c[(i + j) % k] += s * a[i] * b[j];
        }
    }
    c
}

pub fn int_of(v: &DomainValue) -> i64 {
    i64::try_from(as_bigint(v).expect("integer value")).expect("fits")
}

/// Checks the lowered binary multiplication over `Z[j_k]` against
/// [`negacyclic`] for every coefficient vector in `[-r, r]^k` squared.
/// Returns the number of pairs, or the first mismatch.
pub fn mul_gadget_vs_expansion(k: usize, r: i64) -> Result<usize, String> {
    let d = Domain::adjoined(BaseKind::Integer, k).unwrap();
    let mut b = CircuitBuilder::new(d, FanIn::Bounded(2));
    let x = b.input();
    let y = b.input();
    let m = b.mul(vec![x, y]);
    b.output(m);
    let l = lower(&b.finish().unwrap(), &Domain::integers(), &LowerOptions::default()).map_err(|e| e.to_string())?;
    let side = (2 * r + 1) as usize;
    let total = side.pow(2 * k as u32);
    let mut cs = vec![0i64; 2 * k];
    for mut code in 0..total {
        for c in cs.iter_mut() {
            *c = (code % side) as i64 - r;
            code /= side;
        }
        let inputs: Vec<DomainValue> = cs.iter().map(|c| DomainValue::Int(BigInt::from(*c))).collect();
        let got: Vec<i64> = l.circuit.evaluate(&inputs).map_err(|e| e.to_string())?.iter().map(int_of).collect();
        let want = negacyclic(&cs[..k], &cs[k..]);
        if got != want {
            return Err(format!("{:?} * {:?}: got {got:?}, want {want:?}", &cs[..k], &cs[k..]));
        }
    }
    Ok(total)
}

/// Normal form with the least `cfac` that fits.
pub fn normalize(c: &Circuit, i: usize) -> Option<NormalForm> {
    let b = balance(c);
    (1..=12).find_map(|cfac| pad_and_number(&b, cfac, i).ok())
}

/// Whether the recursion sentence of `nf` holds exactly when the circuit
/// outputs 1, on every input in `xs`.
pub fn gfr_agrees(nf: &NormalForm, xs: &[Vec<i64>]) -> Result<(), String> {
    let (desc, f) = circuit_to_gfr(&nf.circuit, nf.cfac, nf.i).map_err(|e| e.to_string())?;
    let d = Domain::integers();
    for x in xs {
        let x: Vec<DomainValue> = x.iter().map(|v| d.from_i64(*v)).collect();
        let want = d.is_one(&nf.circuit.evaluate(&x).map_err(|e| e.to_string())?[0]);
        let s = desc.with_input(&x).map_err(|e| e.to_string())?;
        let got = eval_formula(&s, &[], &f).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("input {x:?}: sentence {got}, circuit {want}"));
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub enum Op {
    Const(i64),
    Add(Vec<usize>),
    Mul(Vec<usize>),
    Less(usize, usize),
}

/// Every gate choice over `pool` earlier gates.
pub fn ops(pool: usize) -> Vec<Op> {
    let mut out: Vec<Op> = [-1, 0, 1].into_iter().map(Op::Const).collect();
    for a in 0..pool {
        for b in 0..pool {
            if a != b {
                out.push(Op::Less(a, b));
            }
            if a < b {
                out.push(Op::Add(vec![a, b]));
                out.push(Op::Mul(vec![a, b]));
            }
        }
        out.push(Op::Add(vec![a]));
    }
    out
}

/// Two inputs, then `prog`, then an output on the last gate.
pub fn build(prog: &[Op]) -> Circuit {
    let mut b = CircuitBuilder::new(Domain::integers(), FanIn::Unbounded);
    let mut ids = vec![b.input(), b.input()];
    for op in prog {
        let m = |v: &Vec<usize>| v.iter().map(|p| ids[*p]).collect::<Vec<_>>();
        let g = match op {
            Op::Const(v) => b.constant_i64(*v),
            Op::Add(v) => b.add(m(v)),
            Op::Mul(v) => b.mul(m(v)),
            Op::Less(l, r) => b.less(ids[*l], ids[*r]),
        };
        ids.push(g);
    }
    b.output(*ids.last().unwrap());
    b.finish().unwrap()
}

/// All programs of one to three gates, so at most six gates in total.
pub fn small_programs() -> Vec<Vec<Op>> {
    let mut progs = Vec::new();
    for a in ops(2) {
        progs.push(vec![a.clone()]);
        for b in ops(3) {
            progs.push(vec![a.clone(), b.clone()]);
            for c in ops(4) {
                progs.push(vec![a.clone(), b.clone(), c]);
            }
        }
    }
    progs
}

/// `{-1, 0, 1, 2}^2`.
pub fn small_grid() -> Vec<Vec<i64>> {
    (-1..=2).flat_map(|a| (-1..=2).map(move |b| vec![a, b])).collect()
}

/// Source distances of all paths into each gate, by backward breadth-first
/// search over exact path lengths.
pub fn path_lengths(c: &Circuit) -> Vec<Vec<usize>> {
    (0..c.size())
        .map(|g| {
            let mut out = Vec::new();
            let mut frontier = std::collections::BTreeSet::from([g]);
            let mut t = 0;
            while !frontier.is_empty() {
                if frontier.iter().any(|v| c.gate(*v).preds.is_empty()) {
                    out.push(t);
                }
                frontier = frontier.iter().flat_map(|v| c.gate(*v).preds.iter().copied()).collect();
                t += 1;
            }
            out
        })
        .collect()
}
