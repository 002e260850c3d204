// SPDX-License-Identifier: Apache-2.0

//! `F_p` over `F_q`: residues as `k`-digit base-`q` tuples, `k` least with
//! `p <= q^k`, and every operation as a lookup over its full table.
//!
//! A lookup is a sum of selectors. `[z = c]` over `F_q` is
//! `1 - (z - c)^(q-1)`, and `[x = f(a)]` is the product of those over the
//! digits of `f(a)`.

use crate::algebra::{Domain, DomainKind, DomainValue};
use crate::circuit::{Circuit, CircuitBuilder};

use super::{lower_with, one_minus, sum_or_zero, Gadgets, LowerOptions, Lowering, Result, SimulateError, SimulationMap};

/// Least `k` with `p <= q^k`.
pub fn finite_width(p: u64, q: u64) -> usize {
    let mut k = 1;
    let mut cap = q as u128;
    while cap < p as u128 {
        cap *= q as u128;
        k += 1;
    }
    k
}

/// `r` as `k` base-`q` digits, most significant first.
pub(crate) fn digits(mut r: u64, q: u64, k: usize) -> Vec<u64> {
    let mut out = vec![0; k];
    for d in out.iter_mut().rev() {
        *d = r % q;
        r /= q;
    }
    out
}

struct Finite {
    src: Domain,
    p: u64,
    q: u64,
    k: usize,
}

impl Finite {
    fn konst(&self, b: &mut CircuitBuilder, r: u64) -> usize {
        b.constant(DomainValue::Mod(r))
    }

    /// `[z = c]`.
    fn digit_eq(&self, b: &mut CircuitBuilder, z: usize, c: u64) -> usize {
        let diff = if c == 0 {
            z
        } else {
            let m = self.konst(b, self.q - c);
            b.add(vec![z, m])
        };
        let pow = if self.q == 2 { diff } else { b.mul(vec![diff; self.q as usize - 1]) };
        one_minus(b, pow)
    }

    /// `[x = f(a)]` for every `a` in `F_p`.
    fn selectors(&self, b: &mut CircuitBuilder, x: &[usize]) -> Vec<usize> {
        (0..self.p)
            .map(|a| {
                let ds = digits(a, self.q, self.k);
                let eqs: Vec<usize> = ds.iter().zip(x).map(|(c, z)| self.digit_eq(b, *z, *c)).collect();
                if eqs.len() == 1 {
                    eqs[0]
                } else {
                    b.mul(eqs)
                }
            })
            .collect()
    }

    fn table(&self, b: &mut CircuitBuilder, x: &[usize], y: &[usize], op: impl Fn(u64, u64) -> u64) -> Vec<usize> {
        let sx = self.selectors(b, x);
        let sy = self.selectors(b, y);
        let mut terms: Vec<Vec<usize>> = vec![Vec::new(); self.k];
        for a in 0..self.p {
            for c in 0..self.p {
                let ds = digits(op(a, c), self.q, self.k);
                if ds.iter().all(|d| *d == 0) {
                    continue;
                }
                let sel = b.mul(vec![sx[a as usize], sy[c as usize]]);
                for (w, d) in ds.into_iter().enumerate() {
                    match d {
                        0 => {}
                        1 => terms[w].push(sel),
                        d => {
                            let kd = self.konst(b, d);
                            terms[w].push(b.mul(vec![kd, sel]));
                        }
                    }
                }
            }
        }
        terms.into_iter().map(|t| sum_or_zero(b, t)).collect()
    }

    fn fold(&self, b: &mut CircuitBuilder, args: &[Vec<usize>], op: &dyn Fn(u64, u64) -> u64) -> Vec<usize> {
        let mut layer = args.to_vec();
        while layer.len() > 1 {
            layer = layer
                .chunks(2)
                .map(|ch| if ch.len() == 1 { ch[0].clone() } else { self.table(b, &ch[0], &ch[1], op) })
                .collect();
        }
        layer.pop().expect("nonempty")
    }
}

impl Gadgets for Finite {
    fn width(&self) -> usize {
        self.k
    }

    fn constant(&self, b: &mut CircuitBuilder, v: &DomainValue) -> Result<Vec<usize>> {
        match v {
            DomainValue::Mod(r) => Ok(digits(*r, self.q, self.k).into_iter().map(|d| self.konst(b, d)).collect()),
            other => Err(SimulateError::NotInSource(format!("{other:?}"))),
        }
    }

    fn add(&mut self, b: &mut CircuitBuilder, args: &[Vec<usize>]) -> Vec<usize> {
        let p = self.p;
        self.fold(b, args, &|x, y| (x + y) % p)
    }

    fn mul(&mut self, b: &mut CircuitBuilder, args: &[Vec<usize>]) -> Vec<usize> {
        let p = self.p;
        self.fold(b, args, &|x, y| ((x as u128 * y as u128) % p as u128) as u64)
    }

    fn less(&mut self, b: &mut CircuitBuilder, x: &[usize], y: &[usize]) -> Vec<usize> {
        let src = &self.src;
        let lt = |a: u64, c: u64| src.lt(&DomainValue::Mod(a), &DomainValue::Mod(c)).expect("residues") as u64;
        self.table(b, x, y, lt)
    }
}

pub(super) fn lower_finite_with(c: &Circuit, target: &Domain, opts: &LowerOptions) -> Result<Lowering> {
    let (p, q) = match (c.domain().kind(), target.kind()) {
        (DomainKind::FiniteField(p), DomainKind::FiniteField(q)) => (*p, *q),
        _ => {
            return Err(SimulateError::Unsupported {
                from: c.domain().name(),
                to: target.name(),
            })
        }
    };
    let map = SimulationMap::between(c.domain(), target)?;
    if map.kind == super::MapKind::Identity {
        return lower_with(c, map, &mut super::Identity, opts);
    }
    let mut g = Finite {
        src: c.domain().clone(),
        p,
        q,
        k: finite_width(p, q),
    };
    lower_with(c, map, &mut g, opts)
}

/// Lowers a circuit over `F_p` to one over `F_q`.
pub fn lower_finite(c: &Circuit, target: &Domain) -> Result<Lowering> {
    lower_finite_with(c, target, &LowerOptions::default())
}
