// SPDX-License-Identifier: Apache-2.0

//! `R[j_k]` over `R`: componentwise addition, negacyclic multiplication,
//! lexicographic comparison.

use crate::algebra::{DomainKind, DomainValue};
use crate::circuit::{Circuit, CircuitBuilder};

use super::{lower_with, one_minus, sum_or_zero, Gadgets, LowerOptions, Lowering, Result, SimulationMap, SimulateError};

/// Widest multiplication expanded directly into a sum of products; wider
/// ones become a balanced tree of binary gadgets.
pub const MUL_EXPANSION_LIMIT: usize = 4;

struct Adjoined {
    k: usize,
    tree_muls: usize,
}

impl Adjoined {
    /// `prod_i x_i` by expanding over all coefficient choices: the choice
    /// `(u_1, ..., u_m)` contributes to coefficient `s mod k`, `s = sum u_i`,
    /// with sign `(-1)^(s div k)`.
    fn expand(&self, b: &mut CircuitBuilder, args: &[Vec<usize>]) -> Vec<usize> {
        let k = self.k;
        let m = args.len();
        let mut pos: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut neg: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut choice = vec![0usize; m];
        loop {
            let s: usize = choice.iter().sum();
            let term = b.mul(choice.iter().enumerate().map(|(i, u)| args[i][*u]).collect());
            if (s / k) % 2 == 0 {
                pos[s % k].push(term);
            } else {
                neg[s % k].push(term);
            }
            // Odometer over [k]^m.
            let mut i = m;
            loop {
                if i == 0 {
                    return self.combine(b, pos, neg);
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < k {
                    break;
                }
                choice[i] = 0;
            }
        }
    }

    fn combine(&self, b: &mut CircuitBuilder, pos: Vec<Vec<usize>>, neg: Vec<Vec<usize>>) -> Vec<usize> {
        pos.into_iter()
            .zip(neg)
            .map(|(mut p, n)| {
                if !n.is_empty() {
                    let s = sum_or_zero(b, n);
                    let m1 = b.constant_i64(-1);
                    p.push(b.mul(vec![m1, s]));
                }
                sum_or_zero(b, p)
            })
            .collect()
    }
}

impl Gadgets for Adjoined {
    fn width(&self) -> usize {
        self.k
    }

    fn constant(&self, b: &mut CircuitBuilder, v: &DomainValue) -> Result<Vec<usize>> {
        match v {
            DomainValue::Tuple(cs) => Ok(cs.iter().map(|c| b.constant(c.clone())).collect()),
            other => Err(SimulateError::NotInSource(format!("{other:?}"))),
        }
    }

    fn add(&mut self, b: &mut CircuitBuilder, args: &[Vec<usize>]) -> Vec<usize> {
        (0..self.k).map(|w| b.add(args.iter().map(|a| a[w]).collect())).collect()
    }

    fn mul(&mut self, b: &mut CircuitBuilder, args: &[Vec<usize>]) -> Vec<usize> {
        if args.len() <= MUL_EXPANSION_LIMIT {
            return self.expand(b, args);
        }
        self.tree_muls += 1;
        let mut layer = args.to_vec();
        while layer.len() > 1 {
            layer = layer
                .chunks(2)
                .map(|ch| if ch.len() == 1 { ch[0].clone() } else { self.expand(b, ch) })
                .collect();
        }
        layer.pop().expect("nonempty")
    }

    /// `sum_w [x_v = y_v for v < w] * less(x_w, y_w)`; the summands are
    /// mutually exclusive, so the sum is 0 or 1.
    fn less(&mut self, b: &mut CircuitBuilder, x: &[usize], y: &[usize]) -> Vec<usize> {
        let mut terms = Vec::with_capacity(self.k);
        let mut eqs: Vec<usize> = Vec::new();
        for w in 0..self.k {
            let lt = b.less(x[w], y[w]);
            terms.push(if eqs.is_empty() {
                lt
            } else {
                let mut fs = eqs.clone();
                fs.push(lt);
                b.mul(fs)
            });
            if w + 1 < self.k {
                let gt = b.less(y[w], x[w]);
                let a = one_minus(b, lt);
                let c = one_minus(b, gt);
                eqs.push(b.mul(vec![a, c]));
            }
        }
        let bit = b.add(terms);
        let mut out = vec![bit];
        out.extend((1..self.k).map(|_| b.constant_i64(0)));
        out
    }

    fn tree_muls(&self) -> usize {
        self.tree_muls
    }
}

pub(super) fn lower_adjoined_with(c: &Circuit, opts: &LowerOptions) -> Result<Lowering> {
    let (k, target) = match c.domain().kind() {
        DomainKind::Adjoined { k, .. } => (*k, c.domain().base_domain().expect("adjoined")),
        _ => {
            return Err(SimulateError::Unsupported {
                from: c.domain().name(),
                to: "its base ring".into(),
            })
        }
    };
    let map = SimulationMap::between(c.domain(), &target)?;
    lower_with(c, map, &mut Adjoined { k, tree_muls: 0 }, opts)
}

/// Lowers a circuit over `R[j_k]` to one over `R` with `k` wires per value.
pub fn lower_adjoined(c: &Circuit) -> Result<Lowering> {
    lower_adjoined_with(c, &LowerOptions::default())
}
