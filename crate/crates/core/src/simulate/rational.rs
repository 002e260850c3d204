// SPDX-License-Identifier: Apache-2.0

//! `Q` over `Z`: `a/b` as `(a, b)` with `b > 0`.
//!
//! Gadgets keep denominators positive but do not reduce, so lowered values
//! agree with the source up to `a * d = c * b`. Positive denominators make
//! `a/b < c/d` the same as `a * d < c * b`.

use crate::algebra::{Domain, DomainKind, DomainValue};
use crate::circuit::{Circuit, CircuitBuilder};

use super::{lower_with, Gadgets, LowerOptions, Lowering, Result, SimulateError, SimulationMap};

struct Rational;

impl Gadgets for Rational {
    fn width(&self) -> usize {
        2
    }

    fn constant(&self, b: &mut CircuitBuilder, v: &DomainValue) -> Result<Vec<usize>> {
        match v {
            DomainValue::Rat(x) => Ok(vec![
                b.constant(DomainValue::Int(x.numer().clone())),
                b.constant(DomainValue::Int(x.denom().clone())),
            ]),
            other => Err(SimulateError::NotInSource(format!("{other:?}"))),
        }
    }

    /// `(sum_i a_i prod_{j != i} b_j, prod_j b_j)`.
    fn add(&mut self, b: &mut CircuitBuilder, args: &[Vec<usize>]) -> Vec<usize> {
        let terms: Vec<usize> = (0..args.len())
            .map(|i| {
                let mut fs = vec![args[i][0]];
                fs.extend(args.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, a)| a[1]));
                b.mul(fs)
            })
            .collect();
        let num = b.add(terms);
        let den = b.mul(args.iter().map(|a| a[1]).collect());
        vec![num, den]
    }

    fn mul(&mut self, b: &mut CircuitBuilder, args: &[Vec<usize>]) -> Vec<usize> {
        let num = b.mul(args.iter().map(|a| a[0]).collect());
        let den = b.mul(args.iter().map(|a| a[1]).collect());
        vec![num, den]
    }

    fn less(&mut self, b: &mut CircuitBuilder, x: &[usize], y: &[usize]) -> Vec<usize> {
        let l = b.mul(vec![x[0], y[1]]);
        let r = b.mul(vec![y[0], x[1]]);
        let bit = b.less(l, r);
        vec![bit, b.constant_i64(1)]
    }
}

pub(super) fn lower_rationals_with(c: &Circuit, opts: &LowerOptions) -> Result<Lowering> {
    if *c.domain().kind() != DomainKind::Rational {
        return Err(SimulateError::Unsupported {
            from: c.domain().name(),
            to: "Z".into(),
        });
    }
    let map = SimulationMap::between(c.domain(), &Domain::integers())?;
    lower_with(c, map, &mut Rational, opts)
}

/// Lowers a circuit over `Q` to one over `Z` with two wires per value.
pub fn lower_rationals(c: &Circuit) -> Result<Lowering> {
    lower_rationals_with(c, &LowerOptions::default())
}
