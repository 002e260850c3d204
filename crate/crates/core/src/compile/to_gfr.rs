// SPDX-License-Identifier: Apache-2.0

//! A normalized circuit as a structure plus a recursion sentence.
//!
//! Gate numbers are tuples over the universe `{0, ..., n-1}`, `n` the
//! number of inputs. The structure lists which numbers are gates of which
//! kind, the predecessor relation and the constants; the input vector
//! becomes the unary function `f_element`. The sentence recomputes every
//! gate value by recursion on the gate number and asks whether the output
//! gate carries 1.

use crate::algebra::{Domain, DomainValue};
use crate::circuit::{check_normal_form, Circuit, GateKind, NormalForm};
use crate::logic::{
    AggKind, CmpKind, Formula, IndexTerm, NumberTerm, RStructure, RecursionDef, Table,
};

use super::{CompileError, Result};

pub const GFR_NAME: &str = "f";

pub const G_ADD: &str = "G_add";
pub const G_MUL: &str = "G_mul";
pub const G_LESS: &str = "G_less";
pub const G_INPUT: &str = "G_input";
pub const G_CONST: &str = "G_const";
pub const G_OUTPUT: &str = "G_output";
pub const G_EDGE: &str = "G_E";
pub const F_CONST_VAL: &str = "f_const_val";
pub const F_ELEMENT: &str = "f_element";

#[derive(Debug, Clone)]
pub struct CircuitDescription {
    /// All relations filled in; `f_element` is all zeros until an input is
    /// supplied.
    pub structure: RStructure,
    pub normal_form: NormalForm,
}

impl CircuitDescription {
    /// Label width: `cfac * i` prefix digits, counter, last digit.
    pub fn width(&self) -> usize {
        self.normal_form.label_width()
    }

    pub fn with_input(&self, x: &[DomainValue]) -> Result<RStructure> {
        let n = self.structure.size();
        if x.len() != n {
            return Err(CompileError::Precondition(format!(
                "circuit has {n} inputs, got {} values",
                x.len()
            )));
        }
        let mut s = self.structure.clone();
        s.set_number(
            F_ELEMENT,
            Table::Dense {
                arity: 1,
                values: x.to_vec(),
            },
        )?;
        Ok(s)
    }
}

fn names(prefix: &str, i: usize, w: usize, rest: usize) -> (Vec<Vec<String>>, Vec<String>) {
    let blocks = (1..=i)
        .map(|j| (1..=w).map(|k| format!("{prefix}{j}_{k}")).collect())
        .collect();
    let tail = (1..=rest).map(|k| format!("{prefix}r_{k}")).collect();
    (blocks, tail)
}

fn idx(vs: &[String]) -> Vec<IndexTerm> {
    vs.iter().map(|v| IndexTerm::Var(v.clone())).collect()
}

fn flat(blocks: &[Vec<String>], tail: &[String]) -> Vec<String> {
    blocks.iter().flatten().chain(tail).cloned().collect()
}

/// `OR_j (z_j <= y_j/2 AND AND_{k<j} z_k <= y_k)`.
pub(crate) fn halving_guard(zs: &[Vec<String>], ys: &[Vec<String>]) -> Formula {
    Formula::Or(
        (0..ys.len())
            .map(|j| {
                let mut parts = vec![Formula::HalfLe(idx(&zs[j]), idx(&ys[j]))];
                parts.extend(
                    (0..j).map(|k| Formula::TupleCmp(CmpKind::Le, idx(&zs[k]), idx(&ys[k]))),
                );
                Formula::And(parts)
            })
            .collect(),
    )
}

/// Builds the description structure and the sentence for a circuit in the
/// normal form of [`crate::circuit::pad_and_number`] with one output.
pub fn circuit_to_gfr(c: &Circuit, cfac: usize, i: usize) -> Result<(CircuitDescription, Formula)> {
    let nf = check_normal_form(c, cfac, i)?;
    if c.outputs().len() != 1 {
        return Err(CompileError::Precondition(format!(
            "expected exactly one output gate, found {}",
            c.outputs().len()
        )));
    }
    let d: &Domain = c.domain();
    if !d.lt(&d.zero(), &d.one()).map_err(crate::logic::LogicError::from)? {
        return Err(CompileError::Precondition(
            "comparisons are read through max, which needs 0 < 1 in the domain order".into(),
        ));
    }
    let n = c.inputs().len();
    let width = nf.label_width();
    let mut s = RStructure::new(d.clone(), n);
    let of_kind = |pred: &dyn Fn(&GateKind) -> bool| {
        Table::relation(
            d,
            width,
            c.gates().iter().filter(|g| pred(&g.kind)).map(|g| g.label.clone()),
        )
    };
    s.set_aux(G_ADD, of_kind(&|k| *k == GateKind::Add))?;
    s.set_aux(G_MUL, of_kind(&|k| *k == GateKind::Mul))?;
    s.set_aux(G_LESS, of_kind(&|k| *k == GateKind::Less))?;
    s.set_aux(G_INPUT, of_kind(&|k| matches!(k, GateKind::Input(_))))?;
    s.set_aux(G_CONST, of_kind(&|k| matches!(k, GateKind::Constant(_))))?;
    s.set_aux(G_OUTPUT, of_kind(&|k| *k == GateKind::Output))?;
    s.set_aux(
        G_EDGE,
        Table::relation(
            d,
            2 * width,
            c.gates().iter().flat_map(|g| {
                g.preds.iter().map(move |p| {
                    let mut t = g.label.clone();
                    t.extend(c.gate(*p).label.iter().copied());
                    t
                })
            }),
        ),
    )?;
    s.set_aux(
        F_CONST_VAL,
        Table::Sparse {
            arity: width,
            default: d.zero(),
            entries: c
                .gates()
                .iter()
                .filter_map(|g| match &g.kind {
                    GateKind::Constant(v) => Some((g.label.clone(), v.clone())),
                    _ => None,
                })
                .collect(),
        },
    )?;
    s.set_number(
        F_ELEMENT,
        Table::Dense {
            arity: 1,
            values: vec![d.zero(); n],
        },
    )?;

    let rest = nf.counter_width + 1;
    let (ys, yr) = names("y", i, cfac, rest);
    let (zs, zr) = names("z", i, cfac, rest);
    let (bs, br) = names("b", i, cfac, rest);
    let y = flat(&ys, &yr);
    let z = flat(&zs, &zr);
    let b = flat(&bs, &br);
    let zv: Vec<&str> = z.iter().map(String::as_str).collect();
    let bv: Vec<&str> = b.iter().map(String::as_str).collect();
    let edge = |from: &[String], to: &[String]| {
        let mut args = idx(from);
        args.extend(idx(to));
        Formula::Rel(G_EDGE.into(), args)
    };
    let over_preds = |kind: AggKind, body: NumberTerm| {
        NumberTerm::agg(
            kind,
            false,
            &zv,
            Some(Formula::And(vec![halving_guard(&zs, &ys), edge(&y, &z)])),
            body,
        )
    };
    let call = |args: &[String]| NumberTerm::RecVar(GFR_NAME.into(), idx(args));
    let is = |rel: &str| NumberTerm::chi(Formula::Rel(rel.into(), idx(&y)));
    let left_below = NumberTerm::agg(
        AggKind::Max,
        false,
        &bv,
        Some(Formula::And(vec![
            halving_guard(&bs, &ys),
            edge(&y, &b),
            Formula::TupleCmp(CmpKind::Lt, idx(&b), idx(&z)),
        ])),
        NumberTerm::chi(Formula::NumLt(call(&b), call(&z))),
    );
    let summands = vec![
        NumberTerm::mul(is(G_ADD), over_preds(AggKind::Sum, call(&z))),
        NumberTerm::mul(is(G_MUL), over_preds(AggKind::Prod, call(&z))),
        NumberTerm::mul(is(G_LESS), over_preds(AggKind::Max, left_below)),
        NumberTerm::mul(
            is(G_INPUT),
            NumberTerm::apply(F_ELEMENT, idx(&yr[yr.len() - 1..])),
        ),
        NumberTerm::mul(is(G_CONST), NumberTerm::apply(F_CONST_VAL, idx(&y))),
        NumberTerm::mul(is(G_OUTPUT), over_preds(AggKind::Sum, call(&z))),
    ];
    let body = summands
        .into_iter()
        .reduce(NumberTerm::add)
        .expect("six summands");
    let def = RecursionDef {
        name: GFR_NAME.into(),
        x: vec![],
        ys,
        rest: yr,
        body,
        bounded: false,
    };
    let (avs, ar) = names("a", i, cfac, rest);
    let a = flat(&avs, &ar);
    let av: Vec<&str> = a.iter().map(String::as_str).collect();
    let psi = Formula::exists(
        &av,
        Formula::And(vec![
            Formula::Rel(G_OUTPUT.into(), idx(&a)),
            Formula::NumEq(call(&a), NumberTerm::int(1)),
        ]),
    );
    Ok((
        CircuitDescription {
            structure: s,
            normal_form: nf,
        },
        Formula::Gfr(Box::new(def), Box::new(psi)),
    ))
}
