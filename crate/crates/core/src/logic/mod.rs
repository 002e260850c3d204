// SPDX-License-Identifier: Apache-2.0

//! First-order logic over metafinite structures: index terms range over a
//! finite ordered universe, number terms take values in a domain.
//!
//! Besides the usual connectives and quantifiers the logic has sum, product
//! and max aggregators (optionally relativized and bounded), characteristic
//! function terms and guarded functional recursion.

mod eval;
mod gfr_check;
mod max;
pub mod random;
mod structure;

pub use eval::{
    eval_formula, eval_formula_with, eval_gfr, eval_term, guard_depth_bound, EvalOptions, EvalStats, Evaluator,
    GfrResult, GfrStats,
};
pub use gfr_check::{
    check_gfr_syntax, check_symbols, referenced_symbols, referenced_symbols_term, symbol_uses,
    Diagnostic, SymbolKind,
};
pub use max::{rewrite_max, MaxRewrite};
pub use structure::{all_tuples, RStructure, Signature, SkeletonFn, Table};

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::algebra::{AlgebraError, Domain, DomainValue};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("{symbol} expects {expected} arguments, got {got}")]
    Arity {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("tuples of different length compared: {0} vs {1}")]
    TupleLength(usize, usize),
    #[error("non-well-founded recursion: {name}{args:?} demanded while being computed")]
    NonWellFounded { name: String, args: Vec<usize> },
    #[error("recursion depth cap {cap} exceeded by {name} (depth {depth})")]
    DepthCap {
        name: String,
        depth: usize,
        cap: usize,
    },
    #[error("table {name}: {reason}")]
    BadTable { name: String, reason: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, LogicError>;

/// Element-sorted terms: variables and skeleton function applications.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IndexTerm {
    Var(String),
    App(String, Vec<IndexTerm>),
}

impl IndexTerm {
    pub fn var(name: &str) -> IndexTerm {
        IndexTerm::Var(name.to_string())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            IndexTerm::Var(v) => Some(v),
            IndexTerm::App(..) => None,
        }
    }
}

pub fn vars(names: &[&str]) -> Vec<IndexTerm> {
    names.iter().map(|n| IndexTerm::var(n)).collect()
}

/// A domain constant as written; resolved against the structure's domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    /// Embedded into any domain.
    Int(BigInt),
    /// Parsed with the domain's value grammar, e.g. `1/2` or `(1,2)`.
    Text(String),
    Value(DomainValue),
}

impl Literal {
    pub fn resolve(&self, d: &Domain) -> std::result::Result<DomainValue, AlgebraError> {
        match self {
            Literal::Int(v) => Ok(d.from_bigint(v)),
            Literal::Text(t) => d.parse_value(t),
            Literal::Value(v) => {
                d.check(v)?;
                Ok(v.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggKind {
    Sum,
    Prod,
    Max,
}

impl AggKind {
    pub fn name(&self) -> &'static str {
        match self {
            AggKind::Sum => "sum",
            AggKind::Prod => "prod",
            AggKind::Max => "max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Aggregation {
    pub kind: AggKind,
    /// Keep only the two lexicographically largest satisfying tuples.
    pub bounded: bool,
    pub vars: Vec<String>,
    pub relativizer: Option<Box<Formula>>,
    pub body: Box<NumberTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NumberTerm {
    Const(Literal),
    /// A number function of the structure (input or auxiliary).
    Apply(String, Vec<IndexTerm>),
    Add(Box<NumberTerm>, Box<NumberTerm>),
    Mul(Box<NumberTerm>, Box<NumberTerm>),
    Sign(Box<NumberTerm>),
    Chi(Box<Formula>),
    Agg(Aggregation),
    /// An occurrence of a recursively defined function.
    RecVar(String, Vec<IndexTerm>),
}

impl NumberTerm {
    pub fn int(v: i64) -> NumberTerm {
        NumberTerm::Const(Literal::Int(BigInt::from(v)))
    }

    pub fn apply(name: &str, args: Vec<IndexTerm>) -> NumberTerm {
        NumberTerm::Apply(name.to_string(), args)
    }

    pub fn add(a: NumberTerm, b: NumberTerm) -> NumberTerm {
        NumberTerm::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: NumberTerm, b: NumberTerm) -> NumberTerm {
        NumberTerm::Mul(Box::new(a), Box::new(b))
    }

    pub fn chi(f: Formula) -> NumberTerm {
        NumberTerm::Chi(Box::new(f))
    }

    pub fn agg(
        kind: AggKind,
        bounded: bool,
        vars: &[&str],
        relativizer: Option<Formula>,
        body: NumberTerm,
    ) -> NumberTerm {
        NumberTerm::Agg(Aggregation {
            kind,
            bounded,
            vars: vars.iter().map(|v| v.to_string()).collect(),
            relativizer: relativizer.map(Box::new),
            body: Box::new(body),
        })
    }

    pub fn sum(vars: &[&str], body: NumberTerm) -> NumberTerm {
        NumberTerm::agg(AggKind::Sum, false, vars, None, body)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpKind {
    Lt,
    Le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantKind {
    Exists,
    Forall,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    IndexEq(IndexTerm, IndexTerm),
    /// Lexicographic comparison of equal-length tuples.
    TupleCmp(CmpKind, Vec<IndexTerm>, Vec<IndexTerm>),
    /// `z <= y / 2` on tuples read as base-n numbers.
    HalfLe(Vec<IndexTerm>, Vec<IndexTerm>),
    /// A table read as a relation: true iff the entry equals 1.
    Rel(String, Vec<IndexTerm>),
    NumEq(NumberTerm, NumberTerm),
    NumLt(NumberTerm, NumberTerm),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Quant(QuantKind, Vec<String>, Box<Formula>),
    Gfr(Box<RecursionDef>, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(vs: &[&str], body: Formula) -> Formula {
        Formula::Quant(
            QuantKind::Exists,
            vs.iter().map(|v| v.to_string()).collect(),
            Box::new(body),
        )
    }

    pub fn forall(vs: &[&str], body: Formula) -> Formula {
        Formula::Quant(
            QuantKind::Forall,
            vs.iter().map(|v| v.to_string()).collect(),
            Box::new(body),
        )
    }

    pub fn rel(name: &str, args: Vec<IndexTerm>) -> Formula {
        Formula::Rel(name.to_string(), args)
    }
}

/// `[f(x, y_1, ..., y_i, rest) = body] psi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RecursionDef {
    pub name: String,
    pub x: Vec<String>,
    /// The `i` halving blocks, all of the same positive width.
    pub ys: Vec<Vec<String>>,
    /// The unrestricted last block.
    pub rest: Vec<String>,
    pub body: NumberTerm,
    /// Recursion only through bounded aggregations.
    pub bounded: bool,
}

impl RecursionDef {
    pub fn params(&self) -> Vec<String> {
        let mut out = self.x.clone();
        for y in &self.ys {
            out.extend(y.iter().cloned());
        }
        out.extend(self.rest.iter().cloned());
        out
    }

    pub fn arity(&self) -> usize {
        self.x.len() + self.ys.iter().map(|y| y.len()).sum::<usize>() + self.rest.len()
    }

    pub fn exponent(&self) -> usize {
        self.ys.len()
    }

    pub fn block_width(&self) -> usize {
        self.ys.first().map_or(0, |y| y.len())
    }
}

/// Free index variables of a formula.
pub fn free_vars(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fv_formula(f, &mut Vec::new(), &mut out);
    out
}

pub fn free_vars_term(t: &NumberTerm) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fv_term(t, &mut Vec::new(), &mut out);
    out
}

fn fv_index(t: &IndexTerm, bound: &[String], out: &mut BTreeSet<String>) {
    match t {
        IndexTerm::Var(v) => {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        }
        IndexTerm::App(_, args) => args.iter().for_each(|a| fv_index(a, bound, out)),
    }
}

fn fv_term(t: &NumberTerm, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        NumberTerm::Const(_) => {}
        NumberTerm::Apply(_, args) | NumberTerm::RecVar(_, args) => {
            args.iter().for_each(|a| fv_index(a, bound, out))
        }
        NumberTerm::Add(a, b) | NumberTerm::Mul(a, b) => {
            fv_term(a, bound, out);
            fv_term(b, bound, out);
        }
        NumberTerm::Sign(a) => fv_term(a, bound, out),
        NumberTerm::Chi(f) => fv_formula(f, bound, out),
        NumberTerm::Agg(a) => {
            let n = bound.len();
            bound.extend(a.vars.iter().cloned());
            if let Some(r) = &a.relativizer {
                fv_formula(r, bound, out);
            }
            fv_term(&a.body, bound, out);
            bound.truncate(n);
        }
    }
}

fn fv_formula(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::IndexEq(a, b) => {
            fv_index(a, bound, out);
            fv_index(b, bound, out);
        }
        Formula::TupleCmp(_, a, b) | Formula::HalfLe(a, b) => {
            a.iter().chain(b).for_each(|t| fv_index(t, bound, out))
        }
        Formula::Rel(_, args) => args.iter().for_each(|t| fv_index(t, bound, out)),
        Formula::NumEq(a, b) | Formula::NumLt(a, b) => {
            fv_term(a, bound, out);
            fv_term(b, bound, out);
        }
        Formula::Not(a) => fv_formula(a, bound, out),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| fv_formula(g, bound, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            fv_formula(a, bound, out);
            fv_formula(b, bound, out);
        }
        Formula::Quant(_, vs, body) => {
            let n = bound.len();
            bound.extend(vs.iter().cloned());
            fv_formula(body, bound, out);
            bound.truncate(n);
        }
        Formula::Gfr(def, psi) => {
            let n = bound.len();
            bound.extend(def.params());
            fv_term(&def.body, bound, out);
            bound.truncate(n);
            fv_formula(psi, bound, out);
        }
    }
}

/// Every variable name occurring anywhere, bound or free.
pub fn all_var_names(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    names_formula(f, &mut out);
    out
}

fn names_index(t: &IndexTerm, out: &mut BTreeSet<String>) {
    match t {
        IndexTerm::Var(v) => {
            out.insert(v.clone());
        }
        IndexTerm::App(_, args) => args.iter().for_each(|a| names_index(a, out)),
    }
}

fn names_term(t: &NumberTerm, out: &mut BTreeSet<String>) {
    match t {
        NumberTerm::Const(_) => {}
        NumberTerm::Apply(_, args) | NumberTerm::RecVar(_, args) => {
            args.iter().for_each(|a| names_index(a, out))
        }
        NumberTerm::Add(a, b) | NumberTerm::Mul(a, b) => {
            names_term(a, out);
            names_term(b, out);
        }
        NumberTerm::Sign(a) => names_term(a, out),
        NumberTerm::Chi(f) => names_formula(f, out),
        NumberTerm::Agg(a) => {
            out.extend(a.vars.iter().cloned());
            if let Some(r) = &a.relativizer {
                names_formula(r, out);
            }
            names_term(&a.body, out);
        }
    }
}

fn names_formula(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::IndexEq(a, b) => {
            names_index(a, out);
            names_index(b, out);
        }
        Formula::TupleCmp(_, a, b) | Formula::HalfLe(a, b) => {
            a.iter().chain(b).for_each(|t| names_index(t, out))
        }
        Formula::Rel(_, args) => args.iter().for_each(|t| names_index(t, out)),
        Formula::NumEq(a, b) | Formula::NumLt(a, b) => {
            names_term(a, out);
            names_term(b, out);
        }
        Formula::Not(a) => names_formula(a, out),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| names_formula(g, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            names_formula(a, out);
            names_formula(b, out);
        }
        Formula::Quant(_, vs, body) => {
            out.extend(vs.iter().cloned());
            names_formula(body, out);
        }
        Formula::Gfr(def, psi) => {
            out.extend(def.params());
            names_term(&def.body, out);
            names_formula(psi, out);
        }
    }
}

/// Renames free occurrences of index variables; binders shadow the map.
/// Callers pick fresh target names, so capture cannot happen.
pub fn rename_term(t: &NumberTerm, map: &[(String, String)]) -> NumberTerm {
    let idx = |args: &[IndexTerm]| args.iter().map(|a| rename_index(a, map)).collect();
    match t {
        NumberTerm::Const(_) => t.clone(),
        NumberTerm::Apply(n, args) => NumberTerm::Apply(n.clone(), idx(args)),
        NumberTerm::RecVar(n, args) => NumberTerm::RecVar(n.clone(), idx(args)),
        NumberTerm::Add(a, b) => NumberTerm::add(rename_term(a, map), rename_term(b, map)),
        NumberTerm::Mul(a, b) => NumberTerm::mul(rename_term(a, map), rename_term(b, map)),
        NumberTerm::Sign(a) => NumberTerm::Sign(Box::new(rename_term(a, map))),
        NumberTerm::Chi(f) => NumberTerm::chi(rename_formula(f, map)),
        NumberTerm::Agg(a) => {
            let inner = shadow(map, &a.vars);
            NumberTerm::Agg(Aggregation {
                kind: a.kind,
                bounded: a.bounded,
                vars: a.vars.clone(),
                relativizer: a
                    .relativizer
                    .as_ref()
                    .map(|r| Box::new(rename_formula(r, &inner))),
                body: Box::new(rename_term(&a.body, &inner)),
            })
        }
    }
}

fn shadow(map: &[(String, String)], bound: &[String]) -> Vec<(String, String)> {
    map.iter()
        .filter(|(from, _)| !bound.contains(from))
        .cloned()
        .collect()
}

fn rename_index(t: &IndexTerm, map: &[(String, String)]) -> IndexTerm {
    match t {
        IndexTerm::Var(v) => match map.iter().find(|(from, _)| from == v) {
            Some((_, to)) => IndexTerm::Var(to.clone()),
            None => t.clone(),
        },
        IndexTerm::App(n, args) => {
            IndexTerm::App(n.clone(), args.iter().map(|a| rename_index(a, map)).collect())
        }
    }
}

pub fn rename_formula(f: &Formula, map: &[(String, String)]) -> Formula {
    let idx = |args: &[IndexTerm]| -> Vec<IndexTerm> {
        args.iter().map(|a| rename_index(a, map)).collect()
    };
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::IndexEq(a, b) => Formula::IndexEq(rename_index(a, map), rename_index(b, map)),
        Formula::TupleCmp(k, a, b) => Formula::TupleCmp(*k, idx(a), idx(b)),
        Formula::HalfLe(a, b) => Formula::HalfLe(idx(a), idx(b)),
        Formula::Rel(n, args) => Formula::Rel(n.clone(), idx(args)),
        Formula::NumEq(a, b) => Formula::NumEq(rename_term(a, map), rename_term(b, map)),
        Formula::NumLt(a, b) => Formula::NumLt(rename_term(a, map), rename_term(b, map)),
        Formula::Not(a) => Formula::not(rename_formula(a, map)),
        Formula::And(fs) => Formula::And(fs.iter().map(|g| rename_formula(g, map)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|g| rename_formula(g, map)).collect()),
        Formula::Implies(a, b) => Formula::implies(rename_formula(a, map), rename_formula(b, map)),
        Formula::Iff(a, b) => Formula::iff(rename_formula(a, map), rename_formula(b, map)),
        Formula::Quant(q, vs, body) => {
            Formula::Quant(*q, vs.clone(), Box::new(rename_formula(body, &shadow(map, vs))))
        }
        Formula::Gfr(def, psi) => {
            let inner = shadow(map, &def.params());
            let mut d = (**def).clone();
            d.body = rename_term(&def.body, &inner);
            Formula::Gfr(Box::new(d), Box::new(rename_formula(psi, map)))
        }
    }
}

/// Whether a term mentions the recursion symbol `name`.
pub fn term_mentions_rec(t: &NumberTerm, name: &str) -> bool {
    match t {
        NumberTerm::RecVar(n, _) => n == name,
        NumberTerm::Const(_) | NumberTerm::Apply(..) => false,
        NumberTerm::Add(a, b) | NumberTerm::Mul(a, b) => {
            term_mentions_rec(a, name) || term_mentions_rec(b, name)
        }
        NumberTerm::Sign(a) => term_mentions_rec(a, name),
        NumberTerm::Chi(f) => formula_mentions_rec(f, name),
        NumberTerm::Agg(a) => {
            a.relativizer
                .as_ref()
                .is_some_and(|r| formula_mentions_rec(r, name))
                || term_mentions_rec(&a.body, name)
        }
    }
}

pub fn formula_mentions_rec(f: &Formula, name: &str) -> bool {
    match f {
        Formula::NumEq(a, b) | Formula::NumLt(a, b) => {
            term_mentions_rec(a, name) || term_mentions_rec(b, name)
        }
        Formula::Not(a) => formula_mentions_rec(a, name),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().any(|g| formula_mentions_rec(g, name)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            formula_mentions_rec(a, name) || formula_mentions_rec(b, name)
        }
        Formula::Quant(_, _, body) => formula_mentions_rec(body, name),
        Formula::Gfr(def, psi) => {
            (def.name != name && term_mentions_rec(&def.body, name))
                || (def.name != name && formula_mentions_rec(psi, name))
        }
        _ => false,
    }
}

/// Whether the formula contains any recursion block.
pub fn has_gfr(f: &Formula) -> bool {
    match f {
        Formula::Gfr(..) => true,
        Formula::Not(a) => has_gfr(a),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().any(has_gfr),
        Formula::Implies(a, b) | Formula::Iff(a, b) => has_gfr(a) || has_gfr(b),
        Formula::Quant(_, _, body) => has_gfr(body),
        Formula::NumEq(a, b) | Formula::NumLt(a, b) => term_has_gfr(a) || term_has_gfr(b),
        _ => false,
    }
}

fn term_has_gfr(t: &NumberTerm) -> bool {
    match t {
        NumberTerm::Add(a, b) | NumberTerm::Mul(a, b) => term_has_gfr(a) || term_has_gfr(b),
        NumberTerm::Sign(a) => term_has_gfr(a),
        NumberTerm::Chi(f) => has_gfr(f),
        NumberTerm::Agg(a) => {
            a.relativizer.as_ref().is_some_and(|r| has_gfr(r)) || term_has_gfr(&a.body)
        }
        _ => false,
    }
}
