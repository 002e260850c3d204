// SPDX-License-Identifier: Apache-2.0

//! Formulas to circuits and circuits to recursion sentences.
//!
//! [`compile_formula`] turns a closed formula into an unbounded fan-in
//! circuit whose inputs are the values of the structure's input number
//! functions. Truth values travel as the domain elements 0 and 1:
//!
//! | construct        | gadget                                   |
//! |------------------|------------------------------------------|
//! | `a and b`        | `mul(a, b)`                              |
//! | `not a`          | `add(1, mul(-1, a))`                     |
//! | `forall x phi`   | `less(0, mul(phi(a) for a in A))`        |
//! | `exists`, `or`   | through `not` and the dual               |
//! | `s < t`          | `less(s, t)`                             |
//! | `s = t`          | `not less(s, t) and not less(t, s)`      |
//! | `sign(t)`        | `less(0, t)`                             |
//! | sum, prod        | unbounded add, mul over all tuples       |
//! | max              | sum of `chi[least maximizer] * t`        |
//!
//! Relations of the index sort and auxiliary tables become constant gates;
//! nothing is folded, so the depth of a compiled formula does not depend on
//! the universe size. Recursion blocks are unrolled on demand, one
//! subcircuit per reachable argument tuple.

mod roundtrip;
mod to_gfr;

pub use roundtrip::{roundtrip_check, Disagreement, RoundtripReport, SizeReport};
pub use to_gfr::{circuit_to_gfr, CircuitDescription, GFR_NAME};

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::algebra::{Domain, DomainValue};
use crate::circuit::{Circuit, CircuitBuilder, CircuitError, FanIn};
use crate::logic::{
    all_tuples, check_gfr_syntax, check_symbols, free_vars, referenced_symbols, AggKind,
    Aggregation, EvalOptions, Evaluator, Formula, LogicError, NumberTerm, QuantKind,
    RStructure, RecursionDef, Table,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("recursion cycle while unrolling {name} at {args:?}")]
    Cycle { name: String, args: Vec<usize> },
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

pub type Result<T> = std::result::Result<T, CompileError>;

/// How an input vector fills the input number functions of a structure:
/// symbols in name order, each table in lexicographic argument order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputLayout {
    pub n: usize,
    pub symbols: Vec<(String, usize)>,
}

impl InputLayout {
    pub fn of(template: &RStructure) -> InputLayout {
        InputLayout {
            n: template.size(),
            symbols: template
                .number_fns()
                .iter()
                .map(|(k, t)| (k.clone(), t.arity()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.iter().map(|(_, a)| self.n.pow(*a as u32)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, name: &str, args: &[usize]) -> Option<usize> {
        let mut off = 0;
        for (sym, arity) in &self.symbols {
            if sym == name {
                let idx = args.iter().fold(0, |acc, a| acc * self.n + a);
                return Some(off + idx);
            }
            off += self.n.pow(*arity as u32);
        }
        None
    }

    /// `template` with its input functions replaced by the values `x`.
    pub fn structure(&self, template: &RStructure, x: &[DomainValue]) -> Result<RStructure> {
        if x.len() != self.len() {
            return Err(CompileError::Precondition(format!(
                "input has {} values, the layout needs {}",
                x.len(),
                self.len()
            )));
        }
        let mut s = template.clone();
        let mut off = 0;
        for (sym, arity) in &self.symbols {
            let len = self.n.pow(*arity as u32);
            s.set_number(
                sym,
                Table::Dense {
                    arity: *arity,
                    values: x[off..off + len].to_vec(),
                },
            )?;
            off += len;
        }
        Ok(s)
    }

    /// The input vector stored in `s`.
    pub fn read(&self, s: &RStructure) -> Vec<DomainValue> {
        let mut out = Vec::with_capacity(self.len());
        for (sym, arity) in &self.symbols {
            let t = s.table(sym).expect("layout taken from this signature");
            for args in all_tuples(self.n, *arity) {
                out.push(t.get(self.n, &args).clone());
            }
        }
        out
    }
}

/// A gadget that [`CompileOptions::corrupt`] miscompiles on purpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gadget {
    /// `not a` becomes `a`.
    Not,
    /// `s = t` becomes `not less(s, t)`.
    Eq,
    /// `forall` multiplies into an addition.
    Forall,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompileOptions {
    /// Keep a gate binding for every compiled node.
    pub record_bindings: bool,
    /// Fault injection for testing the checkers.
    pub corrupt: Option<Gadget>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundNode {
    Formula(Formula),
    Term(NumberTerm),
}

/// The gate computing one node under one assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateBinding {
    pub node: BoundNode,
    pub env: Vec<(String, usize)>,
    pub gate: usize,
    /// Nesting depth in the AST; larger means more local.
    pub depth: usize,
    /// Inside a recursion body the node cannot be evaluated on its own.
    pub in_recursion: bool,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub circuit: Circuit,
    pub layout: InputLayout,
    pub bindings: Vec<GateBinding>,
}

/// Compiles a closed formula over the signature of `template`.
///
/// The number functions of `template` are the inputs; their values are
/// ignored. Skeleton functions and auxiliary tables are taken as given.
pub fn compile_formula(
    f: &Formula,
    template: &RStructure,
    opts: &CompileOptions,
) -> Result<Compiled> {
    let fv = free_vars(f);
    if !fv.is_empty() {
        return Err(CompileError::Precondition(format!(
            "formula has free variables {}",
            fv.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let sig = template.signature();
    if let Some(d) = check_symbols(f, &sig).first() {
        return Err(CompileError::Precondition(d.to_string()));
    }
    if let Some(d) = check_gfr_syntax(f, &sig).first() {
        return Err(CompileError::Precondition(d.to_string()));
    }
    let layout = InputLayout::of(template);
    let mut b = CircuitBuilder::new(template.domain().clone(), FanIn::Unbounded);
    let inputs: Vec<usize> = (0..layout.len()).map(|_| b.input()).collect();
    let mut c = Compiler {
        s: template,
        domain: template.domain().clone(),
        input_syms: layout.symbols.iter().map(|(k, _)| k.clone()).collect(),
        layout: layout.clone(),
        b,
        inputs,
        env: Vec::new(),
        recs: Vec::new(),
        visible: 0,
        in_body: 0,
        depth: 0,
        opts: opts.clone(),
        bindings: Vec::new(),
    };
    let root = c.formula(f)?;
    c.b.output(root);
    let bindings = std::mem::take(&mut c.bindings);
    Ok(Compiled {
        circuit: c.b.finish()?,
        layout,
        bindings,
    })
}

struct RecCtx {
    def: Rc<RecursionDef>,
    /// `None` while the tuple is being unrolled.
    memo: HashMap<Vec<usize>, Option<usize>>,
}

struct Compiler<'s> {
    s: &'s RStructure,
    domain: Domain,
    layout: InputLayout,
    input_syms: BTreeSet<String>,
    b: CircuitBuilder,
    inputs: Vec<usize>,
    env: Vec<(String, usize)>,
    recs: Vec<RecCtx>,
    visible: usize,
    in_body: usize,
    depth: usize,
    opts: CompileOptions,
    bindings: Vec<GateBinding>,
}

impl<'s> Compiler<'s> {
    fn evaluator(&self) -> Evaluator<'s> {
        let mut ev = Evaluator::new(self.s, EvalOptions::default());
        ev.bind(&self.env);
        ev
    }

    fn konst(&mut self, v: DomainValue) -> usize {
        self.b.constant(v)
    }

    fn one(&mut self) -> usize {
        let v = self.domain.one();
        self.konst(v)
    }

    fn zero(&mut self) -> usize {
        let v = self.domain.zero();
        self.konst(v)
    }

    fn truth(&mut self, t: bool) -> usize {
        if t {
            self.one()
        } else {
            self.zero()
        }
    }

    fn not(&mut self, g: usize) -> usize {
        if self.opts.corrupt == Some(Gadget::Not) {
            return g;
        }
        let one = self.one();
        let m1 = self.domain.from_i64(-1);
        let m1 = self.konst(m1);
        let neg = self.b.mul(vec![m1, g]);
        self.b.add(vec![one, neg])
    }

    fn and(&mut self, gs: Vec<usize>) -> usize {
        if gs.is_empty() {
            return self.one();
        }
        self.b.mul(gs)
    }

    fn or(&mut self, gs: Vec<usize>) -> usize {
        let negs = gs.into_iter().map(|g| self.not(g)).collect();
        let a = self.and(negs);
        self.not(a)
    }

    fn sign(&mut self, g: usize) -> usize {
        let z = self.zero();
        self.b.less(z, g)
    }

    fn forall(&mut self, gs: Vec<usize>) -> usize {
        if gs.is_empty() {
            return self.one();
        }
        let m = if self.opts.corrupt == Some(Gadget::Forall) {
            self.b.add(gs)
        } else {
            self.b.mul(gs)
        };
        self.sign(m)
    }

    fn eq(&mut self, a: usize, b: usize) -> usize {
        let l = self.b.less(a, b);
        let nl = self.not(l);
        if self.opts.corrupt == Some(Gadget::Eq) {
            return nl;
        }
        let r = self.b.less(b, a);
        let nr = self.not(r);
        self.and(vec![nl, nr])
    }

    /// Sum of `chi[t_x is the least maximizer] * t_x`, in constant depth.
    fn max_of(&mut self, ts: &[usize]) -> usize {
        if ts.is_empty() {
            return self.zero();
        }
        let mut parts = Vec::with_capacity(ts.len());
        for (x, &tx) in ts.iter().enumerate() {
            let mut conds = Vec::with_capacity(ts.len());
            for (y, &ty) in ts.iter().enumerate() {
                if y == x {
                    continue;
                }
                let above = self.b.less(tx, ty);
                conds.push(self.not(above));
                if y < x {
                    conds.push(self.b.less(ty, tx));
                }
            }
            let w = self.and(conds);
            parts.push(self.b.mul(vec![w, tx]));
        }
        self.b.add(parts)
    }

    fn bind<F>(&mut self, vars: &[String], t: &[usize], f: F) -> Result<usize>
    where
        F: FnOnce(&mut Self) -> Result<usize>,
    {
        let base = self.env.len();
        self.env
            .extend(vars.iter().cloned().zip(t.iter().copied()));
        let r = f(self);
        self.env.truncate(base);
        r
    }

    fn record(&mut self, node: BoundNode, gate: usize) {
        if self.opts.record_bindings {
            self.bindings.push(GateBinding {
                node,
                env: self.env.clone(),
                gate,
                depth: self.depth,
                in_recursion: self.in_body > 0,
            });
        }
    }

    fn formula(&mut self, f: &Formula) -> Result<usize> {
        self.depth += 1;
        let r = self.formula_inner(f);
        self.depth -= 1;
        let g = r?;
        self.record(BoundNode::Formula(f.clone()), g);
        Ok(g)
    }

    fn formula_inner(&mut self, f: &Formula) -> Result<usize> {
        match f {
            Formula::True => Ok(self.one()),
            Formula::False => Ok(self.zero()),
            Formula::IndexEq(..) | Formula::TupleCmp(..) | Formula::HalfLe(..) => {
                let v = self.evaluator().formula(f)?;
                Ok(self.truth(v))
            }
            Formula::Rel(name, args) => {
                let vals: Vec<usize> = {
                    let ev = self.evaluator();
                    args.iter().map(|a| ev.index(a)).collect::<std::result::Result<_, _>>()?
                };
                if self.input_syms.contains(name) {
                    let pos = self.layout.position(name, &vals).expect("input symbol");
                    let x = self.inputs[pos];
                    let one = self.one();
                    Ok(self.eq(x, one))
                } else {
                    let v = self.evaluator().formula(f)?;
                    Ok(self.truth(v))
                }
            }
            Formula::NumEq(a, b) => {
                let x = self.term(a)?;
                let y = self.term(b)?;
                Ok(self.eq(x, y))
            }
            Formula::NumLt(a, b) => {
                let x = self.term(a)?;
                let y = self.term(b)?;
                Ok(self.b.less(x, y))
            }
            Formula::Not(a) => {
                let g = self.formula(a)?;
                Ok(self.not(g))
            }
            Formula::And(fs) => {
                let gs = fs.iter().map(|g| self.formula(g)).collect::<Result<Vec<_>>>()?;
                Ok(self.and(gs))
            }
            Formula::Or(fs) => {
                let gs = fs.iter().map(|g| self.formula(g)).collect::<Result<Vec<_>>>()?;
                Ok(self.or(gs))
            }
            Formula::Implies(a, b) => {
                let x = self.formula(a)?;
                let y = self.formula(b)?;
                let nx = self.not(x);
                Ok(self.or(vec![nx, y]))
            }
            Formula::Iff(a, b) => {
                let x = self.formula(a)?;
                let y = self.formula(b)?;
                let nx = self.not(x);
                let ab = self.or(vec![nx, y]);
                let ny = self.not(y);
                let ba = self.or(vec![ny, x]);
                Ok(self.and(vec![ab, ba]))
            }
            Formula::Quant(q, vs, body) => {
                let tuples = all_tuples(self.s.size(), vs.len());
                let mut gs = Vec::with_capacity(tuples.len());
                for t in &tuples {
                    gs.push(self.bind(vs, t, |c| {
                        let g = c.formula(body)?;
                        // exists x phi is not forall x not phi
                        Ok(if *q == QuantKind::Exists { c.not(g) } else { g })
                    })?);
                }
                let all = self.forall(gs);
                Ok(if *q == QuantKind::Exists {
                    self.not(all)
                } else {
                    all
                })
            }
            Formula::Gfr(def, psi) => {
                self.recs.push(RecCtx {
                    def: Rc::new((**def).clone()),
                    memo: HashMap::new(),
                });
                let saved = std::mem::replace(&mut self.visible, self.recs.len());
                let r = self.formula(psi);
                self.visible = saved;
                self.recs.pop();
                r
            }
        }
    }

    fn term(&mut self, t: &NumberTerm) -> Result<usize> {
        self.depth += 1;
        let r = self.term_inner(t);
        self.depth -= 1;
        let g = r?;
        self.record(BoundNode::Term(t.clone()), g);
        Ok(g)
    }

    fn term_inner(&mut self, t: &NumberTerm) -> Result<usize> {
        match t {
            NumberTerm::Const(l) => {
                let v = l.resolve(&self.domain).map_err(LogicError::from)?;
                Ok(self.konst(v))
            }
            NumberTerm::Apply(name, args) => {
                if self.input_syms.contains(name) {
                    let vals: Vec<usize> = {
                        let ev = self.evaluator();
                        args.iter().map(|a| ev.index(a)).collect::<std::result::Result<_, _>>()?
                    };
                    let pos = self.layout.position(name, &vals).expect("input symbol");
                    // A unary addition keeps every read a fresh gate.
                    let x = self.inputs[pos];
                    Ok(self.b.add(vec![x]))
                } else {
                    let v = self.evaluator().term(t)?;
                    Ok(self.konst(v))
                }
            }
            NumberTerm::Add(a, b) => {
                let x = self.term(a)?;
                let y = self.term(b)?;
                Ok(self.b.add(vec![x, y]))
            }
            NumberTerm::Mul(a, b) => {
                let x = self.term(a)?;
                let y = self.term(b)?;
                Ok(self.b.mul(vec![x, y]))
            }
            NumberTerm::Sign(a) => {
                let x = self.term(a)?;
                Ok(self.sign(x))
            }
            NumberTerm::Chi(f) => self.formula(f),
            NumberTerm::Agg(a) => self.aggregate(a),
            NumberTerm::RecVar(name, args) => {
                let k = self.recs[..self.visible]
                    .iter()
                    .rposition(|r| r.def.name == *name)
                    .ok_or_else(|| LogicError::UnknownSymbol(name.clone()))?;
                let vals: Vec<usize> = {
                    let ev = self.evaluator();
                    args.iter().map(|a| ev.index(a)).collect::<std::result::Result<_, _>>()?
                };
                self.unroll(k, vals)
            }
        }
    }

    fn unroll(&mut self, k: usize, vals: Vec<usize>) -> Result<usize> {
        let def = Rc::clone(&self.recs[k].def);
        match self.recs[k].memo.get(&vals) {
            Some(Some(g)) => return Ok(*g),
            Some(None) => {
                return Err(CompileError::Cycle {
                    name: def.name.clone(),
                    args: vals,
                })
            }
            None => {}
        }
        self.recs[k].memo.insert(vals.clone(), None);
        let saved_env = std::mem::replace(
            &mut self.env,
            def.params().into_iter().zip(vals.iter().copied()).collect(),
        );
        let saved_visible = std::mem::replace(&mut self.visible, k + 1);
        self.in_body += 1;
        let r = self.term(&def.body);
        self.in_body -= 1;
        self.visible = saved_visible;
        self.env = saved_env;
        let g = r?;
        self.recs[k].memo.insert(vals, Some(g));
        Ok(g)
    }

    /// Whether `f` can be decided now, from the auxiliary tables alone.
    fn input_independent(&self, f: &Formula) -> bool {
        let syms = referenced_symbols(f);
        !syms.iter().any(|s| {
            self.input_syms.contains(s) || self.recs.iter().any(|r| r.def.name == *s)
        })
    }

    fn aggregate(&mut self, a: &Aggregation) -> Result<usize> {
        let rel = a.relativizer.as_deref();
        let tuples = all_tuples(self.s.size(), a.vars.len());
        let decide_now = match rel {
            Some(r) => (a.bounded || self.in_body > 0) && self.input_independent(r),
            None => false,
        };
        if a.bounded && !decide_now {
            return Err(CompileError::Precondition(format!(
                "bounded {} over ({}) needs an input-independent relativizer",
                a.kind.name(),
                a.vars.join(" ")
            )));
        }
        if decide_now {
            let r = rel.expect("decide_now implies a relativizer");
            let mut sat = Vec::new();
            for t in &tuples {
                let base = self.env.len();
                self.env.extend(a.vars.iter().cloned().zip(t.iter().copied()));
                let ok = self.evaluator().formula(r);
                self.env.truncate(base);
                if ok? {
                    sat.push(t.clone());
                }
            }
            let all_sat = sat.len() == tuples.len();
            if a.bounded {
                let keep = sat.len().saturating_sub(2);
                sat.drain(..keep);
            }
            let mut gs = Vec::with_capacity(sat.len());
            for t in &sat {
                gs.push(self.bind(&a.vars, t, |c| c.term(&a.body))?);
            }
            return Ok(match a.kind {
                AggKind::Sum if gs.is_empty() => self.zero(),
                AggKind::Sum => self.b.add(gs),
                AggKind::Prod if gs.is_empty() => self.one(),
                AggKind::Prod => self.b.mul(gs),
                AggKind::Max => {
                    if !a.bounded && !all_sat {
                        gs.push(self.zero());
                    }
                    self.max_of(&gs)
                }
            });
        }
        let mut gs = Vec::with_capacity(tuples.len());
        for t in &tuples {
            gs.push(self.bind(&a.vars, t, |c| {
                let body = c.term(&a.body)?;
                let Some(r) = rel else {
                    return Ok(body);
                };
                let chi = c.formula(r)?;
                let weighted = c.b.mul(vec![chi, body]);
                if a.kind == AggKind::Prod {
                    // padding: chi * t + (1 - chi)
                    let pad = c.not(chi);
                    Ok(c.b.add(vec![weighted, pad]))
                } else {
                    Ok(weighted)
                }
            })?);
        }
        Ok(match a.kind {
            AggKind::Sum => self.b.add(gs),
            AggKind::Prod => self.b.mul(gs),
            AggKind::Max => self.max_of(&gs),
        })
    }
}
