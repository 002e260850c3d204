// SPDX-License-Identifier: Apache-2.0

//! Static checks: the guard discipline of recursion blocks and symbol
//! resolution against a signature.

use std::fmt;

use super::{
    free_vars_term, Aggregation, CmpKind, Formula, IndexTerm, NumberTerm, RecursionDef, Signature,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Slash-separated route from the root, e.g. `gfr f/body/sum(z)/+1`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Every recursive occurrence must read `f(x, z_1, ..., z_{i+1})` with the
/// `z` blocks bound by an enclosing aggregation whose relativizer conjoins
/// the halving guard, and no unguarded aggregation or quantifier may sit
/// between the definition and the occurrence. The remaining conjuncts of a
/// guarded relativizer must avoid the input symbols of `sig`.
pub fn check_gfr_syntax(f: &Formula, sig: &Signature) -> Vec<Diagnostic> {
    let mut c = Checker {
        sig,
        diags: Vec::new(),
        path: Vec::new(),
    };
    c.formula(f, &mut Ctx::default());
    c.diags
}

#[derive(Clone, Default)]
struct Ctx<'f> {
    /// Recursion blocks in scope; the last one is the innermost.
    defs: Vec<&'f RecursionDef>,
    /// Set while walking the body of `defs[body_of]`.
    body_of: Option<usize>,
    guarded: Vec<Vec<String>>,
    unguarded: Option<String>,
}

struct Checker<'s> {
    sig: &'s Signature,
    diags: Vec<Diagnostic>,
    path: Vec<String>,
}

fn var_list(vs: &[String]) -> String {
    vs.join(" ")
}

fn as_vars(ts: &[IndexTerm]) -> Option<Vec<String>> {
    ts.iter().map(|t| t.as_var().map(str::to_string)).collect()
}

fn flatten_and<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>) {
    match f {
        Formula::And(fs) => fs.iter().for_each(|g| flatten_and(g, out)),
        _ => out.push(f),
    }
}

fn mentions_half(f: &Formula) -> bool {
    match f {
        Formula::HalfLe(..) => true,
        Formula::And(fs) | Formula::Or(fs) => fs.iter().any(mentions_half),
        _ => false,
    }
}

/// Checks `c` against `OR_j (z_j <= y_j/2 AND AND_{k<j} z_k <= y_k)`.
fn match_guard(c: &Formula, def: &RecursionDef, zvars: &[String]) -> Result<(), String> {
    let i = def.exponent();
    let w = def.block_width();
    let need = i * w + def.rest.len();
    if zvars.len() != need {
        return Err(format!(
            "guarded aggregation binds {} variables, the recursion needs {need}",
            zvars.len()
        ));
    }
    let zb: Vec<Vec<IndexTerm>> = (0..i)
        .map(|j| zvars[j * w..(j + 1) * w].iter().map(|v| IndexTerm::Var(v.clone())).collect())
        .collect();
    let yb: Vec<Vec<IndexTerm>> = def
        .ys
        .iter()
        .map(|y| y.iter().map(|v| IndexTerm::Var(v.clone())).collect())
        .collect();
    let disjuncts: Vec<&Formula> = match c {
        Formula::Or(ds) => ds.iter().collect(),
        other => vec![other],
    };
    if disjuncts.len() != i {
        return Err(format!(
            "halving guard has {} disjuncts, expected {i}",
            disjuncts.len()
        ));
    }
    let mut seen = vec![false; i];
    for d in disjuncts {
        let mut atoms = Vec::new();
        flatten_and(d, &mut atoms);
        let halves: Vec<usize> = atoms
            .iter()
            .filter_map(|a| match a {
                Formula::HalfLe(z, y) => (0..i).find(|j| *z == zb[*j] && *y == yb[*j]),
                _ => None,
            })
            .collect();
        let [j] = halves[..] else {
            return Err("each guard disjunct needs exactly one z_j <= y_j/2 on matching blocks".into());
        };
        if seen[j] {
            return Err(format!("block {} is halved in two disjuncts", j + 1));
        }
        seen[j] = true;
        let mut rest: Vec<&Formula> = atoms
            .into_iter()
            .filter(|a| !matches!(a, Formula::HalfLe(..)))
            .collect();
        for k in 0..j {
            let want = Formula::TupleCmp(CmpKind::Le, zb[k].clone(), yb[k].clone());
            match rest.iter().position(|a| **a == want) {
                Some(p) => {
                    rest.remove(p);
                }
                None => {
                    return Err(format!(
                        "disjunct halving block {} lacks the prefix conjunct z_{} <= y_{}",
                        j + 1,
                        k + 1,
                        k + 1
                    ))
                }
            }
        }
        if !rest.is_empty() {
            return Err(format!(
                "disjunct halving block {} has extra conjuncts",
                j + 1
            ));
        }
    }
    Ok(())
}

impl<'s> Checker<'s> {
    fn report(&mut self, message: String) {
        self.diags.push(Diagnostic {
            path: if self.path.is_empty() {
                ".".into()
            } else {
                self.path.join("/")
            },
            message,
        });
    }

    fn step<F: FnOnce(&mut Self)>(&mut self, name: String, f: F) {
        self.path.push(name);
        f(self);
        self.path.pop();
    }

    fn formula<'f>(&mut self, f: &'f Formula, ctx: &mut Ctx<'f>) {
        match f {
            Formula::True
            | Formula::False
            | Formula::IndexEq(..)
            | Formula::TupleCmp(..)
            | Formula::HalfLe(..)
            | Formula::Rel(..) => {}
            Formula::NumEq(a, b) | Formula::NumLt(a, b) => {
                let op = if matches!(f, Formula::NumEq(..)) { "=" } else { "<" };
                self.step(format!("{op}0"), |c| c.term(a, ctx));
                self.step(format!("{op}1"), |c| c.term(b, ctx));
            }
            Formula::Not(a) => self.step("not".into(), |c| c.formula(a, ctx)),
            Formula::And(fs) | Formula::Or(fs) => {
                let op = if matches!(f, Formula::And(..)) { "and" } else { "or" };
                for (k, g) in fs.iter().enumerate() {
                    self.step(format!("{op}{k}"), |c| c.formula(g, ctx));
                }
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                let op = if matches!(f, Formula::Implies(..)) { "->" } else { "<->" };
                self.step(format!("{op}0"), |c| c.formula(a, ctx));
                self.step(format!("{op}1"), |c| c.formula(b, ctx));
            }
            Formula::Quant(q, vs, body) => {
                let name = format!(
                    "{}({})",
                    if *q == super::QuantKind::Exists { "exists" } else { "forall" },
                    var_list(vs)
                );
                let mut inner = ctx.clone();
                if inner.body_of.is_some() && inner.unguarded.is_none() {
                    inner.unguarded = Some(name.clone());
                }
                self.step(name, |c| c.formula(body, &mut inner));
            }
            Formula::Gfr(def, psi) => self.step(format!("gfr {}", def.name), |c| {
                c.definition(def, ctx);
                let mut inner = ctx.clone();
                inner.defs.push(&**def);
                c.step("in".into(), |c| c.formula(psi, &mut inner));
            }),
        }
    }

    fn definition<'f>(&mut self, def: &'f RecursionDef, ctx: &Ctx<'f>) {
        if def.ys.is_empty() {
            self.report("recursion needs at least one halving block".into());
        }
        let w = def.block_width();
        if w == 0 || def.ys.iter().any(|y| y.len() != w) {
            self.report("halving blocks must share one positive width".into());
        }
        let params = def.params();
        for (k, p) in params.iter().enumerate() {
            if params[..k].contains(p) {
                self.report(format!("parameter {p} repeated"));
            }
        }
        let mut inner = ctx.clone();
        inner.defs.push(def);
        inner.body_of = Some(inner.defs.len() - 1);
        inner.guarded.clear();
        inner.unguarded = None;
        self.step("body".into(), |c| c.term(&def.body, &mut inner));
        let extra: Vec<String> = free_vars_term(&def.body)
            .into_iter()
            .filter(|v| !params.contains(v))
            .collect();
        if !extra.is_empty() {
            self.report(format!("body has free variables {}", extra.join(", ")));
        }
    }

    fn term<'f>(&mut self, t: &'f NumberTerm, ctx: &mut Ctx<'f>) {
        match t {
            NumberTerm::Const(_) | NumberTerm::Apply(..) => {}
            NumberTerm::Add(a, b) | NumberTerm::Mul(a, b) => {
                let op = if matches!(t, NumberTerm::Add(..)) { "+" } else { "*" };
                self.step(format!("{op}0"), |c| c.term(a, ctx));
                self.step(format!("{op}1"), |c| c.term(b, ctx));
            }
            NumberTerm::Sign(a) => self.step("sign".into(), |c| c.term(a, ctx)),
            NumberTerm::Chi(f) => self.step("chi".into(), |c| c.formula(f, ctx)),
            NumberTerm::Agg(a) => self.aggregation(a, ctx),
            NumberTerm::RecVar(name, args) => self.occurrence(name, args, ctx),
        }
    }

    fn aggregation<'f>(&mut self, a: &'f Aggregation, ctx: &mut Ctx<'f>) {
        let name = format!(
            "{}{}({})",
            if a.bounded { "b" } else { "" },
            a.kind.name(),
            var_list(&a.vars)
        );
        self.step(name.clone(), |c| {
            let mut inner = ctx.clone();
            let mut guarded = false;
            if let (Some(k), Some(r)) = (ctx.body_of, a.relativizer.as_deref()) {
                let def = ctx.defs[k];
                let mut conj = Vec::new();
                flatten_and(r, &mut conj);
                let mut failure = None;
                let mut xi = Vec::new();
                for cj in conj {
                    if guarded {
                        xi.push(cj);
                        continue;
                    }
                    match match_guard(cj, def, &a.vars) {
                        Ok(()) => guarded = true,
                        Err(e) => {
                            if mentions_half(cj) && failure.is_none() {
                                failure = Some(e);
                            }
                            xi.push(cj);
                        }
                    }
                }
                if guarded {
                    if def.bounded && !a.bounded {
                        c.report(format!(
                            "{} is a bounded recursion but this guarded aggregation is unbounded",
                            def.name
                        ));
                    }
                    for (p, x) in xi.iter().enumerate() {
                        c.step(format!("rel{p}"), |c| c.side_condition(x, def));
                    }
                    inner.guarded.push(a.vars.clone());
                } else if let Some(e) = failure {
                    c.step("rel".into(), |c| c.report(e));
                }
            }
            if !guarded {
                if ctx.body_of.is_some() && inner.unguarded.is_none() {
                    inner.unguarded = Some(name.clone());
                }
                if let Some(r) = &a.relativizer {
                    c.step("rel".into(), |c| c.formula(r, &mut inner));
                }
            }
            c.step("term".into(), |c| c.term(&a.body, &mut inner));
        });
    }

    /// The `xi` part of a guarded relativizer.
    fn side_condition(&mut self, f: &Formula, def: &RecursionDef) {
        let mut syms = Vec::new();
        symbols_formula(f, &mut syms);
        for (kind, name) in syms {
            match kind {
                SymbolKind::Table if self.sig.number.contains_key(&name) => self.report(format!(
                    "guard side condition uses input symbol {name}"
                )),
                SymbolKind::Rec if name == def.name => {
                    self.report(format!("guard side condition calls {name}"))
                }
                _ => {}
            }
        }
    }

    fn occurrence(&mut self, name: &str, args: &[IndexTerm], ctx: &Ctx<'_>) {
        let Some(pos) = ctx.defs.iter().rposition(|d| d.name == name) else {
            self.report(format!("{name} is not a recursion symbol in scope"));
            return;
        };
        let def = ctx.defs[pos];
        if args.len() != def.arity() {
            self.report(format!(
                "{name} takes {} arguments, got {}",
                def.arity(),
                args.len()
            ));
            return;
        }
        let Some(k) = ctx.body_of else {
            return;
        };
        if pos != k {
            if pos < k {
                self.report(format!(
                    "{name} belongs to an enclosing recursion and may not occur in this body"
                ));
            }
            return;
        }
        if let Some(b) = &ctx.unguarded {
            self.report(format!("{name} occurs under unguarded {b}"));
            return;
        }
        if ctx.guarded.is_empty() {
            self.report(format!("{name} occurs outside every guarded aggregation"));
            return;
        }
        let Some(names) = as_vars(args) else {
            self.report(format!("{name} must be applied to variables"));
            return;
        };
        let nx = def.x.len();
        if names[..nx] != def.x[..] {
            self.report(format!(
                "{name} must pass its first parameters {} unchanged",
                var_list(&def.x)
            ));
            return;
        }
        if !ctx.guarded.iter().any(|g| *g == names[nx..]) {
            self.report(format!(
                "{name} arguments {} are not the variables of an enclosing guarded aggregation",
                var_list(&names[nx..])
            ));
        }
    }
}

/// Sort of a symbol occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Skeleton,
    Table,
    Rec,
}

fn symbols_index(t: &IndexTerm, out: &mut Vec<(SymbolKind, String, usize)>) {
    if let IndexTerm::App(n, args) = t {
        out.push((SymbolKind::Skeleton, n.clone(), args.len()));
        args.iter().for_each(|a| symbols_index(a, out));
    }
}

fn symbols_term_full(t: &NumberTerm, out: &mut Vec<(SymbolKind, String, usize)>) {
    match t {
        NumberTerm::Const(_) => {}
        NumberTerm::Apply(n, args) => {
            out.push((SymbolKind::Table, n.clone(), args.len()));
            args.iter().for_each(|a| symbols_index(a, out));
        }
        NumberTerm::RecVar(n, args) => {
            out.push((SymbolKind::Rec, n.clone(), args.len()));
            args.iter().for_each(|a| symbols_index(a, out));
        }
        NumberTerm::Add(a, b) | NumberTerm::Mul(a, b) => {
            symbols_term_full(a, out);
            symbols_term_full(b, out);
        }
        NumberTerm::Sign(a) => symbols_term_full(a, out),
        NumberTerm::Chi(f) => symbols_formula_full(f, out),
        NumberTerm::Agg(a) => {
            if let Some(r) = &a.relativizer {
                symbols_formula_full(r, out);
            }
            symbols_term_full(&a.body, out);
        }
    }
}

fn symbols_formula_full(f: &Formula, out: &mut Vec<(SymbolKind, String, usize)>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::IndexEq(a, b) => {
            symbols_index(a, out);
            symbols_index(b, out);
        }
        Formula::TupleCmp(_, a, b) | Formula::HalfLe(a, b) => {
            a.iter().chain(b).for_each(|t| symbols_index(t, out))
        }
        Formula::Rel(n, args) => {
            out.push((SymbolKind::Table, n.clone(), args.len()));
            args.iter().for_each(|a| symbols_index(a, out));
        }
        Formula::NumEq(a, b) | Formula::NumLt(a, b) => {
            symbols_term_full(a, out);
            symbols_term_full(b, out);
        }
        Formula::Not(a) => symbols_formula_full(a, out),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| symbols_formula_full(g, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            symbols_formula_full(a, out);
            symbols_formula_full(b, out);
        }
        Formula::Quant(_, _, body) => symbols_formula_full(body, out),
        Formula::Gfr(def, psi) => {
            symbols_term_full(&def.body, out);
            symbols_formula_full(psi, out);
        }
    }
}

fn symbols_formula(f: &Formula, out: &mut Vec<(SymbolKind, String)>) {
    let mut full = Vec::new();
    symbols_formula_full(f, &mut full);
    out.extend(full.into_iter().map(|(k, n, _)| (k, n)));
}

/// Names of all skeleton functions, tables and recursion symbols that
/// occur in `f`.
/// Every symbol occurrence in `f` with its sort and argument count.
pub fn symbol_uses(f: &Formula) -> Vec<(SymbolKind, String, usize)> {
    let mut full = Vec::new();
    symbols_formula_full(f, &mut full);
    full
}

pub fn referenced_symbols(f: &Formula) -> std::collections::BTreeSet<String> {
    let mut full = Vec::new();
    symbols_formula_full(f, &mut full);
    full.into_iter().map(|(_, n, _)| n).collect()
}

pub fn referenced_symbols_term(t: &NumberTerm) -> std::collections::BTreeSet<String> {
    let mut full = Vec::new();
    symbols_term_full(t, &mut full);
    full.into_iter().map(|(_, n, _)| n).collect()
}

/// Unknown symbols and arity mismatches against `sig`. Recursion symbols
/// are resolved by the recursion checker, not here.
pub fn check_symbols(f: &Formula, sig: &Signature) -> Vec<Diagnostic> {
    let mut full = Vec::new();
    symbols_formula_full(f, &mut full);
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (kind, name, arity) in full {
        let declared = match kind {
            SymbolKind::Skeleton => sig.skeleton.get(&name).copied(),
            SymbolKind::Table => sig.table_arity(&name),
            SymbolKind::Rec => continue,
        };
        let message = match declared {
            None => format!("unknown symbol {name}"),
            Some(a) if a != arity => format!("{name} takes {a} arguments, got {arity}"),
            Some(_) => continue,
        };
        if seen.insert(message.clone()) {
            out.push(Diagnostic {
                path: name,
                message,
            });
        }
    }
    out
}
