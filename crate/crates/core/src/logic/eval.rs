// SPDX-License-Identifier: Apache-2.0

//! Tarskian evaluation of formulas and number terms.
//!
//! Recursively defined functions are evaluated on demand. A value demanded
//! while it is still being computed is reported as non-well-founded instead
//! of looping. Recursion depth is measured as the longest chain of nested
//! calls below each top-level call; it does not depend on memoization.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::Zero;

use super::structure::flat_index;
use super::{
    AggKind, Aggregation, CmpKind, Formula, IndexTerm, LogicError, NumberTerm, QuantKind,
    RStructure, RecursionDef, Result, Table,
};
use crate::algebra::DomainValue;
use crate::numeric::{fo_half_leq, numval};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalOptions {
    pub memoize: bool,
    /// Enumerate only tuples admitted by a sparse relation conjunct.
    pub prune: bool,
    /// Cap on non-degenerate recursion depth; `None` uses the guard bound
    /// `(H+1)^i - 1` with `H` the bit length of the largest block value.
    pub depth_cap: Option<usize>,
    /// Hard limit on nested calls, independent of the guard.
    pub max_call_depth: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            memoize: true,
            prune: true,
            depth_cap: None,
            max_call_depth: 20_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GfrStats {
    pub name: String,
    /// Body evaluations.
    pub calls: usize,
    pub memo_hits: usize,
    /// Longest chain of nested recursive calls (edges).
    pub max_depth: usize,
    /// Longest chain counting only steps that strictly halve some block.
    pub max_nd_depth: usize,
    pub cap: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// One entry per evaluated recursion block, in completion order.
    pub gfr: Vec<GfrStats>,
}

impl EvalStats {
    pub fn max_depth(&self) -> usize {
        self.gfr.iter().map(|g| g.max_depth).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GfrResult {
    pub value: DomainValue,
    pub stats: GfrStats,
}

enum Slot {
    Busy,
    Done(DomainValue, usize, usize),
}

struct Frame {
    args: Vec<usize>,
    height: usize,
    nd_height: usize,
}

struct RecState {
    def: Rc<RecursionDef>,
    memo: HashMap<Vec<usize>, Slot>,
    active: HashSet<Vec<usize>>,
    frames: Vec<Frame>,
    stats: GfrStats,
}

enum Cands {
    All,
    /// Sorted lexicographically, without duplicates.
    Listed(Vec<Vec<usize>>),
}

pub struct Evaluator<'s> {
    s: &'s RStructure,
    opts: EvalOptions,
    env: Vec<(String, usize)>,
    recs: Vec<RecState>,
    /// Recursion blocks visible to `RecVar` lookup are `recs[..visible]`.
    visible: usize,
    stats: EvalStats,
}

pub fn eval_term(s: &RStructure, env: &[(String, usize)], t: &NumberTerm) -> Result<DomainValue> {
    let mut ev = Evaluator::new(s, EvalOptions::default());
    ev.bind(env);
    ev.term(t)
}

pub fn eval_formula(s: &RStructure, env: &[(String, usize)], f: &Formula) -> Result<bool> {
    Ok(eval_formula_with(s, env, f, EvalOptions::default())?.0)
}

pub fn eval_formula_with(
    s: &RStructure,
    env: &[(String, usize)],
    f: &Formula,
    opts: EvalOptions,
) -> Result<(bool, EvalStats)> {
    let mut ev = Evaluator::new(s, opts);
    ev.bind(env);
    let v = ev.formula(f)?;
    Ok((v, ev.into_stats()))
}

/// Evaluates `def` at one argument tuple.
pub fn eval_gfr(
    s: &RStructure,
    def: &RecursionDef,
    args: &[usize],
    opts: EvalOptions,
) -> Result<GfrResult> {
    let mut ev = Evaluator::new(s, opts);
    ev.push_rec(def);
    let r = ev.call_values(0, args.to_vec());
    let stats = ev.pop_rec();
    Ok(GfrResult { value: r?, stats })
}

/// `(H+1)^i - 1` with `H` the bit length of `n^w - 1`.
pub fn guard_depth_bound(n: usize, width: usize, i: usize) -> usize {
    let top = BigUint::from(n).pow(width as u32);
    let h = if top.is_zero() {
        0
    } else {
        (top - 1u32).bits() as usize
    };
    (h + 1)
        .checked_pow(i as u32)
        .map_or(usize::MAX, |v| v - 1)
}

fn next_tuple(t: &mut [usize], n: usize) -> bool {
    for slot in t.iter_mut().rev() {
        *slot += 1;
        if *slot < n {
            return true;
        }
        *slot = 0;
    }
    false
}

fn flatten_and<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>) {
    match f {
        Formula::And(fs) => fs.iter().for_each(|g| flatten_and(g, out)),
        _ => out.push(f),
    }
}

impl<'s> Evaluator<'s> {
    pub fn new(s: &'s RStructure, opts: EvalOptions) -> Evaluator<'s> {
        Evaluator {
            s,
            opts,
            env: Vec::new(),
            recs: Vec::new(),
            visible: 0,
            stats: EvalStats::default(),
        }
    }

    pub fn bind(&mut self, env: &[(String, usize)]) {
        self.env.extend(env.iter().cloned());
    }

    pub fn into_stats(self) -> EvalStats {
        self.stats
    }

    fn lookup(&self, v: &str) -> Result<usize> {
        self.env
            .iter()
            .rev()
            .find(|(name, _)| name == v)
            .map(|(_, x)| *x)
            .ok_or_else(|| LogicError::UnboundVariable(v.to_string()))
    }

    pub fn index(&self, t: &IndexTerm) -> Result<usize> {
        match t {
            IndexTerm::Var(v) => self.lookup(v),
            IndexTerm::App(name, args) => {
                let f = self
                    .s
                    .skeleton_fn(name)
                    .ok_or_else(|| LogicError::UnknownSymbol(name.clone()))?;
                check_arity(name, f.arity, args.len())?;
                let vals = self.indices(args)?;
                Ok(f.values[flat_index(self.s.size(), &vals)])
            }
        }
    }

    fn indices(&self, ts: &[IndexTerm]) -> Result<Vec<usize>> {
        ts.iter().map(|t| self.index(t)).collect()
    }

    fn table(&self, name: &str, nargs: usize) -> Result<&'s Table> {
        let t = self
            .s
            .table(name)
            .ok_or_else(|| LogicError::UnknownSymbol(name.to_string()))?;
        check_arity(name, t.arity(), nargs)?;
        Ok(t)
    }

    pub fn term(&mut self, t: &NumberTerm) -> Result<DomainValue> {
        let d = self.s.domain();
        match t {
            NumberTerm::Const(l) => Ok(l.resolve(d)?),
            NumberTerm::Apply(name, args) => {
                let tab = self.table(name, args.len())?;
                let vals = self.indices(args)?;
                Ok(tab.get(self.s.size(), &vals).clone())
            }
            NumberTerm::Add(a, b) => {
                let x = self.term(a)?;
                let y = self.term(b)?;
                Ok(d.add(&x, &y)?)
            }
            NumberTerm::Mul(a, b) => {
                let x = self.term(a)?;
                if d.is_zero(&x) {
                    return Ok(x);
                }
                let y = self.term(b)?;
                Ok(d.mul(&x, &y)?)
            }
            NumberTerm::Sign(a) => {
                let x = self.term(a)?;
                Ok(d.sign(&x)?)
            }
            NumberTerm::Chi(f) => Ok(if self.formula(f)? { d.one() } else { d.zero() }),
            NumberTerm::Agg(a) => self.aggregate(a),
            NumberTerm::RecVar(name, args) => {
                let k = self.find_rec(name)?;
                let vals = self.indices(args)?;
                self.call_values(k, vals)
            }
        }
    }

    pub fn formula(&mut self, f: &Formula) -> Result<bool> {
        match f {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::IndexEq(a, b) => Ok(self.index(a)? == self.index(b)?),
            Formula::TupleCmp(k, a, b) => {
                let x = self.indices(a)?;
                let y = self.indices(b)?;
                if x.len() != y.len() {
                    return Err(LogicError::TupleLength(x.len(), y.len()));
                }
                Ok(match k {
                    CmpKind::Lt => x < y,
                    CmpKind::Le => x <= y,
                })
            }
            Formula::HalfLe(a, b) => {
                let x = self.indices(a)?;
                let y = self.indices(b)?;
                if x.len() != y.len() {
                    return Err(LogicError::TupleLength(x.len(), y.len()));
                }
                if self.s.size() < 2 {
                    return Ok(true);
                }
                fo_half_leq(&x, &y, self.s.size())
                    .map_err(|e| LogicError::Unsupported(e.to_string()))
            }
            Formula::Rel(name, args) => {
                let tab = self.table(name, args.len())?;
                let vals = self.indices(args)?;
                Ok(self.s.domain().is_one(tab.get(self.s.size(), &vals)))
            }
            Formula::NumEq(a, b) => {
                let x = self.term(a)?;
                let y = self.term(b)?;
                Ok(x == y)
            }
            Formula::NumLt(a, b) => {
                let x = self.term(a)?;
                let y = self.term(b)?;
                Ok(self.s.domain().lt(&x, &y)?)
            }
            Formula::Not(a) => Ok(!self.formula(a)?),
            Formula::And(fs) => {
                for g in fs {
                    if !self.formula(g)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(fs) => {
                for g in fs {
                    if self.formula(g)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Implies(a, b) => Ok(!self.formula(a)? || self.formula(b)?),
            Formula::Iff(a, b) => Ok(self.formula(a)? == self.formula(b)?),
            Formula::Quant(q, vs, body) => self.quantify(*q, vs, body),
            Formula::Gfr(def, psi) => {
                self.push_rec(def);
                let r = self.formula(psi);
                let stats = self.pop_rec();
                self.stats.gfr.push(stats);
                r
            }
        }
    }

    fn quantify(&mut self, q: QuantKind, vs: &[String], body: &Formula) -> Result<bool> {
        let guard = match (q, body) {
            (QuantKind::Exists, _) => Some(body),
            (QuantKind::Forall, Formula::Implies(a, _)) => Some(&**a),
            _ => None,
        };
        let cands = self.candidates(vs, guard)?;
        let want = q == QuantKind::Exists;
        let mut found = false;
        self.scan(vs, &cands, false, |ev, _| {
            if ev.formula(body)? == want {
                found = true;
                return Ok(false);
            }
            Ok(true)
        })?;
        Ok(if want { found } else { !found })
    }

    fn aggregate(&mut self, a: &Aggregation) -> Result<DomainValue> {
        let d = self.s.domain().clone();
        let rel = a.relativizer.as_deref();
        let cands = self.candidates(&a.vars, rel)?;
        let total = self
            .s
            .size()
            .checked_pow(a.vars.len() as u32)
            .unwrap_or(usize::MAX);
        let mut acc = match a.kind {
            AggKind::Sum | AggKind::Max => d.zero(),
            AggKind::Prod => d.one(),
        };
        let mut first = true;
        let mut satisfied = 0usize;
        let kind = a.kind;
        self.scan(&a.vars, &cands, a.bounded, |ev, _| {
            if let Some(r) = rel {
                if !ev.formula(r)? {
                    return Ok(true);
                }
            }
            satisfied += 1;
            let v = ev.term(&a.body)?;
            acc = match kind {
                AggKind::Sum => d.add(&acc, &v)?,
                AggKind::Prod => d.mul(&acc, &v)?,
                AggKind::Max if first || d.lt(&acc, &v)? => v,
                AggKind::Max => acc.clone(),
            };
            first = false;
            Ok(!(a.bounded && satisfied == 2))
        })?;
        // A relativized max also sees the 0 contributed by failing tuples.
        if kind == AggKind::Max
            && rel.is_some()
            && !a.bounded
            && satisfied > 0
            && satisfied < total
            && d.lt(&acc, &d.zero())?
        {
            acc = d.zero();
        }
        Ok(acc)
    }

    /// Runs `f` on every candidate tuple with `vars` bound, until it
    /// returns `false`.
    fn scan<F>(&mut self, vars: &[String], cands: &Cands, descending: bool, mut f: F) -> Result<()>
    where
        F: FnMut(&mut Self, &[usize]) -> Result<bool>,
    {
        let base = self.env.len();
        self.env.extend(vars.iter().map(|v| (v.clone(), 0)));
        let mut run = |ev: &mut Self, t: &[usize]| {
            for (k, x) in t.iter().enumerate() {
                ev.env[base + k].1 = *x;
            }
            f(ev, t)
        };
        let n = self.s.size();
        let k = vars.len();
        let r = (|| -> Result<()> {
            match cands {
                Cands::Listed(ts) => {
                    let order: Box<dyn Iterator<Item = &Vec<usize>>> = if descending {
                        Box::new(ts.iter().rev())
                    } else {
                        Box::new(ts.iter())
                    };
                    for t in order {
                        if !run(self, t)? {
                            break;
                        }
                    }
                }
                Cands::All if n == 0 && k > 0 => {}
                Cands::All if descending => {
                    let mut t = vec![n.saturating_sub(1); k];
                    loop {
                        if !run(self, &t)? || !prev_tuple(&mut t, n) {
                            break;
                        }
                    }
                }
                Cands::All => {
                    let mut t = vec![0; k];
                    loop {
                        if !run(self, &t)? || !next_tuple(&mut t, n) {
                            break;
                        }
                    }
                }
            }
            Ok(())
        })();
        self.env.truncate(base);
        r
    }

    /// A superset of the tuples over `vars` satisfying `guard`.
    fn candidates(&self, vars: &[String], guard: Option<&Formula>) -> Result<Cands> {
        let Some(g) = guard else {
            return Ok(Cands::All);
        };
        if !self.opts.prune || vars.is_empty() {
            return Ok(Cands::All);
        }
        let mut conj = Vec::new();
        flatten_and(g, &mut conj);
        for c in conj {
            let Formula::Rel(name, args) = c else { continue };
            if let Some(ts) = self.rel_candidates(vars, name, args)? {
                return Ok(Cands::Listed(ts));
            }
        }
        Ok(Cands::All)
    }

    fn rel_candidates(
        &self,
        vars: &[String],
        name: &str,
        args: &[IndexTerm],
    ) -> Result<Option<Vec<Vec<usize>>>> {
        let Some(Table::Sparse {
            default, entries, ..
        }) = self.s.table(name)
        else {
            return Ok(None);
        };
        let d = self.s.domain();
        if d.is_one(default) {
            return Ok(None);
        }
        check_arity(name, self.s.table(name).map_or(0, |t| t.arity()), args.len())?;
        // Each argument position either names a scanned variable or is fixed.
        let mut slots = Vec::with_capacity(args.len());
        for a in args {
            match a.as_var().and_then(|v| vars.iter().position(|w| w == v)) {
                Some(k) => slots.push(Err(k)),
                None => {
                    if mentions_any(a, vars) {
                        return Ok(None);
                    }
                    slots.push(Ok(self.index(a)?));
                }
            }
        }
        if (0..vars.len()).any(|k| !slots.contains(&Err(k))) {
            return Ok(None);
        }
        let prefix: Vec<usize> = slots.iter().map_while(|s| s.ok()).collect();
        let mut lo = prefix.clone();
        lo.resize(args.len(), 0);
        let mut hi = prefix.clone();
        hi.resize(args.len(), self.s.size().saturating_sub(1));
        let mut out = BTreeSet::new();
        'entry: for (key, v) in entries.range(lo..=hi) {
            if !d.is_one(v) {
                continue;
            }
            let mut t = vec![usize::MAX; vars.len()];
            for (slot, x) in slots.iter().zip(key) {
                match slot {
                    Ok(fixed) if fixed != x => continue 'entry,
                    Ok(_) => {}
                    Err(k) if t[*k] == usize::MAX => t[*k] = *x,
                    Err(k) if t[*k] != *x => continue 'entry,
                    Err(_) => {}
                }
            }
            out.insert(t);
        }
        Ok(Some(out.into_iter().collect()))
    }

    fn find_rec(&self, name: &str) -> Result<usize> {
        self.recs[..self.visible]
            .iter()
            .rposition(|r| r.def.name == name)
            .ok_or_else(|| LogicError::UnknownSymbol(name.to_string()))
    }

    fn push_rec(&mut self, def: &RecursionDef) {
        let cap = self.opts.depth_cap.unwrap_or_else(|| {
            guard_depth_bound(self.s.size(), def.block_width(), def.exponent())
        });
        self.recs.push(RecState {
            def: Rc::new(def.clone()),
            memo: HashMap::new(),
            active: HashSet::new(),
            frames: Vec::new(),
            stats: GfrStats {
                name: def.name.clone(),
                cap,
                ..GfrStats::default()
            },
        });
        self.visible = self.recs.len();
    }

    fn pop_rec(&mut self) -> GfrStats {
        let st = self.recs.pop().expect("balanced push/pop").stats;
        self.visible = self.recs.len();
        st
    }

    fn call_values(&mut self, k: usize, vals: Vec<usize>) -> Result<DomainValue> {
        let def = Rc::clone(&self.recs[k].def);
        check_arity(&def.name, def.arity(), vals.len())?;
        if vals.iter().any(|v| *v >= self.s.size()) {
            return Err(LogicError::Unsupported(format!(
                "{} applied outside the universe: {vals:?}",
                def.name
            )));
        }
        let non_wf = || LogicError::NonWellFounded {
            name: def.name.clone(),
            args: vals.clone(),
        };
        if self.opts.memoize {
            match self.recs[k].memo.get(&vals) {
                Some(Slot::Busy) => return Err(non_wf()),
                Some(Slot::Done(v, h, nd)) => {
                    let (v, h, nd) = (v.clone(), *h, *nd);
                    self.recs[k].stats.memo_hits += 1;
                    self.record_child(k, &vals, h, nd);
                    return Ok(v);
                }
                None => {}
            }
            self.recs[k].memo.insert(vals.clone(), Slot::Busy);
        } else if !self.recs[k].active.insert(vals.clone()) {
            return Err(non_wf());
        }
        let stack = self.recs[k].frames.len();
        if stack >= self.opts.max_call_depth {
            return Err(LogicError::DepthCap {
                name: def.name.clone(),
                depth: stack + 1,
                cap: self.opts.max_call_depth,
            });
        }
        self.recs[k].stats.calls += 1;
        self.recs[k].frames.push(Frame {
            args: vals.clone(),
            height: 0,
            nd_height: 0,
        });
        let params = def.params();
        let saved_env = std::mem::replace(
            &mut self.env,
            params.into_iter().zip(vals.iter().copied()).collect(),
        );
        let saved_visible = std::mem::replace(&mut self.visible, k + 1);
        let r = self.term(&def.body);
        self.env = saved_env;
        self.visible = saved_visible;
        let frame = self.recs[k].frames.pop().expect("frame pushed above");
        self.recs[k].active.remove(&vals);
        let v = r?;
        let cap = self.recs[k].stats.cap;
        if frame.nd_height > cap {
            return Err(LogicError::DepthCap {
                name: def.name.clone(),
                depth: frame.nd_height,
                cap,
            });
        }
        if self.opts.memoize {
            self.recs[k].memo.insert(
                vals.clone(),
                Slot::Done(v.clone(), frame.height, frame.nd_height),
            );
        }
        self.record_child(k, &vals, frame.height, frame.nd_height);
        Ok(v)
    }

    fn record_child(&mut self, k: usize, vals: &[usize], h: usize, nd: usize) {
        let n = self.s.size();
        let st = &mut self.recs[k];
        match st.frames.last_mut() {
            Some(parent) => {
                let step = usize::from(halving_step(&st.def, n, &parent.args, vals));
                parent.height = parent.height.max(h + 1);
                parent.nd_height = parent.nd_height.max(nd + step);
            }
            None => {
                st.stats.max_depth = st.stats.max_depth.max(h);
                st.stats.max_nd_depth = st.stats.max_nd_depth.max(nd);
            }
        }
    }
}

fn prev_tuple(t: &mut [usize], n: usize) -> bool {
    for slot in t.iter_mut().rev() {
        if *slot > 0 {
            *slot -= 1;
            return true;
        }
        *slot = n - 1;
    }
    false
}

fn mentions_any(t: &IndexTerm, vars: &[String]) -> bool {
    match t {
        IndexTerm::Var(v) => vars.contains(v),
        IndexTerm::App(_, args) => args.iter().any(|a| mentions_any(a, vars)),
    }
}

fn check_arity(name: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(LogicError::Arity {
            symbol: name.to_string(),
            expected,
            got,
        });
    }
    Ok(())
}

/// Whether the call from `y` to `z` strictly halves a positive block `j`
/// while keeping all earlier blocks from growing.
fn halving_step(def: &RecursionDef, n: usize, y: &[usize], z: &[usize]) -> bool {
    let w = def.block_width();
    let off = def.x.len();
    if n < 2 || w == 0 {
        return false;
    }
    let block = |t: &[usize], j: usize| {
        numval(&t[off + j * w..off + (j + 1) * w], n).expect("digits below universe size")
    };
    for j in 0..def.exponent() {
        let (yj, zj) = (block(y, j), block(z, j));
        if !yj.is_zero() && zj.clone() * 2u32 <= yj {
            return true;
        }
        if zj > yj {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Domain;
    use crate::logic::{vars, Literal};
    use proptest::prelude::*;

    fn graph(rows: &[[i64; 2]]) -> RStructure {
        let d = Domain::integers();
        let mut s = RStructure::new(d.clone(), 2);
        s.set_number_fn("E", 2, |a| d.from_i64(rows[a[0]][a[1]])).unwrap();
        s
    }

    /// exists x forall y (x != y -> sum_a E(x,a) > 2 * sum_b E(y,b))
    fn weighted_sentence() -> Formula {
        Formula::exists(
            &["x"],
            Formula::forall(
                &["y"],
                Formula::implies(
                    Formula::not(Formula::IndexEq(IndexTerm::var("x"), IndexTerm::var("y"))),
                    Formula::NumLt(
                        NumberTerm::mul(
                            NumberTerm::int(2),
                            NumberTerm::sum(&["b"], NumberTerm::apply("E", vars(&["y", "b"]))),
                        ),
                        NumberTerm::sum(&["a"], NumberTerm::apply("E", vars(&["x", "a"]))),
                    ),
                ),
            ),
        )
    }

    #[test]
    fn sum_over_row() {
        let s = graph(&[[1, 2], [0, 0]]);
        let t = NumberTerm::sum(&["a"], NumberTerm::apply("E", vars(&["x", "a"])));
        let v = eval_term(&s, &[("x".into(), 0)], &t).unwrap();
        assert_eq!(v, DomainValue::int(3));
    }

    #[test]
    fn trivial_terms() {
        let s = graph(&[[0, 0], [0, 0]]);
        let t = NumberTerm::Sign(Box::new(NumberTerm::add(NumberTerm::int(-2), NumberTerm::int(0))));
        assert_eq!(eval_term(&s, &[], &t).unwrap(), DomainValue::int(0));
        let p = NumberTerm::agg(AggKind::Prod, false, &["a"], Some(Formula::False), NumberTerm::int(5));
        assert_eq!(eval_term(&s, &[], &p).unwrap(), DomainValue::int(1));
        let f = Formula::forall(&["x"], Formula::IndexEq(IndexTerm::var("x"), IndexTerm::var("x")));
        assert!(eval_formula(&s, &[], &f).unwrap());
    }

    #[test]
    fn weighted_graph_sentence() {
        assert!(eval_formula(&graph(&[[4, 6], [1, 2]]), &[], &weighted_sentence()).unwrap());
        assert!(!eval_formula(&graph(&[[2, 3], [1, 2]]), &[], &weighted_sentence()).unwrap());
    }

    #[test]
    fn errors() {
        let s = graph(&[[0, 0], [0, 0]]);
        let t = NumberTerm::apply("E", vars(&["x", "a"]));
        assert_eq!(
            eval_term(&s, &[], &t),
            Err(LogicError::UnboundVariable("x".into()))
        );
        let t = NumberTerm::apply("E", vars(&["x"]));
        assert!(matches!(
            eval_term(&s, &[("x".into(), 0)], &t),
            Err(LogicError::Arity { .. })
        ));
        let t = NumberTerm::apply("W", vars(&["x"]));
        assert!(matches!(
            eval_term(&s, &[("x".into(), 0)], &t),
            Err(LogicError::UnknownSymbol(_))
        ));
    }

    fn line(n: usize) -> RStructure {
        let d = Domain::integers();
        let mut s = RStructure::new(d.clone(), n);
        s.set_number_fn("id", 1, |a| d.from_i64(a[0] as i64)).unwrap();
        s.set_aux(
            "even",
            Table::relation(&d, 1, (0..n).filter(|x| x % 2 == 0).map(|x| vec![x])),
        )
        .unwrap();
        s
    }

    #[test]
    fn bounded_aggregations() {
        let s = line(4);
        let bsum = |rel: Formula, kind| {
            NumberTerm::agg(kind, true, &["x"], Some(rel), NumberTerm::apply("id", vars(&["x"])))
        };
        let even = Formula::rel("even", vars(&["x"]));
        assert_eq!(eval_term(&s, &[], &bsum(even, AggKind::Sum)).unwrap(), DomainValue::int(2));
        let three = Formula::IndexEq(IndexTerm::var("x"), IndexTerm::var("x"));
        let only = Formula::And(vec![
            three,
            Formula::NumEq(NumberTerm::apply("id", vars(&["x"])), NumberTerm::int(3)),
        ]);
        assert_eq!(eval_term(&s, &[], &bsum(only, AggKind::Sum)).unwrap(), DomainValue::int(3));
        assert_eq!(
            eval_term(&s, &[], &bsum(Formula::False, AggKind::Prod)).unwrap(),
            DomainValue::int(1)
        );
    }

    #[test]
    fn relativized_max_sees_zero() {
        let d = Domain::integers();
        let mut s = RStructure::new(d.clone(), 3);
        s.set_number_fn("v", 1, |a| d.from_i64(-(a[0] as i64) - 1)).unwrap();
        s.set_aux("sel", Table::relation(&d, 1, [vec![1]])).unwrap();
        let m = NumberTerm::agg(
            AggKind::Max,
            false,
            &["x"],
            Some(Formula::rel("sel", vars(&["x"]))),
            NumberTerm::apply("v", vars(&["x"])),
        );
        assert_eq!(eval_term(&s, &[], &m).unwrap(), DomainValue::int(0));
        let m = NumberTerm::agg(AggKind::Max, false, &["x"], None, NumberTerm::apply("v", vars(&["x"])));
        assert_eq!(eval_term(&s, &[], &m).unwrap(), DomainValue::int(-1));
    }

    /// f(y) = chi[y = 0] + sum_z (z <= y/2 and E(y,z)) f(z) on a path.
    fn halving_def(rel: &str) -> RecursionDef {
        RecursionDef {
            name: "f".into(),
            x: vec![],
            ys: vec![vec!["y".into()]],
            rest: vec![],
            body: NumberTerm::add(
                NumberTerm::chi(Formula::IndexEq(IndexTerm::var("y"), IndexTerm::var("y"))),
                NumberTerm::agg(
                    AggKind::Sum,
                    false,
                    &["z"],
                    Some(Formula::And(vec![
                        Formula::Or(vec![Formula::HalfLe(vars(&["z"]), vars(&["y"]))]),
                        Formula::rel(rel, vars(&["y", "z"])),
                    ])),
                    NumberTerm::RecVar("f".into(), vars(&["z"])),
                ),
            ),
            bounded: false,
        }
    }

    #[test]
    fn gfr_halving_chain() {
        let d = Domain::integers();
        let mut s = RStructure::new(d.clone(), 16);
        // 15 -> 7 -> 3 -> 1 -> 0
        s.set_aux("E", Table::relation(&d, 2, (1..16).map(|y| vec![y, y / 2])))
            .unwrap();
        let r = eval_gfr(&s, &halving_def("E"), &[15], EvalOptions::default()).unwrap();
        assert_eq!(r.value, DomainValue::int(5));
        assert_eq!(r.stats.max_depth, 4);
        assert_eq!(r.stats.max_nd_depth, 4);
        assert!(r.stats.max_depth <= r.stats.cap);
        let naive = EvalOptions {
            memoize: false,
            prune: false,
            ..EvalOptions::default()
        };
        assert_eq!(eval_gfr(&s, &halving_def("E"), &[15], naive).unwrap(), r);
    }

    #[test]
    fn gfr_self_dependency_at_zero() {
        let d = Domain::integers();
        let mut s = RStructure::new(d.clone(), 4);
        s.set_aux("E", Table::relation(&d, 2, [vec![0, 0]])).unwrap();
        let err = eval_gfr(&s, &halving_def("E"), &[0], EvalOptions::default()).unwrap_err();
        assert_eq!(
            err,
            LogicError::NonWellFounded {
                name: "f".into(),
                args: vec![0]
            }
        );
        let naive = EvalOptions {
            memoize: false,
            ..EvalOptions::default()
        };
        assert!(matches!(
            eval_gfr(&s, &halving_def("E"), &[0], naive),
            Err(LogicError::NonWellFounded { .. })
        ));
    }

    #[test]
    fn gfr_depth_cap() {
        let d = Domain::integers();
        let mut s = RStructure::new(d.clone(), 16);
        s.set_aux("E", Table::relation(&d, 2, (1..16).map(|y| vec![y, y / 2])))
            .unwrap();
        let opts = EvalOptions {
            depth_cap: Some(2),
            ..EvalOptions::default()
        };
        assert!(matches!(
            eval_gfr(&s, &halving_def("E"), &[15], opts),
            Err(LogicError::DepthCap { .. })
        ));
        assert_eq!(guard_depth_bound(8, 1, 2), 15);
        assert_eq!(guard_depth_bound(16, 1, 1), 4);
    }

    // Reference fold over all tuples, written without the evaluator's
    // candidate machinery.
    fn fold(s: &RStructure, kind: AggKind, arity: usize, w: &dyn Fn(&[usize]) -> (bool, DomainValue)) -> DomainValue {
        let d = s.domain();
        let n = s.size();
        let mut vals = Vec::new();
        let mut fails = false;
        for idx in 0..n.pow(arity as u32) {
            let t: Vec<usize> = (0..arity)
                .rev()
                .map(|p| idx / n.pow(p as u32) % n)
                .collect();
            let (ok, v) = w(&t);
            if ok {
                vals.push(v);
            } else {
                fails = true;
            }
        }
        match kind {
            AggKind::Sum => vals.iter().fold(d.zero(), |a, v| d.add(&a, v).unwrap()),
            AggKind::Prod => vals.iter().fold(d.one(), |a, v| d.mul(&a, v).unwrap()),
            AggKind::Max => {
                let mut all = vals.clone();
                if fails {
                    all.push(d.zero());
                }
                all.into_iter()
                    .reduce(|a, v| if d.lt(&a, &v).unwrap() { v } else { a })
                    .unwrap_or(d.zero())
            }
        }
    }

    fn arb_structure() -> impl Strategy<Value = (RStructure, Vec<i64>, Vec<Vec<usize>>)> {
        (1usize..=4).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(-3i64..=3, n * n),
                proptest::collection::vec(proptest::collection::vec(0..n, 2), 0..8),
            )
                .prop_map(|(n, w, rel)| {
                    let d = Domain::integers();
                    let mut s = RStructure::new(d.clone(), n);
                    s.set_number_fn("w", 2, |a| d.from_i64(w[a[0] * n + a[1]])).unwrap();
                    s.set_aux("R", Table::relation(&d, 2, rel.clone())).unwrap();
                    (s, w, rel)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn aggregators_match_reference_fold((s, w, rel) in arb_structure(), kind_ix in 0usize..3, relativize: bool) {
            let kind = [AggKind::Sum, AggKind::Prod, AggKind::Max][kind_ix];
            let n = s.size();
            let d = s.domain().clone();
            let r = relativize.then(|| Formula::rel("R", vars(&["a", "b"])));
            let t = NumberTerm::agg(kind, false, &["a", "b"], r, NumberTerm::apply("w", vars(&["a", "b"])));
            let got = eval_term(&s, &[], &t).unwrap();
            let want = fold(&s, kind, 2, &|t| {
                let ok = !relativize || rel.contains(&t.to_vec());
                (ok, d.from_i64(w[t[0] * n + t[1]]))
            });
            prop_assert_eq!(got, want);
        }

        #[test]
        fn bounded_is_unbounded_on_top_two((s, w, rel) in arb_structure(), kind_ix in 0usize..3) {
            let kind = [AggKind::Sum, AggKind::Prod, AggKind::Max][kind_ix];
            let n = s.size();
            let d = s.domain().clone();
            let t = NumberTerm::agg(kind, true, &["a", "b"], Some(Formula::rel("R", vars(&["a", "b"]))),
                NumberTerm::apply("w", vars(&["a", "b"])));
            let got = eval_term(&s, &[], &t).unwrap();
            let mut sat: Vec<Vec<usize>> = rel.clone();
            sat.sort();
            sat.dedup();
            let top: Vec<Vec<usize>> = sat.iter().rev().take(2).cloned().collect();
            let want = fold(&s, kind, 2, &|t| {
                (top.contains(&t.to_vec()), d.from_i64(w[t[0] * n + t[1]]))
            });
            // The bounded max never mixes in the 0 of failing tuples.
            let want = if kind == AggKind::Max {
                top.iter().map(|t| d.from_i64(w[t[0] * n + t[1]]))
                    .reduce(|a, v| if d.lt(&a, &v).unwrap() { v } else { a })
                    .unwrap_or(d.zero())
            } else { want };
            prop_assert_eq!(got, want);
        }

        #[test]
        fn duality_and_chi((s, _w, _rel) in arb_structure(), c in -3i64..=3) {
            let body = Formula::And(vec![
                Formula::rel("R", vars(&["x", "y"])),
                Formula::NumLt(NumberTerm::apply("w", vars(&["x", "y"])), NumberTerm::Const(Literal::Int(c.into()))),
            ]);
            let ex = Formula::exists(&["x", "y"], body.clone());
            let dual = Formula::not(Formula::forall(&["x", "y"], Formula::not(body.clone())));
            prop_assert_eq!(eval_formula(&s, &[], &ex).unwrap(), eval_formula(&s, &[], &dual).unwrap());
            for x in 0..s.size() {
                for y in 0..s.size() {
                    let env = [("x".to_string(), x), ("y".to_string(), y)];
                    let chi = eval_term(&s, &env, &NumberTerm::chi(body.clone())).unwrap();
                    let truth = eval_formula(&s, &env, &body).unwrap();
                    prop_assert_eq!(chi, if truth { DomainValue::int(1) } else { DomainValue::int(0) });
                }
            }
        }

        #[test]
        fn pruning_is_transparent((s, _w, _rel) in arb_structure(), c in -3i64..=3) {
            let sum = NumberTerm::agg(AggKind::Sum, false, &["b"],
                Some(Formula::And(vec![Formula::rel("R", vars(&["a", "b"])), Formula::True])),
                NumberTerm::apply("w", vars(&["a", "b"])));
            let f = Formula::forall(&["a"], Formula::implies(
                Formula::exists(&["b"], Formula::rel("R", vars(&["b", "a"]))),
                Formula::NumLt(sum, NumberTerm::Const(Literal::Int(c.into())))));
            let naive = EvalOptions { prune: false, ..EvalOptions::default() };
            prop_assert_eq!(
                eval_formula_with(&s, &[], &f, EvalOptions::default()).unwrap().0,
                eval_formula_with(&s, &[], &f, naive).unwrap().0
            );
        }
    }
}
