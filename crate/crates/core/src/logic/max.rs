// SPDX-License-Identifier: Apache-2.0

//! Elimination of unbounded max aggregators.
//!
//! A max whose free variables are all in scope at its enclosing atom is
//! replaced by a witness: `alpha[max_x F(x)]` becomes
//! `exists m (forall y not F(m) < F(y)) and alpha[F(m)]`. A max sitting
//! under another binder inside the atom cannot be lifted that way; it is
//! replaced by a sum picking out the least maximizer,
//! `sum_x chi[forall y (not F(x) < F(y)) and (y < x -> F(y) < F(x))] * F(x)`.
//! Maxima are processed innermost first. Bounded maxima and maxima that
//! involve recursion symbols are left alone and reported.

use std::collections::BTreeSet;

use super::{
    all_var_names, rename_term, AggKind, Aggregation, CmpKind, Formula, IndexTerm, NumberTerm,
    RecursionDef,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxRewrite {
    pub formula: Formula,
    pub rewritten: usize,
    /// Maxima left in place, with the reason.
    pub untouched: Vec<String>,
}

pub fn rewrite_max(f: &Formula) -> MaxRewrite {
    let mut rw = Rewriter {
        used: all_var_names(f),
        counter: 0,
        rewritten: 0,
        untouched: Vec::new(),
    };
    let formula = rw.formula(f);
    MaxRewrite {
        formula,
        rewritten: rw.rewritten,
        untouched: rw.untouched,
    }
}

struct Rewriter {
    used: BTreeSet<String>,
    counter: usize,
    rewritten: usize,
    untouched: Vec<String>,
}

/// A max lifted to its atom: witness names, bound names, rewritten body.
struct Lifted {
    witness: Vec<String>,
    vars: Vec<String>,
    body: NumberTerm,
}

fn has_rec(t: &NumberTerm) -> bool {
    match t {
        NumberTerm::RecVar(..) => true,
        NumberTerm::Const(_) | NumberTerm::Apply(..) => false,
        NumberTerm::Add(a, b) | NumberTerm::Mul(a, b) => has_rec(a) || has_rec(b),
        NumberTerm::Sign(a) => has_rec(a),
        NumberTerm::Chi(f) => formula_has_rec(f),
        NumberTerm::Agg(a) => {
            a.relativizer.as_deref().is_some_and(formula_has_rec) || has_rec(&a.body)
        }
    }
}

fn formula_has_rec(f: &Formula) -> bool {
    match f {
        Formula::NumEq(a, b) | Formula::NumLt(a, b) => has_rec(a) || has_rec(b),
        Formula::Not(a) => formula_has_rec(a),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().any(formula_has_rec),
        Formula::Implies(a, b) | Formula::Iff(a, b) => formula_has_rec(a) || formula_has_rec(b),
        Formula::Quant(_, _, body) => formula_has_rec(body),
        Formula::Gfr(..) => true,
        _ => false,
    }
}

fn idx(vs: &[String]) -> Vec<IndexTerm> {
    vs.iter().map(|v| IndexTerm::Var(v.clone())).collect()
}

fn pairs(from: &[String], to: &[String]) -> Vec<(String, String)> {
    from.iter().cloned().zip(to.iter().cloned()).collect()
}

impl Rewriter {
    fn fresh(&mut self, base: &str) -> String {
        loop {
            let name = format!("{base}_{}", self.counter);
            self.counter += 1;
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    fn fresh_like(&mut self, vars: &[String], base: &str) -> Vec<String> {
        vars.iter().map(|_| self.fresh(base)).collect()
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::NumEq(a, b) | Formula::NumLt(a, b) => {
                let mut lifted = Vec::new();
                let a2 = self.term(a, true, &mut lifted);
                let b2 = self.term(b, true, &mut lifted);
                let mut out = match f {
                    Formula::NumEq(..) => Formula::NumEq(a2, b2),
                    _ => Formula::NumLt(a2, b2),
                };
                for l in lifted.into_iter().rev() {
                    out = self.witness(l, out);
                }
                out
            }
            Formula::Not(a) => Formula::not(self.formula(a)),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| self.formula(g)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| self.formula(g)).collect()),
            Formula::Implies(a, b) => Formula::implies(self.formula(a), self.formula(b)),
            Formula::Iff(a, b) => Formula::iff(self.formula(a), self.formula(b)),
            Formula::Quant(q, vs, body) => Formula::Quant(*q, vs.clone(), Box::new(self.formula(body))),
            Formula::Gfr(def, psi) => {
                let body = self.term(&def.body, false, &mut Vec::new());
                Formula::Gfr(
                    Box::new(RecursionDef {
                        body,
                        ..(**def).clone()
                    }),
                    Box::new(self.formula(psi)),
                )
            }
            other => other.clone(),
        }
    }

    /// `exists m (forall y not F(m) < F(y)) and atom`.
    fn witness(&mut self, l: Lifted, atom: Formula) -> Formula {
        let ys = self.fresh_like(&l.vars, "y");
        let at_m = rename_term(&l.body, &pairs(&l.vars, &l.witness));
        let at_y = rename_term(&l.body, &pairs(&l.vars, &ys));
        let maximal = Formula::Quant(
            super::QuantKind::Forall,
            ys,
            Box::new(Formula::not(Formula::NumLt(at_m, at_y))),
        );
        Formula::Quant(
            super::QuantKind::Exists,
            l.witness,
            Box::new(Formula::And(vec![maximal, atom])),
        )
    }

    /// `sum_x chi[x is the least maximizer of F] * F(x)`.
    fn least_maximizer_sum(&mut self, vars: &[String], body: NumberTerm) -> NumberTerm {
        let ys = self.fresh_like(vars, "y");
        let at_y = rename_term(&body, &pairs(vars, &ys));
        let cond = Formula::Quant(
            super::QuantKind::Forall,
            ys.clone(),
            Box::new(Formula::And(vec![
                Formula::not(Formula::NumLt(body.clone(), at_y.clone())),
                Formula::implies(
                    Formula::TupleCmp(CmpKind::Lt, idx(&ys), idx(vars)),
                    Formula::NumLt(at_y, body.clone()),
                ),
            ])),
        );
        NumberTerm::Agg(Aggregation {
            kind: AggKind::Sum,
            bounded: false,
            vars: vars.to_vec(),
            relativizer: None,
            body: Box::new(NumberTerm::mul(NumberTerm::chi(cond), body)),
        })
    }

    /// `top` holds while no binder separates `t` from its atom.
    fn term(&mut self, t: &NumberTerm, top: bool, lifted: &mut Vec<Lifted>) -> NumberTerm {
        match t {
            NumberTerm::Const(_) | NumberTerm::Apply(..) | NumberTerm::RecVar(..) => t.clone(),
            NumberTerm::Add(a, b) => {
                NumberTerm::add(self.term(a, top, lifted), self.term(b, top, lifted))
            }
            NumberTerm::Mul(a, b) => {
                NumberTerm::mul(self.term(a, top, lifted), self.term(b, top, lifted))
            }
            NumberTerm::Sign(a) => NumberTerm::Sign(Box::new(self.term(a, top, lifted))),
            NumberTerm::Chi(f) => NumberTerm::chi(self.formula(f)),
            NumberTerm::Agg(a) => {
                let eligible = a.kind == AggKind::Max && !a.bounded && !has_rec(t);
                if a.kind == AggKind::Max && !eligible {
                    self.untouched.push(format!(
                        "max over ({}) kept: {}",
                        a.vars.join(" "),
                        if a.bounded { "bounded" } else { "involves recursion" }
                    ));
                }
                let rel = a.relativizer.as_deref().map(|r| self.formula(r));
                let body = self.term(&a.body, false, &mut Vec::new());
                if !eligible {
                    return NumberTerm::Agg(Aggregation {
                        kind: a.kind,
                        bounded: a.bounded,
                        vars: a.vars.clone(),
                        relativizer: rel.map(Box::new),
                        body: Box::new(body),
                    });
                }
                self.rewritten += 1;
                // A relativized max is the max of chi * body.
                let body = match rel {
                    Some(r) => NumberTerm::mul(NumberTerm::chi(r), body),
                    None => body,
                };
                if top {
                    let witness = self.fresh_like(&a.vars, "m");
                    let at_m = rename_term(&body, &pairs(&a.vars, &witness));
                    lifted.push(Lifted {
                        witness,
                        vars: a.vars.clone(),
                        body,
                    });
                    at_m
                } else {
                    self.least_maximizer_sum(&a.vars, body)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Domain;
    use crate::logic::{eval_formula, vars, RStructure};
    use proptest::prelude::*;

    fn structure(vals: &[i64], n: usize) -> RStructure {
        let d = Domain::integers();
        let mut s = RStructure::new(d.clone(), n);
        s.set_number_fn("F", 1, |a| d.from_i64(vals[a[0]])).unwrap();
        s.set_number_fn("G", 2, |a| d.from_i64(vals[(a[0] + 2 * a[1]) % vals.len()] - a[0] as i64))
            .unwrap();
        s
    }

    fn max_of(v: &str, body: NumberTerm) -> NumberTerm {
        NumberTerm::agg(AggKind::Max, false, &[v], None, body)
    }

    fn no_max(f: &Formula) -> bool {
        !format!("{f:?}").contains("Max")
    }

    #[test]
    fn max_equals_constant() {
        let f = Formula::NumEq(
            max_of("x", NumberTerm::apply("F", vars(&["x"]))),
            NumberTerm::int(5),
        );
        for vals in [[1, 5, 3], [1, 4, 3], [5, 5, -2]] {
            let s = structure(&vals, 3);
            let r = rewrite_max(&f);
            assert!(no_max(&r.formula));
            assert_eq!(r.rewritten, 1);
            assert_eq!(
                eval_formula(&s, &[], &f).unwrap(),
                eval_formula(&s, &[], &r.formula).unwrap()
            );
        }
    }

    #[test]
    fn formula_without_max_is_unchanged() {
        let f = Formula::forall(
            &["x"],
            Formula::NumLt(NumberTerm::apply("F", vars(&["x"])), NumberTerm::int(9)),
        );
        let r = rewrite_max(&f);
        assert_eq!(r.formula, f);
        assert_eq!(r.rewritten, 0);
    }

    #[test]
    fn bounded_max_is_reported() {
        let f = Formula::NumEq(
            NumberTerm::agg(AggKind::Max, true, &["x"], Some(Formula::True), NumberTerm::int(1)),
            NumberTerm::int(1),
        );
        let r = rewrite_max(&f);
        assert_eq!(r.formula, f);
        assert_eq!(r.untouched.len(), 1);
    }

    /// max_x (G(x, y) + max_z F(z)) nested under sum_y, compared with c.
    fn nested(c: i64) -> Formula {
        let inner = max_of(
            "x",
            NumberTerm::add(
                NumberTerm::apply("G", vars(&["x", "y"])),
                max_of("z", NumberTerm::apply("F", vars(&["z"]))),
            ),
        );
        Formula::NumLt(
            NumberTerm::add(NumberTerm::sum(&["y"], inner), max_of("w", NumberTerm::apply("F", vars(&["w"])))),
            NumberTerm::int(c),
        )
    }

    proptest! {
        #[test]
        fn nested_max_equivalent(vals in proptest::collection::vec(-3i64..=3, 4), n in 1usize..=4, c in -10i64..=10) {
            let s = structure(&vals, n);
            let f = nested(c);
            let r = rewrite_max(&f);
            prop_assert!(no_max(&r.formula));
            prop_assert_eq!(r.rewritten, 3);
            prop_assert_eq!(eval_formula(&s, &[], &f).unwrap(), eval_formula(&s, &[], &r.formula).unwrap());
        }
    }
}
