// SPDX-License-Identifier: Apache-2.0

//! Seeded random sentences without recursion, for compiler checks.
//!
//! Every atom mentions only bound variables, so the result is closed.
//! Bounded aggregations get an input-independent relativizer that some
//! tuple satisfies, which keeps them compilable.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{AggKind, CmpKind, Formula, IndexTerm, NumberTerm, QuantKind};

#[derive(Debug, Clone)]
pub struct RandomFormulaSpec {
    /// Largest nesting of connectives and quantifiers.
    pub depth: usize,
    /// Largest number of simultaneously bound variables.
    pub max_vars: usize,
    /// Input number functions as `(name, arity)`.
    pub functions: Vec<(String, usize)>,
    /// Input tables read as relations.
    pub relations: Vec<(String, usize)>,
    pub term_depth: usize,
    pub const_mag: i64,
}

impl Default for RandomFormulaSpec {
    fn default() -> Self {
        RandomFormulaSpec {
            depth: 4,
            max_vars: 3,
            functions: vec![("w".into(), 2), ("u".into(), 1)],
            relations: vec![("E".into(), 2)],
            term_depth: 2,
            const_mag: 2,
        }
    }
}

struct Gen<'a, R: ?Sized> {
    rng: &'a mut R,
    spec: &'a RandomFormulaSpec,
    bound: Vec<String>,
    fresh: usize,
}

impl<R: Rng + ?Sized> Gen<'_, R> {
    fn fresh(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn room(&self) -> usize {
        self.spec.max_vars.saturating_sub(self.bound.len())
    }

    fn var(&mut self) -> Option<IndexTerm> {
        self.bound.choose(self.rng).map(|v| IndexTerm::var(v))
    }

    fn args(&mut self, k: usize) -> Option<Vec<IndexTerm>> {
        (0..k).map(|_| self.var()).collect()
    }

    fn konst(&mut self) -> NumberTerm {
        let m = self.spec.const_mag;
        NumberTerm::int(self.rng.gen_range(-m..=m))
    }

    fn with_vars<T>(&mut self, vs: &[String], f: impl FnOnce(&mut Self) -> T) -> T {
        let base = self.bound.len();
        self.bound.extend(vs.iter().cloned());
        let r = f(self);
        self.bound.truncate(base);
        r
    }

    fn formula(&mut self, depth: usize) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.15) {
            return self.atom();
        }
        let d = depth - 1;
        let roll = self.rng.gen_range(0..7);
        match roll {
            0 => Formula::not(self.formula(d)),
            1 => {
                let k = self.rng.gen_range(2..=3);
                Formula::And((0..k).map(|_| self.formula(d)).collect())
            }
            2 => Formula::Or(vec![self.formula(d), self.formula(d)]),
            3 => Formula::implies(self.formula(d), self.formula(d)),
            4 => Formula::iff(self.formula(d), self.formula(d)),
            _ if self.room() > 0 => {
                let q = if roll == 5 { QuantKind::Exists } else { QuantKind::Forall };
                let k = if self.room() >= 2 && self.rng.gen_bool(0.25) { 2 } else { 1 };
                let vs: Vec<String> = (0..k).map(|_| self.fresh()).collect();
                let body = self.with_vars(&vs, |g| g.formula(d));
                Formula::Quant(q, vs, Box::new(body))
            }
            _ => Formula::not(self.formula(d)),
        }
    }

    fn atom(&mut self) -> Formula {
        loop {
            match self.rng.gen_range(0..9) {
                0 => return if self.rng.gen() { Formula::True } else { Formula::False },
                1 => {
                    if let (Some(a), Some(b)) = (self.var(), self.var()) {
                        return Formula::IndexEq(a, b);
                    }
                }
                2 => {
                    let k = self.rng.gen_range(1..=2);
                    let cmp = if self.rng.gen() { CmpKind::Lt } else { CmpKind::Le };
                    if let (Some(a), Some(b)) = (self.args(k), self.args(k)) {
                        return Formula::TupleCmp(cmp, a, b);
                    }
                }
                3 => {
                    if let (Some(a), Some(b)) = (self.var(), self.var()) {
                        return Formula::HalfLe(vec![a], vec![b]);
                    }
                }
                4 => {
                    if let Some((name, k)) = self.spec.relations.choose(self.rng).cloned() {
                        if let Some(a) = self.args(k) {
                            return Formula::Rel(name, a);
                        }
                    }
                }
                5..=6 => {
                    let d = self.spec.term_depth;
                    return Formula::NumLt(self.term(d), self.term(d));
                }
                _ => {
                    let d = self.spec.term_depth;
                    return Formula::NumEq(self.term(d), self.term(d));
                }
            }
        }
    }

    fn leaf(&mut self) -> NumberTerm {
        if self.rng.gen_bool(0.7) {
            if let Some((name, k)) = self.spec.functions.choose(self.rng).cloned() {
                if let Some(a) = self.args(k) {
                    return NumberTerm::Apply(name, a);
                }
            }
        }
        self.konst()
    }

    fn term(&mut self, depth: usize) -> NumberTerm {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.leaf();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..7) {
            0 | 1 => NumberTerm::add(self.term(d), self.term(d)),
            2 => NumberTerm::mul(self.term(d), self.term(d)),
            3 => NumberTerm::Sign(Box::new(self.term(d))),
            4 => NumberTerm::chi(self.atom()),
            _ if self.room() > 0 => self.aggregation(d),
            _ => self.leaf(),
        }
    }

    fn aggregation(&mut self, d: usize) -> NumberTerm {
        let kind = *[AggKind::Sum, AggKind::Prod, AggKind::Max].choose(self.rng).unwrap();
        let v = self.fresh();
        let bounded = self.rng.gen_bool(0.25);
        let relativizer = if bounded {
            // Satisfied by at least `v = y`, or by every tuple.
            let x = IndexTerm::var(&v);
            Some(match self.var() {
                Some(y) if self.rng.gen() => Formula::TupleCmp(CmpKind::Le, vec![x], vec![y]),
                Some(y) => Formula::IndexEq(x, y),
                None => Formula::IndexEq(x.clone(), x),
            })
        } else if self.rng.gen_bool(0.4) {
            Some(self.with_vars(std::slice::from_ref(&v), |g| g.atom()))
        } else {
            None
        };
        let body = self.with_vars(std::slice::from_ref(&v), |g| g.term(d));
        NumberTerm::agg(kind, bounded, &[&v], relativizer, body)
    }
}

/// A closed, recursion-free formula drawn from `spec`.
pub fn random_sentence<R: Rng + ?Sized>(rng: &mut R, spec: &RandomFormulaSpec) -> Formula {
    let mut g = Gen {
        rng,
        spec,
        bound: Vec::new(),
        fresh: 0,
    };
    g.formula(spec.depth)
}

/// Nesting depth of connectives and quantifiers, atoms at 0. Formulas
/// inside number terms count from zero again.
pub fn connective_depth(f: &Formula) -> usize {
    match f {
        Formula::Not(g) | Formula::Quant(_, _, g) | Formula::Gfr(_, g) => 1 + connective_depth(g),
        Formula::And(gs) | Formula::Or(gs) => 1 + gs.iter().map(connective_depth).max().unwrap_or(0),
        Formula::Implies(a, b) | Formula::Iff(a, b) => 1 + connective_depth(a).max(connective_depth(b)),
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{free_vars, has_gfr};
    use rand::SeedableRng;

    #[test]
    fn sentences_are_closed_and_shallow() {
        let spec = RandomFormulaSpec::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let f = random_sentence(&mut rng, &spec);
            assert!(free_vars(&f).is_empty(), "{f:?}");
            assert!(!has_gfr(&f));
            assert!(connective_depth(&f) <= spec.depth);
        }
    }

    #[test]
    fn same_seed_same_sentence() {
        let spec = RandomFormulaSpec::default();
        let a = random_sentence(&mut rand_chacha::ChaCha8Rng::seed_from_u64(9), &spec);
        let b = random_sentence(&mut rand_chacha::ChaCha8Rng::seed_from_u64(9), &spec);
        assert_eq!(a, b);
    }
}
