// SPDX-License-Identifier: Apache-2.0

//! Seeded random circuits for tests and for the command line checks.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Circuit, CircuitBuilder, FanIn};
use crate::algebra::{Domain, DomainValue};

#[derive(Debug, Clone)]
pub struct RandomCircuitSpec {
    pub domain: Domain,
    pub fanin: FanIn,
    pub n_inputs: usize,
    /// Number of gates besides inputs and outputs.
    pub n_internal: usize,
    pub n_outputs: usize,
    /// Largest arity of add/mul gates under unbounded fan-in.
    pub max_arity: usize,
    pub const_prob: f64,
    pub less_prob: f64,
    pub mul_prob: f64,
    /// Magnitude of sampled constants.
    pub const_mag: i64,
    /// Cap on the polynomial degree of any gate, to keep values small.
    pub max_degree: usize,
}

impl RandomCircuitSpec {
    pub fn new(domain: Domain) -> RandomCircuitSpec {
        RandomCircuitSpec {
            domain,
            fanin: FanIn::Unbounded,
            n_inputs: 2,
            n_internal: 6,
            n_outputs: 1,
            max_arity: 3,
            const_prob: 0.15,
            less_prob: 0.2,
            mul_prob: 0.35,
            const_mag: 3,
            max_degree: 16,
        }
    }
}

pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, spec: &RandomCircuitSpec) -> Circuit {
    let mut b = CircuitBuilder::new(spec.domain.clone(), spec.fanin);
    let mut degree: Vec<usize> = Vec::new();
    let mut pool: Vec<usize> = Vec::new();
    for _ in 0..spec.n_inputs {
        pool.push(b.input());
        degree.push(1);
    }
    let max_arity = match spec.fanin {
        FanIn::Bounded(k) => k.min(spec.max_arity.max(1)),
        FanIn::Unbounded => spec.max_arity.max(1),
    };
    let mut internal = Vec::new();
    while internal.len() < spec.n_internal {
        if pool.is_empty() || rng.gen_bool(spec.const_prob) {
            let v: DomainValue = spec.domain.sample(rng, spec.const_mag);
            pool.push(b.constant(v));
            degree.push(0);
            internal.push(*pool.last().unwrap());
            continue;
        }
        // Bias towards recent gates so that circuits get some depth.
        let pick = |rng: &mut R, pool: &[usize]| {
            let lo = pool.len().saturating_sub(6);
            if rng.gen_bool(0.6) {
                pool[rng.gen_range(lo..pool.len())]
            } else {
                pool[rng.gen_range(0..pool.len())]
            }
        };
        let roll: f64 = rng.gen();
        let id = if roll < spec.less_prob && pool.len() >= 2 {
            let l = pick(rng, &pool);
            let mut r = pick(rng, &pool);
            while r == l {
                r = *pool.choose(rng).unwrap();
            }
            let id = b.less(l, r);
            while degree.len() <= id {
                degree.push(0);
            }
            id
        } else {
            let arity = rng.gen_range(1..=max_arity.min(pool.len()));
            let mut preds: Vec<usize> = Vec::new();
            while preds.len() < arity {
                let p = pick(rng, &pool);
                if !preds.contains(&p) {
                    preds.push(p);
                }
            }
            let mul_deg: usize = preds.iter().map(|p| degree[*p]).sum();
            let add_deg = preds.iter().map(|p| degree[*p]).max().unwrap_or(0);
            let use_mul = rng.gen_bool(spec.mul_prob) && mul_deg <= spec.max_degree;
            let id = if use_mul { b.mul(preds) } else { b.add(preds) };
            while degree.len() <= id {
                degree.push(if use_mul { mul_deg } else { add_deg });
            }
            id
        };
        pool.push(id);
        internal.push(id);
    }
    let mut outs = vec![*internal.last().unwrap_or(&pool[0])];
    while outs.len() < spec.n_outputs.min(pool.len()) {
        let g = *pool.choose(rng).unwrap();
        if !outs.contains(&g) {
            outs.push(g);
        }
    }
    for g in outs {
        b.output(g);
    }
    b.finish().expect("generator builds valid circuits")
}

pub fn random_inputs<R: Rng + ?Sized>(rng: &mut R, c: &Circuit, mag: i64) -> Vec<DomainValue> {
    (0..c.inputs().len())
        .map(|_| c.domain().sample(rng, mag))
        .collect()
}
