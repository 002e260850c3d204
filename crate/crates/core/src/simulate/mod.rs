// SPDX-License-Identifier: Apache-2.0

//! Lowering circuits from one domain to another along an injective
//! element map `f: R1 -> R2^width`.
//!
//! Every source gate becomes a gadget over the target domain whose
//! `width` output wires carry `f` of the source gate's value. Decision
//! circuits keep their answers: a source output equals 1 iff the lowered
//! outputs encode 1.

mod adjoined;
mod finite;
mod rational;

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, BaseKind, Domain, DomainKind, DomainValue};
use crate::circuit::{Circuit, CircuitBuilder, CircuitError, GateKind};

pub use adjoined::{lower_adjoined, MUL_EXPANSION_LIMIT};
pub use finite::{finite_width, lower_finite};
pub use rational::lower_rationals;

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("no lowering from {from} to {to}")]
    Unsupported { from: String, to: String },
    #[error("incompatible with the map: {0}")]
    Incompatible(String),
    #[error("value {0} is outside the source domain of the map")]
    NotInSource(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, SimulateError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Identity,
    /// Coefficient tuples of `R[j_k]` over `R`.
    Adjoined,
    /// Residues of `F_p` as base-`q` digit tuples, most significant first.
    Finite,
    /// `a/b` with `b > 0` and `gcd(a, b) = 1` as the pair `(a, b)`.
    Rational,
}

/// An element map `f: R1 -> R2^width`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationMap {
    pub source: Domain,
    pub target: Domain,
    pub width: usize,
    pub kind: MapKind,
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    source: String,
    target: String,
    kind: MapKind,
}

impl SimulationMap {
    pub fn identity(d: &Domain) -> SimulationMap {
        SimulationMap {
            source: d.clone(),
            target: d.clone(),
            width: 1,
            kind: MapKind::Identity,
        }
    }

    /// The map a lowering from `source` to `target` uses.
    pub fn between(source: &Domain, target: &Domain) -> Result<SimulationMap> {
        let unsupported = || SimulateError::Unsupported {
            from: source.name(),
            to: target.name(),
        };
        let (width, kind) = match (source.kind(), target.kind()) {
            _ if source == target => (1, MapKind::Identity),
            (DomainKind::Adjoined { base, k }, t) => {
                let ok = matches!(
                    (base, t),
                    (BaseKind::Integer, DomainKind::Integer) | (BaseKind::Rational, DomainKind::Rational)
                );
                if !ok {
                    return Err(unsupported());
                }
                (*k, MapKind::Adjoined)
            }
            (DomainKind::FiniteField(p), DomainKind::FiniteField(q)) => (finite_width(*p, *q), MapKind::Finite),
            (DomainKind::Rational, DomainKind::Integer) => (2, MapKind::Rational),
            _ => return Err(unsupported()),
        };
        Ok(SimulationMap {
            source: source.clone(),
            target: target.clone(),
            width,
            kind,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MapJson {
            source: self.source.name(),
            target: self.target.name(),
            kind: self.kind,
        })
        .expect("map serializes")
    }

    /// Reads `{"source", "target", "kind"}`; the kind must be the one
    /// [`SimulationMap::between`] picks for the two domains.
    pub fn from_json(text: &str) -> std::result::Result<SimulationMap, String> {
        let j: MapJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let s = Domain::parse(&j.source).map_err(|e| e.to_string())?;
        let t = Domain::parse(&j.target).map_err(|e| e.to_string())?;
        let m = SimulationMap::between(&s, &t).map_err(|e| e.to_string())?;
        if m.kind != j.kind {
            return Err(format!("a map from {s} to {t} has kind {:?}", m.kind));
        }
        Ok(m)
    }

    pub fn apply(&self, v: &DomainValue) -> Result<Vec<DomainValue>> {
        self.source
            .check(v)
            .map_err(|_| SimulateError::NotInSource(format!("{v:?}")))?;
        Ok(match (self.kind, v) {
            (MapKind::Identity, _) => vec![v.clone()],
            (MapKind::Adjoined, DomainValue::Tuple(cs)) => cs.clone(),
            (MapKind::Finite, DomainValue::Mod(r)) => {
                let q = match self.target.kind() {
                    DomainKind::FiniteField(q) => *q,
                    _ => unreachable!("finite maps target a field"),
                };
                finite::digits(*r, q, self.width).into_iter().map(DomainValue::Mod).collect()
            }
            (MapKind::Rational, DomainValue::Rat(x)) => {
                vec![DomainValue::Int(x.numer().clone()), DomainValue::Int(x.denom().clone())]
            }
            _ => unreachable!("checked against the source domain"),
        })
    }

    /// Concatenated images of an input vector.
    pub fn apply_all(&self, xs: &[DomainValue]) -> Result<Vec<DomainValue>> {
        let mut out = Vec::with_capacity(xs.len() * self.width);
        for x in xs {
            out.extend(self.apply(x)?);
        }
        Ok(out)
    }

    /// Whether `image` represents `v`. Rational pairs are compared up to
    /// equivalence `a * d = c * b` with a nonzero denominator.
    pub fn represents(&self, v: &DomainValue, image: &[DomainValue]) -> bool {
        let Ok(want) = self.apply(v) else { return false };
        match self.kind {
            MapKind::Rational => match (&want[..], image) {
                ([DomainValue::Int(a), DomainValue::Int(b)], [DomainValue::Int(c), DomainValue::Int(d)]) => {
                    use num_traits::Zero;
                    !d.is_zero() && a * d == c * b
                }
                _ => false,
            },
            _ => want == image,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Swaps the first two output wires of every multiplication gadget.
    SwapMulOutputs,
}

#[derive(Debug, Clone, Default)]
pub struct LowerOptions {
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone)]
pub struct Lowering {
    pub circuit: Circuit,
    pub map: SimulationMap,
    /// Target wires carrying `f` of each source gate's value.
    pub wires: Vec<Vec<usize>>,
    /// Multiplications too wide for the direct expansion, lowered as a
    /// binary tree of gadgets instead; each adds depth.
    pub tree_muls: usize,
}

/// Gadgets for one element map.
trait Gadgets {
    fn width(&self) -> usize;
    fn constant(&self, b: &mut CircuitBuilder, v: &DomainValue) -> Result<Vec<usize>>;
    fn add(&mut self, b: &mut CircuitBuilder, args: &[Vec<usize>]) -> Vec<usize>;
    fn mul(&mut self, b: &mut CircuitBuilder, args: &[Vec<usize>]) -> Vec<usize>;
    fn less(&mut self, b: &mut CircuitBuilder, x: &[usize], y: &[usize]) -> Vec<usize>;
    fn tree_muls(&self) -> usize {
        0
    }
}

fn lower_with<G: Gadgets>(c: &Circuit, map: SimulationMap, g: &mut G, opts: &LowerOptions) -> Result<Lowering> {
    let w = g.width();
    let mut b = CircuitBuilder::new(map.target.clone(), c.fanin());
    let inputs: Vec<Vec<usize>> = (0..c.inputs().len())
        .map(|_| (0..w).map(|_| b.input()).collect())
        .collect();
    let mut wires: Vec<Vec<usize>> = vec![Vec::new(); c.size()];
    for &id in c.topo_order() {
        let gate = c.gate(id);
        let args: Vec<Vec<usize>> = gate.preds.iter().map(|p| wires[*p].clone()).collect();
        wires[id] = match &gate.kind {
            GateKind::Input(pos) => inputs[*pos].clone(),
            GateKind::Constant(v) => g.constant(&mut b, v)?,
            GateKind::Add | GateKind::Mul | GateKind::Output if args.len() == 1 => args[0].clone(),
            GateKind::Add => g.add(&mut b, &args),
            GateKind::Mul => {
                let mut out = g.mul(&mut b, &args);
                if opts.fault == Some(Fault::SwapMulOutputs) && out.len() >= 2 {
                    out.swap(0, 1);
                }
                out
            }
            GateKind::Less => g.less(&mut b, &args[0], &args[1]),
            GateKind::Output => unreachable!("outputs have one predecessor"),
        };
    }
    for &o in c.outputs() {
        for &wire in &wires[o] {
            b.output(wire);
        }
    }
    Ok(Lowering {
        circuit: b.finish()?,
        map,
        wires,
        tree_muls: g.tree_muls(),
    })
}

struct Identity;

impl Gadgets for Identity {
    fn width(&self) -> usize {
        1
    }
    fn constant(&self, b: &mut CircuitBuilder, v: &DomainValue) -> Result<Vec<usize>> {
        Ok(vec![b.constant(v.clone())])
    }
    fn add(&mut self, b: &mut CircuitBuilder, args: &[Vec<usize>]) -> Vec<usize> {
        vec![b.add(args.iter().map(|a| a[0]).collect())]
    }
    fn mul(&mut self, b: &mut CircuitBuilder, args: &[Vec<usize>]) -> Vec<usize> {
        vec![b.mul(args.iter().map(|a| a[0]).collect())]
    }
    fn less(&mut self, b: &mut CircuitBuilder, x: &[usize], y: &[usize]) -> Vec<usize> {
        vec![b.less(x[0], y[0])]
    }
}

pub fn lower_identity(c: &Circuit) -> Result<Lowering> {
    lower_with(c, SimulationMap::identity(c.domain()), &mut Identity, &LowerOptions::default())
}

/// Dispatches on the source and target domains.
pub fn lower(c: &Circuit, target: &Domain, opts: &LowerOptions) -> Result<Lowering> {
    let map = SimulationMap::between(c.domain(), target)?;
    match map.kind {
        MapKind::Identity => lower_with(c, map, &mut Identity, opts),
        MapKind::Adjoined => adjoined::lower_adjoined_with(c, opts),
        MapKind::Finite => finite::lower_finite_with(c, target, opts),
        MapKind::Rational => rational::lower_rationals_with(c, opts),
    }
}

/// `1 - x` for a 0/1 wire.
pub(crate) fn one_minus(b: &mut CircuitBuilder, x: usize) -> usize {
    let one = b.constant_i64(1);
    let m1 = b.constant_i64(-1);
    let neg = b.mul(vec![m1, x]);
    b.add(vec![one, neg])
}

/// Sum of `terms`, or a fresh zero when there are none.
pub(crate) fn sum_or_zero(b: &mut CircuitBuilder, terms: Vec<usize>) -> usize {
    match terms.len() {
        0 => b.constant_i64(0),
        1 => terms[0],
        _ => b.add(terms),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimDisagreement {
    pub input: Vec<String>,
    pub output: usize,
    pub source: String,
    pub lowered: Vec<String>,
    /// First source gate, in topological order, whose lowered wires do not
    /// represent its value.
    pub localized: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub source_domain: String,
    pub target_domain: String,
    pub width: usize,
    pub samples: usize,
    /// Samples on which every output commutes with the map.
    pub agree: usize,
    /// Samples on which each output is 1 iff its image encodes 1.
    pub decision_agree: usize,
    /// No two distinct sampled elements share an image.
    pub injective: bool,
    pub source_size: usize,
    pub target_size: usize,
    pub source_depth: usize,
    pub target_depth: usize,
    pub size_factor: f64,
    pub depth_factor: f64,
    pub disagreements: Vec<SimDisagreement>,
}

impl SimulationReport {
    pub fn passes(&self) -> bool {
        self.injective && self.agree == self.samples && self.decision_agree == self.samples
    }
}

/// Samples source inputs with coefficients in `[-mag, mag]` and compares
/// `src` with `dst` through `map`. `wires`, when known, localizes
/// disagreements to a source gate.
pub fn check_simulation<R: Rng + ?Sized>(
    map: &SimulationMap,
    src: &Circuit,
    dst: &Circuit,
    wires: Option<&[Vec<usize>]>,
    samples: usize,
    mag: i64,
    rng: &mut R,
) -> Result<SimulationReport> {
    let w = map.width;
    if src.domain() != &map.source || dst.domain() != &map.target {
        return Err(SimulateError::Incompatible(format!(
            "the map goes from {} to {}, the circuits are over {} and {}",
            map.source,
            map.target,
            src.domain(),
            dst.domain()
        )));
    }
    if dst.inputs().len() != w * src.inputs().len() || dst.outputs().len() != w * src.outputs().len() {
        return Err(SimulateError::Incompatible(format!(
            "widths do not match: source has {} inputs and {} outputs, target {} and {}, map width {w}",
            src.inputs().len(),
            src.outputs().len(),
            dst.inputs().len(),
            dst.outputs().len()
        )));
    }
    let sd = &map.source;
    let one = sd.one();
    let mut images: HashMap<Vec<DomainValue>, DomainValue> = HashMap::new();
    let mut injective = true;
    let mut agree = 0;
    let mut decision_agree = 0;
    let mut disagreements = Vec::new();
    for _ in 0..samples {
        let x: Vec<DomainValue> = (0..src.inputs().len()).map(|_| sd.sample(rng, mag)).collect();
        for v in &x {
            let img = map.apply(v)?;
            if let Some(prev) = images.insert(img, v.clone()) {
                injective &= prev == *v;
            }
        }
        let fx = map.apply_all(&x)?;
        let sv = src.evaluate_all(&x)?;
        let tv = dst.evaluate_all(&fx)?;
        let mut all = true;
        let mut decided = true;
        for (k, &o) in src.outputs().iter().enumerate() {
            let lowered: Vec<DomainValue> = dst.outputs()[k * w..(k + 1) * w].iter().map(|g| tv[*g].clone()).collect();
            if (sv[o] == one) != map.represents(&one, &lowered) {
                decided = false;
            }
            if map.represents(&sv[o], &lowered) {
                continue;
            }
            all = false;
            let localized = wires.and_then(|ws| {
                src.topo_order().iter().find_map(|&g| {
                    let img: Vec<DomainValue> = ws[g].iter().map(|t| tv[*t].clone()).collect();
                    (!map.represents(&sv[g], &img)).then(|| format!("gate {g} ({})", src.gate(g).kind.name()))
                })
            });
            disagreements.push(SimDisagreement {
                input: x.iter().map(|v| sd.render(v)).collect(),
                output: k,
                source: sd.render(&sv[o]),
                lowered: lowered.iter().map(|v| map.target.render(v)).collect(),
                localized,
            });
        }
        agree += usize::from(all);
        decision_agree += usize::from(decided);
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(SimulationReport {
        source_domain: sd.name(),
        target_domain: map.target.name(),
        width: w,
        samples,
        agree,
        decision_agree,
        injective,
        source_size: src.size(),
        target_size: dst.size(),
        source_depth: src.depth(),
        target_depth: dst.depth(),
        size_factor: ratio(dst.size(), src.size()),
        depth_factor: ratio(dst.depth(), src.depth()),
        disagreements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::random::{random_circuit, RandomCircuitSpec};
    use crate::circuit::FanIn;
    use rand::SeedableRng;

    #[test]
    fn identity_map_passes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let c = random_circuit(&mut rng, &RandomCircuitSpec::new(Domain::integers()));
        let l = lower_identity(&c).unwrap();
        let r = check_simulation(&l.map, &c, &l.circuit, Some(&l.wires), 20, 3, &mut rng).unwrap();
        assert!(r.passes());
    }

    #[test]
    fn map_json_round_trip() {
        let m = SimulationMap::between(&Domain::parse("Z[j2]").unwrap(), &Domain::integers()).unwrap();
        assert_eq!(SimulationMap::from_json(&m.to_json()).unwrap(), m);
        assert!(SimulationMap::between(&Domain::integers(), &Domain::rationals()).is_err());
    }

    #[test]
    fn wrong_mul_gadget_is_localized() {
        let d = Domain::parse("Z[j2]").unwrap();
        let mut b = CircuitBuilder::new(d.clone(), FanIn::Unbounded);
        let x = b.input();
        let y = b.input();
        let s = b.add(vec![x, y]);
        let m = b.mul(vec![s, y]);
        b.output(m);
        let c = b.finish().unwrap();
        let l = lower(&c, &Domain::integers(), &LowerOptions { fault: Some(Fault::SwapMulOutputs) }).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let r = check_simulation(&l.map, &c, &l.circuit, Some(&l.wires), 20, 3, &mut rng).unwrap();
        assert!(!r.passes());
        assert_eq!(r.disagreements[0].localized.as_deref(), Some("gate 3 (mul)"));
    }
}
