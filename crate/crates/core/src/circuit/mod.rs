// SPDX-License-Identifier: Apache-2.0

//! Circuits over an ordered integral domain: a DAG of input, constant,
//! addition, multiplication, comparison and output gates.
//!
//! Gate ids coincide with positions in the gate vector. Depth counts edges
//! on the longest path from a source (input or constant gate) to an output
//! gate, so a bare wire from an input to an output has depth 1.

mod balance;
mod class;
pub mod io;
mod normal;
pub mod random;

pub use balance::{balance, is_balanced, levels};
pub use class::{check_class, ClassKind, ClassReport};
pub use normal::{check_normal_form, encode_prefix, pad_and_number, prefix_for_level, NormalForm};

use std::collections::{BTreeSet, HashSet};

use crate::algebra::{AlgebraError, Domain, DomainValue};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("gate {gate}: {reason}")]
    InvalidGate { gate: usize, reason: String },
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error("gate graph has a cycle through gate {0}")]
    Cycle(usize),
    #[error("expected {expected} inputs, got {got}")]
    InputArity { expected: usize, got: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("circuit is not balanced at gate {0}")]
    Unbalanced(usize),
    #[error("depth {depth} exceeds the padded depth {bound}")]
    DepthBound { depth: usize, bound: usize },
    #[error("cannot normalize: {0}")]
    Normalize(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CircuitError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GateKind {
    /// The input gate reading position `0`-based `pos` of the input vector.
    Input(usize),
    Constant(DomainValue),
    Add,
    Mul,
    /// `1` iff the first predecessor is smaller than the second.
    Less,
    Output,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Input(_) => "input",
            GateKind::Constant(_) => "const",
            GateKind::Add => "add",
            GateKind::Mul => "mul",
            GateKind::Less => "less",
            GateKind::Output => "output",
        }
    }

    pub fn is_source(&self) -> bool {
        matches!(self, GateKind::Input(_) | GateKind::Constant(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub id: usize,
    /// Gate number as base-n digits.
    pub label: Vec<usize>,
    pub kind: GateKind,
    pub preds: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FanIn {
    Unbounded,
    Bounded(usize),
}

impl FanIn {
    pub fn name(&self) -> String {
        match self {
            FanIn::Unbounded => "unbounded".to_string(),
            FanIn::Bounded(k) => format!("bounded{k}"),
        }
    }

    pub fn parse(s: &str) -> Option<FanIn> {
        match s {
            "unbounded" => Some(FanIn::Unbounded),
            _ => s
                .strip_prefix("bounded")
                .and_then(|k| k.parse().ok())
                .filter(|k| *k >= 2)
                .map(FanIn::Bounded),
        }
    }
}

/// A validated circuit. Immutable; transformations build new circuits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    domain: Domain,
    fanin: FanIn,
    gates: Vec<Gate>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    topo: Vec<usize>,
}

impl Circuit {
    pub fn new(
        domain: Domain,
        fanin: FanIn,
        gates: Vec<Gate>,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
    ) -> Result<Circuit> {
        let topo = validate(&domain, fanin, &gates, &inputs, &outputs)?;
        Ok(Circuit {
            domain,
            fanin,
            gates,
            inputs,
            outputs,
            topo,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn fanin(&self) -> FanIn {
        self.fanin
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: usize) -> &Gate {
        &self.gates[id]
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    /// Gate ids with every gate after its predecessors.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    pub fn wire_count(&self) -> usize {
        self.gates.iter().map(|g| g.preds.len()).sum()
    }

    pub fn max_fanin(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g.kind, GateKind::Add | GateKind::Mul))
            .map(|g| g.preds.len())
            .max()
            .unwrap_or(0)
    }

    /// Longest source-to-gate path length (in edges) for every gate.
    pub fn gate_depths(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.gates.len()];
        for &g in &self.topo {
            d[g] = self.gates[g]
                .preds
                .iter()
                .map(|p| d[*p] + 1)
                .max()
                .unwrap_or(0);
        }
        d
    }

    pub fn depth(&self) -> usize {
        let d = self.gate_depths();
        self.outputs.iter().map(|o| d[*o]).max().unwrap_or(0)
    }

    /// Values of every gate on the given input vector.
    pub fn evaluate_all(&self, x: &[DomainValue]) -> Result<Vec<DomainValue>> {
        if x.len() != self.inputs.len() {
            return Err(CircuitError::InputArity {
                expected: self.inputs.len(),
                got: x.len(),
            });
        }
        for v in x {
            self.domain.check(v)?;
        }
        let dom = &self.domain;
        let mut vals: Vec<Option<DomainValue>> = vec![None; self.gates.len()];
        for &g in &self.topo {
            let gate = &self.gates[g];
            let arg = |k: usize| vals[gate.preds[k]].as_ref().expect("topological order");
            let v = match &gate.kind {
                GateKind::Input(pos) => x[*pos].clone(),
                GateKind::Constant(c) => c.clone(),
                GateKind::Add => {
                    let mut acc = arg(0).clone();
                    for k in 1..gate.preds.len() {
                        acc = dom.add(&acc, arg(k))?;
                    }
                    acc
                }
                GateKind::Mul => {
                    let mut acc = arg(0).clone();
                    for k in 1..gate.preds.len() {
                        acc = dom.mul(&acc, arg(k))?;
                    }
                    acc
                }
                GateKind::Less => {
                    if dom.lt(arg(0), arg(1))? {
                        dom.one()
                    } else {
                        dom.zero()
                    }
                }
                GateKind::Output => arg(0).clone(),
            };
            vals[g] = Some(v);
        }
        Ok(vals.into_iter().map(|v| v.expect("all gates evaluated")).collect())
    }

    pub fn evaluate(&self, x: &[DomainValue]) -> Result<Vec<DomainValue>> {
        let all = self.evaluate_all(x)?;
        Ok(self.outputs.iter().map(|o| all[*o].clone()).collect())
    }

    /// Same gate graph with new labels.
    pub fn relabel(&self, labels: Vec<Vec<usize>>) -> Circuit {
        assert_eq!(labels.len(), self.gates.len());
        let mut c = self.clone();
        for (g, l) in c.gates.iter_mut().zip(labels) {
            g.label = l;
        }
        c
    }

    /// Same gates under another fan-in discipline.
    pub fn with_fanin(&self, fanin: FanIn) -> Result<Circuit> {
        Circuit::new(
            self.domain.clone(),
            fanin,
            self.gates.clone(),
            self.inputs.clone(),
            self.outputs.clone(),
        )
    }
}

fn validate(
    domain: &Domain,
    fanin: FanIn,
    gates: &[Gate],
    inputs: &[usize],
    outputs: &[usize],
) -> Result<Vec<usize>> {
    let bad = |gate: usize, reason: String| Err(CircuitError::InvalidGate { gate, reason });
    let mut is_pred_of_something = vec![false; gates.len()];
    for (idx, g) in gates.iter().enumerate() {
        if g.id != idx {
            return bad(idx, format!("id {} does not match its position", g.id));
        }
        let mut seen = HashSet::new();
        for &p in &g.preds {
            if p >= gates.len() {
                return bad(idx, format!("unknown predecessor {p}"));
            }
            if !seen.insert(p) {
                return bad(idx, format!("predecessor {p} listed twice"));
            }
            if gates[p].kind == GateKind::Output {
                return bad(idx, format!("output gate {p} used as a predecessor"));
            }
            is_pred_of_something[p] = true;
        }
        let n = g.preds.len();
        match &g.kind {
            GateKind::Input(pos) => {
                if n != 0 {
                    return bad(idx, "input gate with predecessors".into());
                }
                if inputs.get(*pos) != Some(&idx) {
                    return bad(idx, format!("input position {pos} not registered"));
                }
            }
            GateKind::Constant(v) => {
                if n != 0 {
                    return bad(idx, "constant gate with predecessors".into());
                }
                domain.check(v)?;
            }
            GateKind::Less if n != 2 => {
                return bad(idx, format!("comparison gate needs 2 predecessors, has {n}"));
            }
            GateKind::Output if n != 1 => {
                return bad(idx, format!("output gate needs 1 predecessor, has {n}"));
            }
            GateKind::Add | GateKind::Mul => {
                if n == 0 {
                    return bad(idx, "arithmetic gate without predecessors".into());
                }
                if let FanIn::Bounded(k) = fanin {
                    if n > k {
                        return bad(idx, format!("fan-in {n} exceeds bound {k}"));
                    }
                }
            }
            _ => {}
        }
    }
    for (pos, &g) in inputs.iter().enumerate() {
        if gates.get(g).map(|x| &x.kind) != Some(&GateKind::Input(pos)) {
            return Err(CircuitError::Invalid(format!(
                "inputs[{pos}] = {g} is not input gate {pos}"
            )));
        }
    }
    let out_set: BTreeSet<usize> = outputs.iter().copied().collect();
    if out_set.len() != outputs.len() {
        return Err(CircuitError::Invalid("duplicate output".into()));
    }
    for (idx, g) in gates.iter().enumerate() {
        if (g.kind == GateKind::Output) != out_set.contains(&idx) {
            return bad(idx, "output list and output gates disagree".into());
        }
    }
    // Kahn's algorithm; ties broken by id so the order is deterministic.
    let mut indeg: Vec<usize> = gates.iter().map(|g| g.preds.len()).collect();
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
    for g in gates {
        for &p in &g.preds {
            succs[p].push(g.id);
        }
    }
    let mut ready: BTreeSet<usize> = (0..gates.len()).filter(|g| indeg[*g] == 0).collect();
    let mut topo = Vec::with_capacity(gates.len());
    while let Some(g) = ready.pop_first() {
        topo.push(g);
        for &s in &succs[g] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                ready.insert(s);
            }
        }
    }
    if topo.len() != gates.len() {
        let stuck = (0..gates.len()).find(|g| indeg[*g] > 0).unwrap_or(0);
        return Err(CircuitError::Cycle(stuck));
    }
    Ok(topo)
}

/// Incremental construction. Ids are handed out in creation order and the
/// default label of a gate is `[id]`.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    domain: Domain,
    fanin: FanIn,
    gates: Vec<Gate>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

impl CircuitBuilder {
    pub fn new(domain: Domain, fanin: FanIn) -> CircuitBuilder {
        CircuitBuilder {
            domain,
            fanin,
            gates: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn kind(&self, id: usize) -> &GateKind {
        &self.gates[id].kind
    }

    /// Appends a gate verbatim; checks happen in [`CircuitBuilder::finish`].
    pub fn push(&mut self, kind: GateKind, preds: Vec<usize>) -> usize {
        let id = self.gates.len();
        if let GateKind::Input(_) = kind {
            self.inputs.push(id);
        }
        if kind == GateKind::Output {
            self.outputs.push(id);
        }
        self.gates.push(Gate {
            id,
            label: vec![id],
            kind,
            preds,
        });
        id
    }

    pub fn input(&mut self) -> usize {
        let pos = self.inputs.len();
        self.push(GateKind::Input(pos), vec![])
    }

    pub fn constant(&mut self, v: DomainValue) -> usize {
        self.push(GateKind::Constant(v), vec![])
    }

    pub fn constant_i64(&mut self, v: i64) -> usize {
        let v = self.domain.from_i64(v);
        self.constant(v)
    }

    /// Repeated predecessors are routed through fresh unary additions so
    /// that no gate lists a predecessor twice.
    fn distinct(&mut self, preds: Vec<usize>) -> Vec<usize> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(preds.len());
        for p in preds {
            if seen.insert(p) {
                out.push(p);
            } else {
                let w = self.push(GateKind::Add, vec![p]);
                seen.insert(w);
                out.push(w);
            }
        }
        out
    }

    /// An addition gate; under a bounded discipline wide sums become a
    /// balanced binary tree.
    pub fn add(&mut self, preds: Vec<usize>) -> usize {
        self.arith(GateKind::Add, preds)
    }

    pub fn mul(&mut self, preds: Vec<usize>) -> usize {
        self.arith(GateKind::Mul, preds)
    }

    fn arith(&mut self, kind: GateKind, preds: Vec<usize>) -> usize {
        assert!(!preds.is_empty(), "arithmetic gate needs predecessors");
        match self.fanin {
            FanIn::Bounded(k) if preds.len() > k => {
                let mut layer = preds;
                while layer.len() > k {
                    layer = layer
                        .chunks(k)
                        .map(|ch| {
                            if ch.len() == 1 {
                                ch[0]
                            } else {
                                let ps = self.distinct(ch.to_vec());
                                self.push(kind.clone(), ps)
                            }
                        })
                        .collect();
                }
                let ps = self.distinct(layer);
                self.push(kind, ps)
            }
            _ => {
                let ps = self.distinct(preds);
                self.push(kind, ps)
            }
        }
    }

    pub fn less(&mut self, left: usize, right: usize) -> usize {
        let ps = self.distinct(vec![left, right]);
        self.push(GateKind::Less, ps)
    }

    pub fn output(&mut self, g: usize) -> usize {
        self.push(GateKind::Output, vec![g])
    }

    pub fn set_label(&mut self, id: usize, label: Vec<usize>) {
        self.gates[id].label = label;
    }

    pub fn finish(self) -> Result<Circuit> {
        Circuit::new(
            self.domain,
            self.fanin,
            self.gates,
            self.inputs,
            self.outputs,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Domain;

    fn ints(xs: &[i64]) -> Vec<DomainValue> {
        xs.iter().map(|x| DomainValue::int(*x)).collect()
    }

    #[test]
    fn less_gate_and_wide_add() {
        let mut b = CircuitBuilder::new(Domain::integers(), FanIn::Unbounded);
        let x = b.input();
        let y = b.input();
        let l = b.less(x, y);
        b.output(l);
        let c = b.finish().unwrap();
        assert_eq!(c.evaluate(&ints(&[1, 2])).unwrap(), ints(&[1]));
        assert_eq!(c.size(), 4);
        assert_eq!(c.depth(), 2);

        let mut b = CircuitBuilder::new(Domain::integers(), FanIn::Unbounded);
        let xs: Vec<usize> = (0..3).map(|_| b.input()).collect();
        let s = b.add(xs);
        b.output(s);
        let c = b.finish().unwrap();
        assert_eq!(c.evaluate(&ints(&[1, 2, 3])).unwrap(), ints(&[6]));
        assert_eq!((c.size(), c.depth()), (5, 2));
    }

    #[test]
    fn sign_gadget() {
        let mut b = CircuitBuilder::new(Domain::integers(), FanIn::Bounded(2));
        let x = b.input();
        let zero = b.constant_i64(0);
        let s = b.less(zero, x);
        b.output(s);
        let c = b.finish().unwrap();
        assert_eq!(c.evaluate(&ints(&[-4])).unwrap(), ints(&[0]));
        assert_eq!(c.evaluate(&ints(&[4])).unwrap(), ints(&[1]));
    }

    #[test]
    fn wire_depth_and_sizes() {
        let mut b = CircuitBuilder::new(Domain::integers(), FanIn::Unbounded);
        let x = b.input();
        b.output(x);
        assert_eq!(b.finish().unwrap().depth(), 1);
        let mut b = CircuitBuilder::new(Domain::integers(), FanIn::Unbounded);
        let x = b.input();
        let a = b.add(vec![x]);
        b.output(a);
        let c = b.finish().unwrap();
        assert_eq!((c.size(), c.depth()), (3, 2));
    }

    #[test]
    fn validation_errors() {
        let d = Domain::integers();
        let g = |id, kind, preds: Vec<usize>| Gate {
            id,
            label: vec![id],
            kind,
            preds,
        };
        let cyc = Circuit::new(
            d.clone(),
            FanIn::Unbounded,
            vec![g(0, GateKind::Add, vec![1]), g(1, GateKind::Add, vec![0])],
            vec![],
            vec![],
        );
        assert!(matches!(cyc, Err(CircuitError::Cycle(_))));
        let dup = Circuit::new(
            d.clone(),
            FanIn::Unbounded,
            vec![g(0, GateKind::Input(0), vec![]), g(1, GateKind::Add, vec![0, 0])],
            vec![0],
            vec![],
        );
        assert!(matches!(dup, Err(CircuitError::InvalidGate { gate: 1, .. })));
        let wide = Circuit::new(
            d.clone(),
            FanIn::Bounded(2),
            vec![
                g(0, GateKind::Input(0), vec![]),
                g(1, GateKind::Input(1), vec![]),
                g(2, GateKind::Input(2), vec![]),
                g(3, GateKind::Add, vec![0, 1, 2]),
            ],
            vec![0, 1, 2],
            vec![],
        );
        assert!(wide.is_err());
        let less1 = Circuit::new(
            d,
            FanIn::Unbounded,
            vec![g(0, GateKind::Input(0), vec![]), g(1, GateKind::Less, vec![0])],
            vec![0],
            vec![],
        );
        assert!(less1.is_err());
    }

    #[test]
    fn builder_splits_wide_gates_under_bounded_fanin() {
        let mut b = CircuitBuilder::new(Domain::integers(), FanIn::Bounded(2));
        let xs: Vec<usize> = (0..5).map(|_| b.input()).collect();
        let m = b.mul(xs);
        b.output(m);
        let c = b.finish().unwrap();
        assert!(c.max_fanin() <= 2);
        assert_eq!(c.evaluate(&ints(&[1, 2, 3, 4, 5])).unwrap(), ints(&[120]));
    }

    #[test]
    fn builder_routes_repeated_predecessors() {
        let mut b = CircuitBuilder::new(Domain::integers(), FanIn::Unbounded);
        let x = b.input();
        let sq = b.mul(vec![x, x]);
        b.output(sq);
        let c = b.finish().unwrap();
        assert_eq!(c.evaluate(&ints(&[7])).unwrap(), ints(&[49]));
    }

    #[test]
    fn boolean_gadgets_over_z2() {
        let f2 = Domain::finite_field(2).unwrap();
        let mut b = CircuitBuilder::new(f2.clone(), FanIn::Bounded(2));
        let x = b.input();
        let y = b.input();
        let and = b.mul(vec![x, y]);
        // not v = 1 + v over Z_2, i.e. 1 - v.
        let one = b.constant_i64(1);
        let nx = b.add(vec![one, x]);
        let one2 = b.constant_i64(1);
        let ny = b.add(vec![one2, y]);
        let nand_n = b.mul(vec![nx, ny]);
        let one3 = b.constant_i64(1);
        let or = b.add(vec![one3, nand_n]);
        let one4 = b.constant_i64(1);
        let not_x = b.add(vec![one4, x]);
        b.output(and);
        b.output(or);
        b.output(not_x);
        let c = b.finish().unwrap();
        for xv in 0..2u64 {
            for yv in 0..2u64 {
                let out = c
                    .evaluate(&[DomainValue::Mod(xv), DomainValue::Mod(yv)])
                    .unwrap();
                assert_eq!(out[0], DomainValue::Mod(xv & yv));
                assert_eq!(out[1], DomainValue::Mod(xv | yv));
                assert_eq!(out[2], DomainValue::Mod(1 - xv));
            }
        }
    }

    #[test]
    fn input_arity_checked() {
        let mut b = CircuitBuilder::new(Domain::integers(), FanIn::Unbounded);
        let x = b.input();
        b.output(x);
        let c = b.finish().unwrap();
        assert!(matches!(
            c.evaluate(&[]),
            Err(CircuitError::InputArity { expected: 1, got: 0 })
        ));
        assert!(c.evaluate(&[DomainValue::rat(1, 2)]).is_err());
    }
}
