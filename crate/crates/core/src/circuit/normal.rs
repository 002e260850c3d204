// SPDX-License-Identifier: Apache-2.0

//! Padding to depth `(c * floor(log2 n))^i` and depth-encoding gate numbers.
//!
//! A gate number is `prefix ++ counter ++ last`:
//! - `prefix` holds `i` blocks of `c` base-n digits; block `j` stores the
//!   binary value `2^m - 1` of the `j`-th unary block of an element of
//!   `d(n, c, i)`. A gate on level `L >= 1` carries element `D - L + 1`
//!   (1-based), so output gates carry the all-ones element and level-1
//!   gates the all-zeros element. Inputs also carry all zeros.
//! - `counter` tells gates of one level apart and orders the operands of
//!   every comparison gate left below right.
//! - `last` is the input position for input gates and 0 otherwise.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::balance::first_unbalanced;
use super::{Circuit, CircuitError, Gate, GateKind, Result};
use crate::numeric::{seq_d, to_digits, DElement};

/// A normalized circuit together with the parameters of its numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub circuit: Circuit,
    pub n: usize,
    pub cfac: usize,
    pub i: usize,
    /// Padded depth `D`, the length of `d(n, cfac, i)`.
    pub depth: usize,
    pub counter_width: usize,
    /// Level of every gate, 0 for sources and `D` for outputs.
    pub level: Vec<usize>,
}

impl NormalForm {
    pub fn label_width(&self) -> usize {
        self.cfac * self.i + self.counter_width + 1
    }
}

/// The `cfac * i` prefix digits encoding one element of `d`.
pub fn encode_prefix(e: &DElement, n: usize, cfac: usize) -> Vec<usize> {
    e.blocks
        .iter()
        .flat_map(|b| to_digits(b.binary_value(), n, cfac).expect("2^m - 1 < n^c"))
        .collect()
}

/// Expected prefix of a gate on `level` in a circuit padded to `depth`.
pub fn prefix_for_level(seq: &[DElement], level: usize, n: usize, cfac: usize) -> Vec<usize> {
    let d = seq.len();
    let idx = if level == 0 { d - 1 } else { d - level };
    encode_prefix(&seq[idx], n, cfac)
}

/// Ids of gates that reach an output, plus all inputs.
fn live_gates(gates: &[Gate], outputs: &[usize]) -> BTreeSet<usize> {
    let mut live: BTreeSet<usize> = gates
        .iter()
        .filter(|g| matches!(g.kind, GateKind::Input(_)))
        .map(|g| g.id)
        .collect();
    let mut stack: Vec<usize> = outputs.to_vec();
    let mut seen = BTreeSet::new();
    while let Some(g) = stack.pop() {
        if seen.insert(g) {
            live.insert(g);
            stack.extend(gates[g].preds.iter().copied());
        }
    }
    live
}

/// Renumbers `gates` densely keeping only `keep`; `level` follows along.
fn compact(
    gates: Vec<Gate>,
    level: Vec<usize>,
    keep: &BTreeSet<usize>,
) -> (Vec<Gate>, Vec<usize>, Vec<usize>, Vec<usize>) {
    let map: HashMap<usize, usize> = keep.iter().enumerate().map(|(new, old)| (*old, new)).collect();
    let mut out = Vec::with_capacity(keep.len());
    let mut lv = Vec::with_capacity(keep.len());
    let mut inputs = BTreeMap::new();
    let mut outputs = Vec::new();
    for &old in keep {
        let g = &gates[old];
        let id = map[&old];
        if let GateKind::Input(pos) = g.kind {
            inputs.insert(pos, id);
        }
        if g.kind == GateKind::Output {
            outputs.push(id);
        }
        out.push(Gate {
            id,
            label: vec![id],
            kind: g.kind.clone(),
            preds: g.preds.iter().map(|p| map[p]).collect(),
        });
        lv.push(level[old]);
    }
    (out, lv, inputs.into_values().collect(), outputs)
}

/// Topological order of `nodes` under `edges` (left must precede right),
/// ties broken by id; `None` on a cycle.
fn order_level(nodes: &[usize], edges: &BTreeSet<(usize, usize)>) -> Option<Vec<usize>> {
    let mut indeg: BTreeMap<usize, usize> = nodes.iter().map(|n| (*n, 0)).collect();
    for (_, r) in edges {
        *indeg.get_mut(r).expect("edge endpoints are level members") += 1;
    }
    let mut ready: BTreeSet<usize> = indeg.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    let mut out = Vec::with_capacity(nodes.len());
    while let Some(v) = ready.pop_first() {
        out.push(v);
        for (l, r) in edges.range((v, 0)..=(v, usize::MAX)) {
            debug_assert_eq!(*l, v);
            let d = indeg.get_mut(r).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.insert(*r);
            }
        }
    }
    (out.len() == nodes.len()).then_some(out)
}

/// Pads a balanced circuit to depth `D = (cfac * floor(log2 n))^i` and
/// numbers its gates so that prefixes encode the depth via `d(n, cfac, i)`.
pub fn pad_and_number(c: &Circuit, cfac: usize, i: usize) -> Result<NormalForm> {
    if let Some(g) = first_unbalanced(c) {
        return Err(CircuitError::Unbalanced(g));
    }
    let n = c.inputs().len();
    if n < 2 {
        return Err(CircuitError::Normalize(format!(
            "need at least 2 inputs, have {n}"
        )));
    }
    if c.outputs().is_empty() {
        return Err(CircuitError::Normalize("circuit has no output".into()));
    }
    let seq = seq_d(n, cfac, i).map_err(|e| CircuitError::Normalize(e.to_string()))?;
    let d = seq.len();
    let depth = c.depth();
    if depth > d {
        return Err(CircuitError::DepthBound { depth, bound: d });
    }
    let shift = d - depth;

    let keep = live_gates(c.gates(), c.outputs());
    let orig_level = c.gate_depths();
    let target: Vec<usize> = c
        .gates()
        .iter()
        .map(|g| match g.kind {
            GateKind::Input(_) | GateKind::Constant(_) => 0,
            GateKind::Output => d,
            _ => orig_level[g.id] + shift,
        })
        .collect();
    let (mut gates, mut level, inputs, outputs) = compact(c.gates().to_vec(), target, &keep);

    // Dummy chains for every edge that now skips levels, shared per source.
    let mut chains: HashMap<usize, Vec<usize>> = HashMap::new();
    for g in 0..gates.len() {
        let preds = gates[g].preds.clone();
        let mut new_preds = Vec::with_capacity(preds.len());
        for p in preds {
            let gap = level[g] - level[p];
            if gap == 1 {
                new_preds.push(p);
                continue;
            }
            let chain = chains.entry(p).or_default();
            while chain.len() < gap - 1 {
                let below = chain.last().copied().unwrap_or(p);
                let id = gates.len();
                gates.push(Gate {
                    id,
                    label: vec![id],
                    kind: GateKind::Add,
                    preds: vec![below],
                });
                level.push(level[below] + 1);
                chain.push(id);
            }
            new_preds.push(chain[gap - 2]);
        }
        gates[g].preds = new_preds;
    }

    // Comparison gates need left < right; when the operand constraints of a
    // level are cyclic, every comparison on it gets private operand copies.
    let less_by_level = |gates: &[Gate], level: &[usize]| {
        let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for g in gates.iter().filter(|g| g.kind == GateKind::Less) {
            m.entry(level[g.id] - 1).or_default().push(g.id);
        }
        m
    };
    let members = |level: &[usize], l: usize| -> Vec<usize> {
        (0..level.len()).filter(|g| level[*g] == l).collect()
    };
    let edges_of = |gates: &[Gate], less: &[usize]| -> BTreeSet<(usize, usize)> {
        less.iter()
            .map(|g| (gates[*g].preds[0], gates[*g].preds[1]))
            .collect()
    };
    for (l, less) in less_by_level(&gates, &level) {
        let nodes = members(&level, l);
        if order_level(&nodes, &edges_of(&gates, &less)).is_some() {
            continue;
        }
        for g in less {
            for k in 0..2 {
                let p = gates[g].preds[k];
                if matches!(gates[p].kind, GateKind::Input(_)) {
                    continue;
                }
                let id = gates.len();
                gates.push(Gate {
                    id,
                    label: vec![id],
                    kind: gates[p].kind.clone(),
                    preds: gates[p].preds.clone(),
                });
                level.push(l);
                gates[g].preds[k] = id;
            }
        }
    }
    let keep = live_gates(&gates, &outputs);
    let (mut gates, level, inputs2, outputs) = compact(gates, level, &keep);
    debug_assert_eq!(inputs.len(), inputs2.len());
    let inputs = inputs2;

    // Counters: levels 0 and 1 share the all-zeros prefix, so they are
    // numbered jointly.
    let group = |l: usize| if l <= 1 { 0 } else { l };
    let less_levels = less_by_level(&gates, &level);
    let mut counters = vec![0usize; gates.len()];
    let mut max_count = 1;
    let mut next_in_group: BTreeMap<usize, usize> = BTreeMap::new();
    for l in 0..=d {
        let nodes = members(&level, l);
        let edges = less_levels
            .get(&l)
            .map(|less| edges_of(&gates, less))
            .unwrap_or_default();
        let order = order_level(&nodes, &edges).ok_or_else(|| {
            CircuitError::Normalize(format!(
                "comparison operands on level {l} are inputs in a cyclic order; \
                 pad with a larger depth"
            ))
        })?;
        let next = next_in_group.entry(group(l)).or_insert(0);
        for g in order {
            counters[g] = *next;
            *next += 1;
        }
        max_count = max_count.max(*next);
    }
    let mut counter_width = 1;
    while n.pow(counter_width as u32) < max_count {
        counter_width += 1;
    }
    for g in gates.iter_mut() {
        let mut label = prefix_for_level(&seq, level[g.id], n, cfac);
        label.extend(to_digits(counters[g.id], n, counter_width).expect("width fits"));
        label.push(match g.kind {
            GateKind::Input(pos) => pos,
            _ => 0,
        });
        g.label = label;
    }
    let circuit = Circuit::new(c.domain().clone(), c.fanin(), gates, inputs, outputs)?;
    Ok(NormalForm {
        circuit,
        n,
        cfac,
        i,
        depth: d,
        counter_width,
        level,
    })
}

/// Checks that `c` is numbered as [`pad_and_number`] would number it.
pub fn check_normal_form(c: &Circuit, cfac: usize, i: usize) -> Result<NormalForm> {
    let bad = |gate: usize, reason: String| CircuitError::InvalidGate { gate, reason };
    let n = c.inputs().len();
    let seq = seq_d(n, cfac, i).map_err(|e| CircuitError::Normalize(e.to_string()))?;
    let d = seq.len();
    if let Some(g) = first_unbalanced(c) {
        return Err(CircuitError::Unbalanced(g));
    }
    let level = c.gate_depths();
    let width = c.gates().first().map_or(0, |g| g.label.len());
    if width < cfac * i + 2 {
        return Err(CircuitError::Normalize(format!(
            "labels of width {width} cannot hold a prefix of {} digits",
            cfac * i
        )));
    }
    let mut seen = BTreeSet::new();
    for g in c.gates() {
        if g.label.len() != width {
            return Err(bad(g.id, format!("label width {} != {width}", g.label.len())));
        }
        if g.label.iter().any(|x| *x >= n) {
            return Err(bad(g.id, "label digit not below n".into()));
        }
        if !seen.insert(g.label.clone()) {
            return Err(bad(g.id, "duplicate label".into()));
        }
        let l = level[g.id];
        if g.kind == GateKind::Output && l != d {
            return Err(bad(g.id, format!("output at depth {l}, expected {d}")));
        }
        if l > d {
            return Err(bad(g.id, format!("depth {l} exceeds {d}")));
        }
        if g.label[..cfac * i] != prefix_for_level(&seq, l, n, cfac)[..] {
            return Err(bad(g.id, format!("prefix does not encode depth {l}")));
        }
        let last = *g.label.last().unwrap();
        match g.kind {
            GateKind::Input(pos) if last != pos => {
                return Err(bad(g.id, format!("input {pos} has last digit {last}")));
            }
            GateKind::Input(_) => {}
            _ if last != 0 => return Err(bad(g.id, "non-input gate with nonzero last digit".into())),
            _ => {}
        }
        if g.kind == GateKind::Less && c.gate(g.preds[0]).label >= c.gate(g.preds[1]).label {
            return Err(bad(g.id, "left operand label is not below the right one".into()));
        }
    }
    let counter_width = width - cfac * i - 1;
    Ok(NormalForm {
        circuit: c.clone(),
        n,
        cfac,
        i,
        depth: d,
        counter_width,
        level,
    })
}
