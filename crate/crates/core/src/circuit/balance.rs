// SPDX-License-Identifier: Apache-2.0

//! Balancing: every path from a source to a fixed gate gets the same length.

use std::collections::{BTreeSet, HashMap};

use super::{Circuit, Gate, GateKind};

/// Longest source distance of every gate; sources sit at level 0.
pub fn levels(c: &Circuit) -> Vec<usize> {
    c.gate_depths()
}

/// Whether all source-to-gate paths to any gate have one common length.
///
/// Computes the full set of path lengths per gate, independently of
/// [`levels`].
pub fn is_balanced(c: &Circuit) -> bool {
    first_unbalanced(c).is_none()
}

pub(crate) fn first_unbalanced(c: &Circuit) -> Option<usize> {
    let mut lengths: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); c.size()];
    for &g in c.topo_order() {
        let gate = c.gate(g);
        if gate.preds.is_empty() {
            lengths[g].insert(0);
        } else {
            let mut s = BTreeSet::new();
            for p in &gate.preds {
                s.extend(lengths[*p].iter().map(|l| l + 1));
            }
            if s.len() > 1 {
                return Some(g);
            }
            lengths[g] = s;
        }
    }
    None
}

/// Replaces every edge that skips levels by a chain of unary additions.
///
/// Original gates keep their ids; dummies are appended. Chains hanging off
/// one gate are shared between all consumers.
pub fn balance(c: &Circuit) -> Circuit {
    let lv = levels(c);
    let mut gates: Vec<Gate> = c.gates().to_vec();
    // chain[p][k] is the dummy at level lv[p] + k + 1 above p.
    let mut chains: HashMap<usize, Vec<usize>> = HashMap::new();
    for g in 0..c.size() {
        let target = match lv[g] {
            0 => continue,
            l => l - 1,
        };
        let preds = c.gate(g).preds.clone();
        let mut new_preds = Vec::with_capacity(preds.len());
        for p in preds {
            if lv[p] == target {
                new_preds.push(p);
                continue;
            }
            let need = target - lv[p];
            let chain = chains.entry(p).or_default();
            while chain.len() < need {
                let below = chain.last().copied().unwrap_or(p);
                let id = gates.len();
                gates.push(Gate {
                    id,
                    label: vec![id],
                    kind: GateKind::Add,
                    preds: vec![below],
                });
                chain.push(id);
            }
            new_preds.push(chain[need - 1]);
        }
        gates[g].preds = new_preds;
    }
    Circuit::new(
        c.domain().clone(),
        c.fanin(),
        gates,
        c.inputs().to_vec(),
        c.outputs().to_vec(),
    )
    .expect("balancing preserves validity")
}
