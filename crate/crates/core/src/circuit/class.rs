// SPDX-License-Identifier: Apache-2.0

//! Per-instance membership checks for the AC and NC size/depth bounds.

use serde::Serialize;

use super::Circuit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassKind {
    AC,
    NC,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub kind: ClassKind,
    pub n: usize,
    pub size: usize,
    pub size_bound: f64,
    pub depth: usize,
    pub depth_bound: f64,
    pub max_fanin: usize,
    pub wires: usize,
    pub size_ok: bool,
    pub depth_ok: bool,
    pub fanin_ok: bool,
}

impl ClassReport {
    pub fn passes(&self) -> bool {
        self.size_ok && self.depth_ok && self.fanin_ok
    }
}

/// Checks `size <= c2 * n^c3`, `depth <= c1 * (log2 n)^i` and, for NC,
/// arithmetic fan-in at most 2, where `n` is the number of inputs.
pub fn check_class(c: &Circuit, kind: ClassKind, i: u32, consts: (f64, f64, f64)) -> ClassReport {
    let (c1, c2, c3) = consts;
    let n = c.inputs().len();
    let nf = n.max(1) as f64;
    let size_bound = c2 * nf.powf(c3);
    let depth_bound = c1 * nf.log2().powi(i as i32);
    let max_fanin = c.max_fanin();
    // Small slack absorbs rounding in the floating point bounds.
    let eps = 1e-9;
    ClassReport {
        kind,
        n,
        size: c.size(),
        size_bound,
        depth: c.depth(),
        depth_bound,
        max_fanin,
        wires: c.wire_count(),
        size_ok: c.size() as f64 <= size_bound + eps,
        depth_ok: c.depth() as f64 <= depth_bound + eps,
        fanin_ok: kind == ClassKind::AC || max_fanin <= 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Domain;
    use crate::circuit::{CircuitBuilder, FanIn};

    #[test]
    fn small_circuit_passes() {
        let mut b = CircuitBuilder::new(Domain::integers(), FanIn::Unbounded);
        let x = b.input();
        let y = b.input();
        let s = b.add(vec![x, y]);
        b.output(s);
        let r = check_class(&b.finish().unwrap(), ClassKind::NC, 1, (10.0, 10.0, 2.0));
        assert!(r.passes());
    }

    #[test]
    fn wide_add_fails_nc() {
        let mut b = CircuitBuilder::new(Domain::integers(), FanIn::Unbounded);
        let xs: Vec<usize> = (0..5).map(|_| b.input()).collect();
        let s = b.add(xs);
        b.output(s);
        let c = b.finish().unwrap();
        let r = check_class(&c, ClassKind::NC, 1, (10.0, 10.0, 2.0));
        assert!(!r.fanin_ok && r.size_ok && r.depth_ok);
        assert!(check_class(&c, ClassKind::AC, 1, (10.0, 10.0, 2.0)).passes());
    }
}
