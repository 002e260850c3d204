// SPDX-License-Identifier: Apache-2.0

//! Agreement between the formula evaluator and compiled circuits.

use rand::Rng;
use serde::Serialize;

use super::{compile_formula, BoundNode, CompileOptions, Result};
use crate::algebra::DomainValue;
use crate::frontend::sexp::{print_formula, print_term};
use crate::logic::{eval_formula, eval_term, Formula, RStructure};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub input: Vec<String>,
    pub formula: bool,
    pub circuit: String,
    /// The most deeply nested node whose gate disagrees with the
    /// evaluator, with its variable assignment.
    pub localized: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    pub n: usize,
    pub samples: usize,
    pub agree: usize,
    pub circuit_size: usize,
    pub circuit_depth: usize,
    pub disagreements: Vec<Disagreement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundtripReport {
    pub sizes: Vec<SizeReport>,
}

impl RoundtripReport {
    pub fn all_agree(&self) -> bool {
        self.sizes.iter().all(|s| s.agree == s.samples)
    }
}

/// For every universe size, compiles `f` over `template(n)` and compares
/// the circuit with the evaluator on `samples` random inputs whose
/// coefficients lie in `[-mag, mag]`.
pub fn roundtrip_check<R, T>(
    f: &Formula,
    template: T,
    sizes: &[usize],
    samples: usize,
    mag: i64,
    rng: &mut R,
    opts: &CompileOptions,
) -> Result<RoundtripReport>
where
    R: Rng + ?Sized,
    T: Fn(usize) -> Result<RStructure>,
{
    let mut out = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let tpl = template(n)?;
        let opts = CompileOptions {
            record_bindings: true,
            ..opts.clone()
        };
        let compiled = compile_formula(f, &tpl, &opts)?;
        let d = tpl.domain();
        let mut rep = SizeReport {
            n,
            samples,
            agree: 0,
            circuit_size: compiled.circuit.size(),
            circuit_depth: compiled.circuit.depth(),
            disagreements: Vec::new(),
        };
        for _ in 0..samples {
            let x: Vec<DomainValue> = (0..compiled.layout.len()).map(|_| d.sample(rng, mag)).collect();
            let s = compiled.layout.structure(&tpl, &x)?;
            let want = eval_formula(&s, &[], f)?;
            let values = compiled.circuit.evaluate_all(&x)?;
            let got = &values[compiled.circuit.outputs()[0]];
            let expected = if want { d.one() } else { d.zero() };
            if *got == expected {
                rep.agree += 1;
                continue;
            }
            let mut worst: Option<(usize, String)> = None;
            for b in compiled.bindings.iter().filter(|b| !b.in_recursion) {
                let (value, text) = match &b.node {
                    BoundNode::Formula(g) => match eval_formula(&s, &b.env, g) {
                        Ok(v) => (if v { d.one() } else { d.zero() }, print_formula(g)),
                        Err(_) => continue,
                    },
                    BoundNode::Term(t) => match eval_term(&s, &b.env, t) {
                        Ok(v) => (v, print_term(t)),
                        Err(_) => continue,
                    },
                };
                if values[b.gate] != value && worst.as_ref().is_none_or(|(dep, _)| b.depth > *dep) {
                    let env: Vec<String> = b.env.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    worst = Some((
                        b.depth,
                        format!(
                            "{text} under [{}]: evaluator {}, gate {} computes {}",
                            env.join(" "),
                            d.render(&value),
                            b.gate,
                            d.render(&values[b.gate])
                        ),
                    ));
                }
            }
            rep.disagreements.push(Disagreement {
                input: x.iter().map(|v| d.render(v)).collect(),
                formula: want,
                circuit: d.render(got),
                localized: worst.map(|(_, s)| s),
            });
        }
        out.push(rep);
    }
    Ok(RoundtripReport { sizes: out })
}
