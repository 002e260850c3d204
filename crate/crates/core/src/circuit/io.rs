// SPDX-License-Identifier: Apache-2.0

//! JSON interchange and Graphviz DOT export for circuits.
//!
//! Both formats carry every gate attribute, so `from_json(to_json(c))` and
//! `from_dot(to_dot(c))` give back `c`.

use serde::{Deserialize, Serialize};

use super::{Circuit, CircuitError, FanIn, Gate, GateKind, Result};
use crate::algebra::Domain;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateJson {
    pub id: usize,
    pub label: Vec<usize>,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    pub preds: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitJson {
    pub domain: String,
    pub fanin: String,
    pub gates: Vec<GateJson>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

pub fn to_json_value(c: &Circuit) -> CircuitJson {
    let dom = c.domain();
    CircuitJson {
        domain: dom.to_string(),
        fanin: c.fanin().name(),
        gates: c
            .gates()
            .iter()
            .map(|g| GateJson {
                id: g.id,
                label: g.label.clone(),
                kind: g.kind.name().to_string(),
                value: match &g.kind {
                    GateKind::Constant(v) => Some(dom.render(v)),
                    _ => None,
                },
                preds: g.preds.clone(),
            })
            .collect(),
        inputs: c.inputs().to_vec(),
        outputs: c.outputs().to_vec(),
    }
}

pub fn to_json(c: &Circuit) -> String {
    serde_json::to_string_pretty(&to_json_value(c)).expect("circuit serializes")
}

pub fn from_json_value(j: &CircuitJson) -> Result<Circuit> {
    let domain = Domain::parse(&j.domain)?;
    let fanin = FanIn::parse(&j.fanin)
        .ok_or_else(|| CircuitError::Parse(format!("unknown fan-in {:?}", j.fanin)))?;
    let mut gates = Vec::with_capacity(j.gates.len());
    for g in &j.gates {
        let kind = match g.kind.as_str() {
            "input" => {
                let pos = j.inputs.iter().position(|x| *x == g.id).ok_or_else(|| {
                    CircuitError::Parse(format!("input gate {} missing from inputs", g.id))
                })?;
                GateKind::Input(pos)
            }
            "const" => {
                let text = g.value.as_deref().ok_or_else(|| {
                    CircuitError::Parse(format!("constant gate {} has no value", g.id))
                })?;
                GateKind::Constant(domain.parse_value(text)?)
            }
            "add" => GateKind::Add,
            "mul" => GateKind::Mul,
            "less" => GateKind::Less,
            "output" => GateKind::Output,
            other => {
                return Err(CircuitError::Parse(format!(
                    "gate {}: unknown kind {other:?}",
                    g.id
                )))
            }
        };
        gates.push(Gate {
            id: g.id,
            label: g.label.clone(),
            kind,
            preds: g.preds.clone(),
        });
    }
    Circuit::new(domain, fanin, gates, j.inputs.clone(), j.outputs.clone())
}

pub fn from_json(text: &str) -> Result<Circuit> {
    let j: CircuitJson =
        serde_json::from_str(text).map_err(|e| CircuitError::Parse(e.to_string()))?;
    from_json_value(&j)
}

fn shape(kind: &GateKind) -> &'static str {
    match kind {
        GateKind::Input(_) => "invtriangle",
        GateKind::Constant(_) => "box",
        GateKind::Add => "circle",
        GateKind::Mul => "doublecircle",
        GateKind::Less => "diamond",
        GateKind::Output => "triangle",
    }
}

fn symbol(kind: &GateKind) -> &'static str {
    match kind {
        GateKind::Input(_) => "in",
        GateKind::Constant(_) => "const",
        GateKind::Add => "+",
        GateKind::Mul => "*",
        GateKind::Less => "<",
        GateKind::Output => "out",
    }
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// DOT text; the node shape reflects the gate kind and the caption shows
/// the gate number.
pub fn to_dot(c: &Circuit) -> String {
    let dom = c.domain();
    let mut out = String::from("digraph circuit {\n");
    out.push_str(&format!("  domain=\"{dom}\";\n"));
    out.push_str(&format!("  fanin=\"{}\";\n", c.fanin().name()));
    out.push_str(&format!("  inputs=\"{}\";\n", join(c.inputs())));
    out.push_str(&format!("  outputs=\"{}\";\n", join(c.outputs())));
    for g in c.gates() {
        let mut caption = symbol(&g.kind).to_string();
        let mut value = String::new();
        if let GateKind::Constant(v) = &g.kind {
            let r = dom.render(v);
            caption = r.clone();
            value = format!(", value=\"{r}\"");
        }
        if let GateKind::Input(pos) = g.kind {
            caption = format!("x{pos}");
        }
        out.push_str(&format!(
            "  g{} [shape={}, kind=\"{}\"{}, number=\"{}\", label=\"{}\\n[{}]\"];\n",
            g.id,
            shape(&g.kind),
            g.kind.name(),
            value,
            join(&g.label),
            caption,
            join(&g.label),
        ));
    }
    for g in c.gates() {
        for (k, p) in g.preds.iter().enumerate() {
            out.push_str(&format!("  g{p} -> g{} [operand={k}];\n", g.id));
        }
    }
    out.push_str("}\n");
    out
}

fn attr<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let pat = format!("{key}=\"");
    let start = line.find(&pat)? + pat.len();
    let len = line[start..].find('"')?;
    Some(&line[start..start + len])
}

fn split_list(s: &str) -> Result<Vec<usize>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.parse()
                .map_err(|_| CircuitError::Parse(format!("bad number {t:?}")))
        })
        .collect()
}

/// Reads back the output of [`to_dot`].
pub fn from_dot(text: &str) -> Result<Circuit> {
    let perr = |m: String| CircuitError::Parse(m);
    let mut domain = None;
    let mut fanin = None;
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut nodes: Vec<(usize, String, Option<String>, Vec<usize>)> = Vec::new();
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.starts_with("domain=") {
            domain = attr(line, "domain").map(str::to_string);
        } else if line.starts_with("fanin=") {
            fanin = attr(line, "fanin").map(str::to_string);
        } else if line.starts_with("inputs=") {
            inputs = split_list(attr(line, "inputs").unwrap_or(""))?;
        } else if line.starts_with("outputs=") {
            outputs = split_list(attr(line, "outputs").unwrap_or(""))?;
        } else if let Some(rest) = line.strip_prefix('g') {
            let id_end = rest
                .find(|ch: char| !ch.is_ascii_digit())
                .ok_or_else(|| perr(format!("bad line {line:?}")))?;
            let id: usize = rest[..id_end]
                .parse()
                .map_err(|_| perr(format!("bad node id in {line:?}")))?;
            let tail = rest[id_end..].trim_start();
            if let Some(edge) = tail.strip_prefix("-> g") {
                let to_end = edge
                    .find(|ch: char| !ch.is_ascii_digit())
                    .ok_or_else(|| perr(format!("bad edge {line:?}")))?;
                let to: usize = edge[..to_end]
                    .parse()
                    .map_err(|_| perr(format!("bad edge {line:?}")))?;
                let k = line
                    .split("operand=")
                    .nth(1)
                    .and_then(|s| s.trim_end_matches("];").parse().ok())
                    .ok_or_else(|| perr(format!("edge without operand index {line:?}")))?;
                edges.push((id, to, k));
            } else {
                let kind = attr(line, "kind").ok_or_else(|| perr(format!("no kind in {line:?}")))?;
                let number = split_list(attr(line, "number").unwrap_or(""))?;
                nodes.push((
                    id,
                    kind.to_string(),
                    attr(line, "value").map(str::to_string),
                    number,
                ));
            }
        }
    }
    let mut gates: Vec<GateJson> = nodes
        .into_iter()
        .map(|(id, kind, value, label)| GateJson {
            id,
            label,
            kind,
            value,
            preds: Vec::new(),
        })
        .collect();
    gates.sort_by_key(|g| g.id);
    let mut slots: Vec<Vec<(usize, usize)>> = vec![Vec::new(); gates.len()];
    for (from, to, k) in edges {
        slots
            .get_mut(to)
            .ok_or_else(|| perr(format!("edge into unknown node g{to}")))?
            .push((k, from));
    }
    for (g, mut s) in gates.iter_mut().zip(slots) {
        s.sort();
        g.preds = s.into_iter().map(|(_, p)| p).collect();
    }
    from_json_value(&CircuitJson {
        domain: domain.ok_or_else(|| perr("missing domain".into()))?,
        fanin: fanin.ok_or_else(|| perr("missing fanin".into()))?,
        gates,
        inputs,
        outputs,
    })
}
