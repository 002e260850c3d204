// SPDX-License-Identifier: Apache-2.0

//! JSON files for structures.
//!
//! ```json
//! { "domain": "Z", "size": 3,
//!   "skeleton": { "s": { "arity": 1, "values": [1, 2, 0] } },
//!   "number":   { "w": { "arity": 2, "values": ["0", "1", ...] } },
//!   "aux":      { "R": { "arity": 2, "default": "0", "entries": [[[0, 1], "1"]] } } }
//! ```
//!
//! Dense tables list values in row-major order. Values are written in the
//! domain's value grammar; bare JSON integers are accepted on input.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FrontendError, Result};
use crate::algebra::{Domain, DomainValue};
use crate::logic::{RStructure, SkeletonFn, Table};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueText {
    Int(i64),
    Text(String),
}

impl ValueText {
    fn parse(&self, d: &Domain) -> Result<DomainValue> {
        Ok(match self {
            ValueText::Int(v) => d.from_i64(*v),
            ValueText::Text(t) => d.parse_value(t)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableJson {
    Sparse {
        arity: usize,
        default: ValueText,
        entries: Vec<(Vec<usize>, ValueText)>,
    },
    Dense {
        arity: usize,
        values: Vec<ValueText>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonJson {
    pub arity: usize,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureJson {
    pub domain: String,
    pub size: usize,
    #[serde(default)]
    pub skeleton: BTreeMap<String, SkeletonJson>,
    #[serde(default)]
    pub number: BTreeMap<String, TableJson>,
    #[serde(default)]
    pub aux: BTreeMap<String, TableJson>,
}

fn table_json(d: &Domain, t: &Table) -> TableJson {
    let text = |v: &DomainValue| ValueText::Text(d.render(v));
    match t {
        Table::Dense { arity, values } => TableJson::Dense {
            arity: *arity,
            values: values.iter().map(text).collect(),
        },
        Table::Sparse {
            arity,
            default,
            entries,
        } => TableJson::Sparse {
            arity: *arity,
            default: text(default),
            entries: entries.iter().map(|(k, v)| (k.clone(), text(v))).collect(),
        },
    }
}

fn table(d: &Domain, t: &TableJson) -> Result<Table> {
    Ok(match t {
        TableJson::Dense { arity, values } => Table::Dense {
            arity: *arity,
            values: values.iter().map(|v| v.parse(d)).collect::<Result<_>>()?,
        },
        TableJson::Sparse {
            arity,
            default,
            entries,
        } => {
            let mut map = BTreeMap::new();
            for (k, v) in entries {
                if map.insert(k.clone(), v.parse(d)?).is_some() {
                    return Err(FrontendError::Invalid(format!("duplicate table entry {k:?}")));
                }
            }
            Table::Sparse {
                arity: *arity,
                default: default.parse(d)?,
                entries: map,
            }
        }
    })
}

pub fn structure_to_json(s: &RStructure) -> StructureJson {
    let d = s.domain();
    StructureJson {
        domain: d.name(),
        size: s.size(),
        skeleton: s
            .skeleton_fns()
            .iter()
            .map(|(k, f)| {
                (
                    k.clone(),
                    SkeletonJson {
                        arity: f.arity,
                        values: f.values.clone(),
                    },
                )
            })
            .collect(),
        number: s.number_fns().iter().map(|(k, t)| (k.clone(), table_json(d, t))).collect(),
        aux: s.aux_fns().iter().map(|(k, t)| (k.clone(), table_json(d, t))).collect(),
    }
}

pub fn structure_from_json(j: &StructureJson) -> Result<RStructure> {
    let d = Domain::parse(&j.domain)?;
    let mut s = RStructure::new(d.clone(), j.size);
    for (k, f) in &j.skeleton {
        s.set_skeleton(
            k,
            SkeletonFn {
                arity: f.arity,
                values: f.values.clone(),
            },
        )?;
    }
    for (k, t) in &j.number {
        s.set_number(k, table(&d, t)?)?;
    }
    for (k, t) in &j.aux {
        if j.number.contains_key(k) {
            return Err(FrontendError::Invalid(format!("'{k}' is both a number and an aux function")));
        }
        s.set_aux(k, table(&d, t)?)?;
    }
    Ok(s)
}

pub fn parse_structure(text: &str) -> Result<RStructure> {
    structure_from_json(&serde_json::from_str(text)?)
}

pub fn write_structure(s: &RStructure) -> String {
    serde_json::to_string_pretty(&structure_to_json(s)).expect("structure serializes")
}
