// SPDX-License-Identifier: Apache-2.0

//! Finite ordered skeletons `{0, ..., n-1}` with number functions.

use std::collections::BTreeMap;

use super::{LogicError, Result};
use crate::algebra::{Domain, DomainValue};

/// A total map `A^arity -> A`, stored densely in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonFn {
    pub arity: usize,
    pub values: Vec<usize>,
}

/// A total map `A^arity -> R`.
///
/// Sparse tables store only entries that differ from `default`; they are
/// what the evaluator scans when a relation guards a quantifier or an
/// aggregation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Table {
    Dense {
        arity: usize,
        values: Vec<DomainValue>,
    },
    Sparse {
        arity: usize,
        default: DomainValue,
        entries: BTreeMap<Vec<usize>, DomainValue>,
    },
}

impl Table {
    pub fn arity(&self) -> usize {
        match self {
            Table::Dense { arity, .. } | Table::Sparse { arity, .. } => *arity,
        }
    }

    pub fn get(&self, n: usize, args: &[usize]) -> &DomainValue {
        match self {
            Table::Dense { values, .. } => &values[flat_index(n, args)],
            Table::Sparse {
                default, entries, ..
            } => entries.get(args).unwrap_or(default),
        }
    }

    /// A 0/1 relation holding exactly on `tuples`.
    pub fn relation<I: IntoIterator<Item = Vec<usize>>>(
        domain: &Domain,
        arity: usize,
        tuples: I,
    ) -> Table {
        Table::Sparse {
            arity,
            default: domain.zero(),
            entries: tuples.into_iter().map(|t| (t, domain.one())).collect(),
        }
    }
}

pub(crate) fn flat_index(n: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, a| acc * n + a)
}

/// Arity of every symbol, split by sort.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub skeleton: BTreeMap<String, usize>,
    /// Input-structure number functions.
    pub number: BTreeMap<String, usize>,
    /// Auxiliary (input-independent) functions and relations.
    pub aux: BTreeMap<String, usize>,
}

impl Signature {
    pub fn table_arity(&self, name: &str) -> Option<usize> {
        self.number
            .get(name)
            .or_else(|| self.aux.get(name))
            .copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RStructure {
    domain: Domain,
    size: usize,
    skeleton: BTreeMap<String, SkeletonFn>,
    number: BTreeMap<String, Table>,
    aux: BTreeMap<String, Table>,
}

impl RStructure {
    pub fn new(domain: Domain, size: usize) -> RStructure {
        RStructure {
            domain,
            size,
            skeleton: BTreeMap::new(),
            number: BTreeMap::new(),
            aux: BTreeMap::new(),
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Universe size `n`; the universe is `0..n`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn skeleton_fns(&self) -> &BTreeMap<String, SkeletonFn> {
        &self.skeleton
    }

    pub fn number_fns(&self) -> &BTreeMap<String, Table> {
        &self.number
    }

    pub fn aux_fns(&self) -> &BTreeMap<String, Table> {
        &self.aux
    }

    fn check_table(&self, name: &str, t: &Table) -> Result<()> {
        let bad = |reason: String| LogicError::BadTable {
            name: name.to_string(),
            reason,
        };
        match t {
            Table::Dense { arity, values } => {
                let want = self.size.pow(*arity as u32);
                if values.len() != want {
                    return Err(bad(format!("{} entries, expected {want}", values.len())));
                }
                for v in values {
                    self.domain.check(v)?;
                }
            }
            Table::Sparse {
                arity,
                default,
                entries,
            } => {
                self.domain.check(default)?;
                for (k, v) in entries {
                    if k.len() != *arity || k.iter().any(|a| *a >= self.size) {
                        return Err(bad(format!("key {k:?} outside A^{arity}")));
                    }
                    self.domain.check(v)?;
                }
            }
        }
        Ok(())
    }

    pub fn set_skeleton(&mut self, name: &str, f: SkeletonFn) -> Result<()> {
        let want = self.size.pow(f.arity as u32);
        if f.values.len() != want || f.values.iter().any(|v| *v >= self.size) {
            return Err(LogicError::BadTable {
                name: name.to_string(),
                reason: format!("skeleton function must list {want} elements of the universe"),
            });
        }
        self.skeleton.insert(name.to_string(), f);
        Ok(())
    }

    pub fn set_number(&mut self, name: &str, t: Table) -> Result<()> {
        self.check_table(name, &t)?;
        self.aux.remove(name);
        self.number.insert(name.to_string(), t);
        Ok(())
    }

    pub fn set_aux(&mut self, name: &str, t: Table) -> Result<()> {
        self.check_table(name, &t)?;
        self.number.remove(name);
        self.aux.insert(name.to_string(), t);
        Ok(())
    }

    /// A dense number function from a closure over argument tuples.
    pub fn set_number_fn<F>(&mut self, name: &str, arity: usize, f: F) -> Result<()>
    where
        F: FnMut(&[usize]) -> DomainValue,
    {
        let t = Table::Dense {
            arity,
            values: all_tuples(self.size, arity).iter().map(|a| a.as_slice()).map(f).collect(),
        };
        self.set_number(name, t)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.number.get(name).or_else(|| self.aux.get(name))
    }

    pub fn skeleton_fn(&self, name: &str) -> Option<&SkeletonFn> {
        self.skeleton.get(name)
    }

    pub fn signature(&self) -> Signature {
        Signature {
            skeleton: self.skeleton.iter().map(|(k, f)| (k.clone(), f.arity)).collect(),
            number: self.number.iter().map(|(k, t)| (k.clone(), t.arity())).collect(),
            aux: self.aux.iter().map(|(k, t)| (k.clone(), t.arity())).collect(),
        }
    }
}

/// All tuples of `A^k` in lexicographic order.
pub fn all_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let total = n.pow(k as u32);
    (0..total)
        .map(|mut idx| {
            let mut t = vec![0; k];
            for slot in t.iter_mut().rev() {
                *slot = idx % n;
                idx /= n;
            }
            t
        })
        .collect()
}
