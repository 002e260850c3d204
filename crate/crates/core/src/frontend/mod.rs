// SPDX-License-Identifier: Apache-2.0

//! Text formats: formulas as S-expressions, structures as JSON. Circuits
//! are read and written by [`crate::circuit`].

pub mod sexp;
pub mod structure;

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::logic::LogicError;

pub use sexp::{parse_formula, parse_term, print_formula, print_term, ParseError};
pub use structure::{parse_structure, structure_from_json, structure_to_json, write_structure, StructureJson};

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, FrontendError>;

/// A structure of size `n` in which every relation and number function of
/// `f` is an input, zero everywhere. Skeleton functions have no default and
/// must come from a structure file.
pub fn template_for(f: &crate::logic::Formula, domain: &crate::algebra::Domain, n: usize) -> Result<crate::logic::RStructure> {
    use crate::logic::{symbol_uses, RStructure, SymbolKind, Table};
    use std::collections::BTreeMap;

    let mut arities: BTreeMap<String, usize> = BTreeMap::new();
    for (kind, name, arity) in symbol_uses(f) {
        match kind {
            SymbolKind::Rec => {}
            SymbolKind::Skeleton => {
                return Err(FrontendError::Invalid(format!(
                    "skeleton function '{name}' needs a structure file"
                )))
            }
            SymbolKind::Table => {
                if let Some(prev) = arities.insert(name.clone(), arity) {
                    if prev != arity {
                        return Err(FrontendError::Invalid(format!(
                            "'{name}' is used with {prev} and with {arity} arguments"
                        )));
                    }
                }
            }
        }
    }
    let mut s = RStructure::new(domain.clone(), n);
    for (name, arity) in arities {
        let len = n.checked_pow(arity as u32).filter(|l| *l <= 1 << 20).ok_or_else(|| {
            FrontendError::Invalid(format!("'{name}' has too many entries at size {n}"))
        })?;
        s.set_number(
            &name,
            Table::Dense {
                arity,
                values: vec![domain.zero(); len],
            },
        )?;
    }
    Ok(s)
}
