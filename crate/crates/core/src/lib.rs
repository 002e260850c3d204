// SPDX-License-Identifier: Apache-2.0

//! Algebraic circuits over ordered integral domains, first-order logic over
//! metafinite structures with aggregation and guarded functional recursion,
//! and executable translations between the two.

pub mod algebra;
pub mod numeric;
pub mod circuit;
pub mod logic;
pub mod compile;
pub mod frontend;
pub mod simulate;
