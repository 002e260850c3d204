// SPDX-License-Identifier: Apache-2.0

//! Skeleton tuples read as numbers: positional values, the BIT predicate,
//! halving, unary blocks, the depth-encoding sequence `d(n, c, i)`, the
//! digit-halving countdown and the shrink-factor identity.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumericError {
    #[error("base must be at least 2, got {0}")]
    BadBase(usize),
    #[error("digit {digit} out of range for base {base}")]
    BadDigit { digit: usize, base: usize },
    #[error("tuples of different length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("unary value {m} exceeds length {len}")]
    UnaryOverflow { m: usize, len: usize },
    #[error("malformed unary word {0:?}")]
    MalformedUnary(String),
    #[error("parameters out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, NumericError>;

fn check_digits(digits: &[usize], base: usize) -> Result<()> {
    if base < 2 {
        return Err(NumericError::BadBase(base));
    }
    match digits.iter().find(|d| **d >= base) {
        Some(d) => Err(NumericError::BadDigit { digit: *d, base }),
        None => Ok(()),
    }
}

/// Positional value, most significant digit first.
pub fn numval(digits: &[usize], base: usize) -> Result<BigUint> {
    check_digits(digits, base)?;
    let b = BigUint::from(base);
    Ok(digits
        .iter()
        .fold(BigUint::zero(), |acc, d| acc * &b + BigUint::from(*d)))
}

/// Little helper for code that knows the value fits a machine word.
pub fn numval_usize(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0usize, |acc, d| acc * base + d)
}

/// The `len`-digit base-`base` representation of `v`, or `None` if it
/// does not fit.
pub fn to_digits(mut v: usize, base: usize, len: usize) -> Option<Vec<usize>> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = v % base;
        v /= base;
    }
    (v == 0).then_some(out)
}

/// Binary digits of `v`, most significant first; empty for zero.
pub fn binary_msb_first(v: &BigUint) -> Vec<bool> {
    let n = v.bits();
    (0..n).rev().map(|k| v.bit(k)).collect()
}

/// BIT(i, j): the `numval(i)`-th binary digit of `numval(j)`, counting the
/// most significant digit as index 1. Out-of-range indices give 0.
pub fn bit(i: &[usize], j: &[usize], base: usize) -> Result<bool> {
    let idx = numval(i, base)?;
    let bits = binary_msb_first(&numval(j, base)?);
    let idx = match idx.to_usize() {
        Some(k) if k >= 1 && k <= bits.len() => k,
        _ => return Ok(false),
    };
    Ok(bits[idx - 1])
}

/// `x <= y/2`, decided as "x + x exists without overflow and is <= y" on
/// same-length digit tuples.
pub fn fo_half_leq(x: &[usize], y: &[usize], base: usize) -> Result<bool> {
    check_digits(x, base)?;
    check_digits(y, base)?;
    if x.len() != y.len() {
        return Err(NumericError::LengthMismatch(x.len(), y.len()));
    }
    let mut doubled = vec![0; x.len()];
    let mut carry = 0;
    for k in (0..x.len()).rev() {
        let s = 2 * x[k] + carry;
        doubled[k] = s % base;
        carry = s / base;
    }
    if carry != 0 {
        return Ok(false);
    }
    Ok(doubled.as_slice() <= y)
}

/// A word of the shape `0^(len-m) 1^m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnaryWord {
    bits: Vec<bool>,
}

impl UnaryWord {
    pub fn from_bits(bits: Vec<bool>) -> Result<UnaryWord> {
        let first_one = bits.iter().position(|b| *b).unwrap_or(bits.len());
        if bits[first_one..].iter().any(|b| !b) {
            let text: String = bits.iter().map(|b| if *b { '1' } else { '0' }).collect();
            return Err(NumericError::MalformedUnary(text));
        }
        Ok(UnaryWord { bits })
    }

    pub fn parse(text: &str) -> Result<UnaryWord> {
        let bits = text
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(NumericError::MalformedUnary(text.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        UnaryWord::from_bits(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Binary valuation of the word, i.e. `2^uval - 1`.
    pub fn binary_value(&self) -> usize {
        (1usize << uval(self)) - 1
    }
}

impl fmt::Display for UnaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub fn unary_enc(len: usize, m: usize) -> Result<UnaryWord> {
    if m > len {
        return Err(NumericError::UnaryOverflow { m, len });
    }
    let mut bits = vec![false; len - m];
    bits.extend(std::iter::repeat(true).take(m));
    Ok(UnaryWord { bits })
}

pub fn uval(w: &UnaryWord) -> usize {
    w.bits.iter().filter(|b| **b).count()
}

/// One element of `d(n, c, i)`: `i` unary blocks of equal length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DElement {
    pub blocks: Vec<UnaryWord>,
}

impl DElement {
    pub fn values(&self) -> Vec<usize> {
        self.blocks.iter().map(uval).collect()
    }
}

impl fmt::Display for DElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn floor_log2(n: usize) -> usize {
    assert!(n >= 1);
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// Block length of `d(n, c, i)`, which is also the largest block value.
pub fn seq_d_block_len(n: usize, c: usize) -> usize {
    (c * floor_log2(n.max(1))).saturating_sub(1)
}

/// The sequence `d(n, c, i)`: counting down from all ones to all zeros as an
/// `i`-digit number whose digits are unary blocks of length
/// `c * floor(log2 n) - 1`.
pub fn seq_d(n: usize, c: usize, i: usize) -> Result<Vec<DElement>> {
    if n < 2 || c < 1 || i < 1 {
        return Err(NumericError::OutOfRange(format!(
            "need n >= 2, c >= 1, i >= 1; got n={n}, c={c}, i={i}"
        )));
    }
    let m = seq_d_block_len(n, c);
    if m < 1 {
        return Err(NumericError::OutOfRange(format!(
            "c * floor(log2 n) must be at least 2; got n={n}, c={c}"
        )));
    }
    let mut vals = vec![m; i];
    let mut out = Vec::with_capacity((m + 1).pow(i as u32));
    loop {
        out.push(DElement {
            blocks: vals
                .iter()
                .map(|v| unary_enc(m, *v).expect("v <= m"))
                .collect(),
        });
        if vals.iter().all(|v| *v == 0) {
            return Ok(out);
        }
        // Subtract one with borrow; the last block is least significant.
        for v in vals.iter_mut().rev() {
            if *v == 0 {
                *v = m;
            } else {
                *v -= 1;
                break;
            }
        }
    }
}

/// Table layout: a header, then one row per element with the blocks
/// as columns.
pub fn seq_d_table(seq: &[DElement]) -> String {
    let i = seq.first().map_or(0, |e| e.blocks.len());
    let mut out = String::from("l\\i");
    for j in 1..=i {
        out.push_str(&format!(" | {j}"));
    }
    out.push('\n');
    for (l, e) in seq.iter().enumerate() {
        out.push_str(&(l + 1).to_string());
        for b in &e.blocks {
            out.push_str(&format!(" | {b}"));
        }
        out.push('\n');
    }
    out
}

/// Trace of the digit-halving countdown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Countdown {
    pub base: usize,
    pub states: Vec<Vec<usize>>,
}

impl Countdown {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }
}

/// Repeatedly halves the least significant nonzero digit, resetting every
/// digit to its right to `base - 1`, until all digits are zero.
pub fn digit_halving_countdown(base: usize, digits: &[usize]) -> Result<Countdown> {
    check_digits(digits, base)?;
    let mut cur = digits.to_vec();
    let mut states = vec![cur.clone()];
    while let Some(p) = cur.iter().rposition(|d| *d != 0) {
        cur[p] /= 2;
        for d in cur[p + 1..].iter_mut() {
            *d = base - 1;
        }
        states.push(cur.clone());
    }
    Ok(Countdown { base, states })
}

fn render_digits(digits: &[usize], base: usize) -> String {
    if base <= 10 {
        digits.iter().map(|d| d.to_string()).collect()
    } else {
        let parts: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

/// Lays the trace out in columns, one per value of the leading digit, read
/// top to bottom then left to right.
pub fn countdown_table(cd: &Countdown) -> String {
    let mut columns: Vec<Vec<&Vec<usize>>> = Vec::new();
    for s in &cd.states {
        let lead = s.first().copied();
        match columns.last_mut() {
            Some(col) if col[0].first().copied() == lead => col.push(s),
            _ => columns.push(vec![s]),
        }
    }
    let rows = columns.iter().map(|c| c.len()).max().unwrap_or(0);
    let width = cd
        .states
        .iter()
        .map(|s| render_digits(s, cd.base).len())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for r in 0..rows {
        let cells: Vec<String> = columns
            .iter()
            .map(|c| match c.get(r) {
                Some(s) => render_digits(s, cd.base),
                None => " ".repeat(width),
            })
            .collect();
        out.push_str(cells.join(" ").trim_end());
        out.push('\n');
    }
    out
}

/// Checks `n * alpha^((log2 n)^i) = 1` for `alpha = 2^(-log2 n / (log2 n)^i)`
/// and that every shorter product stays above 1. Returns `(log2 n)^i`.
///
/// Powers of `alpha` are kept as exponents of two with rational exponents,
/// which is exact for every `i`; for `i <= 1` alpha is dyadic and the
/// products are cross-checked as rationals.
pub fn shrink_steps(n: u64, i: u32) -> Result<u64> {
    if n < 2 || !n.is_power_of_two() {
        return Err(NumericError::OutOfRange(format!(
            "n must be a power of two >= 2, got {n}"
        )));
    }
    let m = n.trailing_zeros() as u64;
    let steps = m
        .checked_pow(i)
        .ok_or_else(|| NumericError::OutOfRange(format!("(log2 {n})^{i} overflows")))?;
    let alpha_exp = BigRational::new(-BigInt::from(m), BigInt::from(steps));
    let mut exp = BigRational::from_integer(BigInt::from(m));
    let dyadic_alpha = (i <= 1).then(|| {
        let den = BigInt::one() << (m / steps) as usize;
        BigRational::new(BigInt::one(), den)
    });
    let mut value = BigRational::from_integer(BigInt::from(n));
    for s in 1..=steps {
        exp += &alpha_exp;
        if let Some(a) = &dyadic_alpha {
            value *= a;
        }
        let reached_one = exp.is_zero();
        if reached_one != (s == steps) {
            return Err(NumericError::OutOfRange(format!(
                "shrink identity fails at step {s} for n={n}, i={i}"
            )));
        }
        if dyadic_alpha.is_some() && value.is_one() != reached_one {
            return Err(NumericError::OutOfRange(format!(
                "dyadic cross-check fails at step {s} for n={n}, i={i}"
            )));
        }
    }
    Ok(steps)
}
