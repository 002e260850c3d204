// SPDX-License-Identifier: Apache-2.0

//! Ordered integral domains with exact arithmetic.
//!
//! Four carriers are supported: the integers, the rationals, prime fields
//! `F_p` and adjoined-root extensions `R[j_k]` over the integers or the
//! rationals, where `j_k^k = -1`. Elements of an adjoined extension are
//! coefficient tuples `(c_0, ..., c_{k-1})` standing for `sum c_u j^u`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("domain mismatch: value {value} does not belong to {domain}")]
    DomainMismatch { domain: String, value: String },
    #[error("cannot parse {text:?} as an element of {domain}: {reason}")]
    Parse {
        domain: String,
        text: String,
        reason: String,
    },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

/// Scalar carrier underneath an adjoined extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseKind {
    Integer,
    Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DomainKind {
    Integer,
    Rational,
    FiniteField(u64),
    Adjoined { base: BaseKind, k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OrderSpec {
    /// The usual order on integers and rationals.
    Natural,
    /// Lexicographic order on coefficient tuples, `c_0` most significant.
    Lexicographic,
    /// Residues listed from smallest to largest.
    Listed(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Domain {
    kind: DomainKind,
    order: OrderSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DomainValue {
    Int(BigInt),
    Rat(BigRational),
    Mod(u64),
    Tuple(Vec<DomainValue>),
}

impl DomainValue {
    pub fn int(v: i64) -> DomainValue {
        DomainValue::Int(BigInt::from(v))
    }

    pub fn rat(num: i64, den: i64) -> DomainValue {
        DomainValue::Rat(BigRational::new(num.into(), den.into()))
    }

    pub fn tuple_of_ints(cs: &[i64]) -> DomainValue {
        DomainValue::Tuple(cs.iter().map(|c| DomainValue::int(*c)).collect())
    }

    /// Rendering in the value grammar of [`Domain::parse_value`].
    pub fn plain(&self) -> String {
        match self {
            DomainValue::Mod(v) => v.to_string(),
            DomainValue::Tuple(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| c.plain()).collect();
                format!("({})", parts.join(","))
            }
            other => other.short(),
        }
    }

    fn short(&self) -> String {
        match self {
            DomainValue::Int(v) => v.to_string(),
            DomainValue::Rat(v) => format!("{}/{}", v.numer(), v.denom()),
            DomainValue::Mod(v) => format!("{v} (mod)"),
            DomainValue::Tuple(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| c.short()).collect();
                format!("({})", parts.join(","))
            }
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Domain {
    pub fn integers() -> Domain {
        Domain {
            kind: DomainKind::Integer,
            order: OrderSpec::Natural,
        }
    }

    pub fn rationals() -> Domain {
        Domain {
            kind: DomainKind::Rational,
            order: OrderSpec::Natural,
        }
    }

    /// `F_p` with the residue order `0 < 1 < ... < p-1`.
    pub fn finite_field(p: u64) -> Result<Domain> {
        Domain::finite_field_with_order(p, (0..p).collect())
    }

    pub fn finite_field_with_order(p: u64, listed: Vec<u64>) -> Result<Domain> {
        if !is_prime(p) {
            return Err(AlgebraError::InvalidDomain(format!("{p} is not prime")));
        }
        let mut sorted = listed.clone();
        sorted.sort_unstable();
        if sorted != (0..p).collect::<Vec<_>>() {
            return Err(AlgebraError::InvalidDomain(format!(
                "listed order {listed:?} is not a permutation of 0..{p}"
            )));
        }
        Ok(Domain {
            kind: DomainKind::FiniteField(p),
            order: OrderSpec::Listed(listed),
        })
    }

    pub fn adjoined(base: BaseKind, k: usize) -> Result<Domain> {
        if k < 2 {
            return Err(AlgebraError::InvalidDomain(format!(
                "adjoined root needs k >= 2, got {k}"
            )));
        }
        Ok(Domain {
            kind: DomainKind::Adjoined { base, k },
            order: OrderSpec::Lexicographic,
        })
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn order(&self) -> &OrderSpec {
        &self.order
    }

    /// Number of base coefficients per element; 1 for scalar kinds.
    pub fn width(&self) -> usize {
        match self.kind {
            DomainKind::Adjoined { k, .. } => k,
            _ => 1,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, DomainKind::FiniteField(_))
    }

    /// Whether the carrier has no zero divisors.
    ///
    /// `x^k + 1` is irreducible over the rationals exactly when `k` is a
    /// power of two, so `R[j_3]` for instance has zero divisors.
    pub fn is_integral_domain(&self) -> bool {
        match self.kind {
            DomainKind::Adjoined { k, .. } => k.is_power_of_two(),
            _ => true,
        }
    }

    /// The scalar domain of an adjoined extension.
    pub fn base_domain(&self) -> Option<Domain> {
        match self.kind {
            DomainKind::Adjoined { base, .. } => Some(match base {
                BaseKind::Integer => Domain::integers(),
                BaseKind::Rational => Domain::rationals(),
            }),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn parse(name: &str) -> Result<Domain> {
        let s = name.trim();
        let bad = || AlgebraError::InvalidDomain(format!("unknown domain {s:?}"));
        match s {
            "Z" => return Ok(Domain::integers()),
            "Q" => return Ok(Domain::rationals()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix('F') {
            let (p_text, order_text) = match rest.split_once('{') {
                Some((p, o)) => (p, Some(o.strip_suffix('}').ok_or_else(bad)?)),
                None => (rest, None),
            };
            let p: u64 = p_text.parse().map_err(|_| bad())?;
            return match order_text {
                None => Domain::finite_field(p),
                Some(o) => {
                    let listed = o
                        .split('<')
                        .map(|t| t.trim().parse::<u64>().map_err(|_| bad()))
                        .collect::<Result<Vec<_>>>()?;
                    Domain::finite_field_with_order(p, listed)
                }
            };
        }
        let (base_text, rest) = s.split_once("[j").ok_or_else(bad)?;
        let base = match base_text {
            "Z" => BaseKind::Integer,
            "Q" => BaseKind::Rational,
            _ => return Err(bad()),
        };
        let k: usize = rest
            .strip_suffix(']')
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        Domain::adjoined(base, k)
    }

    fn mismatch(&self, v: &DomainValue) -> AlgebraError {
        AlgebraError::DomainMismatch {
            domain: self.to_string(),
            value: v.short(),
        }
    }

    /// Checks that `v` is a well-formed element of this domain.
    pub fn check(&self, v: &DomainValue) -> Result<()> {
        let ok = match (&self.kind, v) {
            (DomainKind::Integer, DomainValue::Int(_)) => true,
            (DomainKind::Rational, DomainValue::Rat(r)) => r.denom().is_positive(),
            (DomainKind::FiniteField(p), DomainValue::Mod(r)) => r < p,
            (DomainKind::Adjoined { base, k }, DomainValue::Tuple(cs)) => {
                cs.len() == *k
                    && cs.iter().all(|c| {
                        matches!(
                            (base, c),
                            (BaseKind::Integer, DomainValue::Int(_))
                                | (BaseKind::Rational, DomainValue::Rat(_))
                        )
                    })
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(self.mismatch(v))
        }
    }

    /// Embeds an integer literal: `v mod p` in `F_p`, `(v, 0, ..., 0)` in
    /// an adjoined extension.
    pub fn from_i64(&self, v: i64) -> DomainValue {
        self.from_bigint(&BigInt::from(v))
    }

    pub fn from_bigint(&self, v: &BigInt) -> DomainValue {
        match &self.kind {
            DomainKind::Integer => DomainValue::Int(v.clone()),
            DomainKind::Rational => DomainValue::Rat(BigRational::from_integer(v.clone())),
            DomainKind::FiniteField(p) => {
                let r = v.mod_floor(&BigInt::from(*p));
                DomainValue::Mod(r.to_u64().expect("residue fits u64"))
            }
            DomainKind::Adjoined { k, .. } => {
                let base = self.base_domain().expect("adjoined");
                let mut cs = vec![base.from_bigint(v)];
                cs.extend((1..*k).map(|_| base.zero()));
                DomainValue::Tuple(cs)
            }
        }
    }

    pub fn zero(&self) -> DomainValue {
        self.from_i64(0)
    }

    pub fn one(&self) -> DomainValue {
        self.from_i64(1)
    }

    pub fn add(&self, a: &DomainValue, b: &DomainValue) -> Result<DomainValue> {
        match (&self.kind, a, b) {
            (DomainKind::Integer, DomainValue::Int(x), DomainValue::Int(y)) => {
                Ok(DomainValue::Int(x + y))
            }
            (DomainKind::Rational, DomainValue::Rat(x), DomainValue::Rat(y)) => {
                Ok(DomainValue::Rat(x + y))
            }
            (DomainKind::FiniteField(p), DomainValue::Mod(x), DomainValue::Mod(y))
                if x < p && y < p =>
            {
                Ok(DomainValue::Mod((x + y) % p))
            }
            (DomainKind::Adjoined { k, .. }, DomainValue::Tuple(xs), DomainValue::Tuple(ys)) => {
                self.check(a)?;
                self.check(b)?;
                let base = self.base_domain().expect("adjoined");
                let mut out = Vec::with_capacity(*k);
                for (x, y) in xs.iter().zip(ys) {
                    out.push(base.add(x, y)?);
                }
                Ok(DomainValue::Tuple(out))
            }
            _ => Err(self.mismatch(if self.check(a).is_err() { a } else { b })),
        }
    }

    pub fn neg(&self, a: &DomainValue) -> Result<DomainValue> {
        match (&self.kind, a) {
            (DomainKind::Integer, DomainValue::Int(x)) => Ok(DomainValue::Int(-x)),
            (DomainKind::Rational, DomainValue::Rat(x)) => Ok(DomainValue::Rat(-x)),
            (DomainKind::FiniteField(p), DomainValue::Mod(x)) if x < p => {
                Ok(DomainValue::Mod((p - x) % p))
            }
            (DomainKind::Adjoined { .. }, DomainValue::Tuple(xs)) => {
                self.check(a)?;
                let base = self.base_domain().expect("adjoined");
                Ok(DomainValue::Tuple(
                    xs.iter().map(|x| base.neg(x)).collect::<Result<_>>()?,
                ))
            }
            _ => Err(self.mismatch(a)),
        }
    }

    pub fn sub(&self, a: &DomainValue, b: &DomainValue) -> Result<DomainValue> {
        self.add(a, &self.neg(b)?)
    }

    /// Product; in an adjoined extension the coefficient of `j^u * j^v`
    /// lands at index `(u+v) mod k`, negated when `u+v >= k`.
    pub fn mul(&self, a: &DomainValue, b: &DomainValue) -> Result<DomainValue> {
        match (&self.kind, a, b) {
            (DomainKind::Integer, DomainValue::Int(x), DomainValue::Int(y)) => {
                Ok(DomainValue::Int(x * y))
            }
            (DomainKind::Rational, DomainValue::Rat(x), DomainValue::Rat(y)) => {
                Ok(DomainValue::Rat(x * y))
            }
            (DomainKind::FiniteField(p), DomainValue::Mod(x), DomainValue::Mod(y))
                if x < p && y < p =>
            {
                Ok(DomainValue::Mod(((*x as u128 * *y as u128) % *p as u128) as u64))
            }
            (DomainKind::Adjoined { k, .. }, DomainValue::Tuple(xs), DomainValue::Tuple(ys)) => {
                self.check(a)?;
                self.check(b)?;
                let k = *k;
                let base = self.base_domain().expect("adjoined");
                let mut out = vec![base.zero(); k];
                for (u, x) in xs.iter().enumerate() {
                    for (v, y) in ys.iter().enumerate() {
                        let term = base.mul(x, y)?;
                        let idx = (u + v) % k;
                        out[idx] = if u + v >= k {
                            base.sub(&out[idx], &term)?
                        } else {
                            base.add(&out[idx], &term)?
                        };
                    }
                }
                Ok(DomainValue::Tuple(out))
            }
            _ => Err(self.mismatch(if self.check(a).is_err() { a } else { b })),
        }
    }

    /// Strict order test `a < b` under this domain's order.
    pub fn lt(&self, a: &DomainValue, b: &DomainValue) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (&self.kind, a, b) {
            (DomainKind::Integer, DomainValue::Int(x), DomainValue::Int(y)) => x < y,
            (DomainKind::Rational, DomainValue::Rat(x), DomainValue::Rat(y)) => x < y,
            (DomainKind::FiniteField(_), DomainValue::Mod(x), DomainValue::Mod(y)) => {
                match &self.order {
                    OrderSpec::Listed(listed) => {
                        let pos = |r: &u64| listed.iter().position(|e| e == r);
                        pos(x) < pos(y)
                    }
                    _ => x < y,
                }
            }
            (DomainKind::Adjoined { .. }, DomainValue::Tuple(xs), DomainValue::Tuple(ys)) => {
                let base = self.base_domain().expect("adjoined");
                for (x, y) in xs.iter().zip(ys) {
                    if base.lt(x, y)? {
                        return Ok(true);
                    }
                    if base.lt(y, x)? {
                        return Ok(false);
                    }
                }
                false
            }
            _ => unreachable!("checked above"),
        })
    }

    /// `1` if `0 < a`, else `0`.
    pub fn sign(&self, a: &DomainValue) -> Result<DomainValue> {
        Ok(if self.lt(&self.zero(), a)? {
            self.one()
        } else {
            self.zero()
        })
    }

    pub fn is_zero(&self, a: &DomainValue) -> bool {
        *a == self.zero()
    }

    pub fn is_one(&self, a: &DomainValue) -> bool {
        *a == self.one()
    }

    pub fn render(&self, v: &DomainValue) -> String {
        match v {
            DomainValue::Int(x) => x.to_string(),
            DomainValue::Rat(x) => format!("{}/{}", x.numer(), x.denom()),
            DomainValue::Mod(x) => x.to_string(),
            DomainValue::Tuple(cs) => {
                let base = self.base_domain().unwrap_or_else(Domain::integers);
                let parts: Vec<String> = cs.iter().map(|c| base.render(c)).collect();
                format!("({})", parts.join(","))
            }
        }
    }

    pub fn parse_value(&self, text: &str) -> Result<DomainValue> {
        let t = text.trim();
        let err = |reason: &str| AlgebraError::Parse {
            domain: self.to_string(),
            text: text.to_string(),
            reason: reason.to_string(),
        };
        match &self.kind {
            DomainKind::Integer => t
                .parse::<BigInt>()
                .map(DomainValue::Int)
                .map_err(|_| err("expected a decimal integer")),
            DomainKind::Rational => {
                let (n, d) = t.split_once('/').unwrap_or((t, "1"));
                let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
                let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
                if d.is_zero() {
                    return Err(err("zero denominator"));
                }
                Ok(DomainValue::Rat(BigRational::new(n, d)))
            }
            DomainKind::FiniteField(p) => {
                let r: u64 = t.parse().map_err(|_| err("expected a residue"))?;
                if r >= *p {
                    return Err(err("residue out of range"));
                }
                Ok(DomainValue::Mod(r))
            }
            DomainKind::Adjoined { k, .. } => {
                let inner = t
                    .strip_prefix('(')
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| err("expected a parenthesized coefficient tuple"))?;
                let base = self.base_domain().expect("adjoined");
                let cs = inner
                    .split(',')
                    .map(|c| base.parse_value(c))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|_| err("bad coefficient"))?;
                if cs.len() != *k {
                    return Err(err(&format!("expected {k} coefficients")));
                }
                Ok(DomainValue::Tuple(cs))
            }
        }
    }

    /// Draws an element whose integer parts lie in `[-mag, mag]`; rational
    /// denominators lie in `[1, mag]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, mag: i64) -> DomainValue {
        let mag = mag.max(1);
        match &self.kind {
            DomainKind::Integer => DomainValue::int(rng.gen_range(-mag..=mag)),
            DomainKind::Rational => {
                DomainValue::rat(rng.gen_range(-mag..=mag), rng.gen_range(1..=mag))
            }
            DomainKind::FiniteField(p) => DomainValue::Mod(rng.gen_range(0..*p)),
            DomainKind::Adjoined { k, .. } => {
                let base = self.base_domain().expect("adjoined");
                DomainValue::Tuple((0..*k).map(|_| base.sample(rng, mag)).collect())
            }
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DomainKind::Integer => write!(f, "Z"),
            DomainKind::Rational => write!(f, "Q"),
            DomainKind::FiniteField(p) => {
                write!(f, "F{p}")?;
                if let OrderSpec::Listed(listed) = &self.order {
                    if *listed != (0..*p).collect::<Vec<_>>() {
                        let parts: Vec<String> = listed.iter().map(|r| r.to_string()).collect();
                        write!(f, "{{{}}}", parts.join("<"))?;
                    }
                }
                Ok(())
            }
            DomainKind::Adjoined { base, k } => {
                let b = match base {
                    BaseKind::Integer => "Z",
                    BaseKind::Rational => "Q",
                };
                write!(f, "{b}[j{k}]")
            }
        }
    }
}

impl serde::Serialize for Domain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Domain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Domain, D::Error> {
        let s = String::deserialize(d)?;
        Domain::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Integer value of a scalar element, if it has one.
pub fn as_bigint(v: &DomainValue) -> Option<BigInt> {
    match v {
        DomainValue::Int(x) => Some(x.clone()),
        DomainValue::Rat(x) if x.is_integer() => Some(x.to_integer()),
        DomainValue::Mod(x) => Some(BigInt::from(*x)),
        _ => None,
    }
}

/// Numerator and positive denominator of a rational element.
pub fn rational_parts(v: &DomainValue) -> Option<(BigInt, BigInt)> {
    match v {
        DomainValue::Rat(x) => Some((x.numer().clone(), x.denom().clone())),
        DomainValue::Int(x) => Some((x.clone(), BigInt::one())),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z() -> Domain {
        Domain::integers()
    }

    fn zj(k: usize) -> Domain {
        Domain::adjoined(BaseKind::Integer, k).unwrap()
    }

    /// Expands `(sum x_u j^u)(sum y_v j^v)` as a polynomial of degree
    /// `2k-2`, then folds `j^(k+r)` onto `-j^r`.
    fn expand_oracle(xs: &[i64], ys: &[i64]) -> Vec<i64> {
        let k = xs.len();
        let mut poly = vec![0i64; 2 * k - 1];
        for (u, x) in xs.iter().enumerate() {
            for (v, y) in ys.iter().enumerate() {
                poly[u + v] += x * y;
            }
        }
        let mut out = poly[..k].to_vec();
        for r in 0..k - 1 {
            out[r] -= poly[k + r];
        }
        out
    }

    #[test]
    fn integer_and_rational_examples() {
        assert_eq!(
            z().add(&DomainValue::int(2), &DomainValue::int(3)).unwrap(),
            DomainValue::int(5)
        );
        let q = Domain::rationals();
        assert_eq!(
            q.add(&DomainValue::rat(1, 2), &DomainValue::rat(1, 3)).unwrap(),
            DomainValue::rat(5, 6)
        );
        assert!(z().lt(&DomainValue::int(2), &DomainValue::int(3)).unwrap());
        assert_eq!(z().sign(&DomainValue::int(3)).unwrap(), DomainValue::int(1));
        assert_eq!(z().sign(&DomainValue::int(0)).unwrap(), DomainValue::int(0));
    }

    #[test]
    fn adjoined_examples() {
        let d = zj(2);
        let a = DomainValue::tuple_of_ints(&[1, 2]);
        let b = DomainValue::tuple_of_ints(&[3, 4]);
        assert_eq!(d.add(&a, &b).unwrap(), DomainValue::tuple_of_ints(&[4, 6]));
        assert_eq!(d.mul(&a, &b).unwrap(), DomainValue::tuple_of_ints(&[-5, 10]));
        let j = DomainValue::tuple_of_ints(&[0, 1]);
        assert_eq!(d.mul(&j, &j).unwrap(), DomainValue::tuple_of_ints(&[-1, 0]));
        let d3 = zj(3);
        assert_eq!(
            d3.mul(
                &DomainValue::tuple_of_ints(&[0, 0, 1]),
                &DomainValue::tuple_of_ints(&[0, 1, 0])
            )
            .unwrap(),
            DomainValue::tuple_of_ints(&[-1, 0, 0])
        );
        assert!(d
            .lt(
                &DomainValue::tuple_of_ints(&[1, 5]),
                &DomainValue::tuple_of_ints(&[2, 0])
            )
            .unwrap());
        assert_eq!(d.sign(&j).unwrap(), d.one());
    }

    #[test]
    fn finite_field_listed_order() {
        let f3 = Domain::finite_field(3).unwrap();
        assert!(!f3.lt(&DomainValue::Mod(2), &DomainValue::Mod(1)).unwrap());
        assert!(f3.lt(&DomainValue::Mod(0), &DomainValue::Mod(2)).unwrap());
        let odd = Domain::finite_field_with_order(3, vec![2, 0, 1]).unwrap();
        assert!(odd.lt(&DomainValue::Mod(2), &DomainValue::Mod(1)).unwrap());
        assert_eq!(Domain::parse(&odd.to_string()).unwrap(), odd);
        assert!(Domain::finite_field(4).is_err());
    }

    #[test]
    fn mismatch_is_reported() {
        let err = z().add(&DomainValue::int(1), &DomainValue::rat(1, 2)).unwrap_err();
        assert!(matches!(err, AlgebraError::DomainMismatch { .. }));
        assert!(zj(2).mul(&DomainValue::tuple_of_ints(&[1, 2, 3]), &zj(2).one()).is_err());
    }

    #[test]
    fn adjoined_mul_matches_expansion_on_grid() {
        for k in 2..=4usize {
            let d = zj(k);
            // Vary the first two coefficients over [-3,3] and fix the rest,
            // which keeps k = 4 at 7^4 pairs.
            let grid: Vec<Vec<i64>> = (-3..=3)
                .flat_map(|a| (-3..=3).map(move |b| (a, b)))
                .map(|(a, b)| {
                    let mut v = vec![a, b];
                    v.extend((2..k).map(|t| (t as i64 % 3) - 1));
                    v
                })
                .collect();
            for x in &grid {
                for y in &grid {
                    let got = d
                        .mul(&DomainValue::tuple_of_ints(x), &DomainValue::tuple_of_ints(y))
                        .unwrap();
                    assert_eq!(got, DomainValue::tuple_of_ints(&expand_oracle(x, y)));
                }
            }
        }
    }

    #[test]
    fn z_j3_has_zero_divisors() {
        // x^3 + 1 = (x + 1)(x^2 - x + 1)
        let d = zj(3);
        let a = DomainValue::tuple_of_ints(&[1, 1, 0]);
        let b = DomainValue::tuple_of_ints(&[1, -1, 1]);
        assert_eq!(d.mul(&a, &b).unwrap(), d.zero());
        assert!(!d.is_integral_domain());
        assert!(zj(2).is_integral_domain() && zj(4).is_integral_domain());
    }

    #[test]
    fn render_and_parse() {
        let q = Domain::rationals();
        assert_eq!(q.render(&DomainValue::rat(-2, 4)), "-1/2");
        assert_eq!(q.parse_value("3").unwrap(), DomainValue::rat(3, 1));
        assert!(q.parse_value("1/0").is_err());
        let d = Domain::parse("Q[j3]").unwrap();
        let v = d.parse_value("(1/2,0,-3)").unwrap();
        assert_eq!(d.render(&v), "(1/2,0/1,-3/1)");
        for name in ["Z", "Q", "F3", "Z[j2]", "Q[j4]"] {
            assert_eq!(Domain::parse(name).unwrap().to_string(), name);
        }
        assert!(Domain::parse("Z[j1]").is_err());
        assert!(Domain::parse("R").is_err());
    }

    fn domains() -> Vec<Domain> {
        vec![
            z(),
            Domain::rationals(),
            Domain::finite_field(5).unwrap(),
            zj(2),
            zj(3),
            Domain::adjoined(BaseKind::Rational, 2).unwrap(),
        ]
    }

    fn triple(seed: u64, d: &Domain) -> (DomainValue, DomainValue, DomainValue) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (d.sample(&mut rng, 6), d.sample(&mut rng, 6), d.sample(&mut rng, 6))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ring_axioms(seed in any::<u64>(), di in 0usize..6) {
            let d = &domains()[di];
            let (a, b, c) = triple(seed, d);
            let add = |x: &DomainValue, y: &DomainValue| d.add(x, y).unwrap();
            let mul = |x: &DomainValue, y: &DomainValue| d.mul(x, y).unwrap();
            prop_assert_eq!(add(&a, &add(&b, &c)), add(&add(&a, &b), &c));
            prop_assert_eq!(mul(&a, &mul(&b, &c)), mul(&mul(&a, &b), &c));
            prop_assert_eq!(add(&a, &b), add(&b, &a));
            prop_assert_eq!(mul(&a, &b), mul(&b, &a));
            prop_assert_eq!(mul(&a, &add(&b, &c)), add(&mul(&a, &b), &mul(&a, &c)));
            prop_assert_eq!(add(&a, &d.zero()), a.clone());
            prop_assert_eq!(mul(&a, &d.one()), a.clone());
            prop_assert_eq!(add(&a, &d.neg(&a).unwrap()), d.zero());
        }

        #[test]
        fn no_zero_divisors(seed in any::<u64>(), di in 0usize..4) {
            let ds = [z(), Domain::rationals(), zj(2), zj(4)];
            let d = &ds[di];
            let (a, b, _) = triple(seed, d);
            prop_assume!(!d.is_zero(&a) && !d.is_zero(&b));
            prop_assert!(!d.is_zero(&d.mul(&a, &b).unwrap()));
        }

        #[test]
        fn strict_total_order(seed in any::<u64>(), di in 0usize..6) {
            let d = &domains()[di];
            let (a, b, c) = triple(seed, d);
            let lt = |x: &DomainValue, y: &DomainValue| d.lt(x, y).unwrap();
            prop_assert!(!lt(&a, &a));
            if lt(&a, &b) && lt(&b, &c) {
                prop_assert!(lt(&a, &c));
            }
            prop_assert!(a == b || lt(&a, &b) || lt(&b, &a));
            prop_assert!(!(lt(&a, &b) && lt(&b, &a)));
        }

        #[test]
        fn sign_order_identity(seed in any::<u64>(), di in 0usize..2) {
            let d = &domains()[di];
            let (x, y, _) = triple(seed, d);
            let s1 = d.sign(&d.sub(&y, &x).unwrap()).unwrap();
            let s2 = d.sign(&d.sub(&x, &y).unwrap()).unwrap();
            let inner = d.mul(&s1, &d.add(&d.from_i64(2), &s2).unwrap()).unwrap();
            prop_assert_eq!(d.lt(&x, &y).unwrap(), d.is_one(&d.sign(&inner).unwrap()));
        }

        #[test]
        fn render_parse_round_trip(seed in any::<u64>(), di in 0usize..6) {
            let d = &domains()[di];
            let (a, _, _) = triple(seed, d);
            prop_assert_eq!(d.parse_value(&d.render(&a)).unwrap(), a);
        }
    }
}
