//! Exact scalars over the rationals and over prime fields.
//!
//! Rationals use unbounded integers; prime-field residues are stored as
//! `u64` in `[0, p)` with `p < 2^61`, so products fit in a `u128`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible prime modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 61;

/// Default numerator/denominator bound used when sampling rationals.
pub const DEFAULT_RATIONAL_BOUND: u64 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modulus(u64);

impl Modulus {
    pub fn get(self) -> u64 {
        self.0
    }
}

/// The scalar field `K` a model is defined over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldSpec {
    Rationals,
    PrimeField(Modulus),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldSpec {
    pub fn prime(p: u64) -> Result<Self> {
        if p >= MAX_MODULUS {
            return Err(Error::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldSpec::PrimeField(Modulus(p)))
    }

    pub fn modulus(&self) -> Option<u64> {
        match self {
            FieldSpec::Rationals => None,
            FieldSpec::PrimeField(m) => Some(m.0),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, FieldSpec::PrimeField(_))
    }

    pub fn zero(&self) -> FieldElement {
        self.from_i64(0)
    }

    pub fn one(&self) -> FieldElement {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> FieldElement {
        match self {
            FieldSpec::Rationals => FieldElement::Rational(BigRational::from_integer(v.into())),
            FieldSpec::PrimeField(m) => {
                let p = m.0 as i128;
                let r = (v as i128).rem_euclid(p) as u64;
                FieldElement::Residue { value: r, modulus: m.0 }
            }
        }
    }

    pub fn residue(&self, v: u64) -> FieldElement {
        match self {
            FieldSpec::Rationals => FieldElement::Rational(BigRational::from_integer(v.into())),
            FieldSpec::PrimeField(m) => FieldElement::Residue { value: v % m.0, modulus: m.0 },
        }
    }

    /// Maps an exact rational into this field. Fails over `F_p` when the
    /// denominator is divisible by `p`.
    pub fn from_rational(&self, q: &BigRational) -> Result<FieldElement> {
        match self {
            FieldSpec::Rationals => Ok(FieldElement::Rational(q.clone())),
            FieldSpec::PrimeField(m) => {
                let p = BigInt::from(m.0);
                let num = reduce_bigint(q.numer(), &p);
                let den = reduce_bigint(q.denom(), &p);
                let num = self.residue(num);
                let den = self.residue(den);
                num.checked_div(&den)
            }
        }
    }

    pub fn parse(&self, s: &str) -> Result<FieldElement> {
        let q = parse_rational(s)?;
        self.from_rational(&q).map_err(|e| Error::ParseScalar(s.to_string(), e.to_string()))
    }

    /// Number of elements, if finite.
    pub fn order(&self) -> Option<u64> {
        self.modulus()
    }
}

fn reduce_bigint(v: &BigInt, p: &BigInt) -> u64 {
    let r = ((v % p) + p) % p;
    r.to_u64().expect("residue fits in u64")
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::PrimeField(m) => write!(f, "F_{}", m.0),
        }
    }
}

impl std::str::FromStr for FieldSpec {
    type Err = Error;

    /// Accepts `q`, `Q`, `fp:P` or `F_P`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("q") {
            return Ok(FieldSpec::Rationals);
        }
        let digits = t
            .strip_prefix("fp:")
            .or_else(|| t.strip_prefix("Fp:"))
            .or_else(|| t.strip_prefix("F_"))
            .ok_or_else(|| Error::ParseScalar(s.to_string(), "expected q or fp:P".into()))?;
        let p: u64 = digits
            .parse()
            .map_err(|_| Error::ParseScalar(s.to_string(), "bad modulus".into()))?;
        FieldSpec::prime(p)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum FieldSpecRepr {
    #[serde(rename = "Q")]
    Q,
    #[serde(rename = "Fp")]
    Fp { p: u64 },
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FieldSpec::Rationals => FieldSpecRepr::Q.serialize(s),
            FieldSpec::PrimeField(m) => FieldSpecRepr::Fp { p: m.0 }.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match FieldSpecRepr::deserialize(d)? {
            FieldSpecRepr::Q => Ok(FieldSpec::Rationals),
            FieldSpecRepr::Fp { p } => FieldSpec::prime(p).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses `"-7"`, `"3/2"` or `"12"` exactly. Float literals are rejected.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = |why: &str| Error::ParseScalar(s.to_string(), why.to_string());
    let t = s.trim().replace('\u{2212}', "-");
    if t.is_empty() {
        return Err(bad("empty"));
    }
    if t.contains(['.', 'e', 'E']) {
        return Err(bad("float literals are not accepted"));
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t.as_str(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad("bad numerator"))?;
    let den: BigInt = den.parse().map_err(|_| bad("bad denominator"))?;
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

/// An exact scalar in canonical form.
///
/// Rationals are kept reduced with positive denominator (guaranteed by
/// `BigRational`); residues satisfy `0 <= value < modulus`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldElement {
    Rational(BigRational),
    Residue { value: u64, modulus: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Inverse modulo `p` by the extended Euclidean algorithm.
pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(p as i128) as u64)
}

impl FieldElement {
    pub fn field(&self) -> FieldSpec {
        match self {
            FieldElement::Rational(_) => FieldSpec::Rationals,
            FieldElement::Residue { modulus, .. } => FieldSpec::PrimeField(Modulus(*modulus)),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElement::Rational(q) => q.is_zero(),
            FieldElement::Residue { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElement::Rational(q) => q.is_one(),
            FieldElement::Residue { value, .. } => *value == 1,
        }
    }

    /// The residue, for prime-field elements.
    pub fn residue(&self) -> Option<u64> {
        match self {
            FieldElement::Residue { value, .. } => Some(*value),
            FieldElement::Rational(_) => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            FieldElement::Rational(q) => Some(q),
            FieldElement::Residue { .. } => None,
        }
    }

    /// Lifts to a rational: residues map to their canonical representative.
    pub fn to_rational(&self) -> BigRational {
        match self {
            FieldElement::Rational(q) => q.clone(),
            FieldElement::Residue { value, .. } => BigRational::from_integer((*value).into()),
        }
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        match (self, other) {
            (FieldElement::Rational(_), FieldElement::Rational(_)) => Ok(()),
            (FieldElement::Residue { modulus: p, .. }, FieldElement::Residue { modulus: q, .. })
                if p == q =>
            {
                Ok(())
            }
            _ => Err(Error::FieldMismatch(
                self.field().to_string(),
                other.field().to_string(),
            )),
        }
    }

    pub fn apply(&self, other: &Self, op: FieldOp) -> Result<Self> {
        self.same_field(other)?;
        Ok(match (self, other) {
            (FieldElement::Rational(x), FieldElement::Rational(y)) => FieldElement::Rational(match op {
                FieldOp::Add => x + y,
                FieldOp::Sub => x - y,
                FieldOp::Mul => x * y,
                FieldOp::Div => {
                    if y.is_zero() {
                        return Err(Error::DivisionByZero);
                    }
                    x / y
                }
            }),
            (
                FieldElement::Residue { value: x, modulus: p },
                FieldElement::Residue { value: y, .. },
            ) => {
                let p = *p;
                let value = match op {
                    FieldOp::Add => ((*x as u128 + *y as u128) % p as u128) as u64,
                    FieldOp::Sub => ((*x as u128 + p as u128 - *y as u128) % p as u128) as u64,
                    FieldOp::Mul => mul_mod(*x, *y, p),
                    FieldOp::Div => {
                        let inv = inv_mod(*y, p).ok_or(Error::DivisionByZero)?;
                        mul_mod(*x, inv, p)
                    }
                };
                FieldElement::Residue { value, modulus: p }
            }
            _ => unreachable!(),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.apply(other, FieldOp::Add)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.apply(other, FieldOp::Sub)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.apply(other, FieldOp::Mul)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.apply(other, FieldOp::Div)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.field().one().checked_div(self)
    }
}

// Operator forms panic on mismatched fields; use the `checked_*` methods
// when operands come from untrusted input.
macro_rules! forward_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        match self {
            FieldElement::Rational(q) => FieldElement::Rational(-q),
            FieldElement::Residue { value, modulus } => FieldElement::Residue {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            },
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElement::Rational(q) => {
                if q.denom().is_one() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            FieldElement::Residue { value, .. } => write!(f, "{value}"),
        }
    }
}

impl Serialize for FieldElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Draws a field element: uniform over `F_p`, or over `ℚ` a numerator
/// uniform in `[-bound, bound]` and denominator uniform in `[1, bound]`.
pub fn sample_element<R: Rng + ?Sized>(spec: FieldSpec, rng: &mut R, bound: u64) -> FieldElement {
    match spec {
        FieldSpec::PrimeField(m) => FieldElement::Residue { value: rng.gen_range(0..m.0), modulus: m.0 },
        FieldSpec::Rationals => {
            let b = bound.max(1) as i64;
            let num = rng.gen_range(-b..=b);
            let den = rng.gen_range(1..=b);
            FieldElement::Rational(BigRational::new(num.into(), den.into()))
        }
    }
}

/// Draws a nonzero element by rejection.
pub fn sample_nonzero<R: Rng + ?Sized>(spec: FieldSpec, rng: &mut R, bound: u64) -> FieldElement {
    loop {
        let x = sample_element(spec, rng, bound);
        if !x.is_zero() {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(s: &str) -> FieldElement {
        FieldSpec::Rationals.parse(s).unwrap()
    }

    #[test]
    fn rational_addition() {
        assert_eq!(&q("1/2") + &q("1/3"), q("5/6"));
        assert_eq!(q("5/6").to_string(), "5/6");
        assert_eq!(q("4/2").to_string(), "2");
        assert_eq!(q("\u{2212}7").to_string(), "-7");
    }

    #[test]
    fn prime_field_product_and_inverse() {
        let f5 = FieldSpec::prime(5).unwrap();
        assert_eq!(&f5.from_i64(3) * &f5.from_i64(4), f5.from_i64(2));
        let f19 = FieldSpec::prime(19).unwrap();
        // brute-force oracle for the inverse
        let expected = (1..19u64).find(|k| (7 * k) % 19 == 1).unwrap();
        assert_eq!(expected, 11);
        assert_eq!(f19.from_i64(7).inverse().unwrap(), f19.residue(expected));
    }

    #[test]
    fn errors_are_explicit() {
        let f5 = FieldSpec::prime(5).unwrap();
        assert_eq!(f5.one().checked_div(&f5.zero()), Err(Error::DivisionByZero));
        assert_eq!(q("1").checked_div(&q("0")), Err(Error::DivisionByZero));
        assert!(matches!(q("1").checked_add(&f5.one()), Err(Error::FieldMismatch(..))));
        assert!(matches!(FieldSpec::prime(15), Err(Error::NotPrime(15))));
        assert!(matches!(FieldSpec::prime(1 << 61), Err(Error::ModulusTooLarge(_))));
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(q("-6/-4"), q("3/2"));
        assert_eq!(q("2/-4").to_string(), "-1/2");
        let f7 = FieldSpec::prime(7).unwrap();
        assert_eq!(f7.from_i64(-1).residue(), Some(6));
        assert_eq!(f7.parse("1/2").unwrap(), f7.from_i64(4));
        assert!(f7.parse("1/7").is_err());
    }

    #[test]
    fn field_spec_parsing_and_json() {
        assert_eq!("q".parse::<FieldSpec>().unwrap(), FieldSpec::Rationals);
        assert_eq!("fp:19".parse::<FieldSpec>().unwrap(), FieldSpec::prime(19).unwrap());
        let j = serde_json::to_string(&FieldSpec::prime(19).unwrap()).unwrap();
        assert_eq!(j, r#"{"kind":"Fp","p":19}"#);
        let back: FieldSpec = serde_json::from_str(r#"{"kind":"Q"}"#).unwrap();
        assert_eq!(back, FieldSpec::Rationals);
        assert!(serde_json::from_str::<FieldSpec>(r#"{"kind":"Fp","p":21}"#).is_err());
    }

    #[test]
    fn sampling_contracts() {
        let f5 = FieldSpec::prime(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert!(sample_element(f5, &mut rng, 0).residue().unwrap() < 5);
        }
        let allowed = [q("-1"), q("0"), q("1")];
        for _ in 0..100 {
            assert!(allowed.contains(&sample_element(FieldSpec::Rationals, &mut rng, 1)));
        }
        let draw = |seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| sample_element(FieldSpec::Rationals, &mut r, 50)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn field_axioms_exhaustive_f5() {
        let f5 = FieldSpec::prime(5).unwrap();
        let all: Vec<_> = (0..5).map(|v| f5.residue(v)).collect();
        for a in &all {
            for b in &all {
                for c in &all {
                    assert_eq!(&(a + b) + c, a + &(b + c));
                    assert_eq!(&(a * b) * c, a * &(b * c));
                    assert_eq!(a * &(b + c), &(a * b) + &(a * c));
                }
                if !b.is_zero() {
                    assert_eq!(&a.checked_div(b).unwrap() * b, a.clone());
                }
            }
        }
    }
}
