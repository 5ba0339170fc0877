//! Sparse multivariate polynomials over `ℚ` with named indeterminates.
//!
//! Terms are kept in canonical form (sorted monomials, no zero
//! coefficients), so structural equality is mathematical equality.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Default total-degree guard for symbolic expansion.
pub const DEFAULT_DEGREE_BOUND: u32 = 12;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Indeterminate(Arc<str>);

impl Indeterminate {
    pub fn new(name: &str) -> Self {
        Indeterminate(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Indeterminate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Indeterminate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A power product; factors sorted by indeterminate name, exponents > 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<(Indeterminate, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn new<I: IntoIterator<Item = (Indeterminate, u32)>>(factors: I) -> Self {
        let mut acc: BTreeMap<Indeterminate, u32> = BTreeMap::new();
        for (v, e) in factors {
            *acc.entry(v).or_insert(0) += e;
        }
        Monomial(acc.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    /// Parses products like `"a1*b2"` or `"A*a1^2"`; `"1"` is the unit.
    pub fn parse(s: &str) -> Self {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Monomial::one();
        }
        Monomial::new(s.split('*').map(|f| match f.split_once('^') {
            Some((v, e)) => (Indeterminate::new(v.trim()), e.trim().parse().expect("exponent")),
            None => (Indeterminate::new(f.trim()), 1),
        }))
    }

    pub fn factors(&self) -> &[(Indeterminate, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: &Indeterminate) -> u32 {
        self.0.iter().find(|(w, _)| w == v).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::new();
        for (v, e) in &self.0 {
            let d = other.exponent(v);
            if d > *e {
                return None;
            }
            if e - d > 0 {
                out.push((v.clone(), e - d));
            }
        }
        if other.0.iter().any(|(v, _)| self.exponent(v) == 0) {
            return None;
        }
        Some(Monomial(out))
    }

    /// Pure lexicographic monomial order with indeterminates ordered by name.
    pub fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((v, e)), Some((w, f))) => match v.cmp(w) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match e.cmp(f) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        o => return o,
                    },
                },
            }
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn integer(c: i64) -> Self {
        Polynomial::constant(BigRational::from_integer(c.into()))
    }

    pub fn var(name: &str) -> Self {
        Polynomial::term(BigRational::one(), Monomial::new([(Indeterminate::new(name), 1)]))
    }

    pub fn term(c: BigRational, m: Monomial) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(m, c);
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// The constant value, if the polynomial has no indeterminates.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn indeterminates(&self) -> BTreeSet<Indeterminate> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| v.clone()))
            .collect()
    }

    /// Stored coefficient of `m`, or zero.
    pub fn coefficient_of(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Coefficient of `m` viewed as a polynomial in `vars` only, with the
    /// remaining indeterminates kept in the coefficient. Every factor of
    /// `m` must be one of `vars`.
    pub fn coefficient_in(&self, vars: &BTreeSet<Indeterminate>, m: &Monomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (mono, c) in &self.terms {
            let (inside, outside): (Vec<_>, Vec<_>) =
                mono.0.iter().cloned().partition(|(v, _)| vars.contains(v));
            if Monomial(inside) == *m {
                out.add_term(Monomial(outside), c.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Product with a total-degree guard.
    pub fn checked_mul(&self, other: &Polynomial, bound: u32) -> Result<Polynomial> {
        let found = self.total_degree() + other.total_degree();
        if !self.is_zero() && !other.is_zero() && found > bound {
            return Err(Error::DegreeGuard { found, bound });
        }
        Ok(self * other)
    }

    /// Simultaneous substitution of indeterminates by polynomials.
    pub fn substitute(&self, bindings: &BTreeMap<Indeterminate, Polynomial>) -> Polynomial {
        let mut powers: BTreeMap<(Indeterminate, u32), Polynomial> = BTreeMap::new();
        let mut out = Polynomial::zero();
        for (mono, c) in &self.terms {
            let mut rest = Vec::new();
            let mut acc = Polynomial::constant(c.clone());
            for (v, e) in &mono.0 {
                match bindings.get(v) {
                    Some(b) => {
                        let pw = powers.entry((v.clone(), *e)).or_insert_with(|| b.pow(*e));
                        acc = &acc * pw;
                    }
                    None => rest.push((v.clone(), *e)),
                }
            }
            let rest = Polynomial::term(BigRational::one(), Monomial(rest));
            out = &out + &(&acc * &rest);
        }
        out
    }

    /// Evaluates at rational values; unbound indeterminates are an error.
    pub fn evaluate(&self, values: &BTreeMap<Indeterminate, BigRational>) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (mono, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in &mono.0 {
                let x = values
                    .get(v)
                    .ok_or_else(|| Error::NonConstantCoefficient(format!("unbound {v}")))?;
                for _ in 0..*e {
                    t *= x;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Distinct coefficient denominators greater than one.
    pub fn denominators(&self) -> BTreeSet<BigInt> {
        self.terms
            .values()
            .map(|c| c.denom().clone())
            .filter(|d| !d.is_one())
            .collect()
    }

    fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().max_by(|a, b| a.0.lex_cmp(b.0))
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves
    /// a remainder.
    pub fn div_exact(&self, divisor: &Polynomial) -> Option<Polynomial> {
        let (lm, lc) = divisor.leading()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = Polynomial::zero();
        while let Some((m, c)) = rem.leading() {
            let qm = m.div(&lm)?;
            let q = Polynomial::term(c / &lc, qm);
            rem = &rem - &(&q * divisor);
            quot = &quot + &q;
        }
        Some(quot)
    }
}

/// Parses expressions such as `"a0*b0 + A*a1*b1 - 2*(a1 - x)^2"`.
///
/// Grammar: sums and differences of products of factors, where a factor is
/// an integer, an identifier (letters, digits, `_` and `'`), a parenthesised
/// expression, or a factor raised to `^k`. `−` is accepted as minus.
impl std::str::FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().map(|c| if c == '\u{2212}' { '-' } else { c }).collect();
        let mut p = ExprParser { chars: &chars, pos: 0 };
        let out = p.sum()?;
        p.skip_ws();
        if p.pos != chars.len() {
            return Err(p.error("trailing input"));
        }
        Ok(out)
    }
}

struct ExprParser<'a> {
    chars: &'a [char],
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, what: &str) -> Error {
        let src: String = self.chars.iter().collect();
        Error::ParseScalar(src, format!("{what} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<Polynomial> {
        let mut acc = match self.peek() {
            Some('-') => {
                self.pos += 1;
                -&self.product()?
            }
            Some('+') => {
                self.pos += 1;
                self.product()?
            }
            _ => self.product()?,
        };
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let t = self.product()?;
            acc = if c == '+' { &acc + &t } else { &acc - &t };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Polynomial> {
        let mut acc = self.power()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            acc = &acc * &self.power()?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let e = self.digits()?;
            let e: u32 = e.parse().map_err(|_| self.error("bad exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn digits(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected digits"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('-') => {
                self.pos += 1;
                Ok(-&self.power()?)
            }
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits()?;
                let n: BigInt = d.parse().map_err(|_| self.error("bad integer"))?;
                Ok(Polynomial::constant(BigRational::from_integer(n)))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|c| c.is_alphanumeric() || *c == '_' || *c == '\'')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                Ok(Polynomial::var(&name))
            }
            _ => Err(self.error("expected a term")),
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial { (&self).$m(&rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| b.0.lex_cmp(a.0));
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let coeff = if abs.denom().is_one() {
                abs.numer().to_string()
            } else {
                format!("{}/{}", abs.numer(), abs.denom())
            };
            if m.0.is_empty() {
                f.write_str(&coeff)?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{coeff}*{m}")?;
            }
        }
        Ok(())
    }
}

/// Convenience: the list of polynomial variables `prefix0 .. prefix{n-1}`.
pub fn symbol_vector(prefix: &str, n: usize) -> Vec<Polynomial> {
    (0..n).map(|i| Polynomial::var(&format!("{prefix}{i}"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Polynomial {
        Polynomial::var(s)
    }

    fn n(k: i64) -> Polynomial {
        Polynomial::integer(k)
    }

    fn bind(pairs: &[(&str, Polynomial)]) -> BTreeMap<Indeterminate, Polynomial> {
        pairs.iter().map(|(k, p)| (Indeterminate::new(k), p.clone())).collect()
    }

    #[test]
    fn difference_of_squares() {
        let (x, y) = (v("x"), v("y"));
        let lhs = &(&x + &y) * &(&x - &y);
        let rhs = &(&x * &x) - &(&y * &y);
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.to_string(), "x^2 - y^2");
    }

    #[test]
    fn additive_inverse_is_empty() {
        let p = &(&v("a1") * &v("b2")) + &n(3);
        assert!((&p - &p).is_zero());
        assert_eq!((&p - &p).len(), 0);
    }

    #[test]
    fn scalar_scaling() {
        let d = &(&v("a1") * &v("b2")) - &(&v("a2") * &v("b1"));
        assert_eq!((&d * &n(2)).to_string(), "2*a1*b2 - 2*a2*b1");
    }

    #[test]
    fn substitution_cancels_proportional_pairs() {
        let d = &(&v("a1") * &v("b2")) - &(&v("a2") * &v("b1"));
        let b = bind(&[("a1", &v("alpha") * &v("a2")), ("b1", &v("alpha") * &v("b2"))]);
        assert!(d.substitute(&b).is_zero());

        let p = &v("A") * &v("a1");
        assert_eq!(p.substitute(&bind(&[("A", n(16))])), &n(16) * &v("a1"));
    }

    #[test]
    fn substitution_is_simultaneous() {
        // x -> y, y -> x swaps, it does not chain
        let p = &v("x") - &(&v("y") * &n(2));
        let s = p.substitute(&bind(&[("x", v("y")), ("y", v("x"))]));
        assert_eq!(s, &v("y") - &(&v("x") * &n(2)));
    }

    #[test]
    fn ratio_pair_substitution_cancels() {
        // a1 b3 - a3 b1 under a1 = a'a''a3, b1 = a'a''b3
        let ap = &v("alpha'") * &v("alpha''");
        let p = &(&v("a1") * &v("b3")) - &(&v("a3") * &v("b1"));
        let b = bind(&[("a1", &ap * &v("a3")), ("b1", &ap * &v("b3"))]);
        assert!(p.substitute(&b).is_zero());
    }

    #[test]
    fn coefficient_extraction() {
        let u0 = &(&v("a0") * &v("b0")) + &(&(&v("A") * &v("a1")) * &v("b1"));
        assert_eq!(u0.coefficient_of(&Monomial::parse("a0*b0")), BigRational::one());
        assert_eq!(u0.coefficient_of(&Monomial::parse("a2*b2")), BigRational::zero());
        let vars: BTreeSet<_> = ["a1", "b1", "a0", "b0"].into_iter().map(Indeterminate::new).collect();
        assert_eq!(u0.coefficient_in(&vars, &Monomial::parse("a1*b1")), v("A"));
        let bound = u0.substitute(&bind(&[("A", n(16))]));
        assert_eq!(bound.coefficient_of(&Monomial::parse("a1*b1")), BigRational::from_integer(16.into()));
    }

    #[test]
    fn parses_expressions() {
        let p: Polynomial = "a0*b0 + A*a1*b1 - E*a1*b2".parse().unwrap();
        let q = &(&(&v("a0") * &v("b0")) + &(&(&v("A") * &v("a1")) * &v("b1"))) - &(&(&v("E") * &v("a1")) * &v("b2"));
        assert_eq!(p, q);
        let r: Polynomial = "2*(a1*b2 \u{2212} a2*b1)".parse().unwrap();
        assert_eq!(r.to_string(), "2*a1*b2 - 2*a2*b1");
        let s: Polynomial = "(x+y)^2 - -alpha''".parse().unwrap();
        assert_eq!(s, &(&(&v("x") + &v("y")) * &(&v("x") + &v("y"))) + &v("alpha''"));
        assert!("a1 +".parse::<Polynomial>().is_err());
        assert!("(a1".parse::<Polynomial>().is_err());
    }

    #[test]
    fn degree_guard() {
        let x = v("x").pow(7);
        assert!(x.checked_mul(&x, 12).is_err());
        assert!(x.checked_mul(&v("y"), 12).is_ok());
    }

    #[test]
    fn exact_division() {
        let k = &(&v("b1") * &v("c2")) - &(&v("b2") * &v("c1"));
        let q = &(&v("a0") * &n(3)) + &v("A");
        let p = &k * &q;
        assert_eq!(p.div_exact(&k), Some(q));
        assert_eq!((&p + &v("a0")).div_exact(&k), None);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    const NAMES: [&str; 4] = ["a1", "a2", "b1", "x"];

    fn small_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((-5i64..6, prop::collection::vec(0u32..3, 4)), 0..5).prop_map(|ts| {
            let mut p = Polynomial::zero();
            for (c, exps) in ts {
                let m = Monomial::new(NAMES.iter().zip(exps).map(|(n, e)| (Indeterminate::new(n), e)));
                p = &p + &Polynomial::term(BigRational::from_integer(c.into()), m);
            }
            p
        })
    }

    fn point() -> impl Strategy<Value = BTreeMap<Indeterminate, BigRational>> {
        prop::collection::vec((-20i64..20, 1i64..10), 4).prop_map(|vals| {
            NAMES
                .iter()
                .zip(vals)
                .map(|(n, (a, b))| (Indeterminate::new(n), BigRational::new(a.into(), b.into())))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn ring_laws(p in small_poly(), q in small_poly(), r in small_poly()) {
            prop_assert_eq!(&p + &q, &q + &p);
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
            prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        }

        #[test]
        fn identity_substitution(p in small_poly()) {
            let id: BTreeMap<_, _> = NAMES.iter().map(|n| (Indeterminate::new(n), Polynomial::var(n))).collect();
            prop_assert_eq!(p.substitute(&id), p);
        }

        #[test]
        fn evaluation_is_a_homomorphism(p in small_poly(), q in small_poly(), at in point()) {
            let pq = (&p * &q).evaluate(&at).unwrap();
            prop_assert_eq!(pq, p.evaluate(&at).unwrap() * q.evaluate(&at).unwrap());
        }
    }
}
