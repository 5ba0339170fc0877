use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;

use crate::algebra::operation::AffineOperation;
use crate::algebra::tensor::StructureTensor;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::poly::{symbol_vector, Indeterminate, Monomial, Polynomial, DEFAULT_DEGREE_BOUND};

/// An affine operation whose coefficients are polynomials, usually in the
/// parameters `A..F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicOperation {
    n: usize,
    bilinear: BTreeMap<(usize, usize, usize), Polynomial>,
    linear_a: BTreeMap<(usize, usize), Polynomial>,
    linear_b: BTreeMap<(usize, usize), Polynomial>,
    degree_bound: u32,
}

fn coordinate(name: &str, prefix: char, n: usize) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    let i: usize = rest.parse().ok()?;
    (i < n && rest == i.to_string()).then_some(i)
}

impl SymbolicOperation {
    /// Reads the coefficients off component formulas `(a*b)_k` written in
    /// `a0..`, `b0..`. Every term must be `a_i b_j`, `a_i` or `b_j` times a
    /// coefficient free of those variables.
    pub fn from_components(components: &[Polynomial]) -> Result<Self> {
        let n = components.len();
        crate::algebra::tensor::check_dimension(n)?;
        let mut op = SymbolicOperation {
            n,
            bilinear: BTreeMap::new(),
            linear_a: BTreeMap::new(),
            linear_b: BTreeMap::new(),
            degree_bound: DEFAULT_DEGREE_BOUND,
        };
        for (k, comp) in components.iter().enumerate() {
            for (mono, c) in comp.terms() {
                let (mut ai, mut bj, mut rest) = (None, None, Vec::new());
                for (v, e) in mono.factors() {
                    let slot = match (coordinate(v.name(), 'a', n), coordinate(v.name(), 'b', n)) {
                        (Some(i), _) => Some((&mut ai, i)),
                        (_, Some(j)) => Some((&mut bj, j)),
                        _ => None,
                    };
                    match slot {
                        Some((cell, i)) if *e == 1 && cell.is_none() => *cell = Some(i),
                        Some(_) => return Err(Error::UnsupportedTerm(format!("{mono} in component {k}"))),
                        None => rest.push((v.clone(), *e)),
                    }
                }
                let coeff = Polynomial::term(c.clone(), Monomial::new(rest));
                fn add<K: Ord>(map: &mut BTreeMap<K, Polynomial>, key: K, coeff: &Polynomial) {
                    let cur = map.remove(&key).unwrap_or_default();
                    let next = &cur + coeff;
                    if !next.is_zero() {
                        map.insert(key, next);
                    }
                }
                match (ai, bj) {
                    (Some(i), Some(j)) => add(&mut op.bilinear, (i, j, k), &coeff),
                    (Some(i), None) => add(&mut op.linear_a, (i, k), &coeff),
                    (None, Some(j)) => add(&mut op.linear_b, (j, k), &coeff),
                    (None, None) => return Err(Error::UnsupportedTerm(format!("constant {mono} in component {k}"))),
                }
            }
        }
        Ok(op)
    }

    /// Lifts a numeric operation; residues become their integer
    /// representatives.
    pub fn from_affine(op: &AffineOperation) -> Self {
        let lift = |c: &FieldElement| Polynomial::constant(c.to_rational());
        SymbolicOperation {
            n: op.dimension(),
            bilinear: op.bilinear.entries().map(|(k, c)| (*k, lift(c))).collect(),
            linear_a: op.linear_a.iter().map(|(k, c)| (*k, lift(c))).collect(),
            linear_b: op.linear_b.iter().map(|(k, c)| (*k, lift(c))).collect(),
            degree_bound: DEFAULT_DEGREE_BOUND,
        }
    }

    pub fn with_degree_bound(mut self, bound: u32) -> Self {
        self.degree_bound = bound;
        self
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn is_bilinear(&self) -> bool {
        self.linear_a.is_empty() && self.linear_b.is_empty()
    }

    pub fn bilinear_coefficient(&self, i: usize, j: usize, k: usize) -> Polynomial {
        self.bilinear.get(&(i, j, k)).cloned().unwrap_or_default()
    }

    /// Substitutes parameter values into every coefficient.
    pub fn bind(&self, bindings: &BTreeMap<Indeterminate, Polynomial>) -> Self {
        fn sub<K: Ord + Copy>(
            m: &BTreeMap<K, Polynomial>,
            b: &BTreeMap<Indeterminate, Polynomial>,
        ) -> BTreeMap<K, Polynomial> {
            m.iter()
                .map(|(k, p)| (*k, p.substitute(b)))
                .filter(|(_, p)| !p.is_zero())
                .collect()
        }
        SymbolicOperation {
            n: self.n,
            bilinear: sub(&self.bilinear, bindings),
            linear_a: sub(&self.linear_a, bindings),
            linear_b: sub(&self.linear_b, bindings),
            degree_bound: self.degree_bound,
        }
    }

    /// Indeterminates appearing in the coefficients.
    pub fn parameters(&self) -> BTreeSet<Indeterminate> {
        self.bilinear
            .values()
            .chain(self.linear_a.values())
            .chain(self.linear_b.values())
            .flat_map(Polynomial::indeterminates)
            .collect()
    }

    /// Numeric operation over `field`; fails if a coefficient still carries
    /// a parameter or has a denominator divisible by the characteristic.
    pub fn to_affine(&self, field: FieldSpec) -> Result<AffineOperation> {
        let num = |p: &Polynomial| -> Result<FieldElement> {
            let c = p.as_constant().ok_or_else(|| Error::NonConstantCoefficient(p.to_string()))?;
            field.from_rational(&c)
        };
        let mut t = StructureTensor::new(field, self.n)?;
        for (k, p) in &self.bilinear {
            t.add(*k, &num(p)?)?;
        }
        let mut la = BTreeMap::new();
        for (k, p) in &self.linear_a {
            let c = num(p)?;
            if !c.is_zero() {
                la.insert(*k, c);
            }
        }
        let mut lb = BTreeMap::new();
        for (k, p) in &self.linear_b {
            let c = num(p)?;
            if !c.is_zero() {
                lb.insert(*k, c);
            }
        }
        Ok(AffineOperation { bilinear: t, linear_a: la, linear_b: lb })
    }

    /// Product of two vectors of polynomials.
    pub fn apply(&self, x: &[Polynomial], y: &[Polynomial]) -> Result<Vec<Polynomial>> {
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.len().min(y.len()) });
        }
        let mut out = vec![Polynomial::zero(); self.n];
        for (&(i, j, k), c) in &self.bilinear {
            if x[i].is_zero() || y[j].is_zero() {
                continue;
            }
            let xy = x[i].checked_mul(&y[j], self.degree_bound)?;
            out[k] = &out[k] + &c.checked_mul(&xy, self.degree_bound)?;
        }
        for (&(i, k), c) in &self.linear_a {
            out[k] = &out[k] + &c.checked_mul(&x[i], self.degree_bound)?;
        }
        for (&(j, k), c) in &self.linear_b {
            out[k] = &out[k] + &c.checked_mul(&y[j], self.degree_bound)?;
        }
        Ok(out)
    }

    pub fn commutator(&self, x: &[Polynomial], y: &[Polynomial]) -> Result<Vec<Polynomial>> {
        Ok(sub_vec(&self.apply(x, y)?, &self.apply(y, x)?))
    }

    pub fn associator(&self, x: &[Polynomial], y: &[Polynomial], z: &[Polynomial]) -> Result<Vec<Polynomial>> {
        let lhs = self.apply(&self.apply(x, y)?, z)?;
        let rhs = self.apply(x, &self.apply(y, z)?)?;
        Ok(sub_vec(&lhs, &rhs))
    }

    pub fn lps(&self, x: &[Polynomial], y: &[Polynomial], z: &[Polynomial]) -> Result<Vec<Polynomial>> {
        let lhs = self.apply(&self.apply(x, y)?, z)?;
        let rhs = self.apply(&self.apply(x, z)?, y)?;
        Ok(sub_vec(&lhs, &rhs))
    }
}

pub fn sub_vec(x: &[Polynomial], y: &[Polynomial]) -> Vec<Polynomial> {
    x.iter().zip(y).map(|(p, q)| p - q).collect()
}

/// Which expression [`symbolic_components`] expands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expression {
    Product,
    Commutator,
    Associator,
    Lps,
}

impl Expression {
    pub fn arity(self) -> usize {
        match self {
            Expression::Product | Expression::Commutator => 2,
            Expression::Associator | Expression::Lps => 3,
        }
    }
}

/// Expands `expr` on generic operands `a0..`, `b0..` (and `c0..` for
/// ternary expressions).
pub fn symbolic_components(op: &SymbolicOperation, expr: Expression) -> Result<Vec<Polynomial>> {
    let n = op.dimension();
    let (a, b, c) = (symbol_vector("a", n), symbol_vector("b", n), symbol_vector("c", n));
    match expr {
        Expression::Product => op.apply(&a, &b),
        Expression::Commutator => op.commutator(&a, &b),
        Expression::Associator => op.associator(&a, &b, &c),
        Expression::Lps => op.lps(&a, &b, &c),
    }
}

/// Binds each named parameter to a rational constant.
pub fn constant_bindings(values: &[(&str, BigRational)]) -> BTreeMap<Indeterminate, Polynomial> {
    values
        .iter()
        .map(|(k, v)| (Indeterminate::new(k), Polynomial::constant(v.clone())))
        .collect()
}
