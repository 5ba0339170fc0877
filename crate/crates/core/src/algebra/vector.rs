use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

/// A point of `K^n`. The zero vector is a valid value here even though it
/// never belongs to a stratum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vector(Vec<FieldElement>);

impl Vector {
    pub fn new(coords: Vec<FieldElement>) -> Self {
        Vector(coords)
    }

    pub fn zero(field: FieldSpec, n: usize) -> Self {
        Vector(vec![field.zero(); n])
    }

    pub fn from_i64s(field: FieldSpec, vals: &[i64]) -> Self {
        Vector(vals.iter().map(|&v| field.from_i64(v)).collect())
    }

    /// Parses `"1,2,3"`, `"(1, -1/2, 3)"` or `"[1 2 3]"`.
    pub fn parse(field: FieldSpec, s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        let coords = t
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|x| !x.is_empty())
            .map(|x| field.parse(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Vector(coords))
    }

    pub fn from_strings(field: FieldSpec, items: &[String]) -> Result<Self> {
        items.iter().map(|x| field.parse(x)).collect::<Result<Vec<_>>>().map(Vector)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &FieldElement {
        &self.0[i]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(FieldElement::is_zero)
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.0.len() });
        }
        Ok(())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(x, y)| x - y).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(x, y)| x + y).collect())
    }

    pub fn scale(&self, c: &FieldElement) -> Vector {
        Vector(self.0.iter().map(|x| x * c).collect())
    }

    /// Lexicographic index `Σ v_i p^(n-1-i)` of a prime-field vector.
    pub fn to_index(&self) -> Option<u64> {
        let mut idx = 0u64;
        for x in &self.0 {
            let FieldElement::Residue { value, modulus } = x else { return None };
            idx = idx * modulus + value;
        }
        Some(idx)
    }

    pub fn from_index(field: FieldSpec, n: usize, mut idx: u64) -> Vector {
        let p = field.modulus().expect("prime field");
        let mut coords = vec![0u64; n];
        for c in coords.iter_mut().rev() {
            *c = idx % p;
            idx /= p;
        }
        Vector(coords.into_iter().map(|v| field.residue(v)).collect())
    }

    pub fn residues(&self) -> Option<Vec<u64>> {
        self.0.iter().map(FieldElement::residue).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for Vector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}
