use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

/// Upper bound on supported dimensions.
pub const MAX_DIMENSION: usize = 16;

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIMENSION {
        return Err(Error::DimensionOutOfRange(n));
    }
    Ok(())
}

/// Sparse structure constants `α_ijk`, with
/// `(a*b)_k = Σ_ij α_ijk a_i b_j`. Zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureTensor {
    field: FieldSpec,
    n: usize,
    entries: BTreeMap<(usize, usize, usize), FieldElement>,
}

impl StructureTensor {
    pub fn new(field: FieldSpec, n: usize) -> Result<Self> {
        check_dimension(n)?;
        Ok(StructureTensor { field, n, entries: BTreeMap::new() })
    }

    pub fn from_entries<I>(field: FieldSpec, n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize, usize), FieldElement)>,
    {
        let mut t = StructureTensor::new(field, n)?;
        for (idx, c) in entries {
            t.add(idx, &c)?;
        }
        Ok(t)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> FieldElement {
        self.entries.get(&(i, j, k)).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Accumulates `c` into entry `(i,j,k)`.
    pub fn add(&mut self, (i, j, k): (usize, usize, usize), c: &FieldElement) -> Result<()> {
        if i >= self.n || j >= self.n || k >= self.n {
            return Err(Error::IndexOutOfRange(format!("{i},{j},{k}"), self.n));
        }
        if c.field() != self.field {
            return Err(Error::FieldMismatch(c.field().to_string(), self.field.to_string()));
        }
        let cur = self.get(i, j, k);
        let next = &cur + c;
        if next.is_zero() {
            self.entries.remove(&(i, j, k));
        } else {
            self.entries.insert((i, j, k), next);
        }
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize, usize), &FieldElement)> {
        self.entries.iter()
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }
}

/// `a*b = M_a · b` with `M_a = Σ_s λ⁽ˢ⁾(a) E⁽ˢ⁾`.
#[derive(Clone, Debug)]
pub struct MatrixFormulation {
    pub field: FieldSpec,
    pub n: usize,
    pub matrices: Vec<Vec<Vec<FieldElement>>>,
    pub functionals: Vec<Vec<FieldElement>>,
}

impl MatrixFormulation {
    pub fn validate(&self) -> Result<()> {
        check_dimension(self.n)?;
        if self.matrices.len() != self.functionals.len() {
            return Err(Error::InvalidModel(format!(
                "{} matrices but {} functionals",
                self.matrices.len(),
                self.functionals.len()
            )));
        }
        for m in &self.matrices {
            if m.len() != self.n || m.iter().any(|row| row.len() != self.n) {
                return Err(Error::InvalidModel("basis matrix is not n x n".into()));
            }
        }
        if self.functionals.iter().any(|f| f.len() != self.n) {
            return Err(Error::InvalidModel("functional row length differs from n".into()));
        }
        Ok(())
    }

    /// `M_a` for a concrete `a`.
    pub fn matrix_of(&self, a: &[FieldElement]) -> Vec<Vec<FieldElement>> {
        let mut m = vec![vec![self.field.zero(); self.n]; self.n];
        for (e, lam) in self.matrices.iter().zip(&self.functionals) {
            let w = lam.iter().zip(a).fold(self.field.zero(), |acc, (l, x)| &acc + &(l * x));
            for (row, erow) in m.iter_mut().zip(e) {
                for (cell, x) in row.iter_mut().zip(erow) {
                    *cell = &*cell + &(&w * x);
                }
            }
        }
        m
    }
}

/// `α_ijk = Σ_s λ⁽ˢ⁾_i (E⁽ˢ⁾)_kj`.
pub fn matrix_to_tensor(mf: &MatrixFormulation) -> Result<StructureTensor> {
    mf.validate()?;
    let mut t = StructureTensor::new(mf.field, mf.n)?;
    for (e, lam) in mf.matrices.iter().zip(&mf.functionals) {
        for (i, l) in lam.iter().enumerate() {
            if l.is_zero() {
                continue;
            }
            for (k, row) in e.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    if !x.is_zero() {
                        t.add((i, j, k), &(l * x))?;
                    }
                }
            }
        }
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub index: (usize, usize, usize, usize),
    pub lhs: FieldElement,
    pub rhs: FieldElement,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (i, j, k, l) = self.index;
        write!(f, "(i,j,k,l)=({i},{j},{k},{l}): {} != {}", self.lhs, self.rhs)
    }
}

/// Compares `Σ_r α_ijr α_rkl` with `Σ_s α_jks α_isl` for every
/// `(i,j,k,l)`; mismatches come back in lexicographic index order.
pub fn associativity_check(t: &StructureTensor) -> Vec<Mismatch> {
    let n = t.n;
    let zero = t.field.zero();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut lhs = zero.clone();
                    let mut rhs = zero.clone();
                    for r in 0..n {
                        if let (Some(x), Some(y)) = (t.entries.get(&(i, j, r)), t.entries.get(&(r, k, l))) {
                            lhs = &lhs + &(x * y);
                        }
                        if let (Some(x), Some(y)) = (t.entries.get(&(j, k, r)), t.entries.get(&(i, r, l))) {
                            rhs = &rhs + &(x * y);
                        }
                    }
                    if lhs != rhs {
                        out.push(Mismatch { index: (i, j, k, l), lhs, rhs });
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basic3_matrices() -> MatrixFormulation {
        let q = FieldSpec::Rationals;
        let m = |rows: [[i64; 3]; 3]| -> Vec<Vec<FieldElement>> {
            rows.iter().map(|r| r.iter().map(|&x| q.from_i64(x)).collect()).collect()
        };
        let delta = |j: usize| (0..3).map(|i| q.from_i64((i == j) as i64)).collect::<Vec<_>>();
        MatrixFormulation {
            field: q,
            n: 3,
            matrices: vec![
                m([[1, 0, 0], [0, 1, 0], [0, 0, 1]]),
                m([[0, 1, 1], [1, 0, -1], [0, 0, 1]]),
                m([[0, 1, 1], [0, 1, 0], [1, -1, 0]]),
            ],
            functionals: vec![delta(0), delta(1), delta(2)],
        }
    }

    #[test]
    fn basic3_entries_from_matrices() {
        let t = matrix_to_tensor(&basic3_matrices()).unwrap();
        let q = FieldSpec::Rationals;
        assert_eq!(t.get(1, 2, 1), q.from_i64(-1));
        assert_eq!(t.get(1, 1, 0), q.one());
        assert_eq!(t.get(0, 0, 0), q.one());
        assert_eq!(t.nonzero_count(), 13);
    }

    #[test]
    fn scalar_action() {
        let q = FieldSpec::Rationals;
        let n = 4;
        let ident = (0..n).map(|r| (0..n).map(|c| q.from_i64((r == c) as i64)).collect()).collect();
        let lam = (0..n).map(|i| q.from_i64((i == 0) as i64)).collect();
        let t = matrix_to_tensor(&MatrixFormulation { field: q, n, matrices: vec![ident], functionals: vec![lam] })
            .unwrap();
        for (&(i, j, k), c) in t.entries() {
            assert_eq!((i, j == k), (0, true));
            assert!(c.is_one());
        }
        assert_eq!(t.nonzero_count(), n);
    }

    #[test]
    fn zero_tensor_is_associative() {
        let t = StructureTensor::new(FieldSpec::Rationals, 3).unwrap();
        assert!(associativity_check(&t).is_empty());
    }

    #[test]
    fn malformed_formulations_are_rejected() {
        let mut mf = basic3_matrices();
        mf.functionals.pop();
        assert!(matrix_to_tensor(&mf).is_err());
        assert!(StructureTensor::new(FieldSpec::Rationals, 17).is_err());
    }
}
