use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::tensor::{associativity_check, Mismatch, StructureTensor};
use crate::algebra::vector::Vector;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

/// `(a*b)_k = Σ α_ijk a_i b_j + Σ λ_ik a_i + Σ μ_jk b_j`.
///
/// Pure bilinear operations have empty linear parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineOperation {
    pub bilinear: StructureTensor,
    pub linear_a: BTreeMap<(usize, usize), FieldElement>,
    pub linear_b: BTreeMap<(usize, usize), FieldElement>,
}

impl AffineOperation {
    pub fn bilinear(t: StructureTensor) -> Self {
        AffineOperation { bilinear: t, linear_a: BTreeMap::new(), linear_b: BTreeMap::new() }
    }

    pub fn dimension(&self) -> usize {
        self.bilinear.dimension()
    }

    pub fn field(&self) -> FieldSpec {
        self.bilinear.field()
    }

    pub fn is_bilinear(&self) -> bool {
        self.linear_a.is_empty() && self.linear_b.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension();
        for ((i, k), c) in self.linear_a.iter().chain(&self.linear_b) {
            if *i >= n || *k >= n {
                return Err(Error::IndexOutOfRange(format!("{i},{k}"), n));
            }
            if c.field() != self.field() {
                return Err(Error::FieldMismatch(c.field().to_string(), self.field().to_string()));
            }
            if c.is_zero() {
                return Err(Error::InvalidModel("explicit zero in linear part".into()));
            }
        }
        Ok(())
    }

    fn product_unchecked(&self, a: &[FieldElement], b: &[FieldElement]) -> Vector {
        let mut out = vec![self.field().zero(); self.dimension()];
        for (&(i, j, k), c) in self.bilinear.entries() {
            if a[i].is_zero() || b[j].is_zero() {
                continue;
            }
            out[k] = &out[k] + &(&(c * &a[i]) * &b[j]);
        }
        for (&(i, k), c) in &self.linear_a {
            if !a[i].is_zero() {
                out[k] = &out[k] + &(c * &a[i]);
            }
        }
        for (&(j, k), c) in &self.linear_b {
            if !b[j].is_zero() {
                out[k] = &out[k] + &(c * &b[j]);
            }
        }
        Vector::new(out)
    }

    pub fn multiply(&self, a: &Vector, b: &Vector) -> Result<Vector> {
        a.check_dim(self.dimension())?;
        b.check_dim(self.dimension())?;
        for x in a.coords().iter().chain(b.coords()) {
            if x.field() != self.field() {
                return Err(Error::FieldMismatch(x.field().to_string(), self.field().to_string()));
            }
        }
        Ok(self.product_unchecked(a.coords(), b.coords()))
    }

    /// Panicking form of [`multiply`](Self::multiply) for operands already
    /// known to match the operation.
    pub fn mul(&self, a: &Vector, b: &Vector) -> Vector {
        debug_assert_eq!(a.dim(), self.dimension());
        debug_assert_eq!(b.dim(), self.dimension());
        self.product_unchecked(a.coords(), b.coords())
    }

    /// `a*b − b*a`.
    pub fn commutator(&self, a: &Vector, b: &Vector) -> Result<Vector> {
        Ok(self.multiply(a, b)?.sub(&self.multiply(b, a)?))
    }

    /// `(a*b)*c − a*(b*c)`.
    pub fn associator(&self, a: &Vector, b: &Vector, c: &Vector) -> Result<Vector> {
        let lhs = self.multiply(&self.multiply(a, b)?, c)?;
        let rhs = self.multiply(a, &self.multiply(b, c)?)?;
        Ok(lhs.sub(&rhs))
    }

    /// `(a*b)*c − (a*c)*b`.
    pub fn lps(&self, a: &Vector, b: &Vector, c: &Vector) -> Result<Vector> {
        let lhs = self.multiply(&self.multiply(a, b)?, c)?;
        let rhs = self.multiply(&self.multiply(a, c)?, b)?;
        Ok(lhs.sub(&rhs))
    }

    /// `(((b*a₁)*a₂)…)*a_m`; the empty chain is `b`.
    pub fn left_chain(&self, b: &Vector, multipliers: &[Vector]) -> Result<Vector> {
        let mut acc = b.clone();
        for a in multipliers {
            acc = self.multiply(&acc, a)?;
        }
        Ok(acc)
    }

    pub fn evaluate_bracketing(&self, tree: &BracketTree, leaves: &[Vector]) -> Result<Vector> {
        tree.validate(leaves.len())?;
        self.eval_node(tree, leaves)
    }

    /// Evaluates any subtree; leaf indices address `leaves` directly.
    pub fn evaluate_bracketing_unchecked(&self, tree: &BracketTree, leaves: &[Vector]) -> Vector {
        match tree {
            BracketTree::Leaf(i) => leaves[*i].clone(),
            BracketTree::Node(l, r) => self.mul(
                &self.evaluate_bracketing_unchecked(l, leaves),
                &self.evaluate_bracketing_unchecked(r, leaves),
            ),
        }
    }

    fn eval_node(&self, tree: &BracketTree, leaves: &[Vector]) -> Result<Vector> {
        match tree {
            BracketTree::Leaf(i) => Ok(leaves[*i].clone()),
            BracketTree::Node(l, r) => self.multiply(&self.eval_node(l, leaves)?, &self.eval_node(r, leaves)?),
        }
    }

    /// Associativity criterion on the structure tensor. Only meaningful for
    /// pure bilinear operations.
    pub fn associativity_mismatches(&self) -> Result<Vec<Mismatch>> {
        if !self.is_bilinear() {
            return Err(Error::NotBilinear);
        }
        Ok(associativity_check(&self.bilinear))
    }

    /// Linear map `w ↦ [v, w]` split as (matrix, constant):
    /// `[v,w]_k = Σ_j L[k][j] w_j + c_k`.
    pub fn commutator_form(&self, v: &[FieldElement]) -> (Vec<Vec<FieldElement>>, Vec<FieldElement>) {
        let n = self.dimension();
        let f = self.field();
        let mut l = vec![vec![f.zero(); n]; n];
        let mut c = vec![f.zero(); n];
        for (&(i, j, k), x) in self.bilinear.entries() {
            // v_i w_j term of v*w, and w_i v_j term of w*v
            l[k][j] = &l[k][j] + &(x * &v[i]);
            l[k][i] = &l[k][i] - &(x * &v[j]);
        }
        for (&(i, k), x) in &self.linear_a {
            c[k] = &c[k] + &(x * &v[i]);
            l[k][i] = &l[k][i] - x;
        }
        for (&(j, k), x) in &self.linear_b {
            l[k][j] = &l[k][j] + x;
            c[k] = &c[k] - &(x * &v[j]);
        }
        (l, c)
    }

    /// True when `v` commutes with every vector.
    pub fn is_central(&self, v: &Vector) -> bool {
        let (l, c) = self.commutator_form(v.coords());
        l.iter().flatten().chain(&c).all(FieldElement::is_zero)
    }
}

/// Binary bracketing over operands `0..m`, read left to right.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BracketTree {
    Leaf(usize),
    Node(Box<BracketTree>, Box<BracketTree>),
}

impl BracketTree {
    pub fn node(l: BracketTree, r: BracketTree) -> Self {
        BracketTree::Node(Box::new(l), Box::new(r))
    }

    /// `((0·1)·2)…` over `m` leaves.
    pub fn left_comb(m: usize) -> Self {
        assert!(m > 0, "bracket tree needs at least one leaf");
        (1..m).fold(BracketTree::Leaf(0), |acc, i| BracketTree::node(acc, BracketTree::Leaf(i)))
    }

    /// Left comb over leaves `lo..hi`.
    fn comb_range(lo: usize, hi: usize) -> Self {
        (lo + 1..hi).fold(BracketTree::Leaf(lo), |acc, i| BracketTree::node(acc, BracketTree::Leaf(i)))
    }

    /// `(b*a₁*…*a_l) * (a_{l+1}*…*a_m)` where leaf 0 is `b` and each group
    /// is left-associated.
    pub fn split(m: usize, l: usize) -> Self {
        assert!(l >= 1 && l < m, "split point out of range");
        BracketTree::node(Self::comb_range(0, l + 1), Self::comb_range(l + 1, m + 1))
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<usize>) {
        match self {
            BracketTree::Leaf(i) => out.push(*i),
            BracketTree::Node(l, r) => {
                l.collect(out);
                r.collect(out);
            }
        }
    }

    pub fn validate(&self, count: usize) -> Result<()> {
        let leaves = self.leaves();
        if leaves.len() != count {
            return Err(Error::MalformedTree(format!("{} leaves for {} operands", leaves.len(), count)));
        }
        if leaves.iter().enumerate().any(|(k, &i)| k != i) {
            return Err(Error::MalformedTree(format!("leaves {leaves:?} are not 0..{count} in order")));
        }
        Ok(())
    }

    /// Every subtree, children before parents.
    pub fn subtrees(&self) -> Vec<&BracketTree> {
        let mut out = Vec::new();
        self.walk(&mut out);
        out
    }

    fn walk<'a>(&'a self, out: &mut Vec<&'a BracketTree>) {
        if let BracketTree::Node(l, r) = self {
            l.walk(out);
            r.walk(out);
        }
        out.push(self);
    }
}

impl fmt::Display for BracketTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketTree::Leaf(i) => write!(f, "{i}"),
            BracketTree::Node(l, r) => write!(f, "({l}*{r})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_shapes() {
        assert_eq!(BracketTree::left_comb(3).to_string(), "((0*1)*2)");
        assert_eq!(BracketTree::split(3, 1).to_string(), "((0*1)*(2*3))");
        assert_eq!(BracketTree::split(4, 2).to_string(), "(((0*1)*2)*(3*4))");
        assert!(BracketTree::split(4, 2).validate(5).is_ok());
        let bad = BracketTree::node(BracketTree::Leaf(1), BracketTree::Leaf(0));
        assert!(matches!(bad.validate(2), Err(Error::MalformedTree(_))));
        assert!(BracketTree::left_comb(2).validate(3).is_err());
    }
}
