//! Concrete vectors exhibiting a verdict, replayable against the model.

use serde::Serialize;

use crate::algebra::operation::{AffineOperation, BracketTree};
use crate::algebra::vector::Vector;
use crate::strata::Strata;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `a*b ≠ b*a`.
    NonCommuting { a: Vector, b: Vector },
    /// `a*b = b*a`.
    Commuting { a: Vector, b: Vector },
    /// `(a*b)*c ≠ a*(b*c)`.
    NonAssociative { a: Vector, b: Vector, c: Vector },
    /// `(a*b)*c = a*(b*c)`.
    Associative { a: Vector, b: Vector, c: Vector },
    /// `a*b` carries `label`; `None` means zero or unassigned.
    ProductLabel { a: Vector, b: Vector, label: Option<String> },
    /// `(a*b)*c ≠ (a*c)*b`.
    NonzeroLps { a: Vector, b: Vector, c: Vector },
    /// The left chain over `multipliers` differs from the chain over the
    /// multipliers reordered by `order`.
    ChainOrder { start: Vector, multipliers: Vec<Vector>, order: Vec<usize> },
    /// `(b*a₁…a_l)*(a_{l+1}…a_m)` compared with the left chain: `equal`
    /// records whether they agree and `label` the bracketed value's stratum.
    Bracketing { b: Vector, multipliers: Vec<Vector>, split: usize, equal: bool, label: Option<String> },
}

impl Witness {
    /// Re-evaluates the witness; true when it still shows what it claims.
    pub fn replay(&self, op: &AffineOperation, strata: &Strata) -> bool {
        let label = |v: &Vector| strata.label(v).map(|l| l.to_string());
        match self {
            Witness::NonCommuting { a, b } => op.mul(a, b) != op.mul(b, a),
            Witness::Commuting { a, b } => op.mul(a, b) == op.mul(b, a),
            Witness::NonAssociative { a, b, c } => op.mul(&op.mul(a, b), c) != op.mul(a, &op.mul(b, c)),
            Witness::Associative { a, b, c } => op.mul(&op.mul(a, b), c) == op.mul(a, &op.mul(b, c)),
            Witness::ProductLabel { a, b, label: l } => label(&op.mul(a, b)) == *l,
            Witness::NonzeroLps { a, b, c } => op.mul(&op.mul(a, b), c) != op.mul(&op.mul(a, c), b),
            Witness::ChainOrder { start, multipliers, order } => {
                let permuted: Vec<Vector> = order.iter().map(|&i| multipliers[i].clone()).collect();
                chain(op, start, multipliers) != chain(op, start, &permuted)
            }
            Witness::Bracketing { b, multipliers, split, equal, label: l } => {
                let mut leaves = vec![b.clone()];
                leaves.extend(multipliers.iter().cloned());
                let Ok(v) = op.evaluate_bracketing(&BracketTree::split(multipliers.len(), *split), &leaves) else {
                    return false;
                };
                (v == chain(op, b, multipliers)) == *equal && label(&v) == *l
            }
        }
    }
}

fn chain(op: &AffineOperation, start: &Vector, multipliers: &[Vector]) -> Vector {
    multipliers.iter().fold(start.clone(), |acc, a| op.mul(&acc, a))
}
