use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::operation::{AffineOperation, BracketTree};
use crate::algebra::vector::Vector;
use crate::error::{Error, Result};
use crate::strata::Strata;
use crate::witness::Witness;

const EXHAUSTIVE_PAIRS: usize = 1_000_000;
const EXHAUSTIVE_TRIPLES: usize = 10_000_000;
const MAX_WITNESSES: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    /// Every product of members is a member.
    pub closed: bool,
    /// Every product is a member, the zero vector, or central.
    pub closed_modulo_central: bool,
    pub commutative: bool,
    pub associative: bool,
    pub exhaustive: bool,
    pub pairs_checked: usize,
    pub triples_checked: usize,
    /// Products that are zero or central rather than members.
    pub degenerate_products: usize,
    pub witnesses: Vec<Witness>,
}

/// Closure, commutativity and associativity of `op` on `members`.
///
/// Exhaustive when `|members|² ≤ 10⁶` and `|members|³ ≤ 10⁷`, otherwise
/// `samples` random pairs and triples drawn from `seed`.
pub fn verify_closure(op: &AffineOperation, members: &[Vector], seed: u64, samples: usize) -> Result<ClosureReport> {
    if members.is_empty() {
        return Err(Error::Precondition("closure needs a nonempty member set".into()));
    }
    let m = members.len();
    let exhaustive = m.saturating_mul(m) <= EXHAUSTIVE_PAIRS && m.saturating_mul(m).saturating_mul(m) <= EXHAUSTIVE_TRIPLES;
    let set: HashSet<&Vector> = members.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).collect()
    } else {
        (0..samples).map(|_| (rng.gen_range(0..m), rng.gen_range(0..m))).collect()
    };
    let triples: Vec<(usize, usize, usize)> = if exhaustive {
        (0..m).flat_map(|i| (0..m).flat_map(move |j| (0..m).map(move |k| (i, j, k)))).collect()
    } else {
        (0..samples).map(|_| (rng.gen_range(0..m), rng.gen_range(0..m), rng.gen_range(0..m))).collect()
    };

    let mut r = ClosureReport {
        closed: true,
        closed_modulo_central: true,
        commutative: true,
        associative: true,
        exhaustive,
        pairs_checked: pairs.len(),
        triples_checked: triples.len(),
        degenerate_products: 0,
        witnesses: Vec::new(),
    };
    let (mut comm_w, mut close_w, mut assoc_w) = (0, 0, 0);
    for &(i, j) in &pairs {
        let (a, b) = (&members[i], &members[j]);
        let ab = op.mul(a, b);
        if !set.contains(&ab) {
            r.closed = false;
            if ab.is_zero() || op.is_central(&ab) {
                r.degenerate_products += 1;
            } else {
                r.closed_modulo_central = false;
                if close_w < MAX_WITNESSES {
                    close_w += 1;
                    r.witnesses.push(Witness::ProductLabel { a: a.clone(), b: b.clone(), label: None });
                }
            }
        }
        if i < j && ab != op.mul(b, a) {
            r.commutative = false;
            if comm_w < MAX_WITNESSES {
                comm_w += 1;
                r.witnesses.push(Witness::NonCommuting { a: a.clone(), b: b.clone() });
            }
        }
    }
    for &(i, j, k) in &triples {
        let (a, b, c) = (&members[i], &members[j], &members[k]);
        if op.mul(&op.mul(a, b), c) != op.mul(a, &op.mul(b, c)) {
            r.associative = false;
            if assoc_w < MAX_WITNESSES {
                assoc_w += 1;
                r.witnesses.push(Witness::NonAssociative { a: a.clone(), b: b.clone(), c: c.clone() });
            }
        }
    }
    Ok(r)
}

/// Where an expression's value ends up relative to its operands' strata.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Breaking,
    ZeroResult,
    ExceptionalResult,
}

fn leaf_labels(strata: &Strata, leaves: &[Vector]) -> Result<Vec<String>> {
    leaves
        .iter()
        .map(|v| {
            strata
                .label(v)
                .map(|l| l.to_string())
                .ok_or_else(|| Error::Precondition(format!("operand {v} has no stratum")))
        })
        .collect()
}

pub fn is_stratum_stable(
    op: &AffineOperation,
    tree: &BracketTree,
    leaves: &[Vector],
    strata: &Strata,
) -> Result<Stability> {
    let operand = leaf_labels(strata, leaves)?;
    let v = op.evaluate_bracketing(tree, leaves)?;
    if v.is_zero() {
        return Ok(Stability::ZeroResult);
    }
    Ok(match strata.label(&v) {
        None => Stability::ExceptionalResult,
        Some(l) if operand.contains(&l.to_string()) => Stability::Stable,
        Some(_) => Stability::Breaking,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DepthReport {
    /// Distinct strata among leaves and intermediate values.
    pub depth: usize,
    /// Label of every subexpression, children before parents.
    pub labels: Vec<Option<String>>,
    /// Subexpressions that evaluated to zero or to an unassigned vector.
    pub unlabeled: usize,
}

pub fn stratified_depth(
    op: &AffineOperation,
    tree: &BracketTree,
    leaves: &[Vector],
    strata: &Strata,
) -> Result<DepthReport> {
    leaf_labels(strata, leaves)?;
    tree.validate(leaves.len())?;
    let labels: Vec<Option<String>> = tree
        .subtrees()
        .into_iter()
        .map(|t| {
            let v = op.evaluate_bracketing_unchecked(t, leaves);
            strata.label(&v).map(|l| l.to_string())
        })
        .collect();
    let distinct: BTreeSet<&String> = labels.iter().flatten().collect();
    Ok(DepthReport { depth: distinct.len(), unlabeled: labels.iter().filter(|l| l.is_none()).count(), labels })
}
