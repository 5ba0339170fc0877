use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::operation::AffineOperation;
use crate::algebra::vector::Vector;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::strata::rule::{StrataRule, StratumLabel};

/// Largest enumerable space, `p^n ≤ 2^24`.
pub const ENUMERATION_LIMIT: u64 = 1 << 24;

/// Member listings above this size are elided unless `full` is requested.
pub const LISTING_LIMIT: usize = 10_000;

const NONE: u32 = u32::MAX;

pub fn space_size(p: u64, n: usize) -> Result<u64> {
    let mut size = 1u64;
    for _ in 0..n {
        size = size.checked_mul(p).filter(|s| *s <= ENUMERATION_LIMIT).ok_or(Error::EnumerationGuard { p, n })?;
    }
    Ok(size)
}

/// All nonzero vectors of `F_p^n` in lexicographic order.
pub fn enumerate_space(p: u64, n: usize) -> Result<impl Iterator<Item = Vector>> {
    let field = FieldSpec::prime(p)?;
    let size = space_size(p, n)?;
    Ok((1..size).map(move |idx| Vector::from_index(field, n, idx)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    DeclaredRatio,
    Discovered,
}

/// Labelled decomposition of `F_p^n \ {0}` with a ledger of vectors that
/// belong to no stratum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratumPartition {
    field: FieldSpec,
    n: usize,
    provenance: Provenance,
    labels: Vec<StratumLabel>,
    assignment: Vec<u32>,
    members: Vec<Vec<u64>>,
    exceptional: Vec<u64>,
}

impl StratumPartition {
    fn build(
        field: FieldSpec,
        n: usize,
        provenance: Provenance,
        labels: Vec<StratumLabel>,
        assignment: Vec<u32>,
    ) -> Self {
        let mut members = vec![Vec::new(); labels.len()];
        let mut exceptional = Vec::new();
        for (idx, &s) in assignment.iter().enumerate().skip(1) {
            if s == NONE {
                exceptional.push(idx as u64);
            } else {
                members[s as usize].push(idx as u64);
            }
        }
        StratumPartition { field, n, provenance, labels, assignment, members, exceptional }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[StratumLabel] {
        &self.labels
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn stratum_index(&self, v: &Vector) -> Option<usize> {
        let idx = v.to_index()? as usize;
        match *self.assignment.get(idx)? {
            NONE => None,
            s => Some(s as usize),
        }
    }

    pub fn label_of(&self, v: &Vector) -> Option<&StratumLabel> {
        self.stratum_index(v).map(|s| &self.labels[s])
    }

    pub fn position(&self, label: &StratumLabel) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn member_indices(&self, s: usize) -> &[u64] {
        &self.members[s]
    }

    pub fn members(&self, s: usize) -> Vec<Vector> {
        self.members[s].iter().map(|&i| Vector::from_index(self.field, self.n, i)).collect()
    }

    pub fn member(&self, s: usize, k: usize) -> Vector {
        Vector::from_index(self.field, self.n, self.members[s][k])
    }

    pub fn exceptional(&self) -> Vec<Vector> {
        self.exceptional.iter().map(|&i| Vector::from_index(self.field, self.n, i)).collect()
    }

    pub fn exceptional_count(&self) -> usize {
        self.exceptional.len()
    }

    /// `{"p","n","provenance","strata":[{"label","size","members"}],"exceptional"}`.
    pub fn to_json(&self, full: bool) -> Value {
        let listing = |idx: &[u64]| -> Value {
            if !full && idx.len() > LISTING_LIMIT {
                return Value::Null;
            }
            Value::Array(
                idx.iter()
                    .map(|&i| {
                        let v = Vector::from_index(self.field, self.n, i);
                        Value::Array(v.residues().unwrap().into_iter().map(Value::from).collect())
                    })
                    .collect(),
            )
        };
        let strata: Vec<Value> = self
            .labels
            .iter()
            .zip(&self.members)
            .map(|(l, m)| json!({"label": l.to_string(), "size": m.len(), "members": listing(m)}))
            .collect();
        json!({
            "p": self.field.modulus(),
            "n": self.n,
            "provenance": self.provenance,
            "strata": strata,
            "exceptional": listing(&self.exceptional),
        })
    }
}

/// Partition induced by a declarative rule.
pub fn ratio_partition(rule: &StrataRule, p: u64, n: usize) -> Result<StratumPartition> {
    rule.validate(n)?;
    let field = FieldSpec::prime(p)?;
    let size = space_size(p, n)?;
    let labels = rule.labels(field)?;
    let position: BTreeMap<&StratumLabel, u32> = labels.iter().enumerate().map(|(i, l)| (l, i as u32)).collect();
    let assignment: Vec<u32> = (0..size)
        .into_par_iter()
        .map(|idx| {
            if idx == 0 {
                return NONE;
            }
            let label = rule.label(&Vector::from_index(field, n, idx)).expect("nonzero vector");
            position[&label]
        })
        .collect();
    Ok(StratumPartition::build(field, n, Provenance::DeclaredRatio, labels, assignment))
}

/// Reduced row echelon form over `F_p`; zero rows dropped.
pub(crate) fn rref(mut rows: Vec<Vec<FieldElement>>) -> Vec<Vec<FieldElement>> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else { continue };
        rows.swap(rank, piv);
        let inv = rows[rank][c].inverse().expect("nonzero pivot");
        rows[rank] = rows[rank].iter().map(|x| x * &inv).collect();
        for r in 0..rows.len() {
            if r != rank && !rows[r][c].is_zero() {
                let f = rows[r][c].clone();
                let pivot_row = rows[rank].clone();
                for (x, y) in rows[r].iter_mut().zip(&pivot_row) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

/// Canonical description of `{w : v*w = w*v}`, or `None` when `v` is
/// central.
pub fn commutant_key(op: &AffineOperation, v: &Vector) -> Option<Vec<Vec<u64>>> {
    let (l, c) = op.commutator_form(v.coords());
    let rows: Vec<Vec<FieldElement>> = l
        .into_iter()
        .zip(c)
        .map(|(mut row, ck)| {
            row.push(-&ck);
            row
        })
        .collect();
    let reduced = rref(rows);
    if reduced.is_empty() {
        return None;
    }
    Some(reduced.iter().map(|r| r.iter().map(|x| x.residue().expect("prime field")).collect()).collect())
}

/// Groups the nonzero vectors of `F_p^n` by commutant. Central vectors go
/// to the exceptional ledger. Clusters are numbered by their smallest
/// member in lexicographic order.
pub fn discover_strata(op: &AffineOperation) -> Result<StratumPartition> {
    let field = op.field();
    let p = field.modulus().ok_or(Error::RequiresPrimeField)?;
    let n = op.dimension();
    let size = space_size(p, n)?;
    let keys: Vec<Option<Vec<Vec<u64>>>> = (1..size)
        .into_par_iter()
        .map(|idx| commutant_key(op, &Vector::from_index(field, n, idx)))
        .collect();
    let mut cluster_of: BTreeMap<&Vec<Vec<u64>>, u32> = BTreeMap::new();
    let mut assignment = vec![NONE; size as usize];
    for (k, key) in keys.iter().enumerate() {
        if let Some(key) = key {
            let next = cluster_of.len() as u32;
            assignment[k + 1] = *cluster_of.entry(key).or_insert(next);
        }
    }
    let labels = (0..cluster_of.len()).map(StratumLabel::Cluster).collect();
    Ok(StratumPartition::build(field, n, Provenance::Discovered, labels, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::models::{builtin_model, Builtin, ParamSet};
    use std::collections::BTreeSet;

    #[test]
    fn enumeration_order_and_counts() {
        assert_eq!(enumerate_space(2, 3).unwrap().count(), 7);
        let mut it = enumerate_space(5, 3).unwrap();
        assert_eq!(it.next().unwrap().residues().unwrap(), vec![0, 0, 1]);
        assert_eq!(enumerate_space(5, 3).unwrap().count(), 124);
        assert!(matches!(enumerate_space(4099, 2).map(|_| ()), Err(Error::EnumerationGuard { .. })));
        assert!(enumerate_space(6, 2).is_err());
    }

    #[test]
    fn ratio_partition_sizes() {
        let p = 7;
        let part = ratio_partition(&StrataRule::Ratio { coords: [1, 2] }, p, 3).unwrap();
        assert_eq!(part.len(), 8);
        let sizes = part.sizes();
        assert_eq!(sizes.iter().sum::<usize>(), 342);
        assert_eq!(sizes[7], 48);
        assert!(sizes[..7].iter().all(|&s| s == 42));
        let part4 = ratio_partition(&StrataRule::RatioPair { coords: [1, 2, 3] }, 3, 4).unwrap();
        assert_eq!(part4.len(), 13);
        assert_eq!(part4.sizes().iter().sum::<usize>(), 80);
        assert!(part4.sizes()[..12].iter().all(|&s| s == 6));
        assert_eq!(part4.sizes()[12], 8);
    }

    fn brute_commutant(op: &AffineOperation, v: &Vector) -> BTreeSet<u64> {
        let p = op.field().modulus().unwrap();
        let n = op.dimension();
        enumerate_space(p, n)
            .unwrap()
            .filter(|w| op.mul(v, w) == op.mul(w, v))
            .map(|w| w.to_index().unwrap())
            .collect()
    }

    #[test]
    fn discovery_matches_brute_force_commutants() {
        let f = FieldSpec::prime(5).unwrap();
        for b in [Builtin::Parametric3, Builtin::Nonlinear3] {
            let m = builtin_model(b, Some(&ParamSet::generic(f, 11)), f).unwrap();
            let part = discover_strata(&m.operation).unwrap();
            let all: Vec<Vector> = enumerate_space(5, 3).unwrap().collect();
            let comm: Vec<BTreeSet<u64>> = all.iter().map(|v| brute_commutant(&m.operation, v)).collect();
            for (i, v) in all.iter().enumerate() {
                let central = comm[i].len() == all.len();
                assert_eq!(part.stratum_index(v).is_none(), central);
                for (j, w) in all.iter().enumerate().take(i) {
                    if !central && part.stratum_index(w).is_some() {
                        assert_eq!(part.stratum_index(v) == part.stratum_index(w), comm[i] == comm[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn partition_json_elides_large_listings() {
        let part = ratio_partition(&StrataRule::Ratio { coords: [1, 2] }, 3, 3).unwrap();
        let j = part.to_json(false);
        assert_eq!(j["p"], 3);
        assert_eq!(j["strata"].as_array().unwrap().len(), 4);
        assert_eq!(j["strata"][0]["members"].as_array().unwrap().len(), 6);
    }
}
