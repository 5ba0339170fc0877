//! Chained products traced through strata: orbits under a fixed
//! multiplier, multi-multiplier paths, permutation experiments and
//! stratum transition graphs.

use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::operation::AffineOperation;
use crate::algebra::vector::Vector;
use crate::axioms::SamplingPlan;
use crate::error::{Error, Result};
use crate::strata::{enumerate_space, space_size, Strata};

/// Most multipliers [`permutation_invariance`] will permute.
pub const MAX_PERMUTED: usize = 6;
/// Largest `p^n` for which the transition graph enumerates every pair.
pub const EXHAUSTIVE_GRAPH_SPACE: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub value: Vector,
    pub label: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Cycle {
    /// Index of the first state that recurs.
    pub entry: usize,
    pub period: usize,
}

/// `steps[0]` is the start; each later step multiplies the previous value
/// on the right by the next multiplier (or the fixed one for an orbit).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trajectory {
    pub start: Vector,
    pub multipliers: Vec<Vector>,
    pub steps: Vec<Step>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Cycle>,
    /// The chain hit the zero vector and stopped there.
    pub truncated_at_zero: bool,
}

impl Trajectory {
    pub fn labels(&self) -> Vec<Option<String>> {
        self.steps.iter().map(|s| s.label.clone()).collect()
    }

    pub fn last_value(&self) -> &Vector {
        &self.steps.last().expect("trajectory has a start").value
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trajectory serializes")
    }
}

fn step(strata: &Strata, value: Vector) -> Step {
    let label = strata.label(&value).map(|l| l.to_string());
    Step { value, label }
}

fn require_nonzero(vs: &[&Vector]) -> Result<()> {
    if vs.iter().any(|v| v.is_zero()) {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

/// `start, start*q, (start*q)*q, …` for up to `steps` products, stopping at
/// the first repeated value (recorded as a cycle) or at the zero vector.
pub fn orbit(op: &AffineOperation, start: &Vector, q: &Vector, steps: usize, strata: &Strata) -> Result<Trajectory> {
    if !op.field().is_finite() {
        return Err(Error::RequiresPrimeField);
    }
    require_nonzero(&[start, q])?;
    op.multiply(start, q)?;
    let mut t = Trajectory {
        start: start.clone(),
        multipliers: vec![q.clone()],
        steps: vec![step(strata, start.clone())],
        cycle: None,
        truncated_at_zero: false,
    };
    let mut seen: HashMap<Vector, usize> = HashMap::from([(start.clone(), 0)]);
    let mut current = start.clone();
    for k in 1..=steps {
        current = op.mul(&current, q);
        if let Some(&entry) = seen.get(&current) {
            t.cycle = Some(Cycle { entry, period: k - entry });
            break;
        }
        seen.insert(current.clone(), k);
        t.steps.push(step(strata, current.clone()));
        if current.is_zero() {
            t.truncated_at_zero = true;
            break;
        }
    }
    Ok(t)
}

/// The left chain `(((start*a₁)*a₂)…)*a_m` with every intermediate value.
pub fn chain_path(op: &AffineOperation, start: &Vector, multipliers: &[Vector], strata: &Strata) -> Result<Trajectory> {
    require_nonzero(&std::iter::once(start).chain(multipliers).collect::<Vec<_>>())?;
    let mut t = Trajectory {
        start: start.clone(),
        multipliers: multipliers.to_vec(),
        steps: vec![step(strata, start.clone())],
        cycle: None,
        truncated_at_zero: false,
    };
    let mut current = start.clone();
    for a in multipliers {
        current = op.multiply(&current, a)?;
        t.steps.push(step(strata, current.clone()));
        if current.is_zero() {
            t.truncated_at_zero = true;
            break;
        }
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermutationReport {
    pub invariant: bool,
    pub orderings: usize,
    /// Final value of the chain in the given order.
    pub final_value: Vector,
    /// First ordering whose final value differs.
    pub counterexample: Option<Vec<usize>>,
}

/// Evaluates the left chain from `start` under every ordering of
/// `multipliers`, which must share one stratum other than `start`'s.
pub fn permutation_invariance(
    op: &AffineOperation,
    start: &Vector,
    multipliers: &[Vector],
    strata: &Strata,
) -> Result<PermutationReport> {
    if multipliers.is_empty() || multipliers.len() > MAX_PERMUTED {
        return Err(Error::Precondition(format!("need 1..={MAX_PERMUTED} multipliers, got {}", multipliers.len())));
    }
    let label = |v: &Vector| strata.label(v).ok_or_else(|| Error::Precondition(format!("{v} has no stratum")));
    let target = label(&multipliers[0])?;
    for q in &multipliers[1..] {
        if label(q)? != target {
            return Err(Error::Precondition("multipliers span more than one stratum".into()));
        }
    }
    if label(start)? == target {
        return Err(Error::Precondition("start lies in the multipliers' stratum".into()));
    }
    let chain = |order: &[usize]| -> Result<Vector> {
        order.iter().try_fold(start.clone(), |acc, &i| op.multiply(&acc, &multipliers[i]))
    };
    let k = multipliers.len();
    let identity: Vec<usize> = (0..k).collect();
    let reference = chain(&identity)?;
    let mut orderings = 0;
    let mut counterexample = None;
    for order in (0..k).permutations(k) {
        orderings += 1;
        if counterexample.is_none() && chain(&order)? != reference {
            counterexample = Some(order);
        }
    }
    Ok(PermutationReport { invariant: counterexample.is_none(), orderings, final_value: reference, counterexample })
}

/// Edge multiplicities `(from, via, to)` between stratum labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionGraph {
    pub nodes: Vec<String>,
    pub edges: BTreeMap<(String, String, String), u64>,
    pub pairs: u64,
    /// Products that were zero or had no stratum.
    pub unlabeled: u64,
    pub exhaustive: bool,
}

type EdgeCounts = BTreeMap<(String, String, String), u64>;

fn merge(mut a: (EdgeCounts, u64), b: (EdgeCounts, u64)) -> (EdgeCounts, u64) {
    for (k, v) in b.0 {
        *a.0.entry(k).or_default() += v;
    }
    (a.0, a.1 + b.1)
}

/// Records `a*q` for pairs of labeled vectors: every pair when
/// `p^n ≤ 10⁴`, otherwise `plan.samples` seeded pairs.
pub fn transition_graph(op: &AffineOperation, strata: &Strata, plan: &SamplingPlan) -> Result<TransitionGraph> {
    let p = op.field().modulus().ok_or(Error::RequiresPrimeField)?;
    let n = op.dimension();
    let labels = strata.labels().ok_or(Error::RequiresPrimeField)?;
    let exhaustive = space_size(p, n).is_ok_and(|s| s <= EXHAUSTIVE_GRAPH_SPACE);
    let labeled: Vec<(Vector, String)> = if exhaustive {
        enumerate_space(p, n)?.filter_map(|v| strata.label(&v).map(|l| (v, l.to_string()))).collect()
    } else {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(plan.stream(300));
        (0..2 * plan.samples)
            .map(|_| {
                let l = strata.sample_label(&mut rng);
                strata.sample_member(&l, &mut rng).map(|v| (v, l.to_string()))
            })
            .collect::<Result<_>>()?
    };
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..labeled.len()).flat_map(|i| (0..labeled.len()).map(move |j| (i, j))).collect()
    } else {
        (0..plan.samples).map(|i| (2 * i, 2 * i + 1)).collect()
    };
    let (edges, unlabeled) = pairs
        .par_iter()
        .fold(
            || (EdgeCounts::new(), 0u64),
            |(mut edges, mut unlabeled), &(i, j)| {
                let (a, la) = &labeled[i];
                let (q, lq) = &labeled[j];
                match strata.label(&op.mul(a, q)) {
                    Some(l) => *edges.entry((la.clone(), lq.clone(), l.to_string())).or_default() += 1,
                    None => unlabeled += 1,
                }
                (edges, unlabeled)
            },
        )
        .reduce(|| (EdgeCounts::new(), 0), merge);
    Ok(TransitionGraph {
        nodes: labels.iter().map(|l| l.to_string()).collect(),
        edges,
        pairs: pairs.len() as u64,
        unlabeled,
        exhaustive,
    })
}

impl TransitionGraph {
    /// Edges `(i, j, i)` or `(i, j, j)` with `i ≠ j`: cross products that
    /// stay in an operand stratum.
    pub fn returning_edges(&self) -> Vec<(&(String, String, String), u64)> {
        self.edges
            .iter()
            .filter(|((f, v, t), _)| f != v && (t == f || t == v))
            .map(|(k, &c)| (k, c))
            .collect()
    }

    pub fn cross_pairs(&self) -> u64 {
        self.edges.iter().filter(|((f, v, _), _)| f != v).map(|(_, c)| c).sum()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph transitions {\n");
        for n in &self.nodes {
            out.push_str(&format!("  \"{n}\";\n"));
        }
        for ((f, v, t), c) in &self.edges {
            out.push_str(&format!("  \"{f}\" -> \"{t}\" [label=\"{v}\", weight={c}];\n"));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> Value {
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|((f, v, t), c)| json!({"from": f, "via": v, "to": t, "count": c}))
            .collect();
        json!({
            "nodes": self.nodes,
            "edges": edges,
            "pairs": self.pairs,
            "unlabeled": self.unlabeled,
            "exhaustive": self.exhaustive,
        })
    }
}

/// `(nodes, edges)` declared in DOT text written by
/// [`TransitionGraph::to_dot`].
pub fn dot_counts(dot: &str) -> (usize, usize) {
    let lines = dot.lines().map(str::trim);
    let (mut nodes, mut edges) = (0, 0);
    for l in lines {
        if l.contains("->") {
            edges += 1;
        } else if l.starts_with('"') && l.ends_with(';') {
            nodes += 1;
        }
    }
    (nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::models::{builtin_model, Builtin, ModelSpec, ParamSet};
    use crate::field::FieldSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn nonlinear(p: u64) -> (ModelSpec, Strata) {
        let f = FieldSpec::prime(p).unwrap();
        let m = builtin_model(Builtin::Nonlinear3, Some(&ParamSet::generic(f, 7)), f).unwrap();
        let s = Strata::for_model(&m, false).unwrap();
        (m, s)
    }

    fn v(f: FieldSpec, x: &[i64]) -> Vector {
        Vector::from_i64s(f, x)
    }

    #[test]
    fn costratal_orbit_stays_put() {
        let f = FieldSpec::prime(7).unwrap();
        let m = builtin_model(Builtin::Basic3, None, f).unwrap();
        let s = Strata::for_model(&m, false).unwrap();
        let t = orbit(&m.operation, &v(f, &[1, 2, 1]), &v(f, &[3, 2, 1]), 500, &s).unwrap();
        let labels = t.labels();
        assert!(labels.iter().all(|l| *l == labels[0]) || t.truncated_at_zero);
        let c = t.cycle.expect("finite orbit cycles");
        assert!(c.period <= 42);
        let t0 = orbit(&m.operation, &v(f, &[1, 2, 1]), &v(f, &[3, 2, 1]), 0, &s).unwrap();
        assert_eq!(t0.steps.len(), 1);
    }

    #[test]
    fn cross_orbit_leaves_both_strata() {
        let (m, s) = nonlinear(19);
        let f = m.field;
        let (a, q) = (v(f, &[1, 2, 1]), v(f, &[0, 0, 1]));
        let t = orbit(&m.operation, &a, &q, 10, &s).unwrap();
        let first = t.steps[1].label.clone();
        assert!(first.is_some());
        assert_ne!(first, t.steps[0].label);
        assert_ne!(first, s.label(&q).map(|l| l.to_string()));
        assert!(orbit(&m.operation, &a, &Vector::zero(f, 3), 3, &s).is_err());
        let qm = builtin_model(Builtin::Basic3, None, FieldSpec::Rationals).unwrap();
        let qs = Strata::for_model(&qm, false).unwrap();
        let one = v(FieldSpec::Rationals, &[1, 0, 0]);
        assert_eq!(orbit(&qm.operation, &one, &one, 3, &qs), Err(Error::RequiresPrimeField));
    }

    #[test]
    fn chain_paths() {
        let (m, s) = nonlinear(19);
        let f = m.field;
        let start = v(f, &[1, 2, 1]);
        assert_eq!(chain_path(&m.operation, &start, &[], &s).unwrap().steps.len(), 1);
        let q1 = v(f, &[2, 1, 0]);
        assert_eq!(chain_path(&m.operation, &start, &[q1.clone()], &s).unwrap().steps.len(), 2);
        let q2 = v(f, &[5, 3, 0]);
        let x = chain_path(&m.operation, &start, &[q1.clone(), q2.clone()], &s).unwrap();
        let y = chain_path(&m.operation, &start, &[q2, q1], &s).unwrap();
        assert_eq!(x.last_value(), y.last_value());
        assert_eq!(x, chain_path(&m.operation, &start, &x.multipliers, &s).unwrap());
    }

    #[test]
    fn permutation_invariance_k4_and_k2() {
        let (m, s) = nonlinear(19);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let ls = s.sample_distinct_labels(&mut rng, 2).unwrap();
            let start = s.sample_member(&ls[0], &mut rng).unwrap();
            let qs: Vec<Vector> = (0..4).map(|_| s.sample_member(&ls[1], &mut rng).unwrap()).collect();
            let r = permutation_invariance(&m.operation, &start, &qs, &s).unwrap();
            assert!(r.invariant && r.orderings == 24);
            let r2 = permutation_invariance(&m.operation, &start, &qs[..2], &s).unwrap();
            assert_eq!(r2.invariant, m.operation.lps(&start, &qs[0], &qs[1]).unwrap().is_zero());
        }
        let f = m.field;
        let mixed = [v(f, &[0, 1, 0]), v(f, &[0, 0, 1])];
        assert!(permutation_invariance(&m.operation, &v(f, &[1, 1, 1]), &mixed, &s).is_err());
    }

    #[test]
    fn transition_graph_small_field() {
        let f = FieldSpec::prime(5).unwrap();
        let m = builtin_model(Builtin::Basic3, None, f).unwrap();
        let s = Strata::for_model(&m, false).unwrap();
        let g = transition_graph(&m.operation, &s, &SamplingPlan::default()).unwrap();
        assert!(g.exhaustive);
        assert_eq!(g.pairs, 124 * 124);
        for l in &g.nodes {
            assert!(g.edges.contains_key(&(l.clone(), l.clone(), l.clone())), "self loop at {l}");
        }
        let (nodes, edges) = dot_counts(&g.to_dot());
        assert_eq!((nodes, edges), (g.nodes.len(), g.edges.len()));
        assert_eq!(g.to_json()["edges"].as_array().unwrap().len(), g.edges.len());
        assert_eq!(s.labels().unwrap().len(), 6);
    }
}
