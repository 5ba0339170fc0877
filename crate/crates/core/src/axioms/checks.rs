use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{AxiomResult, ClauseStat, SamplingMode, SamplingPlan, Verdict};
use crate::algebra::models::ModelSpec;
use crate::algebra::operation::{AffineOperation, BracketTree};
use crate::algebra::symbolic::{symbolic_components, Expression, SymbolicOperation};
use crate::algebra::vector::Vector;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::poly::{symbol_vector, Polynomial};
use crate::strata::{ratio_partition, space_size, verify_closure, Chart, StrataRule, Strata, StratumLabel};
use crate::witness::Witness;

const MAX_WITNESSES: usize = 3;
/// Degree guard for symbolic checks after chart substitution.
pub(crate) const SYMBOLIC_DEGREE_BOUND: u32 = 24;
/// Largest `p^n` for which SA1 enumerates every stratum.
const EXHAUSTIVE_SPACE: u64 = 1 << 18;
const CONSISTENCY_SAMPLES: usize = 100;
const CHAIN_TRIALS: usize = 20;

/// Seeded source of stratum members.
pub(crate) struct Sampler<'a> {
    strata: &'a Strata,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    pub(crate) fn new(strata: &'a Strata, seed: u64) -> Self {
        Sampler { strata, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub(crate) fn labels(&mut self, k: usize) -> Result<Vec<StratumLabel>> {
        self.strata.sample_distinct_labels(&mut self.rng, k)
    }

    pub(crate) fn label(&mut self) -> StratumLabel {
        self.strata.sample_label(&mut self.rng)
    }

    pub(crate) fn members(&mut self, label: &StratumLabel, k: usize) -> Result<Vec<Vector>> {
        (0..k).map(|_| self.strata.sample_member(label, &mut self.rng)).collect()
    }
}

pub(crate) fn require_two_strata(strata: &Strata) -> Result<()> {
    match strata.count() {
        Some(c) if c < 2 => Err(Error::Precondition(format!("need at least 2 strata, found {c}"))),
        _ => Ok(()),
    }
}

/// Whether `p` is the zero polynomial over `field`; `None` when a
/// coefficient has a denominator divisible by the characteristic.
pub(crate) fn vanishes_over(p: &Polynomial, field: FieldSpec) -> Option<bool> {
    if p.is_zero() {
        return Some(true);
    }
    if field.modulus().is_none() {
        return Some(false);
    }
    for (_, c) in p.terms() {
        match field.from_rational(c) {
            Ok(x) if x.is_zero() => {}
            Ok(_) => return Some(false),
            Err(_) => return None,
        }
    }
    Some(true)
}

/// Generic member of `chart` in coordinates `prefix0..`.
pub(crate) fn chart_vector(chart: &Chart, prefix: &str, n: usize) -> Vec<Polynomial> {
    let b = chart.bindings(prefix);
    symbol_vector(prefix, n).iter().map(|p| p.substitute(&b)).collect()
}

/// Counts of nonvanishing polynomials; `None` if any test is inconclusive.
fn count_nonvanishing(polys: &[Polynomial], field: FieldSpec) -> Option<usize> {
    let mut bad = 0;
    for p in polys {
        if !vanishes_over(p, field)? {
            bad += 1;
        }
    }
    Some(bad)
}

pub(crate) fn symbolic_model(model: &ModelSpec) -> SymbolicOperation {
    model.symbolic(false).with_degree_bound(SYMBOLIC_DEGREE_BOUND)
}

/// True when the model is associative on all of `K^n`.
pub(crate) fn globally_associative(model: &ModelSpec) -> Result<bool> {
    if model.operation.is_bilinear() {
        return Ok(model.operation.associativity_mismatches()?.is_empty());
    }
    let assoc = symbolic_components(&symbolic_model(model), Expression::Associator)?;
    Ok(assoc.iter().all(|p| vanishes_over(p, model.field).unwrap_or(false)))
}

fn push_capped(list: &mut Vec<Witness>, count: &mut usize, w: impl FnOnce() -> Witness) {
    if *count < MAX_WITNESSES {
        *count += 1;
        list.push(w());
    }
}

// ---------------------------------------------------------------- SA1

pub fn check_sa1(model: &ModelSpec, strata: &Strata, plan: &SamplingPlan) -> Result<AxiomResult> {
    let mut notes = Vec::new();
    match plan.mode {
        SamplingMode::Symbolic => match strata.rule() {
            Some(rule) => match sa1_symbolic(model, rule)? {
                Some(r) => return Ok(with_consistency_gate(r, sa1_sampled(model, strata, plan, CONSISTENCY_SAMPLES)?)),
                None => notes.push("symbolic test inconclusive over this field; sampled instead".to_string()),
            },
            None => notes.push("discovered strata have no symbolic charts; sampled instead".to_string()),
        },
        SamplingMode::Exhaustive => match sa1_exhaustive(model, strata, plan)? {
            Some(r) => return Ok(r),
            None => notes.push("space too large or infinite to enumerate; sampled instead".to_string()),
        },
        SamplingMode::Randomized => {}
    }
    let mut r = sa1_sampled(model, strata, plan, plan.samples)?;
    r.notes.extend(notes);
    Ok(r)
}

/// A symbolic "holds" must be confirmed by fresh samples.
fn with_consistency_gate(mut symbolic: AxiomResult, sampled: AxiomResult) -> AxiomResult {
    if symbolic.verdict == Verdict::Holds && sampled.verdict == Verdict::Fails {
        symbolic.verdict = Verdict::Fails;
        symbolic.notes.push("symbolic proof contradicted by sampled check".into());
    } else if symbolic.verdict == Verdict::Fails && sampled.verdict != Verdict::Fails {
        symbolic.notes.push("no concrete witness found among samples".into());
    }
    symbolic.witnesses.extend(sampled.witnesses);
    symbolic
}

fn sa1_symbolic(model: &ModelSpec, rule: &StrataRule) -> Result<Option<AxiomResult>> {
    let sym = symbolic_model(model);
    let n = model.dimension;
    let (mut comm, mut assoc, mut close) = ((0, 0), (0, 0), (0, 0));
    for chart in rule.charts() {
        let (a, b, c) = (chart_vector(&chart, "a", n), chart_vector(&chart, "b", n), chart_vector(&chart, "c", n));
        let polys = [
            sym.commutator(&a, &b)?,
            sym.associator(&a, &b, &c)?,
            chart.residuals(&sym.apply(&a, &b)?),
        ];
        for (stat, ps) in [&mut comm, &mut assoc, &mut close].into_iter().zip(&polys) {
            let Some(bad) = count_nonvanishing(ps, model.field) else { return Ok(None) };
            stat.0 += ps.len();
            stat.1 += bad;
        }
    }
    let clauses = vec![
        ClauseStat::exact("commutative within each stratum", comm.0, comm.1, true),
        ClauseStat::exact("associative within each stratum", assoc.0, assoc.1, true),
        ClauseStat::exact("closed under the product", close.0, close.1, true),
    ];
    let mut r = AxiomResult::from_clauses(SamplingMode::Symbolic, clauses, Vec::new());
    r.notes.push("chart substitution into commutator, associator and product".into());
    Ok(Some(r))
}

fn sa1_exhaustive(model: &ModelSpec, strata: &Strata, plan: &SamplingPlan) -> Result<Option<AxiomResult>> {
    let Some(p) = model.field.modulus() else { return Ok(None) };
    if space_size(p, model.dimension).map_or(true, |s| s > EXHAUSTIVE_SPACE) {
        return Ok(None);
    }
    let partition = match strata {
        Strata::Declared { rule, n, .. } => ratio_partition(rule, p, *n)?,
        Strata::Partition(part) => part.clone(),
    };
    let reports = (0..partition.len())
        .into_par_iter()
        .map(|s| verify_closure(&model.operation, &partition.members(s), plan.stream(s as u64), plan.samples))
        .collect::<Result<Vec<_>>>()?;
    let exhaustive = reports.iter().all(|r| r.exhaustive);
    let count = |f: fn(&crate::strata::ClosureReport) -> bool| reports.iter().filter(|r| !f(r)).count();
    let s = reports.len();
    let clauses = vec![
        ClauseStat::exact("commutative within each stratum", s, count(|r| r.commutative), exhaustive),
        ClauseStat::exact("associative within each stratum", s, count(|r| r.associative), exhaustive),
        ClauseStat::exact("closed up to zero or central products", s, count(|r| r.closed_modulo_central), exhaustive),
    ];
    let mut witnesses = Vec::new();
    for r in &reports {
        for w in &r.witnesses {
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(w.clone());
            }
        }
    }
    let mode = if exhaustive { SamplingMode::Exhaustive } else { SamplingMode::Randomized };
    let mut r = AxiomResult::from_clauses(mode, clauses, witnesses);
    let degenerate: usize = reports.iter().map(|r| r.degenerate_products).sum();
    if degenerate > 0 {
        r.notes.push(format!("{degenerate} in-stratum products were zero or central"));
    }
    Ok(Some(r))
}

fn sa1_sampled(model: &ModelSpec, strata: &Strata, plan: &SamplingPlan, samples: usize) -> Result<AxiomResult> {
    let op = &model.operation;
    let mut sampler = Sampler::new(strata, plan.stream(1));
    let triples = (0..samples)
        .map(|_| {
            let l = sampler.label();
            sampler.members(&l, 3).map(|m| (l, m))
        })
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<(bool, bool, bool)> = triples
        .par_iter()
        .map(|(l, m)| {
            let (a, b, c) = (&m[0], &m[1], &m[2]);
            let ab = op.mul(a, b);
            let commutes = ab == op.mul(b, a);
            let associates = op.mul(&ab, c) == op.mul(a, &op.mul(b, c));
            let closed = strata.label(&ab).as_ref() == Some(l) || ab.is_zero() || op.is_central(&ab);
            (commutes, associates, closed)
        })
        .collect();
    let mut witnesses = Vec::new();
    let (mut wc, mut wa, mut wl) = (0, 0, 0);
    for ((_, m), &(commutes, associates, closed)) in triples.iter().zip(&results) {
        let (a, b, c) = (&m[0], &m[1], &m[2]);
        if !commutes {
            push_capped(&mut witnesses, &mut wc, || Witness::NonCommuting { a: a.clone(), b: b.clone() });
        }
        if !associates {
            push_capped(&mut witnesses, &mut wa, || Witness::NonAssociative { a: a.clone(), b: b.clone(), c: c.clone() });
        }
        if !closed {
            let label = strata.label(&op.mul(a, b)).map(|l| l.to_string());
            push_capped(&mut witnesses, &mut wl, || Witness::ProductLabel { a: a.clone(), b: b.clone(), label });
        }
    }
    let n = results.len();
    let fails = |f: fn(&(bool, bool, bool)) -> bool| results.iter().filter(|r| !f(r)).count();
    let clauses = vec![
        ClauseStat::exact("commutative within each stratum", n, fails(|r| r.0), false),
        ClauseStat::exact("associative within each stratum", n, fails(|r| r.1), false),
        ClauseStat::exact("closed up to zero or central products", n, fails(|r| r.2), false),
    ];
    Ok(AxiomResult::from_clauses(SamplingMode::Randomized, clauses, witnesses))
}

// ---------------------------------------------------------------- SA2

pub fn check_sa2(model: &ModelSpec, strata: &Strata, plan: &SamplingPlan) -> Result<AxiomResult> {
    require_two_strata(strata)?;
    let op = &model.operation;
    let comm = symbolic_components(&symbolic_model(model), Expression::Commutator)?;
    if comm.iter().all(|p| vanishes_over(p, model.field).unwrap_or(false)) {
        return Ok(AxiomResult::degenerate(
            SamplingMode::Symbolic,
            "commutator vanishes identically; cross-stratum asymmetry cannot occur",
        ));
    }
    let mut sampler = Sampler::new(strata, plan.stream(2));
    let pairs = (0..plan.samples)
        .map(|_| {
            let ls = sampler.labels(2)?;
            let a = sampler.members(&ls[0], 1)?.remove(0);
            let b = sampler.members(&ls[1], 1)?.remove(0);
            Ok((ls, a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<(bool, Option<StratumLabel>)> = pairs
        .par_iter()
        .map(|(_, a, b)| {
            let ab = op.mul(a, b);
            (ab != op.mul(b, a), strata.label(&ab))
        })
        .collect();
    let (mut commuting, mut stays, mut unlabeled) = (0, 0, 0);
    let mut witnesses = Vec::new();
    let (mut wc, mut wl, mut wx) = (0, 0, 0);
    for ((ls, a, b), (noncomm, label)) in pairs.iter().zip(&results) {
        if !noncomm {
            commuting += 1;
            push_capped(&mut witnesses, &mut wc, || Witness::Commuting { a: a.clone(), b: b.clone() });
        }
        let text = label.as_ref().map(|l| l.to_string());
        match label {
            Some(l) if ls.contains(l) => {
                stays += 1;
                push_capped(&mut witnesses, &mut wl, || Witness::ProductLabel { a: a.clone(), b: b.clone(), label: text });
            }
            None => {
                unlabeled += 1;
                push_capped(&mut witnesses, &mut wl, || Witness::ProductLabel { a: a.clone(), b: b.clone(), label: None });
            }
            Some(_) if *noncomm => {
                push_capped(&mut witnesses, &mut wx, || Witness::ProductLabel { a: a.clone(), b: b.clone(), label: text });
            }
            Some(_) => {}
        }
    }
    let n = pairs.len();
    let f = model.field;
    let clauses = vec![
        ClauseStat::generic("non-commutative across strata", n, commuting, f, 2, false),
        ClauseStat::generic("product leaves both operand strata", n, stays, f, 3, false),
        ClauseStat::generic("product lands in a stratum", n, unlabeled, f, 3, false),
    ];
    let mut r = AxiomResult::from_clauses(SamplingMode::Randomized, clauses, witnesses);
    let (stat, w) = nonassociative_triple(model, strata, plan)?;
    r.informational.push(stat);
    r.witnesses.extend(w);
    Ok(r)
}

/// The existential clause: some triple with `(a*b)*c ≠ a*(b*c)`.
fn nonassociative_triple(model: &ModelSpec, strata: &Strata, plan: &SamplingPlan) -> Result<(ClauseStat, Option<Witness>)> {
    let name = "non-associative triple exists";
    if globally_associative(model)? {
        return Ok((ClauseStat::with_verdict(name, Verdict::Degenerate), None));
    }
    let op = &model.operation;
    let f = model.field;
    if op.is_bilinear() {
        let m = &op.associativity_mismatches()?[0];
        let e = |i: usize| {
            let mut v = vec![0; model.dimension];
            v[i] = 1;
            Vector::from_i64s(f, &v)
        };
        let (i, j, k, _) = m.index;
        let w = Witness::NonAssociative { a: e(i), b: e(j), c: e(k) };
        return Ok((ClauseStat::exact(name, 1, 0, true), Some(w)));
    }
    let mut sampler = Sampler::new(strata, plan.stream(3));
    for t in 0..plan.samples {
        let l = sampler.label();
        let m = sampler.members(&l, 1)?;
        let others = sampler.labels(2)?;
        let b = sampler.members(&others[0], 1)?.remove(0);
        let c = sampler.members(&others[1], 1)?.remove(0);
        let a = &m[0];
        if op.mul(&op.mul(a, &b), &c) != op.mul(a, &op.mul(&b, &c)) {
            let w = Witness::NonAssociative { a: a.clone(), b, c };
            return Ok((ClauseStat::exact(name, t + 1, 0, true), Some(w)));
        }
    }
    Ok((ClauseStat::with_verdict(name, Verdict::Fails), None))
}

// ---------------------------------------------------------------- SA3

pub fn check_sa3(model: &ModelSpec, strata: &Strata, plan: &SamplingPlan) -> Result<AxiomResult> {
    require_two_strata(strata)?;
    let op = &model.operation;
    let mut notes = Vec::new();
    let mut symbolic_clause = None;
    if plan.mode == SamplingMode::Symbolic {
        match strata.rule() {
            Some(rule) => match lps_symbolic(model, rule)? {
                Some(c) => symbolic_clause = Some(c),
                None => notes.push("symbolic test inconclusive over this field; sampled instead".to_string()),
            },
            None => notes.push("discovered strata have no symbolic charts; sampled instead".to_string()),
        }
    }

    let samples = if symbolic_clause.is_some() { CONSISTENCY_SAMPLES } else { plan.samples };
    let mut sampler = Sampler::new(strata, plan.stream(4));
    let triples = (0..samples)
        .map(|_| {
            let ls = sampler.labels(2)?;
            let a = sampler.members(&ls[0], 1)?.remove(0);
            let bc = sampler.members(&ls[1], 2)?;
            Ok((a, bc))
        })
        .collect::<Result<Vec<_>>>()?;
    let lps_zero: Vec<bool> = triples
        .par_iter()
        .map(|(a, bc)| op.mul(&op.mul(a, &bc[0]), &bc[1]) == op.mul(&op.mul(a, &bc[1]), &bc[0]))
        .collect();
    let chain2: Vec<bool> = triples.par_iter().map(|(a, bc)| chain_orders_agree(op, a, bc).is_none()).collect();

    let mut witnesses = Vec::new();
    let mut wl = 0;
    for ((a, bc), ok) in triples.iter().zip(&lps_zero) {
        if !ok {
            push_capped(&mut witnesses, &mut wl, || Witness::NonzeroLps { a: a.clone(), b: bc[0].clone(), c: bc[1].clone() });
        }
    }
    let lps_bad = lps_zero.iter().filter(|ok| !**ok).count();
    let chain2_bad = chain2.iter().filter(|ok| !**ok).count();
    let mut clauses = Vec::new();
    let sampled_lps = ClauseStat::exact("LPS vanishes on co-stratal pairs", triples.len(), lps_bad, false);
    match symbolic_clause {
        Some(c) => {
            if c.verdict == Verdict::Holds && sampled_lps.verdict == Verdict::Fails {
                notes.push("symbolic LPS proof contradicted by sampled check".into());
                clauses.push(sampled_lps);
            } else {
                clauses.push(c);
            }
        }
        None => clauses.push(sampled_lps),
    }
    clauses.push(ClauseStat::exact("chain order invariance, m=2", triples.len(), chain2_bad, false));

    let trials = CHAIN_TRIALS.min(plan.samples);
    let mut wo = 0;
    for m in 3..=plan.chain_length_max {
        let mut sampler = Sampler::new(strata, plan.stream(100 + m as u64));
        let chains = (0..trials)
            .map(|_| {
                let ls = sampler.labels(2)?;
                let b = sampler.members(&ls[0], 1)?.remove(0);
                Ok((b, sampler.members(&ls[1], m)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let results: Vec<Option<Vec<usize>>> =
            chains.par_iter().map(|(b, ms)| chain_orders_agree(op, b, ms)).collect();
        let bad = results.iter().filter(|r| r.is_some()).count();
        for ((b, ms), order) in chains.iter().zip(results) {
            if let Some(order) = order {
                push_capped(&mut witnesses, &mut wo, || Witness::ChainOrder {
                    start: b.clone(),
                    multipliers: ms.clone(),
                    order,
                });
            }
        }
        clauses.push(ClauseStat::exact(&format!("chain order invariance, m={m}"), chains.len(), bad, false));
    }
    let mode = if clauses[0].verdict == Verdict::Holds { SamplingMode::Symbolic } else { SamplingMode::Randomized };
    let mut r = AxiomResult::from_clauses(mode, clauses, witnesses);
    r.notes = notes;
    Ok(r)
}

/// First ordering of `multipliers` whose left chain from `start` differs
/// from the identity ordering.
pub(crate) fn chain_orders_agree(op: &AffineOperation, start: &Vector, multipliers: &[Vector]) -> Option<Vec<usize>> {
    let chain = |order: &[usize]| order.iter().fold(start.clone(), |acc, &i| op.mul(&acc, &multipliers[i]));
    let base: Vec<usize> = (0..multipliers.len()).collect();
    let reference = chain(&base);
    base.iter().copied().permutations(multipliers.len()).skip(1).find(|order| chain(order) != reference)
}

fn lps_symbolic(model: &ModelSpec, rule: &StrataRule) -> Result<Option<ClauseStat>> {
    let sym = symbolic_model(model);
    let n = model.dimension;
    let a = symbol_vector("a", n);
    let (mut checked, mut bad) = (0, 0);
    for chart in rule.charts() {
        let lps = sym.lps(&a, &chart_vector(&chart, "b", n), &chart_vector(&chart, "c", n))?;
        let Some(k) = count_nonvanishing(&lps, model.field) else { return Ok(None) };
        checked += lps.len();
        bad += k;
    }
    Ok(Some(ClauseStat::exact("LPS vanishes on co-stratal pairs", checked, bad, true)))
}

// ---------------------------------------------------------------- SA4

/// Outcome of comparing one bracketing with the left chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BracketStats {
    pub chain_length: usize,
    pub split: usize,
    pub checked: usize,
    /// Bracketed value differs from the left chain.
    pub differs: usize,
    /// Bracketed value has a stratum other than the operands'.
    pub lands_outside: usize,
    /// Both of the above.
    pub satisfied: usize,
    /// Configurations failing either condition.
    pub exceptions: Vec<Witness>,
    /// One configuration satisfying both, when any does.
    pub example: Option<Witness>,
}

impl BracketStats {
    pub fn satisfied_fraction(&self) -> f64 {
        self.satisfied as f64 / self.checked.max(1) as f64
    }
}

/// Samples `b ∈ V_β`, `a₁..a_m ∈ V_α` (`α ≠ β`) and compares
/// `(b*a₁…a_l)*(a_{l+1}…a_m)` with the left chain.
pub fn bracket_sensitivity(
    model: &ModelSpec,
    strata: &Strata,
    m: usize,
    split: usize,
    samples: usize,
    seed: u64,
) -> Result<BracketStats> {
    require_two_strata(strata)?;
    if m < 2 || split == 0 || split >= m {
        return Err(Error::Precondition(format!("split {split} invalid for chain length {m}")));
    }
    let op = &model.operation;
    let tree = BracketTree::split(m, split);
    let mut sampler = Sampler::new(strata, seed);
    let configs = (0..samples)
        .map(|_| {
            let ls = sampler.labels(2)?;
            let b = sampler.members(&ls[0], 1)?.remove(0);
            let ms = sampler.members(&ls[1], m)?;
            Ok((ls, b, ms))
        })
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<(bool, Option<StratumLabel>)> = configs
        .par_iter()
        .map(|(_, b, ms)| {
            let mut leaves = vec![b.clone()];
            leaves.extend(ms.iter().cloned());
            let v = op.evaluate_bracketing_unchecked(&tree, &leaves);
            let chain = ms.iter().fold(b.clone(), |acc, a| op.mul(&acc, a));
            (v != chain, strata.label(&v))
        })
        .collect();
    let mut stats = BracketStats {
        chain_length: m,
        split,
        checked: configs.len(),
        differs: 0,
        lands_outside: 0,
        satisfied: 0,
        exceptions: Vec::new(),
        example: None,
    };
    for ((ls, b, ms), (differs, label)) in configs.iter().zip(results) {
        let outside = label.as_ref().is_some_and(|l| !ls.contains(l));
        stats.differs += differs as usize;
        stats.lands_outside += outside as usize;
        let w = || Witness::Bracketing {
            b: b.clone(),
            multipliers: ms.clone(),
            split,
            equal: !differs,
            label: label.as_ref().map(|l| l.to_string()),
        };
        if differs && outside {
            stats.satisfied += 1;
            if stats.example.is_none() {
                stats.example = Some(w());
            }
        } else {
            stats.exceptions.push(w());
        }
    }
    Ok(stats)
}

pub fn check_sa4(model: &ModelSpec, strata: &Strata, plan: &SamplingPlan) -> Result<AxiomResult> {
    require_two_strata(strata)?;
    if globally_associative(model)? {
        return Ok(AxiomResult::degenerate(
            SamplingMode::Symbolic,
            "operation is globally associative, so every bracketing agrees",
        ));
    }
    let f = model.field;
    let mut clauses = Vec::new();
    let mut witnesses = Vec::new();
    let mut example = None;
    let mut count = 0;
    for m in 3..=plan.chain_length_max.max(3) {
        for l in 1..m - 1 {
            let s = bracket_sensitivity(model, strata, m, l, plan.samples, plan.stream(1000 + 10 * m as u64 + l as u64))?;
            let name = |what: &str| format!("m={m} split {l}: {what}");
            clauses.push(ClauseStat::generic(&name("bracketing changes value"), s.checked, s.checked - s.differs, f, m as u32 + 1, false));
            clauses.push(ClauseStat::generic(
                &name("bracketed value leaves operand strata"),
                s.checked,
                s.checked - s.lands_outside,
                f,
                m as u32 + 2,
                false,
            ));
            for w in s.exceptions {
                push_capped(&mut witnesses, &mut count, || w);
            }
            if example.is_none() {
                example = s.example;
            }
        }
    }
    let mut r = AxiomResult::from_clauses(SamplingMode::Randomized, clauses, witnesses);
    r.witnesses.extend(example);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::models::{builtin_model, Builtin, ParamSet};
    use crate::algebra::tensor::StructureTensor;

    fn appendix_b(field: FieldSpec) -> ModelSpec {
        builtin_model(Builtin::Parametric3, Some(&ParamSet::from_i64s(field, [16, 8, 5, 3, 7, 11])), field).unwrap()
    }

    fn strata(m: &ModelSpec) -> Strata {
        Strata::for_model(m, false).unwrap()
    }

    #[test]
    fn basic3_sa1_symbolic_holds() {
        let m = builtin_model(Builtin::Basic3, None, FieldSpec::Rationals).unwrap();
        let plan = SamplingPlan::randomized(50, 3).with_mode(SamplingMode::Symbolic);
        let r = check_sa1(&m, &strata(&m), &plan).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
    }

    #[test]
    fn parametric4_sa1_symbolic_holds() {
        let q = FieldSpec::Rationals;
        let m = builtin_model(Builtin::Parametric4, Some(&ParamSet::generic(q, 4)), q).unwrap();
        let plan = SamplingPlan::randomized(50, 3).with_mode(SamplingMode::Symbolic);
        assert_eq!(check_sa1(&m, &strata(&m), &plan).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn sa1_exhaustive_over_small_field() {
        let f7 = FieldSpec::prime(7).unwrap();
        let m = builtin_model(Builtin::Basic3, None, f7).unwrap();
        let plan = SamplingPlan::randomized(50, 3).with_mode(SamplingMode::Exhaustive);
        let r = check_sa1(&m, &strata(&m), &plan).unwrap();
        assert_eq!((r.verdict, r.mode), (Verdict::Holds, SamplingMode::Exhaustive));
    }

    #[test]
    fn broken_tensor_fails_sa1_with_witness() {
        let q = FieldSpec::Rationals;
        let base = builtin_model(Builtin::Basic3, None, q).unwrap();
        let mut t: StructureTensor = base.operation.bilinear.clone();
        t.add((1, 1, 1), &q.one()).unwrap();
        let op = AffineOperation::bilinear(t);
        let m = ModelSpec::from_operation("broken", op, base.strata_rule.clone()).unwrap();
        let s = strata(&m);
        for mode in [SamplingMode::Randomized, SamplingMode::Symbolic] {
            let r = check_sa1(&m, &s, &SamplingPlan::randomized(100, 5).with_mode(mode)).unwrap();
            assert_eq!(r.verdict, Verdict::Fails);
            assert!(!r.witnesses.is_empty());
            assert!(r.witnesses.iter().all(|w| w.replay(&m.operation, &s)));
        }
    }

    #[test]
    fn basic3_sa2_holds_with_associative_triple_degenerate() {
        let q = FieldSpec::Rationals;
        let m = builtin_model(Builtin::Basic3, None, q).unwrap();
        let r = check_sa2(&m, &strata(&m), &SamplingPlan::randomized(200, 1)).unwrap();
        assert!(r.verdict.is_pass(), "{r:?}");
        assert_eq!(r.informational[0].verdict, Verdict::Degenerate);
    }

    #[test]
    fn appendix_b_triple_witnesses_sa2() {
        let q = FieldSpec::Rationals;
        let m = appendix_b(q);
        let s = strata(&m);
        let r = check_sa2(&m, &s, &SamplingPlan::randomized(200, 1)).unwrap();
        assert!(r.verdict.is_pass());
        let triple = r.witnesses.iter().find(|w| matches!(w, Witness::NonAssociative { .. })).unwrap();
        let e = |i: usize| Vector::from_i64s(q, &[(i == 0) as i64, (i == 1) as i64, (i == 2) as i64]);
        assert_eq!(*triple, Witness::NonAssociative { a: e(1), b: e(1), c: e(2) });
        assert!(triple.replay(&m.operation, &s));
    }

    #[test]
    fn degenerate_parameters_make_sa2_degenerate() {
        let q = FieldSpec::Rationals;
        let m = builtin_model(Builtin::Parametric3, Some(&ParamSet::from_i64s(q, [1, 2, 3, 3, 0, 0])), q).unwrap();
        assert_eq!(check_sa2(&m, &strata(&m), &SamplingPlan::default()).unwrap().verdict, Verdict::Degenerate);
    }

    #[test]
    fn sa3_lps_and_chain_agree() {
        let f19 = FieldSpec::prime(19).unwrap();
        let m = builtin_model(Builtin::Nonlinear3, Some(&ParamSet::generic(f19, 2)), f19).unwrap();
        let r = check_sa3(&m, &strata(&m), &SamplingPlan::randomized(100, 9)).unwrap();
        assert_eq!(r.verdict, Verdict::HoldsOnSamples, "{r:?}");
        assert_eq!(r.clauses[0].exceptions, r.clauses[1].exceptions);
    }

    #[test]
    fn sa3_symbolic_for_parametric3() {
        let q = FieldSpec::Rationals;
        let m = appendix_b(q);
        let plan = SamplingPlan::randomized(50, 9).with_mode(SamplingMode::Symbolic);
        let r = check_sa3(&m, &strata(&m), &plan).unwrap();
        assert_eq!(r.clauses[0].verdict, Verdict::Holds);
        assert!(r.verdict.is_pass());
    }

    #[test]
    fn sa4_degenerate_for_basic3_and_holds_for_parametric3() {
        let q = FieldSpec::Rationals;
        let b = builtin_model(Builtin::Basic3, None, q).unwrap();
        assert_eq!(check_sa4(&b, &strata(&b), &SamplingPlan::default()).unwrap().verdict, Verdict::Degenerate);
        let m = appendix_b(q);
        let plan = SamplingPlan { chain_length_max: 4, ..SamplingPlan::randomized(100, 2) };
        let r = check_sa4(&m, &strata(&m), &plan).unwrap();
        assert_eq!(r.verdict, Verdict::HoldsOnSamples, "{r:?}");
        let s = strata(&m);
        assert!(r.witnesses.iter().all(|w| w.replay(&m.operation, &s)));
    }

    #[test]
    fn bracket_stats_are_seeded() {
        let q = FieldSpec::Rationals;
        let m = appendix_b(q);
        let s = strata(&m);
        let x = bracket_sensitivity(&m, &s, 3, 1, 50, 7).unwrap();
        assert_eq!(x, bracket_sensitivity(&m, &s, 3, 1, 50, 7).unwrap());
        assert_eq!(x.satisfied + x.exceptions.len(), 50);
        assert!(bracket_sensitivity(&m, &s, 3, 3, 50, 7).is_err());
    }

    #[test]
    fn vanishing_modulo_p() {
        let p: Polynomial = "19*x - 38*y".parse().unwrap();
        assert_eq!(vanishes_over(&p, FieldSpec::Rationals), Some(false));
        assert_eq!(vanishes_over(&p, FieldSpec::prime(19).unwrap()), Some(true));
        let half = Polynomial::var("x").scale(&num_rational::BigRational::new(1.into(), 2.into()));
        assert_eq!(vanishes_over(&half, FieldSpec::prime(2).unwrap()), None);
    }
}
