use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::checks::{chain_orders_agree, chart_vector, require_two_strata, symbolic_model, vanishes_over, Sampler};
use super::{ClauseStat, SamplingPlan, Verdict};
use crate::algebra::models::ModelSpec;
use crate::algebra::vector::Vector;
use crate::error::{Error, Result};
use crate::strata::{Strata, StratumLabel};
use crate::witness::Witness;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseResult {
    pub case: u8,
    pub setting: String,
    pub claims: Vec<ClauseStat>,
    /// Empirical findings recorded without a pass/fail judgement.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub observations: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
}

impl CaseResult {
    pub fn verdict(&self) -> Verdict {
        self.claims.iter().fold(Verdict::Holds, |acc, c| acc.and(c.verdict))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub model: String,
    pub seed: u64,
    pub cases: Vec<CaseResult>,
}

fn case(case: u8, setting: &str, claims: Vec<ClauseStat>) -> CaseResult {
    CaseResult { case, setting: setting.into(), claims, observations: Vec::new(), witnesses: Vec::new() }
}

fn count<T>(xs: &[T], f: impl Fn(&T) -> bool) -> usize {
    xs.iter().filter(|x| f(x)).count()
}

/// Replays the five configurations of operand strata: all equal, all
/// distinct, `a` apart from co-stratal `b, c`, permutations of three
/// co-stratal multipliers, and the bracketing of a length-four product.
pub fn case_analysis(model: &ModelSpec, strata: &Strata, plan: &SamplingPlan) -> Result<CaseReport> {
    if !(3..=4).contains(&model.dimension) {
        return Err(Error::Precondition("case analysis covers 3- and 4-dimensional models".into()));
    }
    require_two_strata(strata)?;
    if strata.count().is_some_and(|c| c < 3) {
        return Err(Error::Precondition("case analysis needs at least 3 strata".into()));
    }
    let op = &model.operation;
    let f = model.field;
    let samples = plan.samples;
    let mut cases = Vec::new();

    // Case 1: everything in one stratum.
    let symbolic = match strata.rule() {
        Some(rule) => {
            let sym = symbolic_model(model);
            let n = model.dimension;
            let mut tally = Some(((0, 0), (0, 0)));
            for chart in rule.charts() {
                let (a, b, c) = (chart_vector(&chart, "a", n), chart_vector(&chart, "b", n), chart_vector(&chart, "c", n));
                let assoc = sym.associator(&a, &b, &c)?;
                let lps = sym.lps(&a, &b, &c)?;
                let zero = |ps: &[crate::poly::Polynomial]| -> Option<usize> {
                    ps.iter().map(|p| vanishes_over(p, f).map(|z| !z as usize)).sum()
                };
                tally = match (tally, zero(&assoc), zero(&lps)) {
                    (Some(((ca, ea), (cl, el))), Some(x), Some(y)) => {
                        Some(((ca + assoc.len(), ea + x), (cl + lps.len(), el + y)))
                    }
                    _ => None,
                };
            }
            tally
        }
        None => None,
    };
    let case1 = match symbolic {
        Some(((ca, ea), (cl, el))) => case(
            1,
            "a, b, c in one stratum (symbolic)",
            vec![ClauseStat::exact("associator is zero", ca, ea, true), ClauseStat::exact("LPS is zero", cl, el, true)],
        ),
        None => {
            let mut s = Sampler::new(strata, plan.stream(201));
            let triples = (0..samples)
                .map(|_| {
                    let l = s.label();
                    s.members(&l, 3)
                })
                .collect::<Result<Vec<_>>>()?;
            let res: Vec<(bool, bool)> = triples
                .par_iter()
                .map(|m| {
                    let ab = op.mul(&m[0], &m[1]);
                    let u = op.mul(&ab, &m[2]);
                    (u == op.mul(&m[0], &op.mul(&m[1], &m[2])), u == op.mul(&op.mul(&m[0], &m[2]), &m[1]))
                })
                .collect();
            let n = res.len();
            case(
                1,
                "a, b, c in one stratum (sampled)",
                vec![
                    ClauseStat::exact("associator is zero", n, count(&res, |r| !r.0), false),
                    ClauseStat::exact("LPS is zero", n, count(&res, |r| !r.1), false),
                ],
            )
        }
    };
    cases.push(case1);

    // Case 2: three distinct strata.
    let mut s = Sampler::new(strata, plan.stream(202));
    let configs = (0..samples)
        .map(|_| {
            let ls = s.labels(3)?;
            let v: Vec<Vector> = ls.iter().map(|l| s.members(l, 1).map(|mut m| m.remove(0))).collect::<Result<_>>()?;
            Ok((ls, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let res: Vec<[bool; 4]> = configs
        .par_iter()
        .map(|(ls, v)| {
            let (a, b, c) = (&v[0], &v[1], &v[2]);
            let noncomm = op.mul(a, b) != op.mul(b, a) && op.mul(b, c) != op.mul(c, b) && op.mul(a, c) != op.mul(c, a);
            let u = op.mul(&op.mul(a, b), c);
            let vv = op.mul(a, &op.mul(b, c));
            let w = op.mul(&op.mul(a, c), b);
            let outside = [&u, &vv, &w].iter().all(|x| strata.label(x).is_some_and(|l| !ls.contains(&l)));
            [noncomm, u != vv, u != w, outside]
        })
        .collect();
    let n = res.len();
    cases.push(case(
        2,
        "a, b, c in three distinct strata",
        vec![
            ClauseStat::generic("all pairs non-commutative", n, count(&res, |r| !r[0]), f, 2, false),
            ClauseStat::generic("associator nonzero", n, count(&res, |r| !r[1]), f, 3, false),
            ClauseStat::generic("LPS nonzero", n, count(&res, |r| !r[2]), f, 3, false),
            ClauseStat::generic("u, v, w outside the operand strata", n, count(&res, |r| !r[3]), f, 4, false),
        ],
    ));

    // Case 3: a apart, b and c co-stratal.
    let mut s = Sampler::new(strata, plan.stream(203));
    let configs = (0..samples)
        .map(|_| {
            let ls = s.labels(2)?;
            let a = s.members(&ls[0], 1)?.remove(0);
            Ok((ls.clone(), a, s.members(&ls[1], 2)?))
        })
        .collect::<Result<Vec<_>>>()?;
    type Case3 = (bool, bool, bool, Option<StratumLabel>, Option<StratumLabel>);
    let res: Vec<Case3> = configs
        .par_iter()
        .map(|(ls, a, bc)| {
            let (b, c) = (&bc[0], &bc[1]);
            let prod = op.mul(b, c);
            let closed = strata.label(&prod).as_ref() == Some(&ls[1]) || prod.is_zero() || op.is_central(&prod);
            let u = op.mul(&op.mul(a, b), c);
            let v = op.mul(a, &prod);
            let w = op.mul(&op.mul(a, c), b);
            (closed, u != v, u == w, strata.label(&u), strata.label(&v))
        })
        .collect();
    let n = res.len();
    let mut c3 = case(
        3,
        "a in one stratum, b and c in another",
        vec![
            ClauseStat::exact("b*c stays in the stratum of b, c", n, count(&res, |r| !r.0), false),
            ClauseStat::generic("associator nonzero", n, count(&res, |r| !r.1), f, 3, false),
            ClauseStat::exact("LPS is zero", n, count(&res, |r| !r.2), false),
        ],
    );
    let outside = |l: &Option<StratumLabel>, ls: &[StratumLabel]| l.as_ref().is_some_and(|l| !ls.contains(l));
    let both_outside = configs.iter().zip(&res).filter(|((ls, ..), r)| outside(&r.3, ls) && outside(&r.4, ls)).count();
    c3.observations.push(format!("(a*b)*c and a*(b*c) both outside the operand strata in {both_outside}/{n} samples"));
    c3.observations.push(stratum_constancy(model, strata, plan)?);
    for ((_, a, bc), r) in configs.iter().zip(&res) {
        if !r.2 && c3.witnesses.len() < 3 {
            c3.witnesses.push(Witness::NonzeroLps { a: a.clone(), b: bc[0].clone(), c: bc[1].clone() });
        }
    }
    cases.push(c3);

    // Case 4: every ordering of three co-stratal multipliers.
    let mut s = Sampler::new(strata, plan.stream(204));
    let configs = (0..samples)
        .map(|_| {
            let ls = s.labels(2)?;
            let a = s.members(&ls[0], 1)?.remove(0);
            Ok((a, s.members(&ls[1], 3)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let res: Vec<Option<Vec<usize>>> = configs.par_iter().map(|(a, ms)| chain_orders_agree(op, a, ms)).collect();
    let mut c4 = case(
        4,
        "a in one stratum, b, c, d in another",
        vec![ClauseStat::exact("all orderings of b, c, d agree", res.len(), count(&res, Option::is_some), false)],
    );
    for ((a, ms), r) in configs.iter().zip(res) {
        if let (Some(order), true) = (r, c4.witnesses.len() < 3) {
            c4.witnesses.push(Witness::ChainOrder { start: a.clone(), multipliers: ms.clone(), order });
        }
    }
    cases.push(c4);

    // Case 5: (a*b)*(c*d) against ((a*b)*c)*d.
    let mut s = Sampler::new(strata, plan.stream(205));
    let configs = (0..samples)
        .map(|_| {
            let ls = s.labels(2)?;
            let a = s.members(&ls[0], 1)?.remove(0);
            Ok((a, s.members(&ls[1], 3)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let res: Vec<(bool, bool)> = configs
        .par_iter()
        .map(|(a, m)| {
            let ab = op.mul(a, &m[0]);
            let x = op.mul(&ab, &op.mul(&m[1], &m[2]));
            let y = op.mul(&op.mul(&ab, &m[1]), &m[2]);
            (x != y, strata.label(&x) != strata.label(&y))
        })
        .collect();
    let n = res.len();
    cases.push(case(
        5,
        "a in one stratum, b, c, d in another; two bracketings",
        vec![
            ClauseStat::generic("bracketings give different values", n, count(&res, |r| !r.0), f, 4, false),
            ClauseStat::generic("bracketings land in different strata", n, count(&res, |r| !r.1), f, 4, false),
        ],
    ));

    Ok(CaseReport { model: model.name.clone(), seed: plan.seed, cases })
}

/// Whether the strata of `(a*b)*c` and `a*(b*c)` depend only on the
/// strata of the operands, over a few fixed pairs of strata.
fn stratum_constancy(model: &ModelSpec, strata: &Strata, plan: &SamplingPlan) -> Result<String> {
    const PAIRS: usize = 5;
    const PER_PAIR: usize = 10;
    let op = &model.operation;
    let mut s = Sampler::new(strata, plan.stream(206));
    let mut constant = 0;
    for _ in 0..PAIRS {
        let ls = s.labels(2)?;
        let mut seen: BTreeMap<&str, Vec<Option<String>>> = BTreeMap::new();
        for _ in 0..PER_PAIR {
            let a = s.members(&ls[0], 1)?.remove(0);
            let bc = s.members(&ls[1], 2)?;
            let u = op.mul(&op.mul(&a, &bc[0]), &bc[1]);
            let v = op.mul(&a, &op.mul(&bc[0], &bc[1]));
            seen.entry("u").or_default().push(strata.label(&u).map(|l| l.to_string()));
            seen.entry("v").or_default().push(strata.label(&v).map(|l| l.to_string()));
        }
        if seen.values().all(|ls| ls.iter().all(|l| *l == ls[0])) {
            constant += 1;
        }
    }
    Ok(format!(
        "strata of (a*b)*c and a*(b*c) constant across {PER_PAIR} member choices for {constant}/{PAIRS} fixed stratum pairs"
    ))
}
