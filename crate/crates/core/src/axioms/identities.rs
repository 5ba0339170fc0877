use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::checks::{chart_vector, SYMBOLIC_DEGREE_BOUND};
use crate::algebra::models::{Builtin, ModelSpec};
use crate::algebra::symbolic::{sub_vec, SymbolicOperation};
use crate::error::{Error, Result};
use crate::poly::{symbol_vector, Indeterminate, Polynomial};
use crate::strata::Chart;

const SPOT_CHECKS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityStatus {
    Matches,
    /// Differs in general but agrees once `condition` is imposed.
    MatchesUnderCondition,
    Differs,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityResult {
    pub name: String,
    pub status: IdentityStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    /// Direct minus expected, per component; empty when they agree.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub difference: Vec<String>,
    /// Denominators appearing in either side.
    pub denominators: Vec<String>,
    /// Random rational points where both sides were evaluated.
    pub spot_checks: usize,
    /// Whether every spot check agreed with the symbolic verdict.
    pub spot_checks_agree: bool,
}

fn parse_all(exprs: &[&str]) -> Result<Vec<Polynomial>> {
    exprs.iter().map(|s| s.parse()).collect()
}

fn var_values<R: Rng>(polys: &[&Polynomial], rng: &mut R) -> BTreeMap<Indeterminate, BigRational> {
    polys
        .iter()
        .flat_map(|p| p.indeterminates())
        .map(|v| (v, BigRational::from_integer(rng.gen_range(-30i64..=30).into())))
        .collect()
}

/// Evaluates `diff` at random points: all zero when it vanishes
/// identically, and (Schwartz–Zippel) almost surely some nonzero value
/// otherwise.
fn spot_check(diff: &[Polynomial], vanishes: bool, seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let refs: Vec<&Polynomial> = diff.iter().collect();
    let mut seen_nonzero = false;
    for _ in 0..SPOT_CHECKS {
        let values = var_values(&refs, &mut rng);
        for p in diff {
            if !p.evaluate(&values)?.numer().eq(&0.into()) {
                seen_nonzero = true;
            }
        }
    }
    Ok(seen_nonzero != vanishes)
}

fn denominators(polys: &[&Polynomial]) -> Vec<String> {
    let mut all: Vec<String> = polys.iter().flat_map(|p| p.denominators()).filter(|d| *d != 1.into()).map(|d| d.to_string()).collect();
    all.sort();
    all.dedup();
    all
}

/// Compares `direct` with `expected`; when they differ and `condition`
/// is given, compares again after the substitution.
fn compare(
    name: &str,
    direct: &[Polynomial],
    expected: &[Polynomial],
    condition: Option<(&str, &BTreeMap<Indeterminate, Polynomial>)>,
    seed: u64,
) -> Result<IdentityResult> {
    let diff = sub_vec(direct, expected);
    let vanishes = diff.iter().all(Polynomial::is_zero);
    let refs: Vec<&Polynomial> = direct.iter().chain(expected).collect();
    let mut r = IdentityResult {
        name: name.to_string(),
        status: if vanishes { IdentityStatus::Matches } else { IdentityStatus::Differs },
        condition: None,
        difference: Vec::new(),
        denominators: denominators(&refs),
        spot_checks: SPOT_CHECKS,
        spot_checks_agree: spot_check(&diff, vanishes, seed)?,
    };
    if vanishes {
        return Ok(r);
    }
    r.difference = diff.iter().map(|p| p.to_string()).collect();
    if let Some((text, bindings)) = condition {
        if diff.iter().all(|p| p.substitute(bindings).is_zero()) {
            r.status = IdentityStatus::MatchesUnderCondition;
            r.condition = Some(text.to_string());
        }
    }
    Ok(r)
}

/// Checks that every polynomial is zero.
fn vanishing(name: &str, polys: &[Polynomial], seed: u64) -> Result<IdentityResult> {
    let zeros = vec![Polynomial::zero(); polys.len()];
    compare(name, polys, &zeros, None, seed)
}

/// Substitutions putting `b` and `c` in one generic stratum of `chart`.
fn costratal(chart: &Chart) -> BTreeMap<Indeterminate, Polynomial> {
    let mut b = chart.bindings("b");
    b.extend(chart.bindings("c"));
    b
}

struct Suite {
    op: SymbolicOperation,
    a: Vec<Polynomial>,
    b: Vec<Polynomial>,
    c: Vec<Polynomial>,
    out: Vec<IdentityResult>,
    seed: u64,
}

impl Suite {
    fn next_seed(&mut self) -> u64 {
        self.seed += 1;
        self.seed
    }

    fn compare(&mut self, name: &str, direct: &[Polynomial], expected: &[&str]) -> Result<()> {
        let expected = parse_all(expected)?;
        let seed = self.next_seed();
        self.out.push(compare(name, direct, &expected, None, seed)?);
        Ok(())
    }

    fn vanishing(&mut self, name: &str, polys: &[Polynomial]) -> Result<()> {
        let seed = self.next_seed();
        self.out.push(vanishing(name, polys, seed)?);
        Ok(())
    }

    fn commutator(&self) -> Result<Vec<Polynomial>> {
        self.op.commutator(&self.a, &self.b)
    }

    fn associator(&self) -> Result<Vec<Polynomial>> {
        self.op.associator(&self.a, &self.b, &self.c)
    }

    fn lps(&self) -> Result<Vec<Polynomial>> {
        self.op.lps(&self.a, &self.b, &self.c)
    }

    /// LPS with `b, c` in a common stratum, for every chart.
    fn lps_costratal(&mut self, builtin: Builtin) -> Result<()> {
        let lps = self.lps()?;
        for chart in builtin.strata_rule().charts() {
            let sub = costratal(&chart);
            let polys: Vec<Polynomial> = lps.iter().map(|p| p.substitute(&sub)).collect();
            self.vanishing(&format!("LPS vanishes for co-stratal b, c (chart {})", chart.name), &polys)?;
        }
        Ok(())
    }

    /// Commutator, associator and product relations with all operands
    /// in one generic stratum, for every chart.
    fn in_stratum(&mut self, builtin: Builtin) -> Result<()> {
        let n = builtin.dimension();
        for chart in builtin.strata_rule().charts() {
            let (a, b, c) = (chart_vector(&chart, "a", n), chart_vector(&chart, "b", n), chart_vector(&chart, "c", n));
            let comm = self.op.commutator(&a, &b)?;
            self.vanishing(&format!("commutator vanishes in stratum (chart {})", chart.name), &comm)?;
            let prod = chart.residuals(&self.op.apply(&a, &b)?);
            self.vanishing(&format!("product stays in stratum (chart {})", chart.name), &prod)?;
            let assoc = self.op.associator(&a, &b, &c)?;
            self.vanishing(&format!("associator vanishes in stratum (chart {})", chart.name), &assoc)?;
        }
        Ok(())
    }
}

const P3_ASSOCIATOR: [&str; 3] = [
    "A*E*((a2*b1 - a1*b2)*c1 + a1*(b1*c2 - b2*c1)) + B*F*((a2*b1 - a1*b2)*c2 + a2*(b1*c2 - b2*c1)) \
     + C*(F*(a2*b1 - a1*b2)*c1 + E*a2*(b1*c2 - b2*c1)) + D*(E*(a2*b1 - a1*b2)*c2 + F*a1*(b1*c2 - b2*c1))",
    "B*(a2*c1 - a1*c2)*b2 + C*(a2*b1 - a1*b2)*c1 + D*(b2*c1 - b1*c2)*a1 + E^2*(a1*c2 - a2*c1)*b2 \
     + E*F*(a2*c1 - a1*c2)*b1",
    "A*(a1*c2 - a2*c1)*b1 + C*(b1*c2 - b2*c1)*a2 + D*(a1*b2 - a2*b1)*c2 + F^2*(a2*c1 - a1*c2)*b1 \
     + E*F*(a1*c2 - a2*c1)*b2",
];

const P3_LPS: [&str; 3] = [
    "(b1*c2 - b2*c1)*((D - C)*a0 + (A*E + C*F)*a1 + (B*F + D*E)*a2)",
    "-(b1*c2 - b2*c1)*(2*E*a0 + (D - E*F)*a1 + (B + E^2)*a2)",
    "(b1*c2 - b2*c1)*(-2*F*a0 + (A + F^2)*a1 + (C - E*F)*a2)",
];

const P4_COMMUTATOR: [&str; 4] = [
    "(C - E)*(a1*b2 - a2*b1)",
    "-2*B*(a2*b3 - a3*b2) + (D - F)*(a1*b3 - a3*b1)",
    "2*A*(a1*b3 - a3*b1) - (D - F)*(a2*b3 - a3*b2)",
    "2*(a1*b2 - a2*b1)",
];

const P4_PRODUCT: [&str; 4] = [
    "-A*B*a3*b3 + a0*b0 + b1*(A*a1 + E*a2) + b2*(B*a2 + C*a1)",
    "B*a3*b2 + a1*b0 + b1*(F*a3 + a0) + b3*(-B*a2 + D*a1)",
    "-A*a3*b1 + a2*b0 + b2*(D*a3 + a0) + b3*(A*a1 + F*a2)",
    "a1*b2 - a2*b1 + a3*b0 + b3*(a0 + (D + F)*a3)",
];

const P4_ASSOCIATOR: [&str; 4] = [
    "A*(E - F)*c1*(a1*b3 - a3*b1) + B*(C + D)*c2*(a3*b2 - a2*b3) + C*F*(a3*b1*c2 - a1*b2*c3) \
     + D*E*(a3*b2*c1 - a2*b1*c3)",
    "D*F*(a3*b3*c1 - a1*b3*c3) + (E - F)*(a2*b1 - a1*b2)*c1",
    "D*F*(a3*b3*c2 - a2*b3*c3) + (C + D)*(a1*b2 - a2*b1)*c2",
    "(C + D)*(a1*b2*c3 - a3*b1*c2) + (E - F)*(a2*b1*c3 - a3*b2*c1)",
];

const P4_LPS_0: &str = "2*A*B*a1*(b3*c2 - b2*c3) + 2*A*B*a2*(b1*c3 - b3*c1) + 2*A*B*a3*(b2*c1 - b1*c2) \
     + A*D*a1*(b3*c1 - b1*c3) + A*E*a1*(b3*c1 - b1*c3) + B*C*a2*(b2*c3 - b3*c2) + B*F*a2*(b3*c2 - b2*c3) \
     + C*D*a1*(b3*c2 - b2*c3) + C*F*a3*(b1*c2 - b2*c1) + C*a0*(b1*c2 - b2*c1) + D*E*a3*(b2*c1 - b1*c2) \
     + E*F*a2*(b3*c1 - b1*c3) + E*a0*(b2*c1 - b1*c2)";

/// Expands each closed-form identity claimed for a built-in model and
/// compares it with direct symbolic computation. Parameters stay
/// symbolic. Differences are reported, never corrected.
pub fn verify_identity_suite(model: &ModelSpec) -> Result<Vec<IdentityResult>> {
    let builtin = model
        .builtin
        .ok_or_else(|| Error::Precondition("identity suite needs a built-in model".into()))?;
    let n = builtin.dimension();
    let mut s = Suite {
        op: builtin.symbolic().with_degree_bound(SYMBOLIC_DEGREE_BOUND),
        a: symbol_vector("a", n),
        b: symbol_vector("b", n),
        c: symbol_vector("c", n),
        out: Vec::new(),
        seed: 0,
    };
    match builtin {
        Builtin::Basic3 => {
            let comm = s.commutator()?;
            s.compare("commutator", &comm, &["0", "-2*(a1*b2 - a2*b1)", "2*(a1*b2 - a2*b1)"])?;
            let assoc = s.associator()?;
            s.vanishing("associator vanishes identically", &assoc)?;
            let lps = s.lps()?;
            let factor: Polynomial = "b1*c2 - b2*c1".parse()?;
            let residues: Vec<Polynomial> = lps
                .iter()
                .map(|p| if p.div_exact(&factor).is_some() { Polynomial::zero() } else { p.clone() })
                .collect();
            s.vanishing("LPS components divisible by b1*c2 - b2*c1", &residues)?;
            s.lps_costratal(builtin)?;
            s.in_stratum(builtin)?;
        }
        Builtin::Parametric3 => {
            let comm = s.commutator()?;
            s.compare("commutator", &comm, &["(a2*b1 - a1*b2)*(C - D)", "(a2*b1 - a1*b2)*2*E", "(a2*b1 - a1*b2)*2*F"])?;
            let assoc = s.associator()?;
            s.compare("associator expansion", &assoc, &P3_ASSOCIATOR)?;
            let lps = s.lps()?;
            s.compare("LPS expansion", &lps, &P3_LPS)?;
            s.lps_costratal(builtin)?;
            s.in_stratum(builtin)?;
        }
        Builtin::Parametric4 => {
            let comm = s.commutator()?;
            s.compare("commutator", &comm, &P4_COMMUTATOR)?;
            let prod = s.op.apply(&s.a, &s.b)?;
            s.compare("product expansion", &prod, &P4_PRODUCT)?;
            let assoc = s.associator()?;
            let expected = parse_all(&P4_ASSOCIATOR)?;
            let chart = &builtin.strata_rule().charts()[0];
            let seed = s.next_seed();
            s.out.push(compare(
                "associator expansion",
                &assoc,
                &expected,
                Some(("b, c in a common stratum (alpha', alpha'')", &costratal(chart))),
                seed,
            )?);
            let lps = s.lps()?;
            s.compare("LPS component 0", &lps[..1], &[P4_LPS_0])?;
            s.lps_costratal(builtin)?;
            s.in_stratum(builtin)?;
        }
        Builtin::Nonlinear3 => {
            let comm = s.commutator()?;
            s.compare("commutator", &comm, &["(a2*b1 - a1*b2)*(C - D)", "(a2*b1 - a1*b2)*2*E", "-(a2*b1 - a1*b2)*2*F"])?;
            s.lps_costratal(builtin)?;
            s.in_stratum(builtin)?;
        }
    }
    Ok(s.out)
}
