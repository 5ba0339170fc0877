//! Verification of the four stratification axioms, the identity suite and
//! the case analysis, with a classification into the hierarchy.
//!
//! SA1: each stratum is a commutative associative magma.
//! SA2: cross-stratum products are non-commutative and leave both strata.
//! SA3: `LPS(a,b,c) = 0` whenever `b, c` share a stratum other than `a`'s,
//!      so left chains of co-stratal multipliers are order independent.
//! SA4: bracketing a cross-stratum chain changes its value and stratum.

mod cases;
mod checks;
mod identities;

pub use cases::{case_analysis, CaseReport, CaseResult};
pub use checks::{bracket_sensitivity, check_sa1, check_sa2, check_sa3, check_sa4, BracketStats};
pub use identities::{verify_identity_suite, IdentityResult, IdentityStatus};

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::Value;

use crate::algebra::models::ModelSpec;
use crate::error::Result;
use crate::field::FieldSpec;
use crate::strata::Strata;
use crate::witness::Witness;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Exhaustive,
    Randomized,
    Symbolic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingPlan {
    pub mode: SamplingMode,
    pub samples: usize,
    pub seed: u64,
    pub chain_length_max: usize,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan { mode: SamplingMode::Randomized, samples: 200, seed: 0, chain_length_max: 5 }
    }
}

impl SamplingPlan {
    pub fn randomized(samples: usize, seed: u64) -> Self {
        SamplingPlan { samples: samples.max(1), seed, ..SamplingPlan::default() }
    }

    pub fn with_mode(mut self, mode: SamplingMode) -> Self {
        self.mode = mode;
        self
    }

    /// Seed for one sub-check, so that checks stay independent of the
    /// order they run in.
    pub(crate) fn stream(&self, tag: u64) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(tag)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    HoldsOnSamples,
    Degenerate,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        matches!(self, Verdict::Holds | Verdict::HoldsOnSamples)
    }

    /// Combination of two verdicts that must both pass.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fails, _) | (_, Fails) => Fails,
            (Degenerate, _) | (_, Degenerate) => Degenerate,
            (HoldsOnSamples, _) | (_, HoldsOnSamples) => HoldsOnSamples,
            _ => Holds,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::HoldsOnSamples => "holds-on-samples",
            Verdict::Degenerate => "degenerate",
        })
    }
}

/// Largest exception fraction tolerated for a clause that is expected to
/// hold off a hypersurface of degree `degree`: 5% over `ℚ`, and over `F_p`
/// the larger of 5% and the Schwartz–Zippel bound `degree/p`.
pub fn generic_tolerance(field: FieldSpec, degree: u32) -> f64 {
    match field.modulus() {
        Some(p) => (degree as f64 / p as f64).max(0.05),
        None => 0.05,
    }
}

/// Outcome of one clause of an axiom.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClauseStat {
    pub name: String,
    pub checked: usize,
    pub exceptions: usize,
    /// `None` for clauses that must hold without exception.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub verdict: Verdict,
}

impl ClauseStat {
    /// A clause that must hold on every checked instance.
    pub fn exact(name: &str, checked: usize, exceptions: usize, exhaustive: bool) -> Self {
        let verdict = match (exceptions, exhaustive) {
            (0, true) => Verdict::Holds,
            (0, false) => Verdict::HoldsOnSamples,
            _ => Verdict::Fails,
        };
        ClauseStat { name: name.into(), checked, exceptions, tolerance: None, verdict }
    }

    /// A clause that holds generically: exceptions are allowed up to
    /// [`generic_tolerance`].
    pub fn generic(name: &str, checked: usize, exceptions: usize, field: FieldSpec, degree: u32, exhaustive: bool) -> Self {
        let tol = generic_tolerance(field, degree);
        let verdict = if checked == 0 || exceptions as f64 > tol * checked as f64 {
            Verdict::Fails
        } else if exceptions == 0 && exhaustive {
            Verdict::Holds
        } else {
            Verdict::HoldsOnSamples
        };
        ClauseStat { name: name.into(), checked, exceptions, tolerance: Some(tol), verdict }
    }

    pub fn with_verdict(name: &str, verdict: Verdict) -> Self {
        ClauseStat { name: name.into(), checked: 0, exceptions: 0, tolerance: None, verdict }
    }
}

/// Verdict for one axiom with its clause breakdown.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomResult {
    pub verdict: Verdict,
    pub mode: SamplingMode,
    pub clauses: Vec<ClauseStat>,
    /// Sub-verdicts reported alongside but not folded into `verdict`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub informational: Vec<ClauseStat>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub witnesses: Vec<Witness>,
}

impl AxiomResult {
    pub(crate) fn from_clauses(mode: SamplingMode, clauses: Vec<ClauseStat>, witnesses: Vec<Witness>) -> Self {
        let verdict = clauses.iter().fold(Verdict::Holds, |acc, c| acc.and(c.verdict));
        AxiomResult { verdict, mode, clauses, informational: Vec::new(), notes: Vec::new(), witnesses }
    }

    pub(crate) fn degenerate(mode: SamplingMode, note: &str) -> Self {
        AxiomResult {
            verdict: Verdict::Degenerate,
            mode,
            clauses: Vec::new(),
            informational: Vec::new(),
            notes: vec![note.to_string()],
            witnesses: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Fully,
    Symmetric,
    Weak,
    None,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Fully => "fully",
            Classification::Symmetric => "symmetric",
            Classification::Weak => "weak",
            Classification::None => "none",
        })
    }
}

/// Highest class whose axioms all pass: weak needs SA1 and SA2, symmetric
/// adds SA3, fully adds SA4. The flag is set when a sampled verdict was
/// used.
pub fn classify(verdicts: &[Verdict; 4]) -> (Classification, bool) {
    let needed = |k: usize| verdicts[..k].iter().all(|v| v.is_pass());
    let class = if needed(4) {
        Classification::Fully
    } else if needed(3) {
        Classification::Symmetric
    } else if needed(2) {
        Classification::Weak
    } else {
        Classification::None
    };
    let used = match class {
        Classification::Fully => 4,
        Classification::Symmetric => 3,
        Classification::Weak => 2,
        Classification::None => 0,
    };
    (class, verdicts[..used].contains(&Verdict::HoldsOnSamples))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub model: String,
    pub field: FieldSpec,
    pub seed: u64,
    pub strata: String,
    pub axioms: BTreeMap<String, AxiomResult>,
    pub classification: Classification,
    pub on_samples: bool,
}

impl AxiomReport {
    /// `{"model","seed","axioms":{"SA1":…},"classification","witnesses":[…]}`.
    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        let witnesses: Vec<Value> = self
            .axioms
            .iter()
            .flat_map(|(name, r)| {
                r.witnesses.iter().map(move |w| {
                    let mut w = serde_json::to_value(w).expect("witness serializes");
                    w["axiom"] = Value::String(name.clone());
                    w
                })
            })
            .collect();
        v["witnesses"] = Value::Array(witnesses);
        v
    }

    pub fn verdicts(&self) -> [Verdict; 4] {
        ["SA1", "SA2", "SA3", "SA4"].map(|k| self.axioms[k].verdict)
    }

    /// Human-readable table.
    pub fn render(&self) -> String {
        let mut out = format!(
            "model {} over {} (strata: {}, seed {})\n",
            self.model, self.field, self.strata, self.seed
        );
        let width = self
            .axioms
            .values()
            .flat_map(|r| r.clauses.iter().chain(&r.informational))
            .map(|c| c.name.chars().count())
            .max()
            .unwrap_or(0);
        for (name, r) in &self.axioms {
            out.push_str(&format!("{name:<4} {:<17} [{:?}]\n", r.verdict.to_string(), r.mode));
            for c in r.clauses.iter().chain(&r.informational) {
                let tol = c.tolerance.map(|t| format!(" tol {:.3}", t)).unwrap_or_default();
                out.push_str(&format!(
                    "     {:<width$} {:<17} {}/{} exceptions{}\n",
                    c.name,
                    c.verdict.to_string(),
                    c.exceptions,
                    c.checked,
                    tol
                ));
            }
            for n in &r.notes {
                out.push_str(&format!("     note: {n}\n"));
            }
        }
        let flag = if self.on_samples { " (on samples)" } else { "" };
        out.push_str(&format!("classification: {}{}\n", self.classification, flag));
        out
    }
}

/// Runs SA1–SA4 and classifies the model.
pub fn verify_axioms(model: &ModelSpec, strata: &Strata, plan: &SamplingPlan) -> Result<AxiomReport> {
    let mut axioms = BTreeMap::new();
    axioms.insert("SA1".to_string(), check_sa1(model, strata, plan)?);
    axioms.insert("SA2".to_string(), check_sa2(model, strata, plan)?);
    axioms.insert("SA3".to_string(), check_sa3(model, strata, plan)?);
    axioms.insert("SA4".to_string(), check_sa4(model, strata, plan)?);
    let verdicts = ["SA1", "SA2", "SA3", "SA4"].map(|k| axioms[k].verdict);
    let (classification, on_samples) = classify(&verdicts);
    let source = match strata {
        Strata::Declared { rule, .. } => serde_json::to_string(rule).expect("rule serializes"),
        Strata::Partition(_) => "discovered".to_string(),
    };
    Ok(AxiomReport {
        model: model.name.clone(),
        field: model.field,
        seed: plan.seed,
        strata: source,
        axioms,
        classification,
        on_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_ladder() {
        use Verdict::*;
        assert_eq!(classify(&[Holds, Holds, Holds, Holds]), (Classification::Fully, false));
        assert_eq!(classify(&[Holds, HoldsOnSamples, Holds, Degenerate]), (Classification::Symmetric, true));
        assert_eq!(classify(&[Holds, Holds, Fails, Holds]), (Classification::Weak, false));
        assert_eq!(classify(&[Fails, Holds, Holds, Holds]).0, Classification::None);
    }

    #[test]
    fn tolerance_rule() {
        assert_eq!(generic_tolerance(FieldSpec::Rationals, 3), 0.05);
        let f19 = FieldSpec::prime(19).unwrap();
        assert!((generic_tolerance(f19, 3) - 3.0 / 19.0).abs() < 1e-12);
        assert_eq!(generic_tolerance(FieldSpec::prime(101).unwrap(), 2), 0.05);
        let c = ClauseStat::generic("x", 100, 6, FieldSpec::Rationals, 2, false);
        assert_eq!(c.verdict, Verdict::Fails);
        let c = ClauseStat::generic("x", 100, 5, FieldSpec::Rationals, 2, false);
        assert_eq!(c.verdict, Verdict::HoldsOnSamples);
        assert_eq!(ClauseStat::exact("x", 10, 0, true).verdict, Verdict::Holds);
        assert_eq!(ClauseStat::exact("x", 10, 1, true).verdict, Verdict::Fails);
    }
}
