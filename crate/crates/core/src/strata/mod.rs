//! Strata: declarative ratio rules, discovered partitions over `F_p`, and
//! the closure, stability and depth notions built on them.

mod closure;
mod partition;
mod rule;

pub use closure::{
    is_stratum_stable, stratified_depth, verify_closure, ClosureReport, DepthReport, Stability,
};
pub use partition::{
    commutant_key, discover_strata, enumerate_space, ratio_partition, space_size, Provenance, StratumPartition,
    ENUMERATION_LIMIT, LISTING_LIMIT,
};
pub use rule::{Chart, RatioPoint, Relation, StrataRule, StratumLabel};

use rand::Rng;

use crate::algebra::models::ModelSpec;
use crate::algebra::vector::Vector;
use crate::error::{Error, Result};
use crate::field::FieldSpec;

/// Whatever stratification a check runs against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strata {
    Declared { rule: StrataRule, field: FieldSpec, n: usize },
    Partition(StratumPartition),
}

impl Strata {
    /// The model's declared rule, or a discovered partition when
    /// `discover` is set.
    pub fn for_model(model: &ModelSpec, discover: bool) -> Result<Strata> {
        if discover {
            return Ok(Strata::Partition(discover_strata(&model.operation)?));
        }
        let rule = model
            .strata_rule
            .clone()
            .ok_or_else(|| Error::NoStrata("model declares no strata rule; pass --discover".into()))?;
        rule.validate(model.dimension)?;
        Ok(Strata::Declared { rule, field: model.field, n: model.dimension })
    }

    pub fn field(&self) -> FieldSpec {
        match self {
            Strata::Declared { field, .. } => *field,
            Strata::Partition(p) => p.field(),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Strata::Declared { n, .. } => *n,
            Strata::Partition(p) => p.dimension(),
        }
    }

    pub fn rule(&self) -> Option<&StrataRule> {
        match self {
            Strata::Declared { rule, .. } => Some(rule),
            Strata::Partition(_) => None,
        }
    }

    /// Stratum of `v`; `None` for the zero vector and unassigned vectors.
    pub fn label(&self, v: &Vector) -> Option<StratumLabel> {
        match self {
            Strata::Declared { rule, .. } => rule.label(v).ok(),
            Strata::Partition(p) => p.label_of(v).cloned(),
        }
    }

    /// Number of strata, when finite.
    pub fn count(&self) -> Option<usize> {
        match self {
            Strata::Declared { rule, field, .. } => rule.labels(*field).ok().map(|l| l.len()),
            Strata::Partition(p) => Some(p.len()),
        }
    }

    pub fn labels(&self) -> Option<Vec<StratumLabel>> {
        match self {
            Strata::Declared { rule, field, .. } => rule.labels(*field).ok(),
            Strata::Partition(p) => Some(p.labels().to_vec()),
        }
    }

    pub fn sample_label<R: Rng + ?Sized>(&self, rng: &mut R) -> StratumLabel {
        match self {
            Strata::Declared { rule, field, .. } => rule.sample_label(*field, rng),
            Strata::Partition(p) => p.labels()[rng.gen_range(0..p.len())].clone(),
        }
    }

    /// `k` pairwise distinct random labels.
    pub fn sample_distinct_labels<R: Rng + ?Sized>(&self, rng: &mut R, k: usize) -> Result<Vec<StratumLabel>> {
        if self.count().is_some_and(|c| c < k) {
            return Err(Error::NoStrata(format!("need {k} distinct strata")));
        }
        let mut out: Vec<StratumLabel> = Vec::with_capacity(k);
        while out.len() < k {
            let l = self.sample_label(rng);
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Ok(out)
    }

    pub fn sample_member<R: Rng + ?Sized>(&self, label: &StratumLabel, rng: &mut R) -> Result<Vector> {
        match self {
            Strata::Declared { rule, field, n } => rule.sample_member(label, *n, *field, rng),
            Strata::Partition(p) => {
                let s = p.position(label).ok_or_else(|| Error::Precondition(format!("unknown stratum {label}")))?;
                let k = rng.gen_range(0..p.member_indices(s).len());
                Ok(p.member(s, k))
            }
        }
    }

    /// Every member of `label`; prime fields only.
    pub fn members(&self, label: &StratumLabel) -> Result<Vec<Vector>> {
        match self {
            Strata::Declared { rule, field, n } => {
                let p = field.modulus().ok_or(Error::RequiresPrimeField)?;
                Ok(enumerate_space(p, *n)?.filter(|v| rule.label(v).ok().as_ref() == Some(label)).collect())
            }
            Strata::Partition(part) => {
                let s = part.position(label).ok_or_else(|| Error::Precondition(format!("unknown stratum {label}")))?;
                Ok(part.members(s))
            }
        }
    }
}
