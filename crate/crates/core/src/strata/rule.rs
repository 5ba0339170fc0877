use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::vector::Vector;
use crate::error::{Error, Result};
use crate::field::{sample_element, sample_nonzero, FieldElement, FieldSpec, DEFAULT_RATIONAL_BOUND};
use crate::poly::{Indeterminate, Polynomial};

/// A point of `K ∪ {∞}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RatioPoint {
    Finite(FieldElement),
    Infinity,
}

impl RatioPoint {
    /// `num/den`, or `∞` when `den = 0`.
    pub fn of(num: &FieldElement, den: &FieldElement) -> RatioPoint {
        if den.is_zero() {
            RatioPoint::Infinity
        } else {
            RatioPoint::Finite(num.checked_div(den).expect("nonzero denominator"))
        }
    }

    pub fn finite(&self) -> Option<&FieldElement> {
        match self {
            RatioPoint::Finite(x) => Some(x),
            RatioPoint::Infinity => None,
        }
    }
}

impl fmt::Display for RatioPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioPoint::Finite(x) => write!(f, "{x}"),
            RatioPoint::Infinity => f.write_str("inf"),
        }
    }
}

/// Name of a stratum: a ratio, a ratio pair, or a discovered cluster index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StratumLabel {
    Ratio(RatioPoint),
    Pair(RatioPoint, RatioPoint),
    Cluster(usize),
}

impl fmt::Display for StratumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StratumLabel::Ratio(r) => write!(f, "{r}"),
            StratumLabel::Pair(a, b) => write!(f, "({a},{b})"),
            StratumLabel::Cluster(i) => write!(f, "S{i}"),
        }
    }
}

impl Serialize for StratumLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Declarative stratification by coordinate ratios.
///
/// `Ratio { coords: [x, y] }` labels `v` by `v_x / v_y`, with `∞` when
/// `v_y = 0`.
///
/// `RatioPair { coords: [x, y, z] }` labels `v` by
/// - `(v_x/v_y, v_y/v_z)` when `v_y ≠ 0` and `v_z ≠ 0`,
/// - `(v_x/v_z, 0)` when `v_y = 0` and `v_z ≠ 0`,
/// - `(v_x/v_y, ∞)` when `v_z = 0` and `v_y ≠ 0`,
/// - `(∞, ∞)` when `v_y = v_z = 0`.
///
/// The second case uses labels that the first case never produces, so the
/// labels are in bijection with the points of the projective plane.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrataRule {
    Ratio { coords: [usize; 2] },
    RatioPair { coords: [usize; 3] },
}

/// A linear condition describing one family of strata symbolically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    Zero(usize),
    Proportional { target: usize, factor: Polynomial, source: usize },
}

/// Generic member of a family of strata: the relations its coordinates
/// satisfy, with the stratum's ratio values as indeterminates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub name: String,
    pub relations: Vec<Relation>,
}

impl Chart {
    /// Substitutions turning generic `prefix0..` coordinates into a
    /// generic member of the chart.
    pub fn bindings(&self, prefix: &str) -> BTreeMap<Indeterminate, Polynomial> {
        let var = |i: usize| format!("{prefix}{i}");
        self.relations
            .iter()
            .map(|r| match r {
                Relation::Zero(t) => (Indeterminate::new(&var(*t)), Polynomial::zero()),
                Relation::Proportional { target, factor, source } => {
                    (Indeterminate::new(&var(*target)), factor * &Polynomial::var(&var(*source)))
                }
            })
            .collect()
    }

    /// Each relation, as a polynomial that must vanish on `v`.
    pub fn residuals(&self, v: &[Polynomial]) -> Vec<Polynomial> {
        self.relations
            .iter()
            .map(|r| match r {
                Relation::Zero(t) => v[*t].clone(),
                Relation::Proportional { target, factor, source } => &v[*target] - &(factor * &v[*source]),
            })
            .collect()
    }
}

impl StrataRule {
    pub fn validate(&self, n: usize) -> Result<()> {
        let coords: &[usize] = match self {
            StrataRule::Ratio { coords } => coords,
            StrataRule::RatioPair { coords } => coords,
        };
        if let Some(&c) = coords.iter().find(|&&c| c >= n) {
            return Err(Error::IndexOutOfRange(c.to_string(), n));
        }
        let distinct = coords.iter().enumerate().all(|(i, a)| coords[i + 1..].iter().all(|b| a != b));
        if !distinct {
            return Err(Error::InvalidModel("strata rule coordinates must be distinct".into()));
        }
        Ok(())
    }

    pub fn label(&self, v: &Vector) -> Result<StratumLabel> {
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(match self {
            StrataRule::Ratio { coords: [x, y] } => StratumLabel::Ratio(RatioPoint::of(v.get(*x), v.get(*y))),
            StrataRule::RatioPair { coords: [x, y, z] } => {
                let (vx, vy, vz) = (v.get(*x), v.get(*y), v.get(*z));
                match (vy.is_zero(), vz.is_zero()) {
                    (false, false) => StratumLabel::Pair(RatioPoint::of(vx, vy), RatioPoint::of(vy, vz)),
                    (true, false) => {
                        StratumLabel::Pair(RatioPoint::of(vx, vz), RatioPoint::Finite(vz.field().zero()))
                    }
                    (false, true) => StratumLabel::Pair(RatioPoint::of(vx, vy), RatioPoint::Infinity),
                    (true, true) => StratumLabel::Pair(RatioPoint::Infinity, RatioPoint::Infinity),
                }
            }
        })
    }

    /// Every label over a prime field, in sorted order.
    pub fn labels(&self, field: FieldSpec) -> Result<Vec<StratumLabel>> {
        let p = field.modulus().ok_or(Error::RequiresPrimeField)?;
        let finite = || (0..p).map(|r| RatioPoint::Finite(field.residue(r)));
        let mut out: Vec<StratumLabel> = match self {
            StrataRule::Ratio { .. } => {
                finite().chain([RatioPoint::Infinity]).map(StratumLabel::Ratio).collect()
            }
            StrataRule::RatioPair { .. } => {
                let mut v = Vec::new();
                for a in finite() {
                    for b in finite().chain([RatioPoint::Infinity]) {
                        v.push(StratumLabel::Pair(a.clone(), b));
                    }
                }
                v.push(StratumLabel::Pair(RatioPoint::Infinity, RatioPoint::Infinity));
                v
            }
        };
        out.sort();
        Ok(out)
    }

    /// Symbolic families covering every label.
    pub fn charts(&self) -> Vec<Chart> {
        let sym = Polynomial::var;
        match *self {
            StrataRule::Ratio { coords: [x, y] } => vec![
                Chart {
                    name: "alpha".into(),
                    relations: vec![Relation::Proportional { target: x, factor: sym("alpha"), source: y }],
                },
                Chart { name: "inf".into(), relations: vec![Relation::Zero(y)] },
            ],
            StrataRule::RatioPair { coords: [x, y, z] } => vec![
                Chart {
                    name: "(alpha',alpha'')".into(),
                    relations: vec![
                        Relation::Proportional { target: x, factor: &sym("alpha'") * &sym("alpha''"), source: z },
                        Relation::Proportional { target: y, factor: sym("alpha''"), source: z },
                    ],
                },
                Chart {
                    name: "(beta,0)".into(),
                    relations: vec![
                        Relation::Zero(y),
                        Relation::Proportional { target: x, factor: sym("beta"), source: z },
                    ],
                },
                Chart {
                    name: "(alpha',inf)".into(),
                    relations: vec![
                        Relation::Zero(z),
                        Relation::Proportional { target: x, factor: sym("alpha'"), source: y },
                    ],
                },
                Chart { name: "(inf,inf)".into(), relations: vec![Relation::Zero(y), Relation::Zero(z)] },
            ],
        }
    }

    /// Random label. Over a prime field every label is equally likely.
    pub fn sample_label<R: Rng + ?Sized>(&self, field: FieldSpec, rng: &mut R) -> StratumLabel {
        let b = DEFAULT_RATIONAL_BOUND;
        match (self, field.modulus()) {
            (StrataRule::Ratio { .. }, Some(p)) => {
                let r = rng.gen_range(0..=p);
                StratumLabel::Ratio(if r == p { RatioPoint::Infinity } else { RatioPoint::Finite(field.residue(r)) })
            }
            (StrataRule::Ratio { .. }, None) => StratumLabel::Ratio(if rng.gen_ratio(1, 8) {
                RatioPoint::Infinity
            } else {
                RatioPoint::Finite(sample_element(field, rng, b))
            }),
            (StrataRule::RatioPair { .. }, Some(p)) => {
                let r = rng.gen_range(0..p * p + p + 1);
                let fin = |x: u64| RatioPoint::Finite(field.residue(x));
                if r == p * p + p {
                    StratumLabel::Pair(RatioPoint::Infinity, RatioPoint::Infinity)
                } else if r >= p * p {
                    StratumLabel::Pair(fin(r - p * p), RatioPoint::Infinity)
                } else {
                    StratumLabel::Pair(fin(r / p), fin(r % p))
                }
            }
            (StrataRule::RatioPair { .. }, None) => {
                let fin = |rng: &mut R| RatioPoint::Finite(sample_element(field, rng, b));
                match rng.gen_range(0..10) {
                    0 => StratumLabel::Pair(fin(rng), RatioPoint::Finite(field.zero())),
                    1 => StratumLabel::Pair(fin(rng), RatioPoint::Infinity),
                    2 => StratumLabel::Pair(RatioPoint::Infinity, RatioPoint::Infinity),
                    _ => StratumLabel::Pair(fin(rng), RatioPoint::Finite(sample_nonzero(field, rng, b))),
                }
            }
        }
    }

    /// Random member of the stratum `label`, uniform over a prime field.
    pub fn sample_member<R: Rng + ?Sized>(
        &self,
        label: &StratumLabel,
        n: usize,
        field: FieldSpec,
        rng: &mut R,
    ) -> Result<Vector> {
        let b = DEFAULT_RATIONAL_BOUND;
        let bad = || Error::Precondition(format!("label {label} does not belong to this rule"));
        loop {
            let mut v: Vec<FieldElement> = (0..n).map(|_| sample_element(field, rng, b)).collect();
            match (self, label) {
                (StrataRule::Ratio { coords: [x, y] }, StratumLabel::Ratio(r)) => match r {
                    RatioPoint::Finite(alpha) => {
                        v[*y] = sample_nonzero(field, rng, b);
                        v[*x] = alpha * &v[*y];
                    }
                    RatioPoint::Infinity => v[*y] = field.zero(),
                },
                (StrataRule::RatioPair { coords: [x, y, z] }, StratumLabel::Pair(r1, r2)) => match (r1, r2) {
                    (RatioPoint::Finite(a1), RatioPoint::Finite(a2)) if !a2.is_zero() => {
                        v[*z] = sample_nonzero(field, rng, b);
                        v[*y] = a2 * &v[*z];
                        v[*x] = a1 * &v[*y];
                    }
                    (RatioPoint::Finite(beta), RatioPoint::Finite(_)) => {
                        v[*y] = field.zero();
                        v[*z] = sample_nonzero(field, rng, b);
                        v[*x] = beta * &v[*z];
                    }
                    (RatioPoint::Finite(a1), RatioPoint::Infinity) => {
                        v[*z] = field.zero();
                        v[*y] = sample_nonzero(field, rng, b);
                        v[*x] = a1 * &v[*y];
                    }
                    (RatioPoint::Infinity, RatioPoint::Infinity) => {
                        v[*y] = field.zero();
                        v[*z] = field.zero();
                    }
                    (RatioPoint::Infinity, RatioPoint::Finite(_)) => return Err(bad()),
                },
                _ => return Err(bad()),
            }
            let v = Vector::new(v);
            if !v.is_zero() {
                return Ok(v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const R3: StrataRule = StrataRule::Ratio { coords: [1, 2] };
    const R4: StrataRule = StrataRule::RatioPair { coords: [1, 2, 3] };

    #[test]
    fn ratio_labels() {
        let q = FieldSpec::Rationals;
        assert_eq!(R3.label(&Vector::from_i64s(q, &[3, 2, 4])).unwrap().to_string(), "1/2");
        assert_eq!(R3.label(&Vector::from_i64s(q, &[5, 3, 0])).unwrap().to_string(), "inf");
        assert_eq!(R4.label(&Vector::from_i64s(q, &[7, 6, 3, 1])).unwrap().to_string(), "(2,3)");
        assert_eq!(R4.label(&Vector::from_i64s(q, &[7, 6, 0, 2])).unwrap().to_string(), "(3,0)");
        assert_eq!(R4.label(&Vector::from_i64s(q, &[7, 6, 3, 0])).unwrap().to_string(), "(2,inf)");
        assert_eq!(R4.label(&Vector::from_i64s(q, &[7, 6, 0, 0])).unwrap().to_string(), "(inf,inf)");
        assert_eq!(R3.label(&Vector::zero(q, 3)), Err(Error::ZeroVector));
    }

    #[test]
    fn label_counts_over_prime_fields() {
        let f = FieldSpec::prime(5).unwrap();
        assert_eq!(R3.labels(f).unwrap().len(), 6);
        assert_eq!(R4.labels(f).unwrap().len(), 31);
        assert!(R3.labels(FieldSpec::Rationals).is_err());
    }

    #[test]
    fn sampled_members_carry_their_label() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for field in [FieldSpec::Rationals, FieldSpec::prime(7).unwrap()] {
            for (rule, n) in [(R3, 3), (R4, 4)] {
                for _ in 0..200 {
                    let l = rule.sample_label(field, &mut rng);
                    let v = rule.sample_member(&l, n, field, &mut rng).unwrap();
                    assert_eq!(rule.label(&v).unwrap(), l);
                }
            }
        }
    }

    #[test]
    fn charts_match_labels() {
        let q = FieldSpec::Rationals;
        let charts = R4.charts();
        let v = Vector::from_i64s(q, &[7, 6, 3, 1]);
        let poly: Vec<Polynomial> = v.coords().iter().map(|c| Polynomial::constant(c.to_rational())).collect();
        let r = charts[0].residuals(&poly);
        let sub: BTreeMap<_, _> = [("alpha'", 2), ("alpha''", 3)]
            .iter()
            .map(|(k, x)| (Indeterminate::new(k), Polynomial::integer(*x)))
            .collect();
        assert!(r.iter().all(|p| p.substitute(&sub).is_zero()));
        assert_eq!(charts[2].bindings("a").len(), 2);
    }

    #[test]
    fn rule_json() {
        let j = serde_json::to_string(&R4).unwrap();
        assert_eq!(j, r#"{"kind":"ratio_pair","coords":[1,2,3]}"#);
        assert!(R3.validate(2).is_err());
        assert!(StrataRule::Ratio { coords: [1, 1] }.validate(3).is_err());
    }
}
