//! Toy two-party key agreement: both sides extend a public base by their
//! own chain of multipliers from one shared stratum, swap the results and
//! extend the other side's value. SA3 makes the two final values agree.
//!
//! The multipliers' stratum is treated as a public parameter. No hardness
//! is claimed; [`brute_force_recovery`] shows how small instances fall.

use rand::Rng;
use serde::Serialize;
use serde_json::Value;

use crate::algebra::models::ModelSpec;
use crate::algebra::vector::Vector;
use crate::error::{Error, Result};
use crate::strata::{Strata, StratumLabel};

/// Largest candidate count [`brute_force_recovery`] will try.
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Party {
    pub name: String,
    pub base: Vector,
    pub secret: Vec<Vector>,
    /// Stratum shared by the secret multipliers.
    pub secret_stratum: StratumLabel,
    pub model: ModelSpec,
}

fn labeled(strata: &Strata, v: &Vector, what: &str) -> Result<StratumLabel> {
    strata.label(v).ok_or_else(|| Error::Precondition(format!("{what} {v} has no stratum")))
}

/// Builds both parties, checking that the secrets are nonempty, lie in one
/// common stratum, and that the base lies outside it.
pub fn init_session(
    model: &ModelSpec,
    strata: &Strata,
    base: &Vector,
    alice_secret: &[Vector],
    bob_secret: &[Vector],
) -> Result<(Party, Party)> {
    base.check_dim(model.dimension)?;
    if alice_secret.is_empty() || bob_secret.is_empty() {
        return Err(Error::Precondition("each secret needs at least one multiplier".into()));
    }
    let target = labeled(strata, &alice_secret[0], "multiplier")?;
    for q in alice_secret.iter().chain(bob_secret) {
        q.check_dim(model.dimension)?;
        if labeled(strata, q, "multiplier")? != target {
            return Err(Error::Precondition(format!("multiplier {q} lies outside stratum {target}")));
        }
    }
    if labeled(strata, base, "base")? == target {
        return Err(Error::Precondition(format!("base lies in the secret stratum {target}")));
    }
    let party = |name: &str, secret: &[Vector]| Party {
        name: name.to_string(),
        base: base.clone(),
        secret: secret.to_vec(),
        secret_stratum: target.clone(),
        model: model.clone(),
    };
    Ok((party("alice", alice_secret), party("bob", bob_secret)))
}

/// A public message on the wire: `{"type":"pub","sender","vector"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PubMessage {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub sender: String,
    pub vector: Vector,
}

impl PubMessage {
    fn new(sender: &str, vector: Vector) -> Self {
        PubMessage { kind: "pub", sender: sender.to_string(), vector }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SessionTranscript {
    pub model: String,
    pub field: String,
    pub secret_stratum: String,
    pub public_messages: Vec<PubMessage>,
    pub s1: Vector,
    pub s2: Vector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s12: Option<Vector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s21: Option<Vector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreed: Option<bool>,
    /// Some chain passed through the zero vector.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_encountered: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secrets: Option<[Vec<Vector>; 2]>,
    /// Strata visited by each side while computing the shared value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_strata: Option<[Vec<Option<String>>; 2]>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub redacted: bool,
}

impl SessionTranscript {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("transcript serializes")
    }

    /// Intermediate strata differ between the two sides.
    pub fn paths_diverge(&self) -> Option<bool> {
        self.path_strata.as_ref().map(|[a, b]| a != b)
    }
}

/// Left chain with the stratum of every value after the start; `true`
/// when some value was zero.
fn chain(model: &ModelSpec, strata: &Strata, start: &Vector, multipliers: &[Vector]) -> (Vector, Vec<Option<String>>, bool) {
    let mut acc = start.clone();
    let mut labels = Vec::with_capacity(multipliers.len());
    let mut zero = false;
    for q in multipliers {
        acc = model.operation.mul(&acc, q);
        zero |= acc.is_zero();
        labels.push(strata.label(&acc).map(|l| l.to_string()));
    }
    (acc, labels, zero)
}

pub fn run_exchange(alice: &Party, bob: &Party, strata: &Strata) -> Result<SessionTranscript> {
    if alice.base != bob.base || alice.model != bob.model || alice.secret_stratum != bob.secret_stratum {
        return Err(Error::Precondition("parties disagree on public parameters".into()));
    }
    let model = &alice.model;
    let (s1, _, z1) = chain(model, strata, &alice.base, &alice.secret);
    let (s2, _, z2) = chain(model, strata, &bob.base, &bob.secret);
    let (s12, bob_path, z12) = chain(model, strata, &s1, &bob.secret);
    let (s21, alice_path, z21) = chain(model, strata, &s2, &alice.secret);
    let zero = z1 || z2 || z12 || z21;
    Ok(SessionTranscript {
        model: model.name.clone(),
        field: model.field.to_string(),
        secret_stratum: alice.secret_stratum.to_string(),
        public_messages: vec![
            PubMessage::new(&alice.name, alice.base.clone()),
            PubMessage::new(&alice.name, s1.clone()),
            PubMessage::new(&bob.name, s2.clone()),
        ],
        s1,
        s2,
        agreed: Some(!zero && s12 == s21),
        s12: Some(s12),
        s21: Some(s21),
        zero_encountered: Some(zero),
        secrets: Some([alice.secret.clone(), bob.secret.clone()]),
        path_strata: Some([alice_path, bob_path]),
        redacted: false,
    })
}

/// What a passive observer sees: public parameters, the base and both
/// public values. Idempotent.
pub fn eavesdropper_view(t: &SessionTranscript) -> SessionTranscript {
    SessionTranscript {
        s12: None,
        s21: None,
        agreed: None,
        zero_encountered: None,
        secrets: None,
        path_strata: None,
        redacted: true,
        ..t.clone()
    }
}

/// Random session: base from one stratum, both secrets from another.
pub fn random_session<R: Rng + ?Sized>(
    model: &ModelSpec,
    strata: &Strata,
    rng: &mut R,
    alice_len: usize,
    bob_len: usize,
) -> Result<(Party, Party)> {
    let ls = strata.sample_distinct_labels(rng, 2)?;
    let base = strata.sample_member(&ls[0], rng)?;
    let mut secret = |k: usize| (0..k).map(|_| strata.sample_member(&ls[1], rng)).collect::<Result<Vec<_>>>();
    let a = secret(alice_len)?;
    let b = secret(bob_len)?;
    init_session(model, strata, &base, &a, &b)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecoveryReport {
    pub candidates_tried: u64,
    /// A multiplier sequence reproducing the target public value.
    pub recovered: Option<Vec<Vector>>,
    /// The recovered sequence applied to the other public value gives
    /// the shared value.
    pub recovers_shared_value: bool,
}

/// Searches multiplier sequences of length `1..=max_len` from the public
/// stratum for one taking the base to `transcript.s1`, then applies it to
/// `s2`. Enumerates the whole stratum, so only tiny fields are feasible.
pub fn brute_force_recovery(
    model: &ModelSpec,
    strata: &Strata,
    transcript: &SessionTranscript,
    max_len: usize,
) -> Result<RecoveryReport> {
    let label = strata
        .labels()
        .ok_or(Error::RequiresPrimeField)?
        .into_iter()
        .find(|l| l.to_string() == transcript.secret_stratum)
        .ok_or_else(|| Error::Precondition(format!("unknown stratum {}", transcript.secret_stratum)))?;
    let pool = strata.members(&label)?;
    let total: u64 = (1..=max_len as u32).map(|k| (pool.len() as u64).saturating_pow(k)).sum();
    if total > BRUTE_FORCE_LIMIT {
        return Err(Error::Precondition(format!("{total} candidates exceed the brute-force limit")));
    }
    let base = &transcript.public_messages[0].vector;
    let op = &model.operation;
    let mut tried = 0;
    for len in 1..=max_len {
        let mut idx = vec![0usize; len];
        loop {
            tried += 1;
            let cand: Vec<Vector> = idx.iter().map(|&i| pool[i].clone()).collect();
            if cand.iter().fold(base.clone(), |acc, q| op.mul(&acc, q)) == transcript.s1 {
                let shared = cand.iter().fold(transcript.s2.clone(), |acc, q| op.mul(&acc, q));
                let recovers = transcript.s12.as_ref().is_none_or(|k| *k == shared);
                return Ok(RecoveryReport { candidates_tried: tried, recovered: Some(cand), recovers_shared_value: recovers });
            }
            // odometer increment
            let mut pos = 0;
            while pos < len {
                idx[pos] += 1;
                if idx[pos] < pool.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == len {
                break;
            }
        }
    }
    Ok(RecoveryReport { candidates_tried: tried, recovered: None, recovers_shared_value: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::models::{builtin_model, Builtin, ParamSet};
    use crate::field::FieldSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(p: u64) -> (ModelSpec, Strata) {
        let f = FieldSpec::prime(p).unwrap();
        let m = builtin_model(Builtin::Nonlinear3, Some(&ParamSet::generic(f, 11)), f).unwrap();
        let s = Strata::for_model(&m, false).unwrap();
        (m, s)
    }

    #[test]
    fn sessions_agree() {
        let (m, s) = setup(19);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (la, lb) in [(1, 1), (3, 4), (5, 2)] {
            let (a, b) = random_session(&m, &s, &mut rng, la, lb).unwrap();
            let t = run_exchange(&a, &b, &s).unwrap();
            assert_eq!(t.agreed, Some(true), "{t:?}");
        }
    }

    #[test]
    fn singleton_agreement_is_lps() {
        let (m, s) = setup(19);
        let f = m.field;
        let base = Vector::from_i64s(f, &[1, 1, 1]);
        let (qa, qb) = (Vector::from_i64s(f, &[2, 0, 3]), Vector::from_i64s(f, &[5, 0, 7]));
        let (a, b) = init_session(&m, &s, &base, &[qa.clone()], &[qb.clone()]).unwrap();
        let t = run_exchange(&a, &b, &s).unwrap();
        assert_eq!(t.agreed.unwrap(), m.operation.lps(&base, &qa, &qb).unwrap().is_zero());
    }

    #[test]
    fn init_rejects_bad_secrets() {
        let (m, s) = setup(19);
        let f = m.field;
        let base = Vector::from_i64s(f, &[1, 1, 1]);
        let q = Vector::from_i64s(f, &[2, 0, 3]);
        assert!(init_session(&m, &s, &base, &[], &[q.clone()]).is_err());
        let other = Vector::from_i64s(f, &[0, 1, 2]);
        assert!(init_session(&m, &s, &base, &[q.clone(), other], &[q.clone()]).is_err());
        let base_in = Vector::from_i64s(f, &[4, 0, 1]);
        assert!(init_session(&m, &s, &base_in, &[q.clone()], &[q]).is_err());
    }

    #[test]
    fn redaction_hides_secrets() {
        let (m, s) = setup(23);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (a, b) = random_session(&m, &s, &mut rng, 3, 3).unwrap();
        let t = run_exchange(&a, &b, &s).unwrap();
        let view = eavesdropper_view(&t);
        assert_eq!(eavesdropper_view(&view), view);
        let text = view.to_json().to_string();
        assert!(!text.contains("s12") && !text.contains("secrets"));
        assert_eq!(view.to_json()["redacted"], Value::Bool(true));
        assert_eq!(view.public_messages[0].vector, a.base);
        assert_eq!(serde_json::to_value(&view.public_messages[1]).unwrap()["type"], "pub");
    }

    #[test]
    fn tiny_sessions_fall_to_brute_force() {
        let (m, s) = setup(5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b) = random_session(&m, &s, &mut rng, 2, 1).unwrap();
        let t = run_exchange(&a, &b, &s).unwrap();
        let r = brute_force_recovery(&m, &s, &eavesdropper_view(&t), 2).unwrap();
        let rec = r.recovered.unwrap();
        let shared = rec.iter().fold(t.s2.clone(), |acc, q| m.operation.mul(&acc, q));
        assert_eq!(Some(shared), t.s12);
    }
}
