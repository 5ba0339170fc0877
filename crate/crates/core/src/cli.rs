//! Command-line surface. [`run`] parses arguments, dispatches and returns
//! the exit code: 0 when the checked property holds, 1 when it fails,
//! 2 for usage or parse errors.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::algebra::models::{builtin_model, Builtin, ModelSpec, ParamSet};
use crate::algebra::vector::Vector;
use crate::axioms::{
    case_analysis, verify_axioms, verify_identity_suite, IdentityStatus, SamplingMode, SamplingPlan, Verdict,
};
use crate::dynamics::{chain_path, orbit, transition_graph};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::kex::{brute_force_recovery, eavesdropper_view, random_session, run_exchange};
use crate::strata::{ratio_partition, Provenance, Strata, StratumPartition};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "stratified", version, about = "Stratified algebra toolkit: axiom checks, strata, dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Structure-tensor associativity check for bilinear models.
    CheckAssoc(ModelArgs),
    /// Verify SA1-SA4 and classify the model.
    Axioms(AxiomArgs),
    /// Stratify F_p^n by the declared rule or by commutant discovery.
    Strata(StrataArgs),
    /// Trace an orbit, a chain path, or the stratum transition graph.
    Orbit(OrbitArgs),
    /// Simulate the toy key exchange.
    Kex(KexArgs),
    /// Compare the closed-form identities with direct expansion.
    Identities(ModelArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Built-in model name (basic3, parametric3, parametric4, nonlinear3).
    name: Option<String>,
    #[arg(long)]
    builtin: Option<String>,
    /// JSON model file.
    #[arg(long)]
    model: Option<String>,
    /// Parameters A,B,C,D,E,F; seeded generic values when omitted.
    #[arg(long)]
    params: Option<String>,
    /// Scalar field: q or fp:P.
    #[arg(long)]
    field: Option<String>,
    /// Shorthand for --field fp:P.
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long)]
    json: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
struct AxiomArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Use commutant-discovered strata instead of the declared rule.
    #[arg(long)]
    discover: bool,
    /// Prove SA1 and the SA3 LPS clause symbolically where possible.
    #[arg(long)]
    symbolic: bool,
    /// Enumerate every stratum for SA1 when the field is small.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, default_value_t = 5)]
    chain_max: usize,
    /// Append the five-case analysis.
    #[arg(long)]
    cases: bool,
}

#[derive(Args, Debug)]
struct StrataArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    discover: bool,
    /// List every member, however large the strata.
    #[arg(long)]
    full: bool,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Start vector, comma separated; random when omitted.
    #[arg(long)]
    start: Option<String>,
    /// Fixed multiplier; random from another stratum when omitted.
    #[arg(long)]
    q: Option<String>,
    /// Multipliers for a chain path, separated by ';'.
    #[arg(long)]
    multipliers: Option<String>,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long)]
    discover: bool,
    /// Emit the stratum transition graph in DOT.
    #[arg(long)]
    dot: bool,
    /// Emit the stratum transition graph as JSON.
    #[arg(long)]
    graph: bool,
}

#[derive(Args, Debug)]
struct KexArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Secret lengths for both sides, e.g. 3,4.
    #[arg(long, default_value = "3,3")]
    len: String,
    #[arg(long, default_value_t = 1)]
    sessions: usize,
    /// Print only what an eavesdropper sees.
    #[arg(long)]
    redacted: bool,
    /// Try to recover Alice's secret from public data (tiny fields only).
    #[arg(long)]
    brute_force: bool,
}

/// Parses `args` (including the program name), runs the command and
/// writes the report to `out` or the `--output` file.
pub fn run<I, T, W, E>(args: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let output = match &cli.command {
        Command::CheckAssoc(m) | Command::Identities(m) => m.output.clone(),
        Command::Axioms(a) => a.model.output.clone(),
        Command::Strata(a) => a.model.output.clone(),
        Command::Orbit(a) => a.model.output.clone(),
        Command::Kex(a) => a.model.output.clone(),
    };
    match dispatch(cli.command) {
        Ok((code, text)) => {
            let written = match output {
                Some(path) => std::fs::write(&path, &text).map_err(|e| e.to_string()),
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_USAGE
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command) -> Result<(i32, String)> {
    match cmd {
        Command::CheckAssoc(m) => cmd_check_assoc(&m),
        Command::Axioms(a) => cmd_axioms(&a),
        Command::Strata(a) => cmd_strata(&a),
        Command::Orbit(a) => cmd_orbit(&a),
        Command::Kex(a) => cmd_kex(&a),
        Command::Identities(m) => cmd_identities(&m),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json renders");
    s.push('\n');
    s
}

impl ModelArgs {
    fn field(&self) -> Result<FieldSpec> {
        match (&self.field, self.p) {
            (Some(_), Some(_)) => Err(Error::Precondition("give either --field or --p".into())),
            (Some(f), None) => f.parse(),
            (None, Some(p)) => FieldSpec::prime(p),
            (None, None) => Ok(FieldSpec::Rationals),
        }
    }

    fn plan(&self) -> SamplingPlan {
        SamplingPlan::randomized(self.samples, self.seed)
    }

    fn load(&self) -> Result<ModelSpec> {
        let name = match (&self.name, &self.builtin, &self.model) {
            (Some(n), None, None) | (None, Some(n), None) => n,
            (None, None, Some(path)) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidModel(format!("{path}: {e}")))?;
                let m = ModelSpec::from_json(&text)?;
                if (self.field.is_some() || self.p.is_some())
                    && self.field()? != m.field {
                        return Err(Error::FieldMismatch(self.field()?.to_string(), m.field.to_string()));
                    }
                return Ok(m);
            }
            (None, None, None) => return Err(Error::Precondition("no model given; name a built-in or pass --model".into())),
            _ => return Err(Error::Precondition("give exactly one model source".into())),
        };
        let builtin: Builtin = name.parse()?;
        let field = self.field()?;
        let params = match (&self.params, builtin.needs_params()) {
            (Some(s), _) => Some(ParamSet::parse(field, s)?),
            (None, true) => Some(ParamSet::generic(field, self.seed)),
            (None, false) => None,
        };
        builtin_model(builtin, params.as_ref(), field)
    }
}

fn model_header(m: &ModelSpec) -> Value {
    json!({
        "name": m.name,
        "field": m.field,
        "params": m.params.as_ref().map(|p| p.to_strings()),
    })
}

fn cmd_check_assoc(args: &ModelArgs) -> Result<(i32, String)> {
    let m = args.load()?;
    let mismatches = m.operation.associativity_mismatches()?;
    let code = if mismatches.is_empty() { EXIT_PASS } else { EXIT_FAIL };
    if args.json {
        let list: Vec<Value> = mismatches
            .iter()
            .map(|x| json!({"index": [x.index.0, x.index.1, x.index.2, x.index.3], "lhs": x.lhs, "rhs": x.rhs}))
            .collect();
        let v = json!({"model": model_header(&m), "associative": mismatches.is_empty(), "mismatches": list});
        return Ok((code, pretty(&v)));
    }
    let mut text = String::new();
    if mismatches.is_empty() {
        text.push_str("The operation is associative.\n");
    } else {
        text.push_str(&format!("The operation is not associative. {} mismatches found:\n", mismatches.len()));
        for x in &mismatches {
            text.push_str(&format!("  {x}\n"));
        }
    }
    Ok((code, text))
}

fn strata_for(m: &ModelSpec, discover: bool) -> Result<Strata> {
    Strata::for_model(m, discover)
}

fn cmd_axioms(a: &AxiomArgs) -> Result<(i32, String)> {
    let m = a.model.load()?;
    let strata = strata_for(&m, a.discover)?;
    let mode = match (a.symbolic, a.exhaustive) {
        (true, true) => return Err(Error::Precondition("choose one of --symbolic and --exhaustive".into())),
        (true, false) => SamplingMode::Symbolic,
        (false, true) => SamplingMode::Exhaustive,
        (false, false) => SamplingMode::Randomized,
    };
    let plan = SamplingPlan { chain_length_max: a.chain_max, ..a.model.plan().with_mode(mode) };
    let report = verify_axioms(&m, &strata, &plan)?;
    let cases = if a.cases { Some(case_analysis(&m, &strata, &plan)?) } else { None };
    let failed = report.verdicts().contains(&Verdict::Fails);
    let code = if failed { EXIT_FAIL } else { EXIT_PASS };
    if a.model.json {
        let mut v = report.to_json();
        v["params"] = json!(m.params.as_ref().map(|p| p.to_strings()));
        if let Some(c) = &cases {
            v["cases"] = serde_json::to_value(c).expect("cases serialize");
        }
        return Ok((code, pretty(&v)));
    }
    let mut text = report.render();
    if let Some(p) = &m.params {
        text.push_str(&format!("params: {p}\n"));
    }
    if let Some(c) = cases {
        for case in &c.cases {
            text.push_str(&format!("case {} ({}): {}\n", case.case, case.setting, case.verdict()));
            for o in &case.observations {
                text.push_str(&format!("     {o}\n"));
            }
        }
    }
    Ok((code, text))
}

fn partition_for(m: &ModelSpec, discover: bool) -> Result<StratumPartition> {
    let p = m.field.modulus().ok_or(Error::RequiresPrimeField)?;
    match strata_for(m, discover)? {
        Strata::Partition(part) => Ok(part),
        Strata::Declared { rule, n, .. } => ratio_partition(&rule, p, n),
    }
}

fn cmd_strata(a: &StrataArgs) -> Result<(i32, String)> {
    let m = a.model.load()?;
    let part = partition_for(&m, a.discover)?;
    if a.model.json {
        let mut v = part.to_json(a.full);
        v["model"] = model_header(&m);
        v["seed"] = json!(a.model.seed);
        return Ok((EXIT_PASS, pretty(&v)));
    }
    let source = match part.provenance() {
        Provenance::DeclaredRatio => "declared ratio rule",
        Provenance::Discovered => "commutant discovery",
    };
    let mut text = format!("{} over {} by {}: {} strata\n", m.name, m.field, source, part.len());
    if let Some(p) = &m.params {
        text.push_str(&format!("params: {p} (seed {})\n", a.model.seed));
    }
    for (l, size) in part.labels().iter().zip(part.sizes()) {
        text.push_str(&format!("  {l:<12} {size}\n"));
    }
    text.push_str(&format!("exceptional: {}\n", part.exceptional_count()));
    if a.full {
        for v in part.exceptional() {
            text.push_str(&format!("  {v}\n"));
        }
    }
    Ok((EXIT_PASS, text))
}

fn cmd_orbit(a: &OrbitArgs) -> Result<(i32, String)> {
    let m = a.model.load()?;
    let strata = strata_for(&m, a.discover)?;
    let plan = a.model.plan();
    if a.dot || a.graph {
        let g = transition_graph(&m.operation, &strata, &plan)?;
        let text = if a.dot { g.to_dot() } else { pretty(&g.to_json()) };
        return Ok((EXIT_PASS, text));
    }
    let f = m.field;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.stream(400));
    let labels = strata.sample_distinct_labels(&mut rng, 2)?;
    let start = match &a.start {
        Some(s) => Vector::parse(f, s)?,
        None => strata.sample_member(&labels[0], &mut rng)?,
    };
    let t = match &a.multipliers {
        Some(list) => {
            let ms = list.split(';').map(|s| Vector::parse(f, s)).collect::<Result<Vec<_>>>()?;
            chain_path(&m.operation, &start, &ms, &strata)?
        }
        None => {
            let q = match &a.q {
                Some(s) => Vector::parse(f, s)?,
                None => strata.sample_member(&labels[1], &mut rng)?,
            };
            orbit(&m.operation, &start, &q, a.steps, &strata)?
        }
    };
    if a.model.json {
        return Ok((EXIT_PASS, format!("{}\n", t.to_json_line())));
    }
    let mut text = format!("{} over {} (seed {})\n", m.name, m.field, a.model.seed);
    for (k, s) in t.steps.iter().enumerate() {
        let label = s.label.as_deref().unwrap_or("-");
        text.push_str(&format!("{k:>4}  {:<24} {label}\n", s.value.to_string()));
    }
    if let Some(c) = t.cycle {
        text.push_str(&format!("cycle: enters at step {}, period {}\n", c.entry, c.period));
    }
    if t.truncated_at_zero {
        text.push_str("stopped at the zero vector\n");
    }
    Ok((EXIT_PASS, text))
}

fn cmd_kex(a: &KexArgs) -> Result<(i32, String)> {
    let m = a.model.load()?;
    let strata = strata_for(&m, false)?;
    let lens: Vec<usize> = a
        .len
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::ParseScalar(a.len.clone(), "expected lengths like 3,4".into())))
        .collect::<Result<_>>()?;
    let (la, lb) = match lens.as_slice() {
        [x] => (*x, *x),
        [x, y] => (*x, *y),
        _ => return Err(Error::ParseScalar(a.len.clone(), "expected one or two lengths".into())),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.model.seed);
    let mut all_agreed = true;
    let mut text = String::new();
    let mut json_lines = Vec::new();
    for k in 0..a.sessions.max(1) {
        let (alice, bob) = random_session(&m, &strata, &mut rng, la, lb)?;
        let t = run_exchange(&alice, &bob, &strata)?;
        let agreed = t.agreed == Some(true);
        all_agreed &= agreed;
        let shown = if a.redacted { eavesdropper_view(&t) } else { t.clone() };
        let mut v = shown.to_json();
        v["session"] = json!(k);
        v["seed"] = json!(a.model.seed);
        if a.brute_force {
            let r = brute_force_recovery(&m, &strata, &t, la.min(2))?;
            v["brute_force"] = serde_json::to_value(&r).expect("report serializes");
        }
        if a.model.json {
            json_lines.push(serde_json::to_string(&v).expect("json renders"));
            continue;
        }
        text.push_str(&format!("session {k}: {} over {}, secret stratum {}\n", t.model, t.field, t.secret_stratum));
        for msg in &shown.public_messages {
            text.push_str(&format!("  pub {:<6} {}\n", msg.sender, msg.vector));
        }
        if !a.redacted {
            let s12 = t.s12.as_ref().map(|v| v.to_string()).unwrap_or_default();
            text.push_str(&format!("  S12 = S21 = {s12}\n"));
            text.push_str(if agreed { "  AGREED\n" } else { "  DISAGREED\n" });
        }
        if let Some(r) = v.get("brute_force") {
            text.push_str(&format!("  brute force: {r}\n"));
        }
    }
    let code = if all_agreed { EXIT_PASS } else { EXIT_FAIL };
    if a.model.json {
        let mut s = json_lines.join("\n");
        s.push('\n');
        return Ok((code, s));
    }
    Ok((code, text))
}

fn cmd_identities(args: &ModelArgs) -> Result<(i32, String)> {
    let m = args.load()?;
    let results = verify_identity_suite(&m)?;
    let differs = results.iter().any(|r| r.status == IdentityStatus::Differs || !r.spot_checks_agree);
    let code = if differs { EXIT_FAIL } else { EXIT_PASS };
    if args.json {
        let v = json!({"model": m.name, "identities": results});
        return Ok((code, pretty(&v)));
    }
    let mut text = format!("identities for {} (parameters symbolic)\n", m.name);
    for r in &results {
        let status = match r.status {
            IdentityStatus::Matches => "matches".to_string(),
            IdentityStatus::MatchesUnderCondition => {
                format!("matches when {}", r.condition.as_deref().unwrap_or("?"))
            }
            IdentityStatus::Differs => "DIFFERS".to_string(),
        };
        text.push_str(&format!("  {:<58} {status}\n", r.name));
        if r.status != IdentityStatus::Matches {
            for (k, d) in r.difference.iter().enumerate() {
                text.push_str(&format!("      component {k}: direct - display = {d}\n"));
            }
        }
    }
    Ok((code, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("stratified").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn check_assoc_outputs() {
        let (code, out, _) = call(&["check-assoc", "basic3"]);
        assert_eq!((code, out.as_str()), (0, "The operation is associative.\n"));
        let (code, out, _) = call(&["check-assoc", "parametric3", "--params", "16,8,5,3,7,11"]);
        assert_eq!(code, 1);
        assert!(out.starts_with("The operation is not associative. 16 mismatches found:\n  (i,j,k,l)=(1,1,2,0): 0 != -145\n"));
        let (code, _, err) = call(&["check-assoc", "nonlinear3", "--p", "19"]);
        assert_eq!(code, 2);
        assert!(err.contains("axioms"));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&["check-assoc"]).0, 2);
        assert_eq!(call(&["check-assoc", "nosuch"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["check-assoc", "basic3", "--field", "fp:4"]).0, 2);
    }

    #[test]
    fn strata_counts() {
        let (code, out, _) = call(&["strata", "nonlinear3", "--p", "5", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["strata"].as_array().unwrap().len(), 6);
    }
}
