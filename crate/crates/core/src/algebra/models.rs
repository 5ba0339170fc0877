use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::operation::AffineOperation;
use crate::algebra::symbolic::SymbolicOperation;
use crate::algebra::tensor::{check_dimension, MatrixFormulation, StructureTensor};
use crate::error::{Error, Result};
use crate::field::{sample_nonzero, FieldElement, FieldSpec, DEFAULT_RATIONAL_BOUND};
use crate::poly::{Indeterminate, Monomial, Polynomial};
use crate::strata::StrataRule;

pub const PARAM_NAMES: [&str; 6] = ["A", "B", "C", "D", "E", "F"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    Basic3,
    Parametric3,
    Parametric4,
    Nonlinear3,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::Basic3, Builtin::Parametric3, Builtin::Parametric4, Builtin::Nonlinear3];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Basic3 => "basic3",
            Builtin::Parametric3 => "parametric3",
            Builtin::Parametric4 => "parametric4",
            Builtin::Nonlinear3 => "nonlinear3",
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            Builtin::Parametric4 => 4,
            _ => 3,
        }
    }

    pub fn needs_params(self) -> bool {
        self != Builtin::Basic3
    }

    /// `(a*b)_k` for each `k`, in `a0..`, `b0..` and the parameters.
    pub fn component_formulas(self) -> &'static [&'static str] {
        match self {
            Builtin::Basic3 => &[
                "a0*b0 + (a1 + a2)*(b1 + b2)",
                "a1*b0 + (a0 + a2)*b1 - a1*b2",
                "a2*b0 - a2*b1 + (a0 + a1)*b2",
            ],
            Builtin::Parametric3 => &[
                "a0*b0 + A*a1*b1 + B*a2*b2 + C*a2*b1 + D*a1*b2",
                "a1*b0 + a0*b1 + E*a2*b1 - E*a1*b2",
                "a2*b0 + a0*b2 + F*a2*b1 - F*a1*b2",
            ],
            Builtin::Parametric4 => &[
                "a0*b0 + (A*a1 + E*a2)*b1 + (B*a2 + C*a1)*b2 - A*B*a3*b3",
                "a1*b0 + (a0 + F*a3)*b1 + B*a3*b2 + (D*a1 - B*a2)*b3",
                "a2*b0 - A*a3*b1 + (a0 + D*a3)*b2 + (A*a1 + F*a2)*b3",
                "a3*b0 - a2*b1 + a1*b2 + (a0 + (D + F)*a3)*b3",
            ],
            Builtin::Nonlinear3 => &[
                "a0 + b0 + a0*b0 + A*a1*b1 + C*a2*b1 + B*a2*b2 + D*a1*b2",
                "a1 + b1 + a0*b1 + a1*b0 + E*a2*b1 - E*a1*b2",
                "a2 + b2 + a0*b2 + a2*b0 + F*a1*b2 - F*a2*b1",
            ],
        }
    }

    /// Displayed coefficient matrix `M_a` (rows `k`, columns `j`), for the
    /// models defined by `a*b = M_a·b`.
    pub fn coefficient_matrix(self) -> Option<&'static [[&'static str; 4]]> {
        const BASIC3: [[&str; 4]; 3] = [
            ["a0", "a1 + a2", "a1 + a2", ""],
            ["a1", "a0 + a2", "-a1", ""],
            ["a2", "-a2", "a0 + a1", ""],
        ];
        const PARAMETRIC3: [[&str; 4]; 3] = [
            ["a0", "A*a1 + C*a2", "B*a2 + D*a1", ""],
            ["a1", "a0 + E*a2", "-E*a1", ""],
            ["a2", "F*a2", "a0 - F*a1", ""],
        ];
        const PARAMETRIC4: [[&str; 4]; 4] = [
            ["a0", "A*a1 + E*a2", "B*a2 + C*a1", "-A*B*a3"],
            ["a1", "a0 + F*a3", "B*a3", "-B*a2 + D*a1"],
            ["a2", "-A*a3", "a0 + D*a3", "A*a1 + F*a2"],
            ["a3", "-a2", "a1", "a0 + (D + F)*a3"],
        ];
        match self {
            Builtin::Basic3 => Some(&BASIC3),
            Builtin::Parametric3 => Some(&PARAMETRIC3),
            Builtin::Parametric4 => Some(&PARAMETRIC4),
            Builtin::Nonlinear3 => None,
        }
    }

    pub fn strata_rule(self) -> StrataRule {
        match self {
            Builtin::Parametric4 => StrataRule::RatioPair { coords: [1, 2, 3] },
            _ => StrataRule::Ratio { coords: [1, 2] },
        }
    }

    /// Operation with symbolic parameters `A..F`.
    pub fn symbolic(self) -> SymbolicOperation {
        let comps: Vec<Polynomial> = self
            .component_formulas()
            .iter()
            .map(|s| s.parse().expect("built-in formula parses"))
            .collect();
        SymbolicOperation::from_components(&comps).expect("built-in formula is affine")
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s.trim())
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Values for the parameters `A..F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamSet {
    values: [FieldElement; 6],
}

impl ParamSet {
    pub fn new(values: [FieldElement; 6]) -> Result<Self> {
        let f = values[0].field();
        if let Some(x) = values.iter().find(|x| x.field() != f) {
            return Err(Error::FieldMismatch(x.field().to_string(), f.to_string()));
        }
        Ok(ParamSet { values })
    }

    pub fn from_i64s(field: FieldSpec, v: [i64; 6]) -> Self {
        ParamSet { values: v.map(|x| field.from_i64(x)) }
    }

    /// Parses `"16,8,5,3,7,11"`.
    pub fn parse(field: FieldSpec, s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::ParseScalar(s.to_string(), "expected six comma-separated values A..F".into()));
        }
        let vals = parts.iter().map(|x| field.parse(x)).collect::<Result<Vec<_>>>()?;
        Ok(ParamSet { values: vals.try_into().expect("six values") })
    }

    pub fn field(&self) -> FieldSpec {
        self.values[0].field()
    }

    pub fn get(&self, name: &str) -> Option<&FieldElement> {
        PARAM_NAMES.iter().position(|n| *n == name).map(|i| &self.values[i])
    }

    pub fn values(&self) -> &[FieldElement; 6] {
        &self.values
    }

    /// Seeded parameters with every value nonzero and, when the field has
    /// six nonzero elements to spare, all six distinct.
    pub fn generic(field: FieldSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let need_distinct = field.modulus().is_none_or(|p| p > 6);
        loop {
            let vals: Vec<FieldElement> =
                (0..6).map(|_| sample_nonzero(field, &mut rng, DEFAULT_RATIONAL_BOUND)).collect();
            let distinct = !need_distinct || (0..6).all(|i| (i + 1..6).all(|j| vals[i] != vals[j]));
            if distinct {
                return ParamSet { values: vals.try_into().expect("six values") };
            }
        }
    }

    /// Bindings `A -> value` for symbolic substitution; residues bind to
    /// their integer representatives.
    pub fn bindings(&self) -> BTreeMap<Indeterminate, Polynomial> {
        PARAM_NAMES
            .iter()
            .zip(&self.values)
            .map(|(n, v)| (Indeterminate::new(n), Polynomial::constant(v.to_rational())))
            .collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.values.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_strings().join(","))
    }
}

/// A concrete model: an operation on `K^n` plus an optional declared
/// stratification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSpec {
    pub name: String,
    pub dimension: usize,
    pub field: FieldSpec,
    pub operation: AffineOperation,
    pub strata_rule: Option<StrataRule>,
    pub params: Option<ParamSet>,
    pub builtin: Option<Builtin>,
}

pub fn builtin_model(builtin: Builtin, params: Option<&ParamSet>, field: FieldSpec) -> Result<ModelSpec> {
    let sym = builtin.symbolic();
    let params = match (builtin.needs_params(), params) {
        (true, None) => return Err(Error::MissingParams(builtin.name().into())),
        (_, Some(p)) if p.field() != field => {
            return Err(Error::FieldMismatch(p.field().to_string(), field.to_string()))
        }
        (_, p) => p.cloned(),
    };
    let bound = match &params {
        Some(p) => sym.bind(&p.bindings()),
        None => sym,
    };
    let operation = bound.to_affine(field)?;
    Ok(ModelSpec {
        name: builtin.name().to_string(),
        dimension: builtin.dimension(),
        field,
        operation,
        strata_rule: Some(builtin.strata_rule()),
        params,
        builtin: Some(builtin),
    })
}

/// `M_a = Σ_s a_s E⁽ˢ⁾` for the matrix-defined built-ins, with parameters
/// bound.
pub fn builtin_matrix_formulation(
    builtin: Builtin,
    params: Option<&ParamSet>,
    field: FieldSpec,
) -> Result<Option<MatrixFormulation>> {
    let Some(rows) = builtin.coefficient_matrix() else { return Ok(None) };
    let n = builtin.dimension();
    let bindings = params.map(ParamSet::bindings).unwrap_or_default();
    let mut matrices = vec![vec![vec![field.zero(); n]; n]; n];
    for (k, row) in rows.iter().take(n).enumerate() {
        for (j, cell) in row.iter().take(n).enumerate() {
            let entry: Polynomial = cell.parse()?;
            let entry = entry.substitute(&bindings);
            for (s, e) in matrices.iter_mut().enumerate() {
                let var = Indeterminate::new(&format!("a{s}"));
                let vars = [var.clone()].into_iter().collect();
                let c = entry.coefficient_in(&vars, &Monomial::new([(var, 1)]));
                let c = c.as_constant().ok_or_else(|| Error::NonConstantCoefficient(c.to_string()))?;
                e[k][j] = field.from_rational(&c)?;
            }
        }
    }
    let functionals = (0..n).map(|s| (0..n).map(|i| field.from_i64((i == s) as i64)).collect()).collect();
    Ok(Some(MatrixFormulation { field, n, matrices, functionals }))
}

impl ModelSpec {
    pub fn from_operation(name: &str, operation: AffineOperation, strata_rule: Option<StrataRule>) -> Result<Self> {
        operation.validate()?;
        if let Some(rule) = &strata_rule {
            rule.validate(operation.dimension())?;
        }
        Ok(ModelSpec {
            name: name.to_string(),
            dimension: operation.dimension(),
            field: operation.field(),
            operation,
            strata_rule,
            params: None,
            builtin: None,
        })
    }

    /// Symbolic form. With `symbolic_params` a built-in keeps `A..F` as
    /// indeterminates; otherwise the bound coefficients are lifted.
    pub fn symbolic(&self, symbolic_params: bool) -> SymbolicOperation {
        match (self.builtin, symbolic_params) {
            (Some(b), true) => b.symbolic(),
            _ => SymbolicOperation::from_affine(&self.operation),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))?;
        ModelSpec::from_value(&value)
    }

    pub fn from_value(value: &Value) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::InvalidModel(e.to_string());
        if value.get("builtin").is_some() {
            let raw: BuiltinJson = serde_json::from_value(value.clone()).map_err(bad)?;
            let builtin: Builtin = raw.builtin.parse()?;
            let field = raw.field.unwrap_or(FieldSpec::Rationals);
            let params = raw.params.map(|p| p.resolve(field)).transpose()?;
            let mut model = builtin_model(builtin, params.as_ref(), field)?;
            if let Some(rule) = raw.strata_rule {
                rule.validate(model.dimension)?;
                model.strata_rule = Some(rule);
            }
            return Ok(model);
        }
        let raw: ModelJson = serde_json::from_value(value.clone()).map_err(bad)?;
        check_dimension(raw.dimension)?;
        let field = raw.field;
        let mut t = StructureTensor::new(field, raw.dimension)?;
        for e in &raw.operation.bilinear {
            t.add((e.i, e.j, e.k), &field.parse(&e.c)?)?;
        }
        let linear = |entries: &[LinearJson], first_is_i: bool| -> Result<BTreeMap<(usize, usize), FieldElement>> {
            let mut out: BTreeMap<(usize, usize), FieldElement> = BTreeMap::new();
            for e in entries {
                let idx = if first_is_i { e.i } else { e.j };
                let idx = idx.ok_or_else(|| {
                    Error::InvalidModel(format!("linear entry needs \"{}\"", if first_is_i { "i" } else { "j" }))
                })?;
                let c = field.parse(&e.c)?;
                let cur = out.remove(&(idx, e.k)).unwrap_or_else(|| field.zero());
                let next = &cur + &c;
                if !next.is_zero() {
                    out.insert((idx, e.k), next);
                }
            }
            Ok(out)
        };
        let operation = AffineOperation {
            bilinear: t,
            linear_a: linear(&raw.operation.linear_a, true)?,
            linear_b: linear(&raw.operation.linear_b, false)?,
        };
        let mut model = ModelSpec::from_operation(&raw.name, operation, raw.strata_rule)?;
        model.params = raw.params.map(|p| p.resolve(field)).transpose()?;
        Ok(model)
    }

    pub fn to_json_value(&self) -> Value {
        let c = |x: &FieldElement| x.to_string();
        let bilinear: Vec<Value> = self
            .operation
            .bilinear
            .entries()
            .map(|(&(i, j, k), x)| serde_json::json!({"i": i, "j": j, "k": k, "c": c(x)}))
            .collect();
        let la: Vec<Value> =
            self.operation.linear_a.iter().map(|(&(i, k), x)| serde_json::json!({"i": i, "k": k, "c": c(x)})).collect();
        let lb: Vec<Value> =
            self.operation.linear_b.iter().map(|(&(j, k), x)| serde_json::json!({"j": j, "k": k, "c": c(x)})).collect();
        let mut out = serde_json::json!({
            "name": self.name,
            "dimension": self.dimension,
            "field": self.field,
            "operation": {"bilinear": bilinear, "linear_a": la, "linear_b": lb},
        });
        if let Some(p) = &self.params {
            let m: serde_json::Map<String, Value> =
                PARAM_NAMES.iter().zip(p.to_strings()).map(|(n, v)| (n.to_string(), Value::String(v))).collect();
            out["params"] = Value::Object(m);
        }
        if let Some(r) = &self.strata_rule {
            out["strata_rule"] = serde_json::to_value(r).expect("rule serializes");
        }
        out
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BuiltinJson {
    builtin: String,
    #[serde(default)]
    params: Option<ParamsJson>,
    #[serde(default)]
    field: Option<FieldSpec>,
    #[serde(default)]
    strata_rule: Option<StrataRule>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ParamsJson {
    Named(BTreeMap<String, ScalarJson>),
    List(Vec<ScalarJson>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarJson {
    Text(String),
    Int(i64),
}

impl ScalarJson {
    fn text(&self) -> String {
        match self {
            ScalarJson::Text(s) => s.clone(),
            ScalarJson::Int(i) => i.to_string(),
        }
    }
}

impl ParamsJson {
    fn resolve(self, field: FieldSpec) -> Result<ParamSet> {
        let texts: Vec<String> = match self {
            ParamsJson::List(v) => v.iter().map(ScalarJson::text).collect(),
            ParamsJson::Named(m) => {
                if let Some(k) = m.keys().find(|k| !PARAM_NAMES.contains(&k.as_str())) {
                    return Err(Error::InvalidModel(format!("unknown parameter {k:?}")));
                }
                // unnamed parameters default to zero
                PARAM_NAMES.iter().map(|n| m.get(*n).map_or_else(|| "0".to_string(), ScalarJson::text)).collect()
            }
        };
        ParamSet::parse(field, &texts.join(","))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    name: String,
    dimension: usize,
    field: FieldSpec,
    operation: OperationJson,
    #[serde(default)]
    params: Option<ParamsJson>,
    #[serde(default)]
    strata_rule: Option<StrataRule>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OperationJson {
    #[serde(default)]
    bilinear: Vec<BilinearJson>,
    #[serde(default)]
    linear_a: Vec<LinearJson>,
    #[serde(default)]
    linear_b: Vec<LinearJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BilinearJson {
    i: usize,
    j: usize,
    k: usize,
    c: String,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct LinearJson {
    #[serde(default)]
    i: Option<usize>,
    #[serde(default)]
    j: Option<usize>,
    k: usize,
    c: String,
}
