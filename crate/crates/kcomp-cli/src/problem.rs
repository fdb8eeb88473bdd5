//! Problem-file schema, canonical digests, and the runtime system model.
//!
//! A problem names exactly one system source (inline matrix literal, matrix
//! expression over `t`, or a named builtin), a task, and task parameters.
//! Flags and files funnel into the same canonical form, so the report digest
//! is independent of how the problem was supplied.

use crate::expr::{parse_matrix_expression, parse_scalar_expression, Expr};
use kcomp::dynamics::{example5_system, example8_matrix, example8_system, thomas_system, SystemDef};
use kcomp::matrix::DenseMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Tasks that a problem file may request.
pub const TASKS: [&str; 5] = ["compound", "measure", "certify", "simulate", "trace"];

/// Named builtin systems.
pub const BUILTINS: [&str; 3] = ["thomas", "example5", "example8"];

/// System source: exactly one of the three fields must be present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    /// Inline matrix literal; entries are numbers or expression strings.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Value>>>,
    /// Whole matrix as one expression string, `[[a,b],[c,d]]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix_expr: Option<String>,
    /// Named builtin system.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
}

/// On-disk problem description (schema version 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    /// Always 1.
    pub schema_version: u32,
    /// The system under study.
    pub system: SystemSpec,
    /// Requested task, one of [`TASKS`].
    pub task: String,
    /// Task-specific parameters.
    #[serde(default)]
    pub parameters: Map<String, Value>,
}

impl ProblemFile {
    /// Structural validation: version, task name, exactly one system source.
    pub fn validate(&self) -> Result<(), String> {
        if self.schema_version != 1 {
            return Err(format!(
                "unsupported schema_version {} (expected 1)",
                self.schema_version
            ));
        }
        if !TASKS.contains(&self.task.as_str()) {
            return Err(format!(
                "unknown task '{}' (expected one of {})",
                self.task,
                TASKS.join(", ")
            ));
        }
        let sources = [
            self.system.matrix.is_some(),
            self.system.matrix_expr.is_some(),
            self.system.builtin.is_some(),
        ]
        .iter()
        .filter(|&&p| p)
        .count();
        if sources != 1 {
            return Err(format!(
                "exactly one of system.matrix, system.matrix_expr, system.builtin \
                 must be given ({sources} present)"
            ));
        }
        if let Some(name) = &self.system.builtin {
            if !BUILTINS.contains(&name.as_str()) {
                return Err(format!(
                    "unknown builtin '{name}' (expected one of {})",
                    BUILTINS.join(", ")
                ));
            }
        }
        Ok(())
    }
}

/// SHA-256 hex digest of the canonical (defaults-applied) problem JSON.
pub fn input_digest(problem: &ProblemFile) -> String {
    let json = serde_json::to_string(problem).expect("problem files always serialize");
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// A system source resolved into something the tasks can evaluate.
#[derive(Debug)]
pub enum RuntimeSystem {
    /// Matrix of scalar expressions over `t` (constant when none mention `t`).
    Matrix {
        /// Entry expressions, row-major.
        rows: Vec<Vec<Expr>>,
        /// True when any entry mentions `t`.
        time_dependent: bool,
    },
    /// The three-state cyclically symmetric benchmark with linear feedback.
    Thomas {
        /// Damping parameter (positive).
        b: f64,
        /// Feedback gain applied to the first two states.
        c: f64,
    },
    /// The built-in 2x2 time-varying demo system.
    Example5,
    /// The built-in constant 3x3 demo matrix / LTI system.
    Example8,
}

impl RuntimeSystem {
    /// Resolves a validated system spec against the task parameters.
    pub fn from_spec(spec: &SystemSpec, params: &Map<String, Value>) -> Result<Self, String> {
        if let Some(name) = &spec.builtin {
            if name != "thomas" && (params.contains_key("b") || params.contains_key("c")) {
                return Err("parameters b and c apply only to the 'thomas' builtin".to_string());
            }
            return match name.as_str() {
                "thomas" => Ok(RuntimeSystem::Thomas {
                    b: opt_f64(params, "b")?.unwrap_or(0.1),
                    c: opt_f64(params, "c")?.unwrap_or(0.0),
                }),
                "example5" => Ok(RuntimeSystem::Example5),
                "example8" => Ok(RuntimeSystem::Example8),
                other => Err(format!("unknown builtin '{other}'")),
            };
        }
        if params.contains_key("b") || params.contains_key("c") {
            return Err("parameters b and c apply only to the 'thomas' builtin".to_string());
        }
        let rows: Vec<Vec<Expr>> = if let Some(literal) = &spec.matrix {
            if literal.is_empty() || literal[0].is_empty() {
                return Err("matrix literal must be non-empty".to_string());
            }
            let width = literal[0].len();
            let mut rows = Vec::with_capacity(literal.len());
            for (i, row) in literal.iter().enumerate() {
                if row.len() != width {
                    return Err(format!(
                        "ragged matrix literal: row {} has {} entries, expected {width}",
                        i + 1,
                        row.len()
                    ));
                }
                let mut out = Vec::with_capacity(width);
                for (j, entry) in row.iter().enumerate() {
                    let expr = match entry {
                        Value::Number(num) => Expr::Num(
                            num.as_f64()
                                .ok_or_else(|| format!("entry ({},{}) is not a float", i + 1, j + 1))?,
                        ),
                        Value::String(text) => parse_scalar_expression(text)
                            .map_err(|e| format!("matrix entry ({},{}): {e}", i + 1, j + 1))?,
                        other => {
                            return Err(format!(
                                "matrix entry ({},{}) must be a number or an expression string, \
                                 got {other}",
                                i + 1,
                                j + 1
                            ))
                        }
                    };
                    out.push(expr);
                }
                rows.push(out);
            }
            rows
        } else if let Some(text) = &spec.matrix_expr {
            parse_matrix_expression(text).map_err(|e| format!("matrix_expr: {e}"))?
        } else {
            return Err("no system source present".to_string());
        };
        let time_dependent = rows.iter().flatten().any(|e| e.depends_on_t());
        Ok(RuntimeSystem::Matrix { rows, time_dependent })
    }

    /// Shape of the evaluated matrix.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            RuntimeSystem::Matrix { rows, .. } => (rows.len(), rows[0].len()),
            RuntimeSystem::Thomas { .. } | RuntimeSystem::Example8 => (3, 3),
            RuntimeSystem::Example5 => (2, 2),
        }
    }

    /// True when the evaluated matrix varies with `t`.
    pub fn is_time_dependent(&self) -> bool {
        match self {
            RuntimeSystem::Matrix { time_dependent, .. } => *time_dependent,
            RuntimeSystem::Example5 => true,
            _ => false,
        }
    }

    /// True when the matrix is a state-dependent Jacobian (nonlinear system).
    pub fn is_state_dependent(&self) -> bool {
        matches!(self, RuntimeSystem::Thomas { .. })
    }

    /// Evaluates the system matrix at time `t` and state `x`.
    ///
    /// For matrix sources `x` is ignored; for the nonlinear builtin the
    /// result is the Jacobian of the vector field at `x`.
    pub fn matrix_at(&self, t: f64, x: &[f64]) -> kcomp::Result<DenseMatrix> {
        match self {
            RuntimeSystem::Matrix { rows, .. } => crate::expr::evaluate_matrix(rows, t),
            RuntimeSystem::Thomas { b, c } => thomas_system(*b, *c)?.jacobian_at(t, x),
            RuntimeSystem::Example5 => example5_system().coefficient(t),
            RuntimeSystem::Example8 => Ok(example8_matrix()),
        }
    }

    /// Builds the ODE system `x' = A(t) x` (matrix sources) or the builtin.
    pub fn system_def(&self) -> kcomp::Result<SystemDef> {
        match self {
            RuntimeSystem::Matrix { rows, .. } => {
                let n = rows.len();
                if rows[0].len() != n {
                    return Err(kcomp::Error::domain(format!(
                        "simulation needs a square matrix, got {}x{}",
                        n,
                        rows[0].len()
                    )));
                }
                let rows = rows.clone();
                Ok(SystemDef::ltv(
                    n,
                    Box::new(move |t| {
                        // Build without the finiteness check: a non-finite
                        // coefficient must flow to the integrator's blow-up
                        // detection instead of panicking here.
                        let mut m = DenseMatrix::zeros(n, n);
                        for (i, row) in rows.iter().enumerate() {
                            for (j, e) in row.iter().enumerate() {
                                m.set(i, j, e.eval(t));
                            }
                        }
                        m
                    }),
                ))
            }
            RuntimeSystem::Thomas { b, c } => thomas_system(*b, *c),
            RuntimeSystem::Example5 => Ok(example5_system()),
            RuntimeSystem::Example8 => Ok(example8_system()),
        }
    }
}

/// Reads an optional f64 parameter.
pub fn opt_f64(params: &Map<String, Value>, key: &str) -> Result<Option<f64>, String> {
    match params.get(key) {
        None => Ok(None),
        Some(Value::Number(num)) => num
            .as_f64()
            .map(Some)
            .ok_or_else(|| format!("parameter '{key}' is not representable as a float")),
        Some(other) => Err(format!("parameter '{key}' must be a number, got {other}")),
    }
}

/// Reads an optional non-negative integer parameter.
pub fn opt_usize(params: &Map<String, Value>, key: &str) -> Result<Option<usize>, String> {
    match params.get(key) {
        None => Ok(None),
        Some(Value::Number(num)) => num
            .as_u64()
            .map(|v| Some(v as usize))
            .ok_or_else(|| format!("parameter '{key}' must be a non-negative integer")),
        Some(other) => Err(format!("parameter '{key}' must be an integer, got {other}")),
    }
}

/// Reads an optional string parameter.
pub fn opt_string(params: &Map<String, Value>, key: &str) -> Result<Option<String>, String> {
    match params.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(other) => Err(format!("parameter '{key}' must be a string, got {other}")),
    }
}

/// Reads an optional boolean parameter.
pub fn opt_bool(params: &Map<String, Value>, key: &str) -> Result<Option<bool>, String> {
    match params.get(key) {
        None => Ok(None),
        Some(Value::Bool(b)) => Ok(Some(*b)),
        Some(other) => Err(format!("parameter '{key}' must be a boolean, got {other}")),
    }
}

/// Reads an optional array-of-numbers parameter.
pub fn opt_f64_array(params: &Map<String, Value>, key: &str) -> Result<Option<Vec<f64>>, String> {
    match params.get(key) {
        None => Ok(None),
        Some(Value::Array(items)) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    Value::Number(num) => out.push(
                        num.as_f64()
                            .ok_or_else(|| format!("parameter '{key}' holds a non-float"))?,
                    ),
                    other => {
                        return Err(format!(
                            "parameter '{key}' must be an array of numbers, got element {other}"
                        ))
                    }
                }
            }
            Ok(Some(out))
        }
        Some(other) => Err(format!("parameter '{key}' must be an array, got {other}")),
    }
}

/// Reads an optional `[a, b]` span parameter with `a < b`.
pub fn opt_span(params: &Map<String, Value>, key: &str) -> Result<Option<(f64, f64)>, String> {
    match opt_f64_array(params, key)? {
        None => Ok(None),
        Some(v) if v.len() == 2 && v[0] < v[1] => Ok(Some((v[0], v[1]))),
        Some(v) => Err(format!(
            "parameter '{key}' must be a two-element array [a, b] with a < b, got {v:?}"
        )),
    }
}

/// Rejects parameter keys outside the allowed set for a task.
pub fn reject_unknown_keys(params: &Map<String, Value>, allowed: &[&str]) -> Result<(), String> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(format!(
                "unknown parameter '{key}' (allowed here: {})",
                allowed.join(", ")
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn problem(value: Value) -> ProblemFile {
        serde_json::from_value(value).unwrap()
    }

    #[test]
    fn validation_requires_exactly_one_source() {
        let ok = problem(json!({
            "schema_version": 1,
            "system": {"builtin": "example8"},
            "task": "compound",
            "parameters": {"k": 2, "kind": "additive"}
        }));
        assert!(ok.validate().is_ok());

        let two = problem(json!({
            "schema_version": 1,
            "system": {"builtin": "example8", "matrix": [[0]]},
            "task": "compound"
        }));
        assert!(two.validate().unwrap_err().contains("exactly one"));

        let none = problem(json!({
            "schema_version": 1,
            "system": {},
            "task": "compound"
        }));
        assert!(none.validate().unwrap_err().contains("exactly one"));

        let version = problem(json!({
            "schema_version": 2,
            "system": {"builtin": "example8"},
            "task": "compound"
        }));
        assert!(version.validate().unwrap_err().contains("schema_version"));

        let task = problem(json!({
            "schema_version": 1,
            "system": {"builtin": "example8"},
            "task": "prove"
        }));
        assert!(task.validate().unwrap_err().contains("unknown task"));

        let builtin = problem(json!({
            "schema_version": 1,
            "system": {"builtin": "lorenz"},
            "task": "simulate"
        }));
        assert!(builtin.validate().unwrap_err().contains("unknown builtin"));
    }

    #[test]
    fn digest_is_stable_and_source_sensitive() {
        let a = problem(json!({
            "schema_version": 1,
            "system": {"builtin": "example8"},
            "task": "compound",
            "parameters": {"k": 2, "kind": "additive"}
        }));
        let d1 = input_digest(&a);
        let d2 = input_digest(&a.clone());
        assert_eq!(d1, d2);
        assert_eq!(d1.len(), 64);

        let b = problem(json!({
            "schema_version": 1,
            "system": {"builtin": "example8"},
            "task": "compound",
            "parameters": {"k": 3, "kind": "additive"}
        }));
        assert_ne!(d1, input_digest(&b));

        // Key order in the file must not matter: the map is sorted on
        // serialization.
        let c = problem(json!({
            "schema_version": 1,
            "system": {"builtin": "example8"},
            "task": "compound",
            "parameters": {"kind": "additive", "k": 2}
        }));
        assert_eq!(d1, input_digest(&c));
    }

    #[test]
    fn matrix_literals_accept_numbers_and_expression_strings() {
        let spec: SystemSpec =
            serde_json::from_value(json!({"matrix": [[-1, 0], ["-2*cos(t)", 0]]})).unwrap();
        let sys = RuntimeSystem::from_spec(&spec, &Map::new()).unwrap();
        assert!(sys.is_time_dependent());
        let at0 = sys.matrix_at(0.0, &[]).unwrap();
        assert_eq!(at0.to_rows(), vec![vec![-1.0, 0.0], vec![-2.0, 0.0]]);

        let bad: SystemSpec =
            serde_json::from_value(json!({"matrix": [[-1, 0], ["-2*cos(q)", 0]]})).unwrap();
        let err = RuntimeSystem::from_spec(&bad, &Map::new()).unwrap_err();
        assert!(err.contains("(2,1)"), "{err}");
        assert!(err.contains("unknown identifier"), "{err}");
    }

    #[test]
    fn thomas_builtin_reads_its_parameters() {
        let spec: SystemSpec = serde_json::from_value(json!({"builtin": "thomas"})).unwrap();
        let mut params = Map::new();
        params.insert("b".to_string(), json!(0.2));
        params.insert("c".to_string(), json!(-0.5));
        let sys = RuntimeSystem::from_spec(&spec, &params).unwrap();
        let jac = sys.matrix_at(0.0, &[0.0, 0.0, 0.0]).unwrap();
        // Diagonal of the closed-loop Jacobian at the origin: c-b, c-b, -b.
        assert_eq!(jac.get(0, 0), -0.7);
        assert_eq!(jac.get(1, 1), -0.7);
        assert_eq!(jac.get(2, 2), -0.2);

        let literal: SystemSpec = serde_json::from_value(json!({"matrix": [[0]]})).unwrap();
        let err = RuntimeSystem::from_spec(&literal, &params).unwrap_err();
        assert!(err.contains("thomas"), "{err}");
    }

    #[test]
    fn nonfinite_coefficients_surface_as_integration_blowup() {
        let spec: SystemSpec =
            serde_json::from_value(json!({"matrix_expr": "[[exp(exp(t))]]"})).unwrap();
        let sys = RuntimeSystem::from_spec(&spec, &Map::new()).unwrap();
        let def = sys.system_def().unwrap();
        let err = kcomp::dynamics::integrate(&def, &[1.0], (0.0, 10.0), 0.05).unwrap_err();
        assert!(matches!(err, kcomp::Error::Blowup { .. }), "{err}");
    }
}
