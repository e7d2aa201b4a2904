//! JSON run configuration.
//!
//! Every field error names its dotted path (`operator.lambda.exponent`);
//! syntax errors carry the line and column reported by the parser.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "operator": { "n_modes": 64, "horizon": 1.0,
//!                 "lambda": { "rule": "power", "exponent": 2 }, "b": 1.0 },
//!   "noise": { "kind": "series",
//!              "law": { "type": "stable", "alpha": 1.5, "scale": 1.0 } },
//!   "grid": { "steps": 100 },
//!   "experiment": { "cf": { "v": [1.0], "t": 1.0, "samples": 100000 } }
//! }
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value;

use crate::noise::{ComponentLaw, CylindricalNoiseSpec};
use crate::semigroup::{SequenceRule, SpectralOperatorPair};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config field `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

/// A JSON value together with its path from the root.
#[derive(Debug, Clone, Copy)]
pub struct Node<'a> {
    value: &'a Value,
    path: &'a str,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl<'a> Node<'a> {
    pub fn root(value: &'a Value) -> Self {
        Self { value, path: "" }
    }

    pub fn new(value: &'a Value, path: &'a str) -> Self {
        Self { value, path }
    }

    pub fn path(&self) -> &str {
        self.path
    }

    pub fn value(&self) -> &'a Value {
        self.value
    }

    pub fn error(&self, message: impl Into<String>) -> ConfigError {
        ConfigError {
            path: self.path.to_string(),
            message: message.into(),
        }
    }

    fn child_error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            path: join(self.path, key),
            message: message.into(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&'a Value> {
        self.value.as_object().and_then(|m| m.get(key))
    }

    pub fn require(&self, key: &str) -> ConfigResult<&'a Value> {
        if !self.value.is_object() {
            return Err(self.error("expected an object"));
        }
        self.get(key).ok_or_else(|| self.child_error(key, "missing required field"))
    }

    pub fn f64(&self, key: &str) -> ConfigResult<f64> {
        let v = self.require(key)?;
        as_f64(v).ok_or_else(|| self.child_error(key, format!("expected a finite number, got {v}")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> ConfigResult<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.f64(key),
        }
    }

    pub fn positive(&self, key: &str) -> ConfigResult<f64> {
        let x = self.f64(key)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(self.child_error(key, format!("must be positive, got {x}")))
        }
    }

    pub fn positive_or(&self, key: &str, default: f64) -> ConfigResult<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.positive(key),
        }
    }

    pub fn u64(&self, key: &str) -> ConfigResult<u64> {
        let v = self.require(key)?;
        v.as_u64()
            .ok_or_else(|| self.child_error(key, format!("expected a nonnegative integer, got {v}")))
    }

    pub fn usize_in(&self, key: &str, lo: usize, hi: usize) -> ConfigResult<usize> {
        let x = self.u64(key)?;
        if (lo as u64..=hi as u64).contains(&x) {
            Ok(x as usize)
        } else {
            Err(self.child_error(key, format!("must lie in {lo}..={hi}, got {x}")))
        }
    }

    pub fn usize_or(&self, key: &str, default: usize, lo: usize, hi: usize) -> ConfigResult<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.usize_in(key, lo, hi),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> ConfigResult<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| self.child_error(key, "expected true or false")),
        }
    }

    pub fn str(&self, key: &str) -> ConfigResult<&'a str> {
        let v = self.require(key)?;
        v.as_str().ok_or_else(|| self.child_error(key, format!("expected a string, got {v}")))
    }

    pub fn str_or(&self, key: &str, default: &'a str) -> ConfigResult<&'a str> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.str(key),
        }
    }

    pub fn f64_list(&self, key: &str) -> ConfigResult<Vec<f64>> {
        let v = self.require(key)?;
        let arr = v
            .as_array()
            .ok_or_else(|| self.child_error(key, "expected an array of numbers"))?;
        numbers(arr, &join(self.path, key))
    }

    pub fn f64_list_or(&self, key: &str, default: Vec<f64>) -> ConfigResult<Vec<f64>> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.f64_list(key),
        }
    }

    pub fn usize_list(&self, key: &str) -> ConfigResult<Vec<usize>> {
        let v = self.require(key)?;
        let arr = v
            .as_array()
            .ok_or_else(|| self.child_error(key, "expected an array of integers"))?;
        arr.iter()
            .enumerate()
            .map(|(i, x)| {
                x.as_u64().map(|u| u as usize).ok_or_else(|| ConfigError {
                    path: format!("{}[{i}]", join(self.path, key)),
                    message: format!("expected a nonnegative integer, got {x}"),
                })
            })
            .collect()
    }
}

fn numbers(arr: &[Value], path: &str) -> ConfigResult<Vec<f64>> {
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            as_f64(x).ok_or_else(|| ConfigError {
                path: format!("{path}[{i}]"),
                message: format!("expected a finite number, got {x}"),
            })
        })
        .collect()
}

fn as_f64(v: &Value) -> Option<f64> {
    v.as_f64().filter(|x| x.is_finite())
}

/// Resolves a child node; the returned path string must outlive the node.
pub fn child_path(parent: &Node<'_>, key: &str) -> String {
    join(parent.path(), key)
}

macro_rules! with_child {
    ($parent:expr, $key:expr, |$node:ident| $body:expr) => {{
        let __path = child_path(&$parent, $key);
        let __value = $parent.require($key)?;
        let $node = Node { value: __value, path: &__path };
        $body
    }};
}

/// Parsed operator, noise and grid blocks plus the raw experiment tree.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: Value,
    pub seed: u64,
    pub n_modes: usize,
    pub pair: SpectralOperatorPair<f64>,
    pub noise: CylindricalNoiseSpec<f64>,
    pub steps: usize,
    pub levels: u32,
    pub y0: Vec<f64>,
    pub experiments: BTreeMap<String, Value>,
}

/// Upper bound on modes accepted from a config file.
pub const MAX_MODES: usize = 1 << 20;
/// Upper bound on time steps accepted from a config file.
pub const MAX_STEPS: usize = 1 << 24;

impl RunConfig {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let raw: Value = serde_json::from_str(text).map_err(|e| ConfigError {
            path: String::new(),
            message: format!("invalid JSON at line {}, column {}: {e}", e.line(), e.column()),
        })?;
        Self::from_value(raw)
    }

    pub fn from_value(raw: Value) -> ConfigResult<Self> {
        let root = Node::root(&raw);
        if !raw.is_object() {
            return Err(root.error("top level must be an object"));
        }
        for key in raw.as_object().unwrap().keys() {
            if !["seed", "operator", "noise", "grid", "experiment"].contains(&key.as_str()) {
                return Err(ConfigError {
                    path: key.clone(),
                    message: "unknown top-level field".into(),
                });
            }
        }
        let seed = match root.get("seed") {
            None => 0,
            Some(_) => root.u64("seed")?,
        };
        let (pair, n_modes) = with_child!(root, "operator", |op| parse_operator(&op)?);
        let noise = with_child!(root, "noise", |nz| parse_noise(&nz, n_modes)?);
        let (steps, levels) = match root.get("grid") {
            None => (100, 3),
            Some(_) => with_child!(root, "grid", |g| {
                let steps = g.usize_or("steps", 100, 1, MAX_STEPS)?;
                let levels = g.usize_or("levels", 3, 0, 20)? as u32;
                (steps, levels)
            }),
        };
        let y0 = match raw.get("operator").and_then(|o| o.get("y0")) {
            None => vec![0.0; n_modes],
            Some(_) => with_child!(root, "operator", |op| with_child!(op, "y0", |y| parse_rule(&y)?
                .generate(n_modes)
                .map_err(|e| y.error(e.to_string()))?)),
        };
        let experiments = match raw.get("experiment") {
            None => BTreeMap::new(),
            Some(Value::Object(m)) => m.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            Some(_) => return Err(ConfigError {
                path: "experiment".into(),
                message: "expected an object keyed by verifier name".into(),
            }),
        };
        Ok(Self {
            raw,
            seed,
            n_modes,
            pair,
            noise,
            steps,
            levels,
            y0,
            experiments,
        })
    }

    /// Compact, key-sorted echo of the config as read.
    pub fn echo(&self) -> String {
        serde_json::to_string(&self.raw).expect("JSON values always serialize")
    }
}

fn parse_operator(op: &Node<'_>) -> ConfigResult<(SpectralOperatorPair<f64>, usize)> {
    let n = op.usize_in("n_modes", 1, MAX_MODES)?;
    let horizon = op.positive("horizon")?;
    let lambda = with_child!(op, "lambda", |l| parse_rule(&l)?);
    let b = match op.get("b") {
        None => SequenceRule::Constant(1.0),
        Some(_) => with_child!(op, "b", |b| parse_rule(&b)?),
    };
    let lambdas = lambda.generate(n).map_err(|e| op.child_error("lambda", e.to_string()))?;
    let bs = b.generate(n).map_err(|e| op.child_error("b", e.to_string()))?;
    let pair = SpectralOperatorPair::new(lambdas, bs, horizon).map_err(|e| op.error(e.to_string()))?;
    Ok((pair, n))
}

/// Number → constant, array → explicit list, or a `{"rule": ...}` object.
pub fn parse_rule(node: &Node<'_>) -> ConfigResult<SequenceRule<f64>> {
    match node.value() {
        Value::Number(_) => as_f64(node.value())
            .map(SequenceRule::Constant)
            .ok_or_else(|| node.error("expected a finite number")),
        Value::Array(arr) => numbers(arr, node.path()).map(SequenceRule::List),
        Value::Object(_) => match node.str("rule")? {
            "constant" => Ok(SequenceRule::Constant(node.f64("value")?)),
            "power" => Ok(SequenceRule::Power {
                coef: node.f64_or("coef", 1.0)?,
                exponent: node.f64("exponent")?,
            }),
            "log" => Ok(SequenceRule::Log {
                coef: node.f64_or("coef", 1.0)?,
            }),
            "list" => Ok(SequenceRule::List(node.f64_list("values")?)),
            other => Err(node.child_error(
                "rule",
                format!("unknown rule `{other}` (expected constant, power, log or list)"),
            )),
        },
        other => Err(node.error(format!("expected a number, array or rule object, got {other}"))),
    }
}

fn parse_noise(nz: &Node<'_>, n: usize) -> ConfigResult<CylindricalNoiseSpec<f64>> {
    let spec = match nz.str("kind")? {
        "canonical" => {
            let alpha = nz.f64("alpha")?;
            CylindricalNoiseSpec::canonical(alpha, n).map_err(|e| nz.child_error("alpha", e.to_string()))?
        }
        "series" => {
            let laws = if nz.get("laws").is_some() {
                let arr = nz
                    .require("laws")?
                    .as_array()
                    .ok_or_else(|| nz.child_error("laws", "expected an array of law objects"))?;
                if arr.len() < n {
                    return Err(nz.child_error("laws", format!("need {n} entries, got {}", arr.len())));
                }
                let mut out = Vec::with_capacity(n);
                for (i, v) in arr.iter().take(n).enumerate() {
                    let path = format!("{}[{i}]", child_path(nz, "laws"));
                    let node = Node { value: v, path: &path };
                    out.extend(parse_law(&node, 1)?);
                }
                out
            } else {
                with_child!(nz, "law", |l| parse_law(&l, n)?)
            };
            CylindricalNoiseSpec::series(laws, n).map_err(|e| nz.error(e.to_string()))?
        }
        other => return Err(nz.child_error("kind", format!("unknown noise kind `{other}` (expected series or canonical)"))),
    };
    match nz.get("drift") {
        None => Ok(spec),
        Some(_) => {
            let drift = with_child!(nz, "drift", |d| {
                let rule = parse_rule(&d)?;
                let len = if let SequenceRule::List(v) = &rule { v.len().min(n) } else { n };
                rule.generate(len).map_err(|e| d.error(e.to_string()))?
            });
            spec.with_drift(drift).map_err(|e| nz.child_error("drift", e.to_string()))
        }
    }
}

/// One law object expanded over `n` modes; scale-like fields may be rules.
fn parse_law(node: &Node<'_>, n: usize) -> ConfigResult<Vec<ComponentLaw<f64>>> {
    let per_mode = |key: &str| -> ConfigResult<Vec<f64>> {
        with_child!(node, key, |x| parse_rule(&x)?.generate(n).map_err(|e| x.error(e.to_string())))
    };
    let law_err = |e: crate::error::Error| node.error(e.to_string());
    match node.str("type")? {
        "stable" => {
            let alpha = node.f64("alpha")?;
            let scales = per_mode("scale")?;
            scales.into_iter().map(|s| ComponentLaw::stable(alpha, s).map_err(law_err)).collect()
        }
        "gaussian" => per_mode("variance")?
            .into_iter()
            .map(|v| ComponentLaw::gaussian(v).map_err(law_err))
            .collect(),
        "compound_poisson" => {
            let rates = per_mode("rate")?;
            let stds = per_mode("jump_std")?;
            rates
                .into_iter()
                .zip(stds)
                .map(|(r, s)| ComponentLaw::compound_poisson(r, s).map_err(law_err))
                .collect()
        }
        other => Err(node.child_error(
            "type",
            format!("unknown law `{other}` (expected stable, gaussian or compound_poisson)"),
        )),
    }
}

/// Looks up `experiment.<name>` and its path, defaulting to an empty object.
pub fn experiment(config: &RunConfig, name: &str) -> (Value, String) {
    let v = config
        .experiments
        .get(name)
        .cloned()
        .unwrap_or_else(|| Value::Object(Default::default()));
    (v, format!("experiment.{name}"))
}
